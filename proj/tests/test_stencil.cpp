#include <cmath>

#include "doctest.h"
#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace stenfuse;
using namespace stenfuse::testing;

TEST_SUITE("stencil") {
  TEST_CASE("laplacian taps") {
    const Stencil s = Stencil::laplacian();
    REQUIRE(s.taps().size() == 5);
    double sum = 0.0;
    for (const auto& t : s.taps()) sum += t.coeff;
    CHECK(sum == 0.0);
    CHECK(s.span() == Box2(Point2(-1, -1), Point2(1, 1)));
    CHECK(s.radius() == 1);
    CHECK(s.taps()[0] == Stencil::Tap{Point2(0, -1), 1.0});
    CHECK(s.taps()[2] == Stencil::Tap{Point2(0, 0), -4.0});
    CHECK(s.filter3x3() == std::array<double, 9>{0, 1, 0, 1, -4, 1, 0, 1, 0});
  }

  TEST_CASE("construction merges and drops") {
    const Stencil s({{Point2(1, 0), 2.0}, {Point2(1, 0), -2.0}, {Point2(0, 0), 3.0}});
    REQUIRE(s.taps().size() == 1);
    CHECK(s.span() == Box2(Point2(0, 0), Point2(0, 0)));
    CHECK_THROWS_AS(Stencil({{Point2(0, 0), 0.0}}), ShapeError);
    CHECK_THROWS_AS(Stencil({{Point2(2, 0), 1.0}}).filter3x3(), ShapeError);
  }

  TEST_CASE("identity copies") {
    const Box2 src(Point2(-2, -1), Point2(4, 5));
    Gen g(3);
    const BoxData2 x(src, g.vec(src.size()));
    const Box2 dest(Point2(0, 0), Point2(2, 3));
    const BoxData2 y = stencil_apply(Stencil::identity(), x, dest);
    CHECK(y.box() == dest);
    dest.for_each([&](const Point2& p) { CHECK(y(p) == x(p)); });
  }

  TEST_CASE("laplacian of a quadratic is 4") {
    const Box2 src = Box2::cube(8).grow(1);
    BoxData2 x(src);
    src.for_each([&](const Point2& p) { x(p) = p[0] * p[0] + p[1] * p[1]; });
    const BoxData2 y = stencil_apply(Stencil::laplacian(), x, Box2::cube(8));
    for (double v : y.values()) CHECK(v == 4.0);
  }

  TEST_CASE("laplacian on 6x6 equals the 16x36 matrix") {
    Gen g(5);
    const Box2 src = Box2::cube(4).grow(1);
    const auto x = g.vec(36);
    const auto m = laplace_matrix(4);
    const auto want = matvec(m, 16, x);
    const BoxData2 y = stencil_apply(Stencil::laplacian(), BoxData2(src, x), Box2::cube(4));
    CHECK(max_rel_diff(y.values(), want) <= 1e-12);
  }

  TEST_CASE("out-of-range application names the point and offset") {
    const BoxData2 x(Box2::cube(4));
    try {
      (void)stencil_apply(Stencil::laplacian(), x, Box2::cube(4));
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("(0,0)") != std::string::npos);
      CHECK(msg.find("(0,-1)") != std::string::npos);
    }
    CHECK_NOTHROW((void)stencil_apply(Stencil::laplacian(), x, Box2(Point2(1, 1), Point2(2, 2))));
    CHECK(stencil_apply(Stencil::laplacian(), x, Box2()).size() == 0);
  }

  TEST_CASE("exhaustive small boxes against the matrix oracle") {
    Gen g(9);
    for (int ex = 1; ex <= 8; ++ex) {
      for (int ey = 1; ey <= 8; ++ey) {
        const Box2 dest(Point2(0, 0), Point2(ex - 1, ey - 1));
        const Box2 src = dest.grow(1);
        const auto x = g.vec(src.size());
        const auto m = stencil_matrix({{{0, -1}, 1.0}, {{-1, 0}, 1.0}, {{0, 0}, -4.0}, {{1, 0}, 1.0}, {{0, 1}, 1.0}},
                                      src, dest);
        const BoxData2 y = stencil_apply(Stencil::laplacian(), BoxData2(src, x), dest);
        CHECK(max_rel_diff(y.values(), matvec(m, dest.size(), x)) <= 1e-12);
      }
    }
  }

  TEST_CASE("property: random stencils against the matrix oracle") {
    const auto r = prop_stencil_dense(21, 200);
    INFO(r.failure);
    CHECK(r.pass);
  }
  TEST_CASE("property: linearity") {
    const auto r = prop_stencil_linearity(22, 200);
    INFO(r.failure);
    CHECK(r.pass);
  }
  TEST_CASE("property: translation equivariance") {
    const auto r = prop_stencil_translation(23, 200);
    INFO(r.failure);
    CHECK(r.pass);
  }
}
