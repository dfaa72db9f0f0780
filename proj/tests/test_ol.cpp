#include <cmath>

#include "doctest.h"
#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace stenfuse;
using namespace stenfuse::testing;
namespace ol = stenfuse::ol;

namespace {

std::vector<double> concat(std::initializer_list<std::vector<double>> parts) {
  std::vector<double> v;
  for (const auto& p : parts) v.insert(v.end(), p.begin(), p.end());
  return v;
}

}  // namespace

TEST_SUITE("ol") {
  TEST_CASE("shapes") {
    CHECK(ol::identity(9).shape() == ol::Shape{9, 9});
    CHECK(ol::build_laplace(4, 6, ol::laplacian_filter()).shape() == ol::Shape{16, 36});
    try {
      (void)ol::compose(ol::identity(4), ol::identity(5)).shape();
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("Compose") != std::string::npos);
      CHECK(msg.find("(4 x 4)") != std::string::npos);
      CHECK(msg.find("(5 x 5)") != std::string::npos);
    }
    CHECK_THROWS_AS((void)ol::tensor(ol::identity(2), ol::identity(2)).shape(), ShapeError);
    CHECK_THROWS_AS((void)ol::vstack(ol::identity(2), ol::row_vec({1, 2, 3})).shape(), ShapeError);
  }

  TEST_CASE("Laplace with m^2 filter instances shape-checks but cannot be materialized") {
    // Scatter 16x36 over 36 instances: the instance count read literally as m^2.
    const auto f = ol::filt(ol::laplacian_filter(), 36, 6, ol::IndexExpr::box_interior(4, 6, 7), "i");
    const auto e = ol::compose(ol::scatter(ol::IndexExpr::identity(), 16, 36), ol::iter_vstack(f, 36, "i"));
    CHECK(e.shape() == ol::Shape{16, 36});
    CHECK_THROWS_AS(ol::to_dense(e), DomainError);
  }

  TEST_CASE("eval basics") {
    Gen g(1);
    const auto x = g.vec(7);
    CHECK(ol::eval(ol::identity(7), x) == x);
    CHECK_THROWS_AS(ol::eval(ol::identity(6), x), ShapeError);
    const auto y = ol::eval(ol::scatter(ol::IndexExpr::identity().plus(2), 5, 2), std::vector<double>{7, 8});
    CHECK(y == std::vector<double>{0, 0, 7, 8, 0});
    CHECK(ol::eval(ol::max_reduce(3), std::vector<double>{-1, 4, 2}) == std::vector<double>{4});
    CHECK(ol::eval(ol::pointwise(ol::PointwiseFn::Abs, 1, 2), std::vector<double>{-1, 2}) == std::vector<double>{1, 2});
  }

  TEST_CASE("dense materialization") {
    const auto i3 = ol::to_dense(ol::identity(3));
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) CHECK(i3(r, c) == (r == c ? 1.0 : 0.0));

    const auto d = ol::to_dense(ol::direct_sum(ol::identity(2), ol::row_vec({1, 2, 3})));
    REQUIRE(d.rows == 3);
    REQUIRE(d.cols == 5);
    const std::vector<double> want = {1, 0, 0, 0, 0,  //
                                      0, 1, 0, 0, 0,  //
                                      0, 0, 1, 2, 3};
    CHECK(d.data == want);

    CHECK_FALSE(ol::is_linear(ol::build_maxnorm(2, 0.5)));
    CHECK(ol::is_linear(ol::build_jacobi(2, 0.25, 0.1)));
    CHECK_THROWS_AS(ol::to_dense(ol::build_maxnorm(2, 0.5)), NonlinearError);
  }

  TEST_CASE("Laplace dense form equals the stencil matrix") {
    for (std::size_t n : {1, 2, 4, 8}) {
      const auto d = ol::to_dense(ol::build_laplace(n, n + 2, ol::laplacian_filter()));
      CHECK(d.rows == n * n);
      CHECK(d.cols == (n + 2) * (n + 2));
      CHECK(d.data == laplace_matrix(n));
    }
    CHECK_THROWS_AS(ol::build_laplace(4, 7, ol::laplacian_filter()), ShapeError);
  }

  TEST_CASE("Laplace with the identity filter picks the centre") {
    const auto d = ol::to_dense(ol::build_laplace(1, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0}));
    REQUIRE(d.rows == 1);
    REQUIRE(d.cols == 9);
    for (std::size_t c = 0; c < 9; ++c) CHECK(d(0, c) == (c == 4 ? 1.0 : 0.0));
  }

  TEST_CASE("Laplace at n=64 reads b+1, b+66, b+67, b+68, b+133") {
    const auto e = ol::build_laplace(64, 66, ol::laplacian_filter());
    const auto* outer = e.as<ol::ComposeNode>();
    REQUIRE(outer);
    const auto* stack = outer->inner.as<ol::IterVStackNode>();
    REQUIRE(stack);
    const auto* f = stack->body.as<ol::FiltNode>();
    REQUIRE(f);
    for (long i : {0L, 1L, 63L, 64L, 2049L, 4095L}) {
      const long b = 66 * (i / 64) + (i % 64);
      std::vector<long> reads;
      for (long t = 0; t < 9; ++t) {
        if (f->taps[static_cast<std::size_t>(t)] != 0.0) reads.push_back(f->center(i) + (t / 3 - 1) * 66 + (t % 3 - 1));
      }
      CHECK(reads == std::vector<long>{b + 1, b + 66, b + 67, b + 68, b + 133});
    }
    // Random input: no other column contributes.
    Gen g(64);
    const auto x = g.vec(66 * 66);
    const auto y = ol::eval(e, x);
    for (std::size_t i = 0; i < 4096; ++i) {
      const std::size_t b = 66 * (i / 64) + (i % 64);
      const double want = x[b + 1] + x[b + 66] - 4.0 * x[b + 67] + x[b + 68] + x[b + 133];
      CHECK(std::fabs(y[i] - want) <= 1e-12 * 8);
    }
  }

  TEST_CASE("Jacobi") {
    Gen g(2);
    const auto phi = g.vec(4), lap = g.vec(4), rho = g.vec(4);
    const auto x = concat({phi, lap, rho});
    CHECK(ol::build_jacobi(2, 0.25, 0.01).shape() == ol::Shape{4, 12});
    const auto y = ol::eval(ol::build_jacobi(2, 0.25, 0.01), x);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(y[i] == doctest::Approx(phi[i] + 0.25 * lap[i] - 0.01 * rho[i]).epsilon(1e-14));
      // Same grouping as the fused kernel: (s20 + w*s21) - lambda*s22.
      CHECK(y[i] == (phi[i] + 0.25 * lap[i]) - 0.01 * rho[i]);
    }
    CHECK(ol::eval(ol::build_jacobi(2, 0.0, 0.0), x) == phi);

    const auto d = ol::to_dense(ol::build_jacobi(2, 0.25, 0.01));
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 12; ++c) {
        const double want = c % 4 != r ? 0.0 : (c < 4 ? 1.0 : c < 8 ? 0.25 : -0.01);
        CHECK(d(r, c) == want);
      }
    }
  }

  TEST_CASE("max norm") {
    CHECK(ol::build_maxnorm(3, 0.1).shape() == ol::Shape{1, 27});
    CHECK(ol::eval(ol::build_maxnorm(1, 1.0), std::vector<double>{5, 3, 10}) == std::vector<double>{7});

    Gen g(3);
    const double h = 0.5;  // exact 1/h^2
    const auto rho = g.vec(4);
    std::vector<double> lap(4);
    for (std::size_t i = 0; i < 4; ++i) lap[i] = h * h * rho[i];
    CHECK(ol::eval(ol::build_maxnorm(2, h), concat({g.vec(4), lap, rho}))[0] == 0.0);

    const auto phi = g.vec(4), l2 = g.vec(4), r2 = g.vec(4);
    std::vector<double> nl(4), nr(4);
    for (std::size_t i = 0; i < 4; ++i) nl[i] = -l2[i], nr[i] = -r2[i];
    const double a = ol::eval(ol::build_maxnorm(2, 0.3), concat({phi, l2, r2}))[0];
    const double b = ol::eval(ol::build_maxnorm(2, 0.3), concat({phi, nl, nr}))[0];
    CHECK(a == b);
    double want = 0.0;
    for (std::size_t i = 0; i < 4; ++i) want = std::max(want, std::fabs(l2[i] / 0.09 - r2[i]));
    CHECK(a == doctest::Approx(want).epsilon(1e-13));
  }

  TEST_CASE("Poisson pipeline") {
    CHECK(ol::build_poisson(4, 6, 0.25, 0.01, 0.25).shape() == ol::Shape{17, 52});
    CHECK_THROWS_AS(ol::build_poisson(4, 5, 0.25, 0.01, 0.25), ShapeError);

    Gen g(4);
    const auto x = g.vec(36 + 16);
    const auto y0 = ol::eval(ol::build_poisson(4, 6, 0.0, 0.0, 0.25), x);
    for (std::size_t i = 0; i < 16; ++i) CHECK(y0[i] == x[6 * (i / 4) + (i % 4) + 7]);

    for (int trial = 0; trial < 20; ++trial) {
      const auto xt = g.vec(36 + 16);
      const double w = g.real(0, 1), lambda = g.real(0, 0.1), h = g.real(0.05, 1);
      const auto y = ol::eval(ol::build_poisson(4, 6, w, lambda, h), xt);
      const auto want = hand_step(4, xt, w, lambda, h);
      CHECK(max_rel_diff(std::span(y).first(16), want.phi) <= 1e-12);
      CHECK(y[16] == doctest::Approx(want.residual).epsilon(1e-12));
    }
  }

  TEST_CASE("Poisson at n=64 rounds like the generated kernel") {
    Gen g(5);
    const double w = 0.25, lambda = 1.0 / 65536.0, h = 1.0 / 256;
    const auto x = g.vec(66 * 66 + 64 * 64);
    const auto y = ol::eval(ol::build_poisson(64, 66, w, lambda, h), x);
    const double* X = x.data();
    const double* rhs = x.data() + 66 * 66;
    double retval = 0.0;
    for (int i1 = 0; i1 <= 4095; ++i1) {
      const int b15 = (66 * (i1 / 64)) + (i1 % 64);
      const double s20 = X[b15 + 67];
      const double s21 = ((((X[b15 + 1] + X[b15 + 66]) - (4.0 * s20)) + X[b15 + 68]) + X[b15 + 133]);
      const double s22 = rhs[i1];
      CHECK(y[static_cast<std::size_t>(i1)] == ((s20 + (w * s21)) - (lambda * s22)));
      const double r = std::fabs(((1.0 / (h * h)) * s21) - s22);
      retval = retval >= r ? retval : r;
    }
    CHECK(y[4096] == retval);
  }

  TEST_CASE("pretty prints one node per line") {
    const std::string s = ol::pretty(ol::build_jacobi(2, 0.25, 0.5));
    CHECK(s == "Tensor  : (4 x 12)\n  RowVec (1, 0.25, -0.5)  : (1 x 3)\n  Identity 4  : (4 x 4)\n");
    const std::string p = ol::pretty(ol::build_poisson(2, 4, 0.25, 0.01, 0.5));
    CHECK(p.rfind("Compose  : (5 x 20)\n", 0) == 0);
    CHECK(p.find("    Filt [0,1,0,1,-4,1,0,1,0] at 4*(i div 2) + (i mod 2) + 5 stride 4") != std::string::npos);
  }

  TEST_CASE("property: eval equals dense product") {
    const auto r = prop_ol_dense_eval(31, 200);
    INFO(r.failure);
    CHECK(r.pass);
  }
  TEST_CASE("property: shape algebra") {
    const auto r = prop_ol_shape_algebra(32, 200);
    INFO(r.failure);
    CHECK(r.pass);
  }
}
