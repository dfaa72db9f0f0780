#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "stenfuse/layout.hpp"
#include "stenfuse/ol.hpp"

namespace stenfuse::testing {

/// Seeded source of random test inputs.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  std::vector<double> vec(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = real(lo, hi);
    return v;
  }

  Point2 point(int range) { return {integer(-range, range), integer(-range, range)}; }

  /// Non-empty box with edges in [1, max_edge] and lower corner in [-range, range].
  Box2 box(int max_edge, int range = 5) {
    const Point2 lo = point(range);
    return Box2(lo, lo + Point2(integer(0, max_edge - 1), integer(0, max_edge - 1)));
  }

  /// Random interior values, ghosts made consistent by an exchange.
  Patches ghosted(const GridLayout& layout) {
    Patches p = make_ghosted(layout);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const Box2 in = layout.interior(k);
      in.for_each([&](const Point2& q) { p[k](q) = real(); });
    }
    exchange_ghosts(layout, p);
    return p;
  }

  Patches interior(const GridLayout& layout) {
    Patches p = make_interior(layout);
    for (auto& b : p) {
      for (auto& v : b.values()) v = real();
    }
    return p;
  }

  /// Random interior field with its mean subtracted.
  Patches zero_mean(const GridLayout& layout);

  /// Random well-formed linear OL tree with exactly `cols` columns. Row
  /// counts stay at or below `max_rows`.
  ol::Expr linear_expr(std::size_t cols, int depth, std::size_t max_rows = 24);

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace stenfuse::testing
