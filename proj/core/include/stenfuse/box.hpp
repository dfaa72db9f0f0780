#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>

#include "stenfuse/errors.hpp"

namespace stenfuse {

/// A point of the integer lattice Z^D. Used both for locations and offsets.
template <int D>
struct Point {
  static_assert(D >= 1);
  std::array<int, D> coords{};

  constexpr Point() = default;
  constexpr explicit Point(const std::array<int, D>& c) : coords(c) {}
  template <typename... Ts>
    requires(sizeof...(Ts) == D && (std::is_integral_v<Ts> && ...))
  constexpr Point(Ts... c) : coords{static_cast<int>(c)...} {}

  static constexpr Point ones(int v = 1) {
    Point p;
    p.coords.fill(v);
    return p;
  }
  static constexpr Point zeros() { return Point{}; }

  constexpr int& operator[](int d) { return coords[static_cast<std::size_t>(d)]; }
  constexpr int operator[](int d) const { return coords[static_cast<std::size_t>(d)]; }

  constexpr Point operator+(const Point& o) const {
    Point r;
    for (int d = 0; d < D; ++d) r[d] = (*this)[d] + o[d];
    return r;
  }
  constexpr Point operator-(const Point& o) const {
    Point r;
    for (int d = 0; d < D; ++d) r[d] = (*this)[d] - o[d];
    return r;
  }
  constexpr Point operator-() const { return Point{} - *this; }

  constexpr bool operator==(const Point&) const = default;

  // Highest dimension is most significant, so sorting offsets reproduces
  // ordinal (dimension-0-fastest) order.
  constexpr bool operator<(const Point& o) const {
    for (int d = D - 1; d >= 0; --d) {
      if ((*this)[d] != o[d]) return (*this)[d] < o[d];
    }
    return false;
  }
};

template <int D>
std::ostream& operator<<(std::ostream& os, const Point<D>& p) {
  os << '(';
  for (int d = 0; d < D; ++d) os << (d ? "," : "") << p[d];
  return os << ')';
}

template <int D>
std::string to_string(const Point<D>& p) {
  std::string s = "(";
  for (int d = 0; d < D; ++d) {
    if (d) s += ',';
    s += std::to_string(p[d]);
  }
  return s + ')';
}

/// Rectangular index set [lo, hi], inclusive on both corners. Any lo_d > hi_d
/// makes the box empty; all empty boxes compare equal.
template <int D>
class Box {
 public:
  constexpr Box() : lo_(Point<D>::zeros()), hi_(Point<D>::ones(-1)) {}
  constexpr Box(const Point<D>& lo, const Point<D>& hi) : lo_(lo), hi_(hi) {}

  /// The box [0, n-1]^D.
  static constexpr Box cube(int n) { return Box(Point<D>::zeros(), Point<D>::ones(n - 1)); }

  constexpr const Point<D>& lo() const { return lo_; }
  constexpr const Point<D>& hi() const { return hi_; }

  constexpr bool empty() const {
    for (int d = 0; d < D; ++d) {
      if (lo_[d] > hi_[d]) return true;
    }
    return false;
  }

  constexpr int extent(int d) const { return empty() ? 0 : hi_[d] - lo_[d] + 1; }

  constexpr std::size_t size() const {
    if (empty()) return 0;
    std::size_t s = 1;
    for (int d = 0; d < D; ++d) s *= static_cast<std::size_t>(extent(d));
    return s;
  }

  constexpr std::size_t stride(int d) const {
    std::size_t s = 1;
    for (int k = 0; k < d; ++k) s *= static_cast<std::size_t>(extent(k));
    return s;
  }

  constexpr bool contains(const Point<D>& p) const {
    for (int d = 0; d < D; ++d) {
      if (p[d] < lo_[d] || p[d] > hi_[d]) return false;
    }
    return true;
  }

  constexpr bool contains(const Box& b) const {
    return b.empty() || (contains(b.lo_) && contains(b.hi_));
  }

  constexpr Box grow(int r) const { return Box(lo_ - Point<D>::ones(r), hi_ + Point<D>::ones(r)); }

  constexpr Box shift(const Point<D>& by) const { return Box(lo_ + by, hi_ + by); }

  constexpr Box intersect(const Box& o) const {
    Point<D> lo, hi;
    for (int d = 0; d < D; ++d) {
      lo[d] = std::max(lo_[d], o.lo_[d]);
      hi[d] = std::min(hi_[d], o.hi_[d]);
    }
    return Box(lo, hi);
  }

  /// Linear index of p, dimension 0 fastest.
  std::size_t ordinal(const Point<D>& p) const {
    if (!contains(p)) {
      throw DomainError("point " + to_string(p) + " outside box " + str());
    }
    return unchecked_ordinal(p);
  }

  constexpr std::size_t unchecked_ordinal(const Point<D>& p) const {
    std::size_t k = 0;
    std::size_t s = 1;
    for (int d = 0; d < D; ++d) {
      k += static_cast<std::size_t>(p[d] - lo_[d]) * s;
      s *= static_cast<std::size_t>(hi_[d] - lo_[d] + 1);
    }
    return k;
  }

  /// Inverse of ordinal().
  Point<D> point_at(std::size_t k) const {
    if (k >= size()) {
      throw DomainError("ordinal " + std::to_string(k) + " outside box " + str());
    }
    Point<D> p;
    for (int d = 0; d < D; ++d) {
      const auto e = static_cast<std::size_t>(extent(d));
      p[d] = lo_[d] + static_cast<int>(k % e);
      k /= e;
    }
    return p;
  }

  constexpr bool operator==(const Box& o) const {
    if (empty() || o.empty()) return empty() && o.empty();
    return lo_ == o.lo_ && hi_ == o.hi_;
  }

  std::string str() const {
    if (empty()) return "[empty]";
    return "[" + to_string(lo_) + "," + to_string(hi_) + "]";
  }

  /// Visits every point in ordinal order.
  template <typename F>
  void for_each(F&& f) const {
    const std::size_t n = size();
    for (std::size_t k = 0; k < n; ++k) f(point_at(k));
  }

 private:
  Point<D> lo_;
  Point<D> hi_;
};

template <int D>
std::ostream& operator<<(std::ostream& os, const Box<D>& b) {
  return os << b.str();
}

using Point2 = Point<2>;
using Box2 = Box<2>;

}  // namespace stenfuse
