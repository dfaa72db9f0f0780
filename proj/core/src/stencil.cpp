#include "stenfuse/stencil.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

namespace stenfuse {

Stencil::Stencil(const std::vector<Tap>& taps) {
  std::map<Point2, double> merged;
  for (const auto& t : taps) merged[t.offset] += t.coeff;
  for (const auto& [offset, coeff] : merged) {
    if (coeff != 0.0) taps_.push_back({offset, coeff});
  }
  if (taps_.empty()) throw ShapeError("stencil has no nonzero taps");
  Point2 lo = taps_.front().offset;
  Point2 hi = lo;
  for (const auto& t : taps_) {
    for (int d = 0; d < 2; ++d) {
      lo[d] = std::min(lo[d], t.offset[d]);
      hi[d] = std::max(hi[d], t.offset[d]);
    }
  }
  span_ = Box2(lo, hi);
}

Stencil Stencil::identity() { return Stencil({{Point2{0, 0}, 1.0}}); }

Stencil Stencil::laplacian() {
  return Stencil({{Point2{0, -1}, 1.0},
                  {Point2{-1, 0}, 1.0},
                  {Point2{0, 0}, -4.0},
                  {Point2{1, 0}, 1.0},
                  {Point2{0, 1}, 1.0}});
}

int Stencil::radius() const {
  int r = 0;
  for (const auto& t : taps_) r = std::max({r, std::abs(t.offset[0]), std::abs(t.offset[1])});
  return r;
}

std::array<double, 9> Stencil::filter3x3() const {
  if (radius() > 1) {
    throw ShapeError("stencil radius " + std::to_string(radius()) + " does not fit a 3x3 filter");
  }
  std::array<double, 9> f{};
  for (const auto& t : taps_) f[static_cast<std::size_t>((t.offset[1] + 1) * 3 + (t.offset[0] + 1))] = t.coeff;
  return f;
}

BoxData2 stencil_apply(const Stencil& s, const BoxData2& src, const Box2& dest) {
  BoxData2 out(dest);
  if (dest.empty()) return out;

  const Box2& sb = src.box();
  const bool fits = sb.contains(dest.shift(s.span().lo())) && sb.contains(dest.shift(s.span().hi()));
  if (!fits) {
    for (std::size_t k = 0; k < dest.size(); ++k) {
      const Point2 i = dest.point_at(k);
      for (const auto& t : s.taps()) {
        if (!sb.contains(i + t.offset)) {
          throw DomainError("stencil_apply: point " + to_string(i) + " with offset " +
                            to_string(t.offset) + " reads outside source box " + sb.str());
        }
      }
    }
  }

  // Offsets become fixed ordinal deltas in the source; rows are contiguous.
  std::vector<std::ptrdiff_t> delta;
  std::vector<double> coeff;
  const auto stride = static_cast<std::ptrdiff_t>(sb.stride(1));
  for (const auto& t : s.taps()) {
    delta.push_back(t.offset[0] + stride * t.offset[1]);
    coeff.push_back(t.coeff);
  }
  const std::size_t ntaps = delta.size();
  const double* in = src.data();
  double* o = out.data();
  const int nx = dest.extent(0);
  for (int y = dest.lo()[1]; y <= dest.hi()[1]; ++y) {
    const auto row = static_cast<std::ptrdiff_t>(sb.unchecked_ordinal(Point2{dest.lo()[0], y}));
    for (int x = 0; x < nx; ++x) {
      const double* c = in + row + x;
      double acc = coeff[0] * c[delta[0]];
      for (std::size_t t = 1; t < ntaps; ++t) acc += coeff[t] * c[delta[t]];
      *o++ = acc;
    }
  }
  return out;
}

}  // namespace stenfuse
