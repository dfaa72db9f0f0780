#pragma once

#include <array>
#include <utility>
#include <vector>

#include "stenfuse/box_data.hpp"

namespace stenfuse {

/// A linear map out(i) = sum_j coeff_j * src(i + j) over integer offsets j.
///
/// Taps are kept sorted in ordinal order of their offsets (dimension 1 most
/// significant) and applied in that order, so every backend that walks the
/// taps the same way produces bit-identical sums. Coefficients are undivided;
/// any 1/h^2 scaling is the caller's business.
class Stencil {
 public:
  struct Tap {
    Point2 offset;
    double coeff;
    bool operator==(const Tap&) const = default;
  };

  /// Duplicate offsets are summed; zero coefficients are dropped. Throws
  /// ShapeError if nothing is left.
  explicit Stencil(const std::vector<Tap>& taps);

  static Stencil identity();
  /// The undivided 5-point Laplacian.
  static Stencil laplacian();

  const std::vector<Tap>& taps() const { return taps_; }
  const Box2& span() const { return span_; }
  /// Largest |offset component|; the ghost width the stencil needs.
  int radius() const;

  /// The 3x3 coefficient block flattened row-major (row = offset[1]).
  /// Throws ShapeError when radius() > 1.
  std::array<double, 9> filter3x3() const;

  bool operator==(const Stencil&) const = default;

 private:
  std::vector<Tap> taps_;
  Box2 span_;
};

/// out(i) = sum_j coeff_j * src(i + j) for every i in dest.
/// Throws DomainError naming the first (i, j) whose read leaves src.box().
BoxData2 stencil_apply(const Stencil& s, const BoxData2& src, const Box2& dest);

}  // namespace stenfuse
