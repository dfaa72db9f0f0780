#pragma once

#include <functional>
#include <vector>

#include "stenfuse/box_data.hpp"

namespace stenfuse {

/// Block decomposition of the periodic unit square into nb x nb boxes of
/// n x n interior points, each allocated with a ghost layer of width g.
struct GridLayout {
  int n = 64;
  int nb = 1;
  int g = 1;

  GridLayout() = default;
  GridLayout(int n_, int nb_, int g_ = 1);

  /// Allocated box edge including ghosts.
  int m() const { return n + 2 * g; }
  /// Global points per dimension.
  int extent() const { return n * nb; }
  double h() const { return 1.0 / static_cast<double>(n * nb); }
  std::size_t box_count() const { return static_cast<std::size_t>(nb) * static_cast<std::size_t>(nb); }

  /// Interior box of patch (bx, by) in global coordinates.
  Box2 interior(int bx, int by) const;
  /// Interior of patch k, k = bx + nb * by.
  Box2 interior(std::size_t k) const;
  Box2 ghosted(std::size_t k) const { return interior(k).grow(g); }

  /// Periodic wrap of a global point into [0, n*nb)^2.
  Point2 wrap(const Point2& p) const;
  /// Index of the patch whose interior owns the (already wrapped) point.
  std::size_t owner(const Point2& wrapped) const;

  bool operator==(const GridLayout&) const = default;
};

/// One BoxData per box, ordered bx-fastest.
using Patches = std::vector<BoxData2>;

/// Ghosted patches, zero-filled.
Patches make_ghosted(const GridLayout& layout, double fill = 0.0);
/// Interior-only patches, zero-filled.
Patches make_interior(const GridLayout& layout, double fill = 0.0);

/// Fills every point (interior and ghost) from a function of the periodic
/// global position, where f receives wrapped global indices.
void fill_periodic(const GridLayout& layout, Patches& patches,
                   const std::function<double(const Point2&)>& f);

/// Copies owner interiors into every ghost cell, wrapping periodically.
/// Interior values are left untouched.
void exchange_ghosts(const GridLayout& layout, Patches& patches);

/// Throws ShapeError unless patches is nb*nb boxes of the expected extents.
void check_ghosted(const GridLayout& layout, const Patches& patches, const char* what);
void check_interior(const GridLayout& layout, const Patches& patches, const char* what);

}  // namespace stenfuse
