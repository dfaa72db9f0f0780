#include "stenfuse/layout.hpp"

#include <string>

namespace stenfuse {

namespace {

int wrap_index(int i, int period) {
  const int r = i % period;
  return r < 0 ? r + period : r;
}

}  // namespace

GridLayout::GridLayout(int n_, int nb_, int g_) : n(n_), nb(nb_), g(g_) {
  if (n < 1 || nb < 1 || g < 1) {
    throw ShapeError("grid layout needs n >= 1, nb >= 1, g >= 1 (got n=" + std::to_string(n) +
                     ", nb=" + std::to_string(nb) + ", g=" + std::to_string(g) + ")");
  }
}

Box2 GridLayout::interior(int bx, int by) const {
  const Point2 lo{bx * n, by * n};
  return Box2(lo, lo + Point2::ones(n - 1));
}

Box2 GridLayout::interior(std::size_t k) const {
  const auto b = static_cast<std::size_t>(nb);
  return interior(static_cast<int>(k % b), static_cast<int>(k / b));
}

Point2 GridLayout::wrap(const Point2& p) const {
  return Point2{wrap_index(p[0], extent()), wrap_index(p[1], extent())};
}

std::size_t GridLayout::owner(const Point2& wrapped) const {
  return static_cast<std::size_t>(wrapped[0] / n) +
         static_cast<std::size_t>(nb) * static_cast<std::size_t>(wrapped[1] / n);
}

Patches make_ghosted(const GridLayout& layout, double fill) {
  Patches out;
  out.reserve(layout.box_count());
  for (std::size_t k = 0; k < layout.box_count(); ++k) out.emplace_back(layout.ghosted(k), fill);
  return out;
}

Patches make_interior(const GridLayout& layout, double fill) {
  Patches out;
  out.reserve(layout.box_count());
  for (std::size_t k = 0; k < layout.box_count(); ++k) out.emplace_back(layout.interior(k), fill);
  return out;
}

void fill_periodic(const GridLayout& layout, Patches& patches,
                   const std::function<double(const Point2&)>& f) {
  for (auto& patch : patches) {
    const Box2& b = patch.box();
    for (std::size_t k = 0; k < b.size(); ++k) patch[k] = f(layout.wrap(b.point_at(k)));
  }
}

void check_ghosted(const GridLayout& layout, const Patches& patches, const char* what) {
  if (patches.size() != layout.box_count()) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(layout.box_count()) +
                     " patches, got " + std::to_string(patches.size()));
  }
  for (std::size_t k = 0; k < patches.size(); ++k) {
    if (!(patches[k].box() == layout.ghosted(k))) {
      throw ShapeError(std::string(what) + ": patch " + std::to_string(k) + " has box " +
                       patches[k].box().str() + ", expected " + layout.ghosted(k).str());
    }
  }
}

void check_interior(const GridLayout& layout, const Patches& patches, const char* what) {
  if (patches.size() != layout.box_count()) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(layout.box_count()) +
                     " patches, got " + std::to_string(patches.size()));
  }
  for (std::size_t k = 0; k < patches.size(); ++k) {
    if (!(patches[k].box() == layout.interior(k))) {
      throw ShapeError(std::string(what) + ": patch " + std::to_string(k) + " has box " +
                       patches[k].box().str() + ", expected " + layout.interior(k).str());
    }
  }
}

void exchange_ghosts(const GridLayout& layout, Patches& patches) {
  check_ghosted(layout, patches, "exchange_ghosts");
  const int g = layout.g;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    BoxData2& patch = patches[k];
    const Box2 inner = layout.interior(k);
    const Box2& outer = patch.box();
    auto copy_in = [&](int x, int y) {
      const Point2 w = layout.wrap(Point2{x, y});
      const BoxData2& src = patches[layout.owner(w)];
      patch[outer.unchecked_ordinal(Point2{x, y})] = src[src.box().unchecked_ordinal(w)];
    };
    // Full-width strips below and above, then side strips on interior rows.
    for (int y = outer.lo()[1]; y <= outer.hi()[1]; ++y) {
      const bool band = y < inner.lo()[1] || y > inner.hi()[1];
      if (band) {
        for (int x = outer.lo()[0]; x <= outer.hi()[0]; ++x) copy_in(x, y);
      } else {
        for (int x = outer.lo()[0]; x < outer.lo()[0] + g; ++x) copy_in(x, y);
        for (int x = inner.hi()[0] + 1; x <= outer.hi()[0]; ++x) copy_in(x, y);
      }
    }
  }
}

}  // namespace stenfuse
