#pragma once

#include <span>
#include <vector>

#include "stenfuse/box.hpp"

namespace stenfuse {

/// Scalar field over a box, stored in ordinal order.
template <int D>
class BoxData {
 public:
  BoxData() = default;
  explicit BoxData(const Box<D>& box, double fill = 0.0) : box_(box), values_(box.size(), fill) {}
  BoxData(const Box<D>& box, std::vector<double> values) : box_(box), values_(std::move(values)) {
    if (values_.size() != box_.size()) {
      throw ShapeError("BoxData over " + box_.str() + " needs " + std::to_string(box_.size()) +
                       " values, got " + std::to_string(values_.size()));
    }
  }

  const Box<D>& box() const { return box_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(const Point<D>& p) { return values_[box_.ordinal(p)]; }
  double operator()(const Point<D>& p) const { return values_[box_.ordinal(p)]; }

  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

  bool operator==(const BoxData&) const = default;

 private:
  Box<D> box_;
  std::vector<double> values_;
};

using BoxData2 = BoxData<2>;

}  // namespace stenfuse
