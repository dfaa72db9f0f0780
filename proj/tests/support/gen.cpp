#include "gen.hpp"

namespace stenfuse::testing {

Patches Gen::zero_mean(const GridLayout& layout) {
  Patches p = interior(layout);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& b : p) {
    for (double v : b.values()) sum += v;
    count += b.size();
  }
  const double mean = sum / static_cast<double>(count);
  for (auto& b : p) {
    for (auto& v : b.values()) v -= mean;
  }
  return p;
}

ol::Expr Gen::linear_expr(std::size_t cols, int depth, std::size_t max_rows) {
  const int leaf_kinds = 5;
  const int choice = depth <= 0 ? integer(0, leaf_kinds - 1) : integer(0, leaf_kinds + 2);
  switch (choice) {
    case 0:
      return ol::identity(cols);
    case 1: {
      const std::size_t out = static_cast<std::size_t>(integer(1, static_cast<int>(cols)));
      const long offset = integer(0, static_cast<int>(cols - out));
      return ol::gather(ol::IndexExpr::identity().plus(offset), out, cols);
    }
    case 2: {
      const std::size_t out = cols + static_cast<std::size_t>(integer(0, 4));
      const long offset = integer(0, static_cast<int>(out - cols));
      return ol::scatter(ol::IndexExpr::identity().plus(offset), out, cols);
    }
    case 3:
      if (cols % 3 == 0) {
        return ol::tensor(ol::row_vec({real(), real(), real()}), ol::identity(cols / 3));
      }
      return ol::row_vec(vec(cols));
    case 4: {
      // Filt instances walking a strip with a random row stride.
      const std::size_t stride = static_cast<std::size_t>(integer(1, 3));
      if (cols < 2 * stride + 3) return ol::row_vec(vec(cols));
      const std::size_t count = std::min(max_rows, cols - 2 * stride - 2);
      std::array<double, 9> taps{};
      for (auto& t : taps) t = coin() ? real() : 0.0;
      taps[4] = 1.0;
      return ol::iter_vstack(
          ol::filt(taps, cols, stride, ol::IndexExpr::identity().plus(static_cast<long>(stride) + 1), "i"), count,
          "i");
    }
    case 5: {
      ol::Expr inner = linear_expr(cols, depth - 1, max_rows);
      return ol::compose(linear_expr(inner.shape().rows, depth - 1, max_rows), inner);
    }
    case 6: {
      const std::size_t half = std::max<std::size_t>(1, max_rows / 2);
      return ol::vstack(linear_expr(cols, depth - 1, half), linear_expr(cols, depth - 1, half));
    }
    default: {
      if (cols < 2) return ol::identity(cols);
      const std::size_t left = static_cast<std::size_t>(integer(1, static_cast<int>(cols - 1)));
      const std::size_t half = std::max<std::size_t>(1, max_rows / 2);
      return ol::direct_sum(linear_expr(left, depth - 1, half), linear_expr(cols - left, depth - 1, half));
    }
  }
}

}  // namespace stenfuse::testing
