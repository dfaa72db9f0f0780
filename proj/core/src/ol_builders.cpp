#include "stenfuse/ol.hpp"

namespace stenfuse::ol {

namespace {

void check_sizes(std::size_t n, std::size_t m, const char* what) {
  if (n < 1 || m != n + 2) {
    throw ShapeError(std::string(what) + ": need n >= 1 and m = n + 2, got n=" + std::to_string(n) +
                     ", m=" + std::to_string(m));
  }
}

}  // namespace

std::array<double, 9> laplacian_filter() { return {0, 1, 0, 1, -4, 1, 0, 1, 0}; }

Expr build_laplace(std::size_t n, std::size_t m, const std::array<double, 9>& filter) {
  check_sizes(n, m, "build_laplace");
  const auto nl = static_cast<long>(n);
  const auto ml = static_cast<long>(m);
  const std::size_t npts = n * n;
  // Instance i is centred on interior point i of the ghosted patch.
  auto f = filt(filter, m * m, m, IndexExpr::box_interior(nl, ml, ml + 1), "i");
  return compose(scatter(IndexExpr::identity(), npts, npts), iter_vstack(f, npts, "i"));
}

Expr build_interior(std::size_t n, std::size_t m) {
  check_sizes(n, m, "build_interior");
  const auto nl = static_cast<long>(n);
  const auto ml = static_cast<long>(m);
  return gather(IndexExpr::box_interior(nl, ml, ml + 1), n * n, m * m);
}

Expr build_jacobi(std::size_t n, double w, double lambda) {
  if (n < 1) throw ShapeError("build_jacobi: n must be >= 1");
  return tensor(row_vec({1.0, w, -lambda}), identity(n * n));
}

Expr build_maxnorm(std::size_t n, double h) {
  if (n < 1) throw ShapeError("build_maxnorm: n must be >= 1");
  if (!(h > 0.0)) throw ShapeError("build_maxnorm: mesh spacing must be positive");
  const std::size_t npts = n * n;
  return compose(max_reduce(npts),
                 compose(pointwise(PointwiseFn::Abs, n, n),
                         tensor(row_vec({0.0, 1.0 / (h * h), -1.0}), identity(npts))));
}

Expr build_poisson(std::size_t n, std::size_t m, double w, double lambda, double h,
                   const std::array<double, 9>& filter) {
  check_sizes(n, m, "build_poisson");
  const std::size_t npts = n * n;
  auto stages = vstack(build_jacobi(n, w, lambda), build_maxnorm(n, h));
  auto inputs = direct_sum(vstack(build_interior(n, m), build_laplace(n, m, filter)), identity(npts));
  auto e = compose(stages, inputs);
  e.shape();
  return e;
}

Expr build_poisson(std::size_t n, std::size_t m, double w, double lambda, double h) {
  return build_poisson(n, m, w, lambda, h, laplacian_filter());
}

}  // namespace stenfuse::ol
