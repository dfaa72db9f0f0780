#include "stenfuse/exec.hpp"

#include <chrono>
#include <cmath>
#include <thread>

namespace stenfuse {

namespace {

using Clock = std::chrono::steady_clock;

void check_inputs(const ProblemConfig& cfg, const Patches& phi0, const Patches& rho) {
  if (cfg.iters < 0) throw ShapeError("iteration count must be >= 0");
  if (!std::isfinite(cfg.w) || !std::isfinite(cfg.lambda)) throw ShapeError("w and lambda must be finite");
  if (cfg.stencil.radius() > cfg.layout.g) {
    throw ShapeError("stencil radius " + std::to_string(cfg.stencil.radius()) + " exceeds ghost width " +
                     std::to_string(cfg.layout.g));
  }
  check_ghosted(cfg.layout, phi0, "phi0");
  check_interior(cfg.layout, rho, "rho");
}

std::vector<std::string> rhs_warnings(const Patches& rho) {
  double sum = 0.0;
  double peak = 0.0;
  std::size_t count = 0;
  for (const auto& p : rho) {
    for (double v : p.values()) {
      sum += v;
      peak = std::max(peak, std::fabs(v));
      ++count;
    }
  }
  const double mean = count ? sum / static_cast<double>(count) : 0.0;
  if (std::fabs(mean) > 1e-12 * std::max(peak, 1.0)) {
    return {"rho has nonzero mean " + std::to_string(mean) +
            "; the periodic problem has no solution, smoothing continues anyway"};
  }
  return {};
}

double fold_max(const std::vector<double>& per_box) {
  double r = 0.0;
  for (double v : per_box) r = r >= v ? r : v;
  return r;
}

// Shared driver: exchange, per-box update into `next`, fold, swap.
template <typename BoxStep>
Solution iterate(const ProblemConfig& cfg, const Patches& phi0, Backend backend, BoxStep&& step) {
  Solution sol;
  sol.report.backend = backend;
  Patches cur = phi0;
  Patches next = phi0;
  std::vector<double> box_res(cur.size(), 0.0);

  const auto t0 = Clock::now();
  for (int it = 0; it < cfg.iters; ++it) {
    exchange_ghosts(cfg.layout, cur);
    parallel_for(cur.size(), cfg.threads, [&](std::size_t k) { box_res[k] = step(k, cur[k], next[k]); });
    const double r = fold_max(box_res);
    sol.report.residuals.push_back(r);
    std::swap(cur, next);
    if (cfg.tol && r <= *cfg.tol) break;
  }
  if (!sol.report.residuals.empty()) exchange_ghosts(cfg.layout, cur);
  sol.report.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  sol.phi = std::move(cur);
  return sol;
}

}  // namespace

ProblemConfig ProblemConfig::standard(const GridLayout& layout, int iters) {
  ProblemConfig c;
  c.layout = layout;
  c.iters = iters;
  c.w = 0.25;
  c.lambda = layout.h() * layout.h() / 4.0;
  return c;
}

const char* to_string(Backend b) { return b == Backend::Reference ? "reference" : "fused"; }

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t used = std::min(workers, count);
  for (std::size_t w = 0; w < used; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < count; k += used) fn(k);
    });
  }
}

Solution run_reference(const ProblemConfig& cfg, const Patches& phi0, const Patches& rho) {
  check_inputs(cfg, phi0, rho);
  const GridLayout& L = cfg.layout;
  const double w = cfg.w;
  const double lambda = cfg.lambda;
  const double inv_h2 = 1.0 / (cfg.h() * cfg.h());
  const auto n = static_cast<std::size_t>(L.n);
  const auto m = static_cast<std::size_t>(L.m());
  const auto g = static_cast<std::size_t>(L.g);

  auto sol = iterate(cfg, phi0, Backend::Reference, [&](std::size_t k, const BoxData2& phi, BoxData2& out) {
    // Laplacian into a fresh temporary.
    const BoxData2 lap = stencil_apply(cfg.stencil, phi, L.interior(k));
    const BoxData2& f = rho[k];

    // Jacobi update.
    for (std::size_t y = 0; y < n; ++y) {
      const double* src = phi.data() + (y + g) * m + g;
      double* dst = out.data() + (y + g) * m + g;
      const double* l = lap.data() + y * n;
      const double* r = f.data() + y * n;
      for (std::size_t x = 0; x < n; ++x) dst[x] = (src[x] + w * l[x]) - lambda * r[x];
    }

    // Residual of the iterate we started from.
    double res = 0.0;
    const double* l = lap.data();
    const double* r = f.data();
    for (std::size_t i = 0; i < n * n; ++i) {
      const double v = std::fabs(inv_h2 * l[i] - r[i]);
      res = res >= v ? res : v;
    }
    return res;
  });
  sol.report.warnings = rhs_warnings(rho);
  return sol;
}

ol::Expr build_poisson_expr(const ProblemConfig& cfg) {
  if (cfg.layout.g != 1) {
    throw ShapeError("fused pipeline needs ghost width 1, layout has " + std::to_string(cfg.layout.g));
  }
  const auto n = static_cast<std::size_t>(cfg.layout.n);
  return ol::build_poisson(n, n + 2, cfg.w, cfg.lambda, cfg.h(), cfg.stencil.filter3x3());
}

sigma::FusedProgram build_fused_program(const ProblemConfig& cfg) {
  return sigma::fuse(sigma::lower(build_poisson_expr(cfg)));
}

Solution run_fused(const ProblemConfig& cfg, const Patches& phi0, const Patches& rho) {
  check_inputs(cfg, phi0, rho);
  return run_fused(cfg, build_fused_program(cfg), phi0, rho);
}

Solution run_fused(const ProblemConfig& cfg, const sigma::FusedProgram& program, const Patches& phi0,
                   const Patches& rho) {
  check_inputs(cfg, phi0, rho);
  if (program.n != static_cast<std::size_t>(cfg.layout.n) || program.m != static_cast<std::size_t>(cfg.layout.m())) {
    throw ShapeError("fused program sized n=" + std::to_string(program.n) + ", m=" + std::to_string(program.m) +
                     " does not match the layout");
  }
  auto sol = iterate(cfg, phi0, Backend::Fused, [&](std::size_t k, const BoxData2& phi, BoxData2& out) {
    double res = 0.0;
    sigma::run_fused_patch(program, phi.values(), rho[k].values(), out.values(), res);
    return res;
  });
  sol.report.warnings = rhs_warnings(rho);
  return sol;
}

double residual_maxnorm(const GridLayout& layout, const Stencil& s, const Patches& phi, const Patches& rho,
                        double h) {
  check_ghosted(layout, phi, "phi");
  check_interior(layout, rho, "rho");
  const double inv_h2 = 1.0 / (h * h);
  double res = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const BoxData2 lap = stencil_apply(s, phi[k], layout.interior(k));
    for (std::size_t i = 0; i < lap.size(); ++i) {
      const double v = std::fabs(inv_h2 * lap[i] - rho[k][i]);
      res = res >= v ? res : v;
    }
  }
  return res;
}

}  // namespace stenfuse
