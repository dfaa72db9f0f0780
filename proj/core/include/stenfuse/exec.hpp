#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stenfuse/layout.hpp"
#include "stenfuse/sigma.hpp"
#include "stenfuse/stencil.hpp"

namespace stenfuse {

/// Jacobi smoothing of the periodic Poisson problem S(phi)/h^2 = rho:
///   phi' = phi + w * S(phi) - lambda * rho
struct ProblemConfig {
  GridLayout layout;
  int iters = 100;
  double w = 0.25;
  double lambda = 0.0;
  Stencil stencil = Stencil::laplacian();
  /// Stop once the residual of an iteration drops to this value.
  std::optional<double> tol;
  /// Worker threads over boxes; 1 runs everything on the caller.
  int threads = 1;

  /// w = 1/4, lambda = h^2/4.
  static ProblemConfig standard(const GridLayout& layout, int iters);
  double h() const { return layout.h(); }
};

enum class Backend { Reference, Fused };
const char* to_string(Backend b);

struct SolveReport {
  Backend backend = Backend::Reference;
  /// Residual of the iterate each update started from.
  std::vector<double> residuals;
  /// Seconds spent in the iteration loop.
  double wall_time = 0.0;
  std::vector<std::string> warnings;
};

struct Solution {
  Patches phi;
  SolveReport report;
};

/// Unfused: per box, apply the stencil into a temporary, update phi from it,
/// then fold the residual, as three separate passes.
Solution run_reference(const ProblemConfig& cfg, const Patches& phi0, const Patches& rho);

/// Fused: the lowered Poisson pipeline executed as one loop per box.
Solution run_fused(const ProblemConfig& cfg, const Patches& phi0, const Patches& rho);
/// Same, with a caller-supplied program (which must be sized for cfg).
Solution run_fused(const ProblemConfig& cfg, const sigma::FusedProgram& program, const Patches& phi0,
                   const Patches& rho);

/// Poisson OL expression for cfg: requires ghost width 1 and a 3x3 stencil.
ol::Expr build_poisson_expr(const ProblemConfig& cfg);
/// build_poisson_expr -> lower -> fuse.
sigma::FusedProgram build_fused_program(const ProblemConfig& cfg);

/// max over all boxes and interior points of |S(phi)_i / h^2 - rho_i|.
/// Ghost cells of phi must already be current.
double residual_maxnorm(const GridLayout& layout, const Stencil& s, const Patches& phi, const Patches& rho,
                        double h);

/// Runs fn(k) for k in [0, count) across up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace stenfuse
