#pragma once

#include <string>

#include "stenfuse/sigma.hpp"

namespace stenfuse::emit {

/// Names and sizes for the generated C function. The signature is
///   void NAME(double *Y, double *X, double WEIGHT, double LAMBDA,
///             double *rhs, double H, double *retval1)
/// where X/Y are m x m ghosted patches and rhs is n x n.
struct EmitConfig {
  std::size_t n = 64;
  std::size_t m = 66;
  std::string function_name = "poisson_2d_fused";
  int threads = 1;  // OpenMP variant only
  std::string weight_name = "weight1";
  std::string lambda_name = "lambda1";
  std::string h_name = "a_h1";

  static EmitConfig for_program(const sigma::FusedProgram& p, int threads = 1);
};

/// One function, one loop over the n^2 points, no intermediate arrays.
std::string emit_c_scalar(const sigma::FusedProgram& p, const EmitConfig& cfg);

/// The scalar body inside an OpenMP parallel region: thread-strided loop and
/// a max reduction on the residual.
std::string emit_c_openmp(const sigma::FusedProgram& p, const EmitConfig& cfg);

}  // namespace stenfuse::emit
