#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stenfuse/exec.hpp"

namespace stenfuse::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

/// Bad flag values; maps to exit status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Smooth zero-mean right-hand side: a product of sinusoids with integer
/// wavenumbers and phases drawn from `seed`.
Patches smooth_rhs(const GridLayout& layout, std::uint64_t seed);

// verify

struct VerifyOptions {
  int max_n = 8;
  std::uint64_t seed = 1;
  /// Fault injection: build the fused pipeline with +lambda instead of -lambda.
  bool flip_jacobi_sign = false;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Names of every check run_checks performs, in order.
const std::vector<std::string>& check_names();
std::vector<CheckResult> run_checks(const VerifyOptions& opt);
int cmd_verify(const VerifyOptions& opt, std::ostream& out);

// solve

struct SolveOptions {
  int n = 64;
  int nb = 4;
  int iters = 100;
  Backend backend = Backend::Fused;
  int threads = 1;
  std::uint64_t seed = 1;
  std::optional<double> tol;
};

int cmd_solve(const SolveOptions& opt, std::ostream& out);

// bench

struct BenchOptions {
  std::vector<int> sizes = {64, 128, 256};
  int nb = 4;
  int iters = 100;
  int repeats = 3;
  int threads = 1;
  std::uint64_t seed = 1;
  /// Run only this backend; both when empty.
  std::optional<Backend> backend;
};

struct BenchRecord {
  int n = 0;
  int nb = 0;
  int iters = 0;
  Backend backend = Backend::Reference;
  double seconds = 0.0;
  double final_residual = 0.0;
  std::optional<double> speedup;  // reference / fused, fused rows only
  bool operator==(const BenchRecord&) const = default;
};

/// Throws UsageError for empty sizes, repeats < 3 or nonpositive sizes.
std::vector<BenchRecord> run_bench(const BenchOptions& opt);
void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);
/// Inverse of write_csv. Throws Error on a malformed header or row.
std::vector<BenchRecord> read_csv(std::istream& in);
const char* csv_header();

// emit

struct EmitOptions {
  int n = 64;
  std::string variant = "scalar";  // scalar | openmp
  int threads = 4;
  std::string function_name = "poisson_2d_fused";
  std::string out;  // empty: print the source
};

/// Returns the emitted source. Throws UsageError on a bad variant or size.
std::string emit_source(const EmitOptions& opt);
int cmd_emit(const EmitOptions& opt, std::ostream& out);

/// Full command line: parses, dispatches, and maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stenfuse::cli
