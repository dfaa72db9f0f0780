#pragma once

#include <span>
#include <string>
#include <vector>

#include "stenfuse/ol.hpp"

namespace stenfuse::sigma {

using ol::IndexExpr;

/// Arrays a loop stage can touch. X is the ghosted phi patch (m^2), Rho the
/// interior right-hand side (n^2), Temp the materialized output of an earlier
/// stage (n^2), Out the ghosted phi result (m^2), Acc the scalar residual.
enum class Buffer { X, Rho, Temp, Out, Acc };

const char* to_string(Buffer b);

struct BufferRef {
  Buffer kind = Buffer::X;
  int stage = -1;  // producing stage, Temp only
  bool operator==(const BufferRef&) const = default;
  bool primary() const { return kind == Buffer::X || kind == Buffer::Rho; }
  std::string str() const;
};

struct Access {
  BufferRef buffer;
  IndexExpr index;
  bool operator==(const Access&) const = default;
  std::string str(const std::string& var = "j") const;
};

/// Per-iteration locations read (gather) or written (scatter) by a stage.
struct IndexMap {
  std::vector<Access> entries;
  std::size_t arity() const { return entries.size(); }
  bool operator==(const IndexMap&) const = default;
};

/// A kernel coefficient: a literal, or sign * a named runtime parameter
/// (value holds the resolved sign * parameter).
struct Coefficient {
  double value = 0.0;
  std::string param;
  bool negated = false;

  static Coefficient literal(double v) { return {v, {}, false}; }
  static Coefficient named(std::string name, double param_value, bool neg = false) {
    return {neg ? -param_value : param_value, std::move(name), neg};
  }
  bool operator==(const Coefficient&) const = default;
  std::string str() const;
};

/// y = sum_k coeff_k * g_k over gathered inputs g, optionally |y|, and
/// either written through the scatter map or folded into a running max.
struct Kernel {
  std::vector<Coefficient> coeffs;
  bool abs = false;
  bool max_accumulate = false;
  bool operator==(const Kernel&) const = default;
};

enum class StageKind { Laplace, Jacobi, MaxNorm };
const char* to_string(StageKind k);

/// One sum_{j<trip} S_scatter(j) kernel G_gather(j) loop.
struct Stage {
  StageKind name;
  std::size_t trip = 0;
  IndexMap gather;
  IndexMap scatter;
  Kernel kernel;
};

/// The staged (pre-fusion) loop form of a Poisson pipeline.
struct StagedProgram {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<Stage> stages;

  std::size_t buffer_size(const BufferRef& b) const;
  /// Input length: m^2 + n^2.
  std::size_t input_size() const { return m * m + n * n; }
};

/// Pattern-matches an ol::build_poisson expression into Laplace, Jacobi and
/// MaxNorm stages. Zero coefficients are dropped together with their gather
/// entries. Throws LoweringError naming the node that did not match.
StagedProgram lower(const ol::Expr& e);

/// Runs every stage loop, materializing intermediates. x is (phi ghosted |
/// rho); the result is (interior phi' | residual). Out-of-range ordinals
/// throw DomainError.
std::vector<double> sigma_eval(const StagedProgram& p, std::span<const double> x);

// Fused form.

struct Operand {
  enum class Kind { Temp, Read };
  Kind kind = Kind::Read;
  int temp = -1;
  Access read;
  bool operator==(const Operand&) const = default;
};

struct Term {
  Coefficient coeff;
  Operand operand;
  bool operator==(const Term&) const = default;
};

/// Straight-line instruction executed once per loop index.
struct Instr {
  enum class Op {
    Load,    // temps[dest] = source
    Assign,  // temps[dest] = [abs] sum(terms)
    Store,   // target = [abs] sum(terms)
    Reduce,  // acc = max(acc, [abs] sum(terms))
  };
  Op op = Op::Load;
  int dest = -1;
  Access source;
  Access target;
  std::vector<Term> terms;
  bool abs = false;
  bool operator==(const Instr&) const = default;
};

struct Temporary {
  std::string role;  // "phi", "laplace", "rho", ...
};

/// All stages merged into one loop of `trip` iterations with value reuse.
/// Reads and writes touch only X, Rho, Out and Acc.
struct FusedProgram {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t trip = 0;
  IndexMap reads;   // distinct primary-input accesses
  IndexMap writes;  // Out accesses
  std::vector<Temporary> temps;
  std::vector<Instr> body;
};

/// Checks pointwise producer/consumer alignment at every loop index and
/// merges the stages. Throws FusionError naming the offending stage pair and
/// the first misaligned index.
FusedProgram fuse(const StagedProgram& p);

/// Executes the fused loop on one patch: x is the m^2 ghosted phi, rho the
/// n^2 right-hand side, out the m^2 result (only interior entries written),
/// acc the running residual max. The Laplace/Jacobi/MaxNorm body shape runs
/// through a specialized loop unless `specialize` is false; any other body is
/// interpreted instruction by instruction. Both paths round identically.
void run_fused_patch(const FusedProgram& p, std::span<const double> x, std::span<const double> rho,
                     std::span<double> out, double& acc, bool specialize = true);

/// Whole-vector form matching sigma_eval: (interior phi' | residual).
std::vector<double> fused_eval(const FusedProgram& p, std::span<const double> x, bool specialize = true);

/// Throws FusionError unless every instruction touches only X, Rho, Out, Acc
/// and temporaries are assigned once before use.
void check_structure(const FusedProgram& p);

std::string pretty(const Stage& s);
std::string pretty(const StagedProgram& p);
std::string pretty(const FusedProgram& p);

}  // namespace stenfuse::sigma
