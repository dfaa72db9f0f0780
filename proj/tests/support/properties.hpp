#pragma once

#include <cstdint>
#include <string>

namespace stenfuse::testing {

struct PropertyResult {
  bool pass = true;
  int trials = 0;
  std::string failure;  // first counterexample, empty on success
};

// Randomized invariant checks. Each runs `trials` independent cases from a
// seeded generator and stops at the first counterexample.

/// ordinal(point_at(k)) == k over random boxes.
PropertyResult prop_ordinal_roundtrip(std::uint64_t seed, int trials);
/// intersect is commutative and associative with set semantics (point enumeration).
PropertyResult prop_intersect_algebra(std::uint64_t seed, int trials);
/// After exchange_ghosts every ghost equals the flat periodic field at wrap(q).
PropertyResult prop_exchange_periodicity(std::uint64_t seed, int trials);
/// apply(a x + b y) == a apply(x) + b apply(y), 1e-12 relative.
PropertyResult prop_stencil_linearity(std::uint64_t seed, int trials);
/// Shifting src and dest by the same point leaves values unchanged.
PropertyResult prop_stencil_translation(std::uint64_t seed, int trials);
/// stencil_apply matches the brute-force matrix for random stencils and boxes with edge <= 8.
PropertyResult prop_stencil_dense(std::uint64_t seed, int trials);
/// A constant phi with rho = 0 stays exactly constant under both backends.
PropertyResult prop_constant_preservation(std::uint64_t seed, int trials);
/// A zero-mean rho keeps the mean of phi fixed to 1e-10.
PropertyResult prop_mean_preservation(std::uint64_t seed, int trials);
/// eval(e, x) == to_dense(e) x for random linear trees.
PropertyResult prop_ol_dense_eval(std::uint64_t seed, int trials);
/// Compose/DirectSum/VStack shape rules, and rejection of mismatches.
PropertyResult prop_ol_shape_algebra(std::uint64_t seed, int trials);

}  // namespace stenfuse::testing
