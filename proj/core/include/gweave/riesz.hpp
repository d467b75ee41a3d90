#pragma once

// g-Riesz bases and sequences, and weavings of them.

#include "gweave/weaving.hpp"

#include <optional>
#include <vector>

namespace gweave {

struct RieszBounds {
  double lower = 0.0;  // C = sigma_min(T)^2 over all sum(d_i) columns
  double upper = 0.0;  // D = sigma_max(T)^2
  bool complete = false;
  bool is_basis = false;

  /// Lower Riesz inequality with a nonzero constant (injective synthesis).
  bool is_sequence(const Tolerance& tol = {}) const noexcept {
    return upper > 0.0 && lower > tol.frame_rtol * upper;
  }
};

RieszBounds riesz_bounds(const GFrame& frame, const Tolerance& tol = {});

struct WeavingRieszReport {
  /// Indexed by partition number.
  std::vector<RieszBounds> per_partition;
  double common_lower = 0.0;
  double common_upper = 0.0;
  bool all_riesz_sequences = false;
  bool all_riesz_bases = false;
  /// Lexicographically smallest partition whose weaving is not a Riesz basis.
  std::optional<Partition> first_failure;

  /// If every weaving is a Riesz sequence then every weaving is a Riesz basis.
  bool sequence_implies_basis() const noexcept { return !all_riesz_sequences || all_riesz_bases; }
  bool woven() const noexcept { return all_riesz_bases; }
};

/// Two-member family of g-Riesz bases; every one of the 2^N weavings is
/// classified. Throws InvalidArgument if a member is not a g-Riesz basis.
WeavingRieszReport weaving_riesz_check(const GFrameFamily& family, const Tolerance& tol = {},
                                       std::uint64_t budget = kDefaultBudget);

struct PermutationWeaveReport {
  double lower = 0.0;  // A of the base Riesz basis
  double upper = 0.0;  // B of the base Riesz basis
  bool identity = true;
  bool woven = true;
  /// min / max over all weavings of the nonzero squared singular values of the
  /// weaving's synthesis matrix, i.e. its frame bounds on its own span.
  double span_lower_min = 0.0;
  double span_upper_max = 0.0;
  bool span_bounds_hold = true;  // span_lower_min >= A and span_upper_max <= 2B
  /// For pi != id: index i0 (smallest moved index) taken from the permuted
  /// member and every other index from the original.
  std::optional<Partition> witness;
  bool witness_fails_to_span = false;
  WeavingReport certification;

  bool verdict_matches_identity() const noexcept { return woven == identity; }
};

/// pi[i] is the 0-based image of index i; requires d_{pi(i)} = d_i.
PermutationWeaveReport permutation_weave(const GFrame& frame, const std::vector<std::size_t>& pi,
                                         const Tolerance& tol = {});

/// Builds the family {F, F o pi}.
GFrameFamily permuted_pair(const GFrame& frame, const std::vector<std::size_t>& pi,
                           const Tolerance& tol = {});

struct EquivalenceConstants {
  double riesz_low = 0.0;  // min over partitions of the weaving's lower Riesz bound
  double riesz_up = 0.0;   // max over partitions of the weaving's upper Riesz bound
  double a2 = 0.0;  // best A with A ||T_L P g||^2 <= ||T_L P g + T_G P^c g||^2
  double d3 = 0.0;  // best D with D (||T_L P g||^2 + ||T_G P^c g||^2) <= ||...||^2
  double e4 = 0.0;  // best E of the normalized form; equals a2 by homogeneity
  /// Partitions whose weaving synthesis has a kernel the compared form does not
  /// share; each forces the affected constant to 0.
  std::vector<Partition> degenerate_partitions;

  bool all_positive() const noexcept { return riesz_low > 0.0 && a2 > 0.0 && d3 > 0.0 && e4 > 0.0; }
  /// d3 - a2 / (2 (a2 + 1)); nonnegative when the (2) => (3) constant chain holds.
  double chain_margin() const noexcept { return d3 - 0.5 * a2 / (a2 + 1.0); }
  /// a2 - riesz_low / riesz_up; nonnegative when the (1) => (2) constant holds.
  double ratio_margin() const noexcept {
    return riesz_up > 0.0 ? a2 - riesz_low / riesz_up : a2;
  }
};

/// Two-member family whose members are g-Riesz bases or g-Riesz sequences.
EquivalenceConstants equivalence_constants(const GFrameFamily& family, const Tolerance& tol = {},
                                           std::uint64_t budget = kDefaultBudget);

}  // namespace gweave
