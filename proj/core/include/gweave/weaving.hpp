#pragma once

// Weavings of a family of g-frames and their certification.
//
// A family {Lambda_ij} has m members sharing the index set 1..N, the ambient
// dimension and every block dimension. A partition assigns each index i a
// member label; the weaving takes block i from that member. Partitions are
// ordered label vectors, so empty parts are allowed and there are exactly m^N.
//
// Labels are 0-based in C++ and 1-based in JSON reports. Partition number k
// is the mixed-radix reading of the label vector with index 0 most
// significant, so increasing k is lexicographic order on label vectors.

#include "gweave/gframe.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gweave {

inline constexpr std::uint64_t kDefaultBudget = 1'000'000;

/// kDefaultBudget, or the value of GWEAVE_BUDGET when it holds a positive integer.
std::uint64_t default_budget();

/// m^N exceeds the partition (or subset) budget of an exhaustive search.
class BudgetExceeded : public InvalidArgument {
 public:
  BudgetExceeded(std::uint64_t needed_or_max, std::uint64_t budget, std::string what);
  /// Number of items the search would need; UINT64_MAX on overflow.
  std::uint64_t needed() const noexcept { return needed_; }
  std::uint64_t budget() const noexcept { return budget_; }

 private:
  std::uint64_t needed_;
  std::uint64_t budget_;
};

/// base^exp, saturating at UINT64_MAX.
std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp) noexcept;

class GFrameFamily;

/// Throws BudgetExceeded when m^N > budget.
void require_exhaustive_budget(const GFrameFamily& family, std::uint64_t budget);

struct Partition {
  std::vector<std::size_t> labels;

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Label vector of partition number k.
Partition partition_from_index(std::uint64_t k, std::size_t n_indices, std::size_t m);
std::uint64_t partition_index(const Partition& p, std::size_t m);

class GFrameFamily {
 public:
  /// Requires m >= 2 members agreeing on ambient dimension, N and every d_i.
  /// Unless allow_degenerate is set, every member must classify as a g-frame.
  explicit GFrameFamily(std::vector<GFrame> frames, const Tolerance& tol = {},
                        bool allow_degenerate = false);

  std::size_t members() const noexcept { return frames_.size(); }
  std::size_t size() const noexcept { return frames_.front().size(); }
  std::size_t ambient_dim() const noexcept { return frames_.front().ambient_dim(); }
  std::vector<std::size_t> block_dims() const { return frames_.front().block_dims(); }

  const GFrame& member(std::size_t j) const { return frames_.at(j); }
  const std::vector<GFrame>& frames() const noexcept { return frames_; }
  /// Optimal bounds of member j, computed at construction.
  const FrameBounds& member_bounds(std::size_t j) const { return bounds_.at(j); }

  /// Block i of member j.
  const Matrix& block(std::size_t i, std::size_t j) const { return frames_.at(j).block(i); }

  /// m^N, saturating.
  std::uint64_t partition_count() const noexcept;

 private:
  std::vector<GFrame> frames_;
  std::vector<FrameBounds> bounds_;
};

enum class WeaveStatus { Woven, NotWoven, SampledNoCounterexample };
enum class SearchMode { Exhaustive, Sampled };

std::string_view to_string(WeaveStatus s);
std::string_view to_string(SearchMode m);

struct SearchOptions {
  SearchMode mode = SearchMode::Exhaustive;
  /// Exhaustive: upper limit on m^N. Sampled: number of partitions drawn.
  std::uint64_t budget = kDefaultBudget;
  std::uint64_t seed = 0;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct WeavingReport {
  WeaveStatus status = WeaveStatus::NotWoven;
  double universal_lower = 0.0;
  double universal_upper = 0.0;
  Partition witness_lower;
  Partition witness_upper;
  std::uint64_t partitions_checked = 0;
  SearchMode mode = SearchMode::Exhaustive;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const WeavingReport&, const WeavingReport&) = default;
};

/// Throws InvalidArgument on a label out of range or a length mismatch.
void validate_partition(const GFrameFamily& family, const Partition& p);

GFrame assemble_weaving(const GFrameFamily& family, const Partition& p);

/// Universal bounds as min/max of per-weaving optimal bounds. Exhaustive mode
/// throws BudgetExceeded when m^N > options.budget. Sampled mode never reports
/// Woven. Witness ties go to the lexicographically smallest label vector.
WeavingReport certify_woven(const GFrameFamily& family, const SearchOptions& options = {},
                            const Tolerance& tol = {});

struct SpanResult {
  bool holds = true;
  std::optional<Partition> witness;
};

/// Every weaving's stacked analysis matrix has rank n.
SpanResult span_criterion(const GFrameFamily& family, std::uint64_t budget = kDefaultBudget,
                          const Tolerance& tol = {}, unsigned threads = 0);

/// sum_j B_j; bounds every weaving's upper frame bound.
double bessel_sum_bound(const GFrameFamily& family);

struct ScaledFamily {
  GFrameFamily family;
  double c = 0.0;  // min |a_i^(j)|^2
  double d = 0.0;  // max |a_i^(j)|^2
  double predicted_lower = 0.0;
  double predicted_upper = 0.0;
};

/// Blocks a_i^(j) Lambda_ij with scalars[j][i]; predicted universal bounds
/// (A C, B D) from the base family's universal bounds (A, B).
/// Throws InvalidArgument if any scalar is zero.
ScaledFamily scaled_family(const GFrameFamily& family,
                           const std::vector<std::vector<Complex>>& scalars, double base_lower,
                           double base_upper, const Tolerance& tol = {});

/// Family keeping only the listed indices (sorted, unique, nonempty).
/// Members of the result may be degenerate.
GFrameFamily restrict_family(const GFrameFamily& family, const std::vector<std::size_t>& keep,
                             const Tolerance& tol = {});

struct RemovalReport {
  double universal_lower = 0.0;  // A of the full pair
  double universal_upper = 0.0;  // B of the full pair
  double removed_bound = 0.0;    // D_J = lambda_max(sum_{i in J} Lambda_i^* Lambda_i), member 1
  double predicted_lower = 0.0;  // A - D_J
  bool hypothesis_holds = false; // D_J < A
  std::vector<std::size_t> kept;
  std::optional<WeavingReport> restricted;
  bool members_are_frames = false;
};

/// Two-member removal of the indices in `removed`. The full pair must be woven.
RemovalReport removal_bound(const GFrameFamily& family, const std::vector<std::size_t>& removed,
                            const Tolerance& tol = {}, std::uint64_t budget = kDefaultBudget);

/// max over `trials` random unit f of
///   sum_j ||(S^(j))_{sigma_j} f||^2 - B ||S_Psi||,
/// where S_Psi is the frame operator of the weaving for p.
double frame_op_norm_check(const GFrameFamily& family, const Partition& p, double universal_upper,
                           std::size_t trials, std::uint64_t seed);

}  // namespace gweave
