#pragma once

// Sufficient conditions for weaving, each paired with the universal bounds it
// predicts:
//
//   minimal_k                pairwise block differences dominated by K times
//                            both members on every index subset
//   perturbation_certificate Paley-Wiener closeness of synthesis operators to
//                            a fixed base member
//   chained_certificate      the same along consecutive members 1-2-...-m
//   operator_perturbation    {Lambda_i} against {Lambda_i T_i}
//   scaled_dual_weave        a frame against its scaled canonical dual
//
// Certificates never claim more than they verify: the general (lambda, eta, mu)
// hypothesis is only searched for counterexamples; exact verification exists
// for the lambda-only form, where the full index set is the worst case.

#include "gweave/weaving.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gweave {

struct KCertificate {
  bool feasible = false;
  double k = 0.0;  // minimal admissible K; meaningless when infeasible
  double predicted_lower = 0.0;  // sum A_j / (2 (m - 1) (K + 1) + 1)
  double predicted_upper = 0.0;  // sum B_j
  /// Subset and ordered pair (j, l) attaining K, or the first infeasible one.
  /// The constraint is D_J <= K * M_J^(j).
  std::vector<std::size_t> worst_subset;
  std::size_t worst_member = 0;
  std::size_t worst_partner = 0;
  std::uint64_t subsets_checked = 0;
};

/// Exhaustive over the 2^N - 1 nonempty subsets; throws BudgetExceeded when
/// 2^N > budget.
KCertificate minimal_k(const GFrameFamily& family, std::uint64_t budget = kDefaultBudget,
                       const Tolerance& tol = {}, unsigned threads = 0);

/// sum A_j / (2 (m - 1) (K + 1) + 1).
double k_condition_lower(double sum_lower, std::size_t members, double k);

struct PerturbationScalars {
  std::vector<double> lambdas;
  std::vector<double> etas;
  std::vector<double> mus;
};

enum class VerificationMode { ExactLambdaOnly, SampledFalsification };
enum class CertificateStatus {
  Valid,             // hypothesis verified exactly and A > 0
  HypothesisFails,   // predicted A <= 0 (or another gate failed)
  ConditionViolated, // lambda below the synthesis difference norm, or a counterexample
  NotFalsified,      // sampled search found no counterexample and A > 0
};

std::string_view to_string(VerificationMode m);
std::string_view to_string(CertificateStatus s);

struct Falsification {
  std::size_t member = 0;   // j
  std::size_t partner = 0;  // n (base) or j + 1 (chained)
  std::vector<std::size_t> subset;
  Vector coefficients;  // stacked g_i over the subset, in subset order
  double lhs = 0.0;
  double rhs = 0.0;
};

struct PerturbationCertificate {
  bool chained = false;
  std::size_t base_index = 0;
  PerturbationScalars scalars;
  std::vector<double> member_lower;
  std::vector<double> member_upper;
  double predicted_lower = 0.0;
  double predicted_upper = 0.0;
  VerificationMode mode = VerificationMode::ExactLambdaOnly;
  CertificateStatus status = CertificateStatus::HypothesisFails;
  /// ||T_base - T_j|| (or ||T_j - T_{j+1}|| when chained), per scalar slot.
  std::vector<double> difference_norms;
  std::optional<Falsification> witness;
  std::uint64_t trials = 0;
  std::optional<std::uint64_t> seed;

  bool valid() const noexcept { return status == CertificateStatus::Valid; }
};

/// Scalars have one entry per member; the entry at `base` is ignored.
PerturbationCertificate perturbation_certificate(const GFrameFamily& family, std::size_t base,
                                                 const PerturbationScalars& scalars,
                                                 VerificationMode mode, std::uint64_t trials = 0,
                                                 std::uint64_t seed = 0, const Tolerance& tol = {});

/// Scalars have m - 1 entries; slot j couples members j and j + 1.
PerturbationCertificate chained_certificate(const GFrameFamily& family,
                                            const PerturbationScalars& scalars,
                                            VerificationMode mode, std::uint64_t trials = 0,
                                            std::uint64_t seed = 0, const Tolerance& tol = {});

/// Predicted A recomputed from the stored scalars and member bounds.
double recompute_predicted_lower(const PerturbationCertificate& cert);

/// lambda_j = ||T_base - T_j|| (0 at the base slot).
std::vector<double> fit_lambdas(const GFrameFamily& family, std::size_t base);
/// lambda_j = ||T_j - T_{j+1}||, j = 0..m-2.
std::vector<double> fit_chain_lambdas(const GFrameFamily& family);

struct OperatorPerturbationReport {
  double lower = 0.0;  // A of the base frame
  double upper = 0.0;  // B of the base frame
  double max_defect_sq = 0.0;  // max_i ||I - T_i||^2
  bool condition_holds = false;  // max_defect_sq < A / B
  bool uniform = false;  // every T_i equal
  /// A - B max_i ||I - T_i||^2, the bound asserted for the pair.
  double stated_lower = 0.0;
  /// (sqrt(A) - sqrt(beta) max_i ||I - T_i||)^2 with beta = B for uniform T and
  /// beta = sum_i ||Lambda_i||^2 otherwise; 0 when the root is negative.
  double triangle_lower = 0.0;
  std::optional<GFrameFamily> family;
  std::optional<WeavingReport> exhaustive;

  bool stated_bound_holds(double slack) const noexcept {
    return exhaustive && exhaustive->universal_lower >= stated_lower - slack;
  }
};

/// One invertible n x n operator per index. Throws InvalidArgument on shape
/// errors and NumericFailure on a singular T_i or a degenerate frame.
/// The exhaustive cross-check runs when 2^N <= budget.
OperatorPerturbationReport operator_perturbation(const GFrame& frame, const std::vector<Matrix>& ops,
                                                 const Tolerance& tol = {},
                                                 std::uint64_t budget = kDefaultBudget);

struct ScaledDualReport {
  double lower = 0.0;
  double upper = 0.0;
  double ratio = 0.0;  // B / A
  bool hypothesis_holds = false;  // B / A < 2
  double factor = 0.0;  // 2AB / (A + B)
  double defect_norm = 0.0;  // ||I - factor * S^{-1}||
  double spectral_bound = 0.0;  // (B - A) / (B + A)
  bool spectral_containment = false;
  std::optional<GFrame> scaled_dual;
  std::optional<OperatorPerturbationReport> perturbation;
  bool certified_woven = false;
};

ScaledDualReport scaled_dual_weave(const GFrame& frame, const Tolerance& tol = {},
                                   std::uint64_t budget = kDefaultBudget);

}  // namespace gweave
