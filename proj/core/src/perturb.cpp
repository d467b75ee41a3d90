#include "gweave/perturb.hpp"

#include "gweave/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gweave {

std::string_view to_string(VerificationMode m) {
  return m == VerificationMode::ExactLambdaOnly ? "exact-lambda-only" : "sampled-falsification";
}

std::string_view to_string(CertificateStatus s) {
  switch (s) {
    case CertificateStatus::Valid: return "valid";
    case CertificateStatus::HypothesisFails: return "hypothesis-fails";
    case CertificateStatus::ConditionViolated: return "condition-violated";
    case CertificateStatus::NotFalsified: return "not-falsified";
  }
  return "unknown";
}

double k_condition_lower(double sum_lower, std::size_t members, double k) {
  return sum_lower / (2.0 * static_cast<double>(members - 1) * (k + 1.0) + 1.0);
}

namespace {

struct KLocal {
  bool feasible = true;
  double k = 0.0;
  std::uint64_t mask = 0;
  std::size_t member = 0;
  std::size_t partner = 0;
  bool any = false;
};

std::vector<std::size_t> mask_to_subset(std::uint64_t mask, std::size_t n_idx) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n_idx; ++i) {
    if (mask & (std::uint64_t{1} << i)) out.push_back(i);
  }
  return out;
}

}  // namespace

KCertificate minimal_k(const GFrameFamily& family, std::uint64_t budget, const Tolerance& tol,
                       unsigned threads) {
  const std::size_t n_idx = family.size();
  const std::size_t m = family.members();
  const auto n = static_cast<Eigen::Index>(family.ambient_dim());
  if (n_idx >= 63 || (std::uint64_t{1} << n_idx) > budget) {
    std::ostringstream os;
    os << "minimal_k needs 2^" << n_idx << " subsets, budget is " << budget;
    throw BudgetExceeded(saturating_pow(2, n_idx), budget, os.str());
  }

  // grams[i][j] = Lambda_ij^* Lambda_ij; diffs[i][pair] = (Lambda_ij - Lambda_il)^*(...)
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = j + 1; l < m; ++l) pairs.emplace_back(j, l);
  }
  std::vector<std::vector<Matrix>> grams(n_idx), diffs(n_idx);
  for (std::size_t i = 0; i < n_idx; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const Matrix& b = family.block(i, j);
      grams[i].push_back(b.adjoint() * b);
    }
    for (const auto& [j, l] : pairs) {
      const Matrix d = family.block(i, j) - family.block(i, l);
      diffs[i].push_back(d.adjoint() * d);
    }
  }

  const std::uint64_t total = (std::uint64_t{1} << n_idx) - 1;  // masks 1..2^N - 1
  std::vector<KLocal> partial(detail::chunk_count(threads, total));
  detail::parallel_chunks(total, threads, [&](unsigned chunk, std::uint64_t begin, std::uint64_t end) {
    KLocal local;
    std::vector<Matrix> member_sum(m, Matrix(n, n));
    std::vector<Matrix> diff_sum(pairs.size(), Matrix(n, n));
    for (std::uint64_t t = begin; t < end; ++t) {
      const std::uint64_t mask = t + 1;
      for (auto& s : member_sum) s.setZero();
      for (auto& s : diff_sum) s.setZero();
      for (std::size_t i = 0; i < n_idx; ++i) {
        if (!(mask & (std::uint64_t{1} << i))) continue;
        for (std::size_t j = 0; j < m; ++j) member_sum[j] += grams[i][j];
        for (std::size_t q = 0; q < pairs.size(); ++q) diff_sum[q] += diffs[i][q];
      }
      for (std::size_t q = 0; q < pairs.size(); ++q) {
        const auto [j, l] = pairs[q];
        for (const std::size_t side : {j, l}) {
          const std::size_t other = side == j ? l : j;
          const std::optional<double> r = max_generalized_ratio(diff_sum[q], member_sum[side], tol);
          if (!r) {
            if (local.feasible) {
              local = KLocal{false, std::numeric_limits<double>::infinity(), mask, side, other, true};
            }
            continue;
          }
          if (local.feasible && (!local.any || *r > local.k)) {
            local = KLocal{true, *r, mask, side, other, true};
          }
        }
      }
      // An infeasible constraint ends the search inside this chunk.
      if (!local.feasible) break;
    }
    partial[chunk] = local;
  });

  KLocal best;
  for (const auto& p : partial) {
    if (!p.any) continue;
    if (!best.any) {
      best = p;
      continue;
    }
    if (best.feasible && !p.feasible) {
      best = p;
    } else if (best.feasible && p.feasible && p.k > best.k) {
      best = p;
    }
  }

  KCertificate cert;
  cert.subsets_checked = total;
  double sum_lower = 0.0;
  double sum_upper = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sum_lower += family.member_bounds(j).lower;
    sum_upper += family.member_bounds(j).upper;
  }
  cert.predicted_upper = sum_upper;
  cert.feasible = best.feasible;
  cert.worst_subset = mask_to_subset(best.mask, n_idx);
  cert.worst_member = best.member;
  cert.worst_partner = best.partner;
  if (cert.feasible) {
    cert.k = best.k;
    cert.predicted_lower = k_condition_lower(sum_lower, m, cert.k);
  } else {
    cert.k = std::numeric_limits<double>::infinity();
  }
  return cert;
}

std::vector<double> fit_lambdas(const GFrameFamily& family, std::size_t base) {
  if (base >= family.members()) throw InvalidArgument("fit_lambdas: invalid base index");
  const Matrix tb = synthesis_matrix(family.member(base));
  std::vector<double> out(family.members(), 0.0);
  for (std::size_t j = 0; j < family.members(); ++j) {
    if (j != base) out[j] = op_norm(tb - synthesis_matrix(family.member(j)));
  }
  return out;
}

std::vector<double> fit_chain_lambdas(const GFrameFamily& family) {
  std::vector<double> out;
  for (std::size_t j = 0; j + 1 < family.members(); ++j) {
    out.push_back(op_norm(synthesis_matrix(family.member(j)) -
                          synthesis_matrix(family.member(j + 1))));
  }
  return out;
}

namespace {

// (member, partner) for each scalar slot.
std::vector<std::pair<std::size_t, std::size_t>> slot_pairs(const PerturbationCertificate& c,
                                                            std::size_t m) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (c.chained) {
    for (std::size_t j = 0; j + 1 < m; ++j) out.emplace_back(j, j + 1);
  } else {
    for (std::size_t j = 0; j < m; ++j) out.emplace_back(j, c.base_index);
  }
  return out;
}

void check_scalars(const PerturbationScalars& s, std::size_t slots) {
  auto check = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != slots) {
      std::ostringstream os;
      os << name << ": expected " << slots << " entries, got " << v.size();
      throw InvalidArgument(os.str());
    }
    for (double x : v) {
      if (!std::isfinite(x) || x < 0.0) {
        throw InvalidArgument(std::string(name) + ": entries must be finite and nonnegative");
      }
    }
  };
  check(s.lambdas, "lambdas");
  check(s.etas, "etas");
  check(s.mus, "mus");
}

void verify(const GFrameFamily& family, PerturbationCertificate& cert, std::uint64_t trials,
            std::uint64_t seed, const Tolerance& tol) {
  const std::size_t m = family.members();
  const auto pairs = slot_pairs(cert, m);
  std::vector<Matrix> synth;
  synth.reserve(m);
  for (const auto& f : family.frames()) synth.push_back(synthesis_matrix(f));

  cert.difference_norms.assign(pairs.size(), 0.0);
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    const auto [j, partner] = pairs[s];
    if (j != partner) cert.difference_norms[s] = op_norm(synth[partner] - synth[j]);
  }

  const bool positive = cert.predicted_lower > 0.0;
  if (cert.mode == VerificationMode::ExactLambdaOnly) {
    // lambda_j >= ||T_partner - T_j|| bounds every subset J, since restricting
    // to J multiplies by a coordinate projection of norm <= 1.
    bool ok = true;
    for (std::size_t s = 0; s < pairs.size(); ++s) {
      if (pairs[s].first == pairs[s].second) continue;
      if (cert.scalars.lambdas[s] + tol.eq_atol < cert.difference_norms[s]) ok = false;
    }
    cert.status = !positive ? CertificateStatus::HypothesisFails
                  : ok      ? CertificateStatus::Valid
                            : CertificateStatus::ConditionViolated;
    return;
  }

  cert.trials = trials;
  cert.seed = seed;
  const GFrame& shape = family.member(0);
  const std::size_t n_idx = family.size();
  CounterRng root(seed);

  auto test = [&](std::size_t s, const std::vector<std::size_t>& subset, const Vector& g) -> bool {
    const auto [j, partner] = pairs[s];
    Vector tp = Vector::Zero(synth[0].rows());
    Vector tj = Vector::Zero(synth[0].rows());
    std::size_t pos = 0;
    for (std::size_t i : subset) {
      const auto d = static_cast<Eigen::Index>(shape.block(i).rows());
      const auto off = static_cast<Eigen::Index>(shape.offset(i));
      tp += synth[partner].middleCols(off, d) * g.segment(static_cast<Eigen::Index>(pos), d);
      tj += synth[j].middleCols(off, d) * g.segment(static_cast<Eigen::Index>(pos), d);
      pos += static_cast<std::size_t>(d);
    }
    const double lhs = (tp - tj).norm();
    const double rhs = cert.scalars.etas[s] * tp.norm() + cert.scalars.mus[s] * tj.norm() +
                       cert.scalars.lambdas[s] * g.norm();
    if (lhs > rhs + tol.eq_atol * std::max(1.0, rhs)) {
      cert.witness = Falsification{j, partner, subset, g, lhs, rhs};
      return false;
    }
    return true;
  };

  std::vector<std::size_t> full(n_idx);
  for (std::size_t i = 0; i < n_idx; ++i) full[i] = i;

  bool falsified = false;
  for (std::size_t s = 0; s < pairs.size() && !falsified; ++s) {
    if (pairs[s].first == pairs[s].second) continue;
    // Deterministic probe: full index set along the top right singular vector
    // of the synthesis difference.
    const Matrix diff = synth[pairs[s].second] - synth[pairs[s].first];
    Eigen::JacobiSVD<Matrix> svd(diff, Eigen::ComputeThinV);
    falsified = !test(s, full, svd.matrixV().col(0));
    for (std::uint64_t t = 0; t < trials && !falsified; ++t) {
      CounterRng rng = root.split(t * pairs.size() + s);
      std::vector<std::size_t> subset;
      for (std::size_t i = 0; i < n_idx; ++i) {
        if (rng.below(2) == 1) subset.push_back(i);
      }
      if (subset.empty()) subset = full;
      std::size_t len = 0;
      for (std::size_t i : subset) len += static_cast<std::size_t>(shape.block(i).rows());
      Vector g(static_cast<Eigen::Index>(len));
      for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = rng.complex_normal();
      falsified = !test(s, subset, g);
    }
  }
  cert.status = falsified   ? CertificateStatus::ConditionViolated
                : !positive ? CertificateStatus::HypothesisFails
                            : CertificateStatus::NotFalsified;
}

}  // namespace

double recompute_predicted_lower(const PerturbationCertificate& cert) {
  const auto& a = cert.member_lower;
  const auto& b = cert.member_upper;
  const auto& s = cert.scalars;
  if (cert.chained) {
    double acc = a.at(0);
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
      const double sj = std::sqrt(b[j]);
      const double sk = std::sqrt(b[j + 1]);
      acc -= (s.lambdas[j] + s.etas[j] * sj + s.mus[j] * sk) * (sj + sk);
    }
    return acc;
  }
  const std::size_t n = cert.base_index;
  const double sn = std::sqrt(b.at(n));
  double acc = a.at(n);
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (j == n) continue;
    const double sj = std::sqrt(b[j]);
    acc -= (s.lambdas[j] + s.etas[j] * sn + s.mus[j] * sj) * (sn + sj);
  }
  return acc;
}

namespace {

PerturbationCertificate make_certificate(const GFrameFamily& family, bool chained,
                                         std::size_t base, const PerturbationScalars& scalars,
                                         VerificationMode mode) {
  PerturbationCertificate cert;
  cert.chained = chained;
  cert.base_index = base;
  cert.scalars = scalars;
  cert.mode = mode;
  for (std::size_t j = 0; j < family.members(); ++j) {
    cert.member_lower.push_back(family.member_bounds(j).lower);
    cert.member_upper.push_back(family.member_bounds(j).upper);
    cert.predicted_upper += family.member_bounds(j).upper;
  }
  cert.predicted_lower = recompute_predicted_lower(cert);
  return cert;
}

}  // namespace

PerturbationCertificate perturbation_certificate(const GFrameFamily& family, std::size_t base,
                                                 const PerturbationScalars& scalars,
                                                 VerificationMode mode, std::uint64_t trials,
                                                 std::uint64_t seed, const Tolerance& tol) {
  if (base >= family.members()) {
    std::ostringstream os;
    os << "invalid base index " << base + 1 << " for " << family.members() << " members";
    throw InvalidArgument(os.str());
  }
  check_scalars(scalars, family.members());
  PerturbationCertificate cert = make_certificate(family, false, base, scalars, mode);
  verify(family, cert, trials, seed, tol);
  return cert;
}

PerturbationCertificate chained_certificate(const GFrameFamily& family,
                                            const PerturbationScalars& scalars,
                                            VerificationMode mode, std::uint64_t trials,
                                            std::uint64_t seed, const Tolerance& tol) {
  check_scalars(scalars, family.members() - 1);
  PerturbationCertificate cert = make_certificate(family, true, 0, scalars, mode);
  verify(family, cert, trials, seed, tol);
  return cert;
}

OperatorPerturbationReport operator_perturbation(const GFrame& frame, const std::vector<Matrix>& ops,
                                                 const Tolerance& tol, std::uint64_t budget) {
  const auto n = static_cast<Eigen::Index>(frame.ambient_dim());
  if (ops.size() != frame.size()) {
    throw InvalidArgument("operator_perturbation: expected one operator per index");
  }
  const FrameBounds fb = frame_bounds(frame, tol);
  if (!fb.is_frame()) throw NumericFailure("operator_perturbation: base family is not a g-frame");

  OperatorPerturbationReport r;
  r.lower = fb.lower;
  r.upper = fb.upper;
  r.uniform = true;
  std::vector<Matrix> blocks;
  blocks.reserve(frame.size());
  double beta = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const Matrix& t = ops[i];
    if (t.rows() != n || t.cols() != n) {
      std::ostringstream os;
      os << "operator " << i + 1 << " has shape " << shape_string(t) << ", expected " << n << "x"
         << n;
      throw InvalidArgument(os.str());
    }
    require_finite(t, "operator_perturbation");
    if (rank(t, tol) < static_cast<std::size_t>(n)) {
      std::ostringstream os;
      os << "operator " << i + 1 << " is singular at tolerance";
      throw NumericFailure(os.str());
    }
    if (i > 0 && t != ops[0]) r.uniform = false;
    const double defect = op_norm(Matrix::Identity(n, n) - t);
    r.max_defect_sq = std::max(r.max_defect_sq, defect * defect);
    const double bn = op_norm(frame.block(i));
    beta += bn * bn;
    blocks.push_back(frame.block(i) * t);
  }
  if (r.uniform) beta = r.upper;
  r.condition_holds = r.max_defect_sq < r.lower / r.upper;
  r.stated_lower = r.lower - r.upper * r.max_defect_sq;
  const double root = std::sqrt(r.lower) - std::sqrt(beta * r.max_defect_sq);
  r.triangle_lower = root > 0.0 ? root * root : 0.0;

  r.family.emplace(std::vector<GFrame>{frame, GFrame(frame.ambient_dim(), std::move(blocks))}, tol);
  if (r.family->partition_count() <= budget) {
    SearchOptions opts;
    opts.budget = budget;
    r.exhaustive = certify_woven(*r.family, opts, tol);
  }
  return r;
}

ScaledDualReport scaled_dual_weave(const GFrame& frame, const Tolerance& tol, std::uint64_t budget) {
  ScaledDualReport r;
  const FrameBounds fb = frame_bounds(frame, tol);
  r.lower = fb.lower;
  r.upper = fb.upper;
  if (!fb.is_frame()) {
    r.ratio = std::numeric_limits<double>::infinity();
    return r;
  }
  r.ratio = fb.upper / fb.lower;
  r.hypothesis_holds = r.ratio < 2.0;
  if (!r.hypothesis_holds) return r;

  const auto n = static_cast<Eigen::Index>(frame.ambient_dim());
  r.factor = 2.0 * fb.lower * fb.upper / (fb.lower + fb.upper);
  const Matrix t = r.factor * checked_inverse(frame_operator(frame), tol);
  const Matrix defect = Matrix::Identity(n, n) - t;
  r.spectral_bound = (fb.upper - fb.lower) / (fb.upper + fb.lower);
  const Extremes ev = hermitian_extremes(defect, tol);
  r.defect_norm = std::max(std::abs(ev.min), std::abs(ev.max));
  r.spectral_containment = ev.min >= -r.spectral_bound - tol.eq_atol &&
                           ev.max <= r.spectral_bound + tol.eq_atol;

  std::vector<Matrix> blocks;
  blocks.reserve(frame.size());
  for (const auto& b : frame.blocks()) blocks.push_back(b * t);
  r.scaled_dual.emplace(frame.ambient_dim(), std::move(blocks));

  r.perturbation = operator_perturbation(frame, std::vector<Matrix>(frame.size(), t), tol, budget);
  r.certified_woven = r.perturbation->condition_holds && r.perturbation->exhaustive &&
                      r.perturbation->exhaustive->status == WeaveStatus::Woven;
  return r;
}

}  // namespace gweave
