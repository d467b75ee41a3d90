#include "gweave/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gweave {

namespace {

RieszBounds riesz_from_synthesis(const Matrix& t, const Tolerance& tol) {
  RieszBounds r;
  const RealVector sv = singular_values(t);
  r.upper = sv(0) * sv(0);
  // A wide synthesis matrix has cols - rows implicit zero singular values.
  r.lower = t.cols() > t.rows() ? 0.0 : sv(sv.size() - 1) * sv(sv.size() - 1);
  r.complete = rank(t, tol) == static_cast<std::size_t>(t.rows());
  r.is_basis = r.complete && r.is_sequence(tol);
  return r;
}

// Synthesis matrix of member j with the columns of every index whose label
// differs from j zeroed out.
Matrix masked_synthesis(const GFrameFamily& family, const Partition& p, std::size_t j) {
  const GFrame& member = family.member(j);
  Matrix t = synthesis_matrix(member);
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (p.labels[i] != j) {
      t.middleCols(static_cast<Eigen::Index>(member.offset(i)), member.block(i).rows()).setZero();
    }
  }
  return t;
}

void require_pair(const GFrameFamily& family, const char* who) {
  if (family.members() != 2) {
    throw InvalidArgument(std::string(who) + ": needs exactly two members");
  }
}

}  // namespace

RieszBounds riesz_bounds(const GFrame& frame, const Tolerance& tol) {
  return riesz_from_synthesis(synthesis_matrix(frame), tol);
}

WeavingRieszReport weaving_riesz_check(const GFrameFamily& family, const Tolerance& tol,
                                       std::uint64_t budget) {
  require_pair(family, "weaving_riesz_check");
  for (std::size_t j = 0; j < 2; ++j) {
    if (!riesz_bounds(family.member(j), tol).is_basis) {
      std::ostringstream os;
      os << "weaving_riesz_check: member " << j + 1 << " is not a g-Riesz basis";
      throw InvalidArgument(os.str());
    }
  }
  require_exhaustive_budget(family, budget);
  const std::uint64_t total = family.partition_count();

  WeavingRieszReport report;
  report.per_partition.reserve(total);
  report.common_lower = std::numeric_limits<double>::infinity();
  report.all_riesz_sequences = true;
  report.all_riesz_bases = true;
  for (std::uint64_t k = 0; k < total; ++k) {
    const Partition p = partition_from_index(k, family.size(), 2);
    const RieszBounds rb = riesz_bounds(assemble_weaving(family, p), tol);
    report.common_lower = std::min(report.common_lower, rb.lower);
    report.common_upper = std::max(report.common_upper, rb.upper);
    report.all_riesz_sequences = report.all_riesz_sequences && rb.is_sequence(tol);
    if (!rb.is_basis) {
      report.all_riesz_bases = false;
      if (!report.first_failure) report.first_failure = p;
    }
    report.per_partition.push_back(rb);
  }
  return report;
}

GFrameFamily permuted_pair(const GFrame& frame, const std::vector<std::size_t>& pi,
                           const Tolerance& tol) {
  const std::size_t n_idx = frame.size();
  if (pi.size() != n_idx) throw InvalidArgument("permutation has the wrong length");
  std::vector<bool> seen(n_idx, false);
  for (std::size_t i = 0; i < n_idx; ++i) {
    if (pi[i] >= n_idx || seen[pi[i]]) throw InvalidArgument("pi is not a permutation");
    seen[pi[i]] = true;
    if (frame.block(pi[i]).rows() != frame.block(i).rows()) {
      std::ostringstream os;
      os << "block dimension mismatch under pi: d_" << pi[i] + 1 << " != d_" << i + 1;
      throw InvalidArgument(os.str());
    }
  }
  std::vector<Matrix> blocks;
  blocks.reserve(n_idx);
  for (std::size_t i = 0; i < n_idx; ++i) blocks.push_back(frame.block(pi[i]));
  return GFrameFamily({frame, GFrame(frame.ambient_dim(), std::move(blocks))}, tol);
}

PermutationWeaveReport permutation_weave(const GFrame& frame, const std::vector<std::size_t>& pi,
                                         const Tolerance& tol) {
  const RieszBounds base = riesz_bounds(frame, tol);
  if (!base.is_basis) throw InvalidArgument("permutation_weave: frame is not a g-Riesz basis");
  const GFrameFamily family = permuted_pair(frame, pi, tol);

  PermutationWeaveReport report;
  report.lower = base.lower;
  report.upper = base.upper;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] != i) {
      report.identity = false;
      if (!report.witness) {
        Partition w;
        w.labels.assign(pi.size(), 0);
        w.labels[i] = 1;
        report.witness = w;
      }
    }
  }

  report.span_lower_min = std::numeric_limits<double>::infinity();
  const std::uint64_t total = family.partition_count();
  for (std::uint64_t k = 0; k < total; ++k) {
    const Partition p = partition_from_index(k, family.size(), 2);
    const Matrix t = synthesis_matrix(assemble_weaving(family, p));
    const RealVector sv = singular_values(t);
    const double cutoff =
        tol.rank_rtol * sv(0) * static_cast<double>(std::max(t.rows(), t.cols()));
    for (Eigen::Index s = 0; s < sv.size(); ++s) {
      if (sv(s) <= cutoff) break;
      report.span_lower_min = std::min(report.span_lower_min, sv(s) * sv(s));
      report.span_upper_max = std::max(report.span_upper_max, sv(s) * sv(s));
    }
  }
  report.span_bounds_hold = report.span_lower_min >= report.lower - tol.eq_atol &&
                            report.span_upper_max <= 2.0 * report.upper + tol.eq_atol;

  report.certification = certify_woven(family, {}, tol);
  report.woven = report.certification.status == WeaveStatus::Woven;
  if (report.witness) {
    const GFrame w = assemble_weaving(family, *report.witness);
    report.witness_fails_to_span = rank(analysis_matrix(w), tol) < frame.ambient_dim();
  }
  return report;
}

EquivalenceConstants equivalence_constants(const GFrameFamily& family, const Tolerance& tol,
                                           std::uint64_t budget) {
  require_pair(family, "equivalence_constants");
  for (std::size_t j = 0; j < 2; ++j) {
    if (!riesz_bounds(family.member(j), tol).is_sequence(tol)) {
      std::ostringstream os;
      os << "equivalence_constants: member " << j + 1 << " is not a g-Riesz sequence";
      throw InvalidArgument(os.str());
    }
  }
  require_exhaustive_budget(family, budget);

  EquivalenceConstants out;
  out.riesz_low = std::numeric_limits<double>::infinity();
  double a2 = std::numeric_limits<double>::infinity();
  double d3 = std::numeric_limits<double>::infinity();
  const std::uint64_t total = family.partition_count();
  for (std::uint64_t k = 0; k < total; ++k) {
    const Partition p = partition_from_index(k, family.size(), 2);
    const Matrix y = masked_synthesis(family, p, 0);
    const Matrix x = masked_synthesis(family, p, 1);
    const Matrix s = y + x;

    const RieszBounds rb = riesz_from_synthesis(s, tol);
    out.riesz_low = std::min(out.riesz_low, rb.lower);
    out.riesz_up = std::max(out.riesz_up, rb.upper);

    const Matrix gram = s.adjoint() * s;
    bool degenerate = false;
    const std::optional<double> ra = max_generalized_ratio(y.adjoint() * y, gram, tol);
    if (!ra) {
      a2 = 0.0;
      degenerate = true;
    } else if (*ra > 0.0) {
      a2 = std::min(a2, 1.0 / *ra);
    }
    const std::optional<double> rd =
        max_generalized_ratio(y.adjoint() * y + x.adjoint() * x, gram, tol);
    if (!rd) {
      d3 = 0.0;
      degenerate = true;
    } else if (*rd > 0.0) {
      d3 = std::min(d3, 1.0 / *rd);
    }
    if (degenerate) out.degenerate_partitions.push_back(p);
  }
  out.a2 = std::isfinite(a2) ? a2 : 0.0;
  out.d3 = std::isfinite(d3) ? d3 : 0.0;
  out.e4 = out.a2;
  return out;
}

}  // namespace gweave
