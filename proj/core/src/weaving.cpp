#include "gweave/weaving.hpp"

#include "gweave/rng.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace gweave {

namespace {

// Per-(index, member) Gram blocks Lambda_ij^* Lambda_ij, so that the frame
// operator of a weaving is a sum of N precomputed n x n terms.
class GramTable {
 public:
  explicit GramTable(const GFrameFamily& family)
      : n_indices_(family.size()), members_(family.members()) {
    grams_.reserve(n_indices_ * members_);
    for (std::size_t i = 0; i < n_indices_; ++i) {
      for (std::size_t j = 0; j < members_; ++j) {
        const Matrix& b = family.block(i, j);
        grams_.push_back(b.adjoint() * b);
      }
    }
  }

  void weaving_operator(const std::vector<std::size_t>& labels, Matrix& out) const {
    out.setZero();
    for (std::size_t i = 0; i < n_indices_; ++i) out += grams_[i * members_ + labels[i]];
  }

 private:
  std::size_t n_indices_;
  std::size_t members_;
  std::vector<Matrix> grams_;
};

void next_labels(std::vector<std::size_t>& labels, std::size_t m) {
  for (std::size_t i = labels.size(); i-- > 0;) {
    if (++labels[i] < m) return;
    labels[i] = 0;
  }
}

struct Extreme {
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();
  std::uint64_t lower_at = 0;
  std::uint64_t upper_at = 0;
  std::uint64_t count = 0;

  // Strict comparison keeps the first (smallest-index) witness within a chunk.
  void observe(double lo, double hi, std::uint64_t key) {
    if (count == 0 || lo < lower) {
      lower = lo;
      lower_at = key;
    }
    if (count == 0 || hi > upper) {
      upper = hi;
      upper_at = key;
    }
    ++count;
  }

  void merge(const Extreme& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    if (other.lower < lower || (other.lower == lower && other.lower_at < lower_at)) {
      lower = other.lower;
      lower_at = other.lower_at;
    }
    if (other.upper > upper || (other.upper == upper && other.upper_at < upper_at)) {
      upper = other.upper;
      upper_at = other.upper_at;
    }
    count += other.count;
  }
};

Extremes weaving_extremes(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  const RealVector& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

// Lexicographic comparison of label vectors, used to order sampled witnesses.
bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::uint64_t default_budget() {
  if (const char* env = std::getenv("GWEAVE_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::uint64_t>(v);
  }
  return kDefaultBudget;
}

BudgetExceeded::BudgetExceeded(std::uint64_t needed, std::uint64_t budget, std::string what)
    : InvalidArgument(std::move(what)), needed_(needed), budget_(budget) {}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp) noexcept {
  std::uint64_t r = 1;
  for (std::uint64_t k = 0; k < exp; ++k) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r *= base;
  }
  return r;
}

Partition partition_from_index(std::uint64_t k, std::size_t n_indices, std::size_t m) {
  Partition p;
  p.labels.assign(n_indices, 0);
  for (std::size_t i = n_indices; i-- > 0;) {
    p.labels[i] = static_cast<std::size_t>(k % m);
    k /= m;
  }
  return p;
}

std::uint64_t partition_index(const Partition& p, std::size_t m) {
  std::uint64_t k = 0;
  for (std::size_t label : p.labels) k = k * m + label;
  return k;
}

GFrameFamily::GFrameFamily(std::vector<GFrame> frames, const Tolerance& tol,
                           bool allow_degenerate)
    : frames_(std::move(frames)) {
  if (frames_.size() < 2) throw InvalidArgument("GFrameFamily: need at least two members");
  const GFrame& first = frames_.front();
  for (std::size_t j = 1; j < frames_.size(); ++j) {
    const GFrame& f = frames_[j];
    if (f.ambient_dim() != first.ambient_dim() || f.size() != first.size() ||
        f.block_dims() != first.block_dims()) {
      std::ostringstream os;
      os << "GFrameFamily: member " << j << " disagrees with member 0 on ambient dimension, "
         << "index count or block dimensions";
      throw InvalidArgument(os.str());
    }
  }
  bounds_.reserve(frames_.size());
  for (std::size_t j = 0; j < frames_.size(); ++j) {
    bounds_.push_back(frame_bounds(frames_[j], tol));
    if (!allow_degenerate && !bounds_.back().is_frame()) {
      std::ostringstream os;
      os << "GFrameFamily: member " << j << " is not a g-frame (lower bound "
         << bounds_.back().lower << ")";
      throw InvalidArgument(os.str());
    }
  }
}

std::uint64_t GFrameFamily::partition_count() const noexcept {
  return saturating_pow(members(), size());
}

std::string_view to_string(WeaveStatus s) {
  switch (s) {
    case WeaveStatus::Woven: return "woven";
    case WeaveStatus::NotWoven: return "not-woven";
    case WeaveStatus::SampledNoCounterexample: return "sampled-no-counterexample";
  }
  return "unknown";
}

std::string_view to_string(SearchMode m) {
  return m == SearchMode::Exhaustive ? "exhaustive" : "sampled";
}

void validate_partition(const GFrameFamily& family, const Partition& p) {
  if (p.labels.size() != family.size()) {
    std::ostringstream os;
    os << "partition has " << p.labels.size() << " labels, family has " << family.size()
       << " indices";
    throw InvalidArgument(os.str());
  }
  for (std::size_t i = 0; i < p.labels.size(); ++i) {
    if (p.labels[i] >= family.members()) {
      std::ostringstream os;
      os << "partition label " << p.labels[i] + 1 << " at index " << i + 1
         << " is outside 1.." << family.members();
      throw InvalidArgument(os.str());
    }
  }
}

GFrame assemble_weaving(const GFrameFamily& family, const Partition& p) {
  validate_partition(family, p);
  std::vector<Matrix> blocks;
  blocks.reserve(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) blocks.push_back(family.block(i, p.labels[i]));
  return GFrame(family.ambient_dim(), std::move(blocks));
}

void require_exhaustive_budget(const GFrameFamily& family, std::uint64_t budget) {
  const std::uint64_t total = family.partition_count();
  if (total > budget) {
    std::ostringstream os;
    os << "exhaustive search needs m^N = " << family.members() << "^" << family.size();
    if (total == std::numeric_limits<std::uint64_t>::max()) {
      os << " (overflows 64 bits)";
    } else {
      os << " = " << total;
    }
    os << " partitions, budget is " << budget;
    throw BudgetExceeded(total, budget, os.str());
  }
}

WeavingReport certify_woven(const GFrameFamily& family, const SearchOptions& options,
                            const Tolerance& tol) {
  const std::size_t n_idx = family.size();
  const std::size_t m = family.members();
  const auto n = static_cast<Eigen::Index>(family.ambient_dim());
  const GramTable grams(family);

  WeavingReport report;
  report.mode = options.mode;

  if (options.mode == SearchMode::Exhaustive) {
    require_exhaustive_budget(family, options.budget);
    const std::uint64_t total = family.partition_count();
    std::vector<Extreme> partial(detail::chunk_count(options.threads, total));
    detail::parallel_chunks(total, options.threads,
                            [&](unsigned chunk, std::uint64_t begin, std::uint64_t end) {
                              Matrix s(n, n);
                              Partition p = partition_from_index(begin, n_idx, m);
                              Extreme local;
                              for (std::uint64_t k = begin; k < end; ++k) {
                                grams.weaving_operator(p.labels, s);
                                const Extremes e = weaving_extremes(s);
                                local.observe(e.min, e.max, k);
                                next_labels(p.labels, m);
                              }
                              partial[chunk] = local;
                            });
    Extreme all;
    for (const auto& e : partial) all.merge(e);
    report.universal_lower = std::max(0.0, all.lower);
    report.universal_upper = std::max(report.universal_lower, all.upper);
    report.witness_lower = partition_from_index(all.lower_at, n_idx, m);
    report.witness_upper = partition_from_index(all.upper_at, n_idx, m);
    report.partitions_checked = all.count;
    report.status = report.universal_lower > tol.frame_rtol * report.universal_upper
                        ? WeaveStatus::Woven
                        : WeaveStatus::NotWoven;
    return report;
  }

  // Sampled: draw t uses stream (seed, t), so results do not depend on threading.
  report.seed = options.seed;
  const std::uint64_t total = options.budget;
  if (total == 0) throw InvalidArgument("sampled search needs a positive budget");
  struct Best {
    double value;
    std::vector<std::size_t> labels;
  };
  struct Local {
    std::optional<Best> low;
    std::optional<Best> high;
    std::uint64_t count = 0;
  };
  std::vector<Local> partial(detail::chunk_count(options.threads, total));
  const CounterRng root(options.seed);
  detail::parallel_chunks(total, options.threads,
                          [&](unsigned chunk, std::uint64_t begin, std::uint64_t end) {
                            Matrix s(n, n);
                            std::vector<std::size_t> labels(n_idx);
                            Local local;
                            for (std::uint64_t t = begin; t < end; ++t) {
                              CounterRng rng = root.split(t);
                              for (auto& l : labels) l = static_cast<std::size_t>(rng.below(m));
                              grams.weaving_operator(labels, s);
                              const Extremes e = weaving_extremes(s);
                              if (!local.low || e.min < local.low->value ||
                                  (e.min == local.low->value && lex_less(labels, local.low->labels))) {
                                local.low = Best{e.min, labels};
                              }
                              if (!local.high || e.max > local.high->value ||
                                  (e.max == local.high->value && lex_less(labels, local.high->labels))) {
                                local.high = Best{e.max, labels};
                              }
                              ++local.count;
                            }
                            partial[chunk] = std::move(local);
                          });
  Local all;
  for (auto& p : partial) {
    if (p.low && (!all.low || p.low->value < all.low->value ||
                  (p.low->value == all.low->value && lex_less(p.low->labels, all.low->labels)))) {
      all.low = p.low;
    }
    if (p.high && (!all.high || p.high->value > all.high->value ||
                   (p.high->value == all.high->value && lex_less(p.high->labels, all.high->labels)))) {
      all.high = p.high;
    }
    all.count += p.count;
  }
  report.universal_lower = std::max(0.0, all.low->value);
  report.universal_upper = std::max(report.universal_lower, all.high->value);
  report.witness_lower.labels = all.low->labels;
  report.witness_upper.labels = all.high->labels;
  report.partitions_checked = all.count;
  report.status = report.universal_lower > tol.frame_rtol * report.universal_upper
                      ? WeaveStatus::SampledNoCounterexample
                      : WeaveStatus::NotWoven;
  return report;
}

SpanResult span_criterion(const GFrameFamily& family, std::uint64_t budget, const Tolerance& tol,
                          unsigned threads) {
  require_exhaustive_budget(family, budget);
  const std::size_t n_idx = family.size();
  const std::size_t m = family.members();
  const std::size_t n = family.ambient_dim();
  const std::uint64_t total = family.partition_count();
  constexpr std::uint64_t none = std::numeric_limits<std::uint64_t>::max();

  std::vector<std::uint64_t> first_failure(detail::chunk_count(threads, total), none);
  detail::parallel_chunks(total, threads, [&](unsigned chunk, std::uint64_t begin, std::uint64_t end) {
    Partition p = partition_from_index(begin, n_idx, m);
    for (std::uint64_t k = begin; k < end; ++k) {
      const GFrame w = assemble_weaving(family, p);
      if (rank(analysis_matrix(w), tol) < n) {
        first_failure[chunk] = k;
        return;
      }
      next_labels(p.labels, m);
    }
  });
  const std::uint64_t worst = *std::min_element(first_failure.begin(), first_failure.end());
  SpanResult result;
  if (worst != none) {
    result.holds = false;
    result.witness = partition_from_index(worst, n_idx, m);
  }
  return result;
}

double bessel_sum_bound(const GFrameFamily& family) {
  double sum = 0.0;
  for (std::size_t j = 0; j < family.members(); ++j) sum += family.member_bounds(j).upper;
  return sum;
}

ScaledFamily scaled_family(const GFrameFamily& family,
                           const std::vector<std::vector<Complex>>& scalars, double base_lower,
                           double base_upper, const Tolerance& tol) {
  if (scalars.size() != family.members()) {
    throw InvalidArgument("scaled_family: expected one scalar list per member");
  }
  double c = std::numeric_limits<double>::infinity();
  double d = 0.0;
  std::vector<GFrame> frames;
  frames.reserve(family.members());
  for (std::size_t j = 0; j < family.members(); ++j) {
    if (scalars[j].size() != family.size()) {
      throw InvalidArgument("scaled_family: expected one scalar per index");
    }
    for (const Complex& a : scalars[j]) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
        throw InvalidArgument("scaled_family: non-finite scalar");
      }
      c = std::min(c, std::norm(a));
      d = std::max(d, std::norm(a));
    }
    frames.push_back(scale_blocks(family.member(j), scalars[j]));
  }
  if (c <= 0.0) {
    throw InvalidArgument("scaled_family: a zero scalar collapses the lower bound (C = 0)");
  }
  GFrameFamily scaled(std::move(frames), tol);
  return ScaledFamily{std::move(scaled), c, d, base_lower * c, base_upper * d};
}

GFrameFamily restrict_family(const GFrameFamily& family, const std::vector<std::size_t>& keep,
                             const Tolerance& tol) {
  if (keep.empty()) throw InvalidArgument("restrict_family: index subset must be nonempty");
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] >= family.size()) throw InvalidArgument("restrict_family: index out of range");
    if (k > 0 && keep[k] <= keep[k - 1]) {
      throw InvalidArgument("restrict_family: indices must be strictly increasing");
    }
  }
  std::vector<GFrame> frames;
  frames.reserve(family.members());
  for (const auto& f : family.frames()) frames.push_back(select_blocks(f, keep));
  return GFrameFamily(std::move(frames), tol, /*allow_degenerate=*/true);
}

RemovalReport removal_bound(const GFrameFamily& family, const std::vector<std::size_t>& removed,
                            const Tolerance& tol, std::uint64_t budget) {
  if (family.members() != 2) throw InvalidArgument("removal_bound: needs exactly two members");
  std::vector<bool> drop(family.size(), false);
  for (std::size_t i : removed) {
    if (i >= family.size()) throw InvalidArgument("removal_bound: index out of range");
    drop[i] = true;
  }
  SearchOptions opts;
  opts.budget = budget;
  const WeavingReport full = certify_woven(family, opts, tol);
  if (full.status != WeaveStatus::Woven) {
    throw InvalidArgument("removal_bound: the pair is not woven");
  }

  RemovalReport r;
  r.universal_lower = full.universal_lower;
  r.universal_upper = full.universal_upper;
  std::vector<std::size_t> dropped;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (drop[i]) {
      dropped.push_back(i);
    } else {
      r.kept.push_back(i);
    }
  }
  r.removed_bound =
      dropped.empty() ? 0.0
                      : std::max(0.0, hermitian_extremes(partial_frame_operator(family.member(0), dropped), tol).max);
  r.predicted_lower = r.universal_lower - r.removed_bound;
  r.hypothesis_holds = r.removed_bound < r.universal_lower;
  if (r.kept.empty()) return r;

  const GFrameFamily rest = restrict_family(family, r.kept, tol);
  r.restricted = certify_woven(rest, opts, tol);
  r.members_are_frames = rest.member_bounds(0).is_frame() && rest.member_bounds(1).is_frame();
  return r;
}

double frame_op_norm_check(const GFrameFamily& family, const Partition& p, double universal_upper,
                           std::size_t trials, std::uint64_t seed) {
  validate_partition(family, p);
  const auto n = static_cast<Eigen::Index>(family.ambient_dim());
  const std::size_t m = family.members();

  std::vector<Matrix> restricted(m, Matrix::Zero(n, n));
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Matrix& b = family.block(i, p.labels[i]);
    restricted[p.labels[i]] += b.adjoint() * b;
  }
  Matrix s_psi = Matrix::Zero(n, n);
  for (const auto& r : restricted) s_psi += r;
  const double rhs = universal_upper * op_norm(s_psi);

  CounterRng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  Vector f(n);
  for (std::size_t t = 0; t < trials; ++t) {
    for (Eigen::Index k = 0; k < n; ++k) f(k) = rng.complex_normal();
    const double norm = f.norm();
    if (norm == 0.0) continue;
    f /= norm;
    double lhs = 0.0;
    for (const auto& r : restricted) lhs += (r * f).squaredNorm();
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

}  // namespace gweave
