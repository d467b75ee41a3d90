#include "gweave/genlab.hpp"

#include "gweave/rng.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace gweave {

std::string_view to_string(GenKind k) {
  switch (k) {
    case GenKind::Parseval: return "parseval";
    case GenKind::PrescribedSpectrum: return "prescribed-spectrum";
    case GenKind::RieszBasis: return "riesz-basis";
    case GenKind::GOrthonormal: return "g-orthonormal";
    case GenKind::Perturbed: return "perturbed";
  }
  return "unknown";
}

GenKind gen_kind_from_string(std::string_view name) {
  for (GenKind k : {GenKind::Parseval, GenKind::PrescribedSpectrum, GenKind::RieszBasis,
                    GenKind::GOrthonormal, GenKind::Perturbed}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown generator kind '" + std::string(name) + "'");
}

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, CounterRng rng, bool complex) {
  Matrix g(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      g(r, c) = complex ? rng.complex_normal() : Complex(rng.normal(), 0.0);
    }
  }
  return g;
}

std::vector<Matrix> split_rows(const Matrix& analysis, const std::vector<std::size_t>& dims) {
  std::vector<Matrix> blocks;
  blocks.reserve(dims.size());
  Eigen::Index row = 0;
  for (std::size_t d : dims) {
    const auto di = static_cast<Eigen::Index>(d);
    blocks.emplace_back(analysis.middleRows(row, di));
    row += di;
  }
  return blocks;
}

// Analysis operator U diag(sqrt(s)) [I 0] V^*, transposed to sum(d) x n rows.
GFrame with_spectrum(std::size_t n, const std::vector<std::size_t>& dims,
                     const std::vector<double>& spectrum, CounterRng rng, bool complex) {
  const std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{0});
  const auto ni = static_cast<Eigen::Index>(n);
  const auto ti = static_cast<Eigen::Index>(total);
  const Matrix u = random_unitary(n, rng(), complex);
  const Matrix v = random_unitary(total, rng(), complex);
  Matrix core = Matrix::Zero(ni, ti);
  for (Eigen::Index k = 0; k < ni; ++k) core(k, k) = std::sqrt(spectrum[static_cast<std::size_t>(k)]);
  const Matrix synthesis = u * core * v.adjoint();
  return GFrame(n, split_rows(synthesis.adjoint(), dims));
}

void check_dims(const GenSpec& spec) {
  if (spec.ambient_dim == 0) throw InvalidArgument("ambient_dim must be positive");
  if (spec.block_dims.empty()) throw InvalidArgument("block_dims must be nonempty");
  for (std::size_t d : spec.block_dims) {
    if (d == 0) throw InvalidArgument("block dimensions must be positive");
  }
  const std::size_t total =
      std::accumulate(spec.block_dims.begin(), spec.block_dims.end(), std::size_t{0});
  const bool square = spec.kind == GenKind::RieszBasis || spec.kind == GenKind::GOrthonormal;
  if (square && total != spec.ambient_dim) {
    std::ostringstream os;
    os << to_string(spec.kind) << " needs sum(d_i) = n, got " << total << " and n = "
       << spec.ambient_dim;
    throw InvalidArgument(os.str());
  }
  if (total < spec.ambient_dim) {
    std::ostringstream os;
    os << "sum(d_i) = " << total << " is below n = " << spec.ambient_dim
       << "; no frame exists";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

Matrix random_unitary(std::size_t n, std::uint64_t seed, bool complex) {
  const auto ni = static_cast<Eigen::Index>(n);
  const Matrix g = gaussian(ni, ni, CounterRng(seed), complex);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(ni, ni);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < ni; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0.0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

Generated generate(const GenSpec& spec) {
  check_dims(spec);
  const std::size_t n = spec.ambient_dim;
  const CounterRng root(spec.seed);
  switch (spec.kind) {
    case GenKind::Parseval:
    case GenKind::GOrthonormal:
      return with_spectrum(n, spec.block_dims, std::vector<double>(n, 1.0), root, spec.complex);
    case GenKind::PrescribedSpectrum: {
      if (spec.spectrum.size() != n) {
        std::ostringstream os;
        os << "spectrum needs " << n << " entries, got " << spec.spectrum.size();
        throw InvalidArgument(os.str());
      }
      for (double s : spec.spectrum) {
        if (!std::isfinite(s) || s <= 0.0) throw InvalidArgument("spectrum entries must be > 0");
      }
      return with_spectrum(n, spec.block_dims, spec.spectrum, root, spec.complex);
    }
    case GenKind::RieszBasis: {
      std::vector<double> s = spec.spectrum;
      if (s.empty()) {
        CounterRng rng = root.split(0);
        for (std::size_t k = 0; k < n; ++k) s.push_back(rng.uniform(0.5, 2.0));
      } else if (s.size() != n) {
        throw InvalidArgument("spectrum length must equal n");
      }
      for (double x : s) {
        if (!std::isfinite(x) || x <= 0.0) throw InvalidArgument("spectrum entries must be > 0");
      }
      return with_spectrum(n, spec.block_dims, s, root.split(1), spec.complex);
    }
    case GenKind::Perturbed: {
      if (!std::isfinite(spec.noise_scale) || spec.noise_scale < 0.0) {
        throw InvalidArgument("noise_scale must be finite and nonnegative");
      }
      if (spec.members < 2) throw InvalidArgument("a perturbed family needs at least 2 members");
      const GFrame base = with_spectrum(n, spec.block_dims, std::vector<double>(n, 1.0),
                                        CounterRng(spec.base_seed), spec.complex);
      std::vector<GFrame> frames{base};
      for (std::size_t j = 1; j < spec.members; ++j) {
        CounterRng rng = root.split(j);
        std::vector<Matrix> blocks;
        for (const Matrix& b : base.blocks()) {
          Matrix noise = gaussian(b.rows(), b.cols(), rng.split(blocks.size()), spec.complex);
          const double nn = noise.norm();
          if (nn > 0.0) noise *= spec.noise_scale / nn;
          blocks.push_back(b + noise);
        }
        frames.emplace_back(n, std::move(blocks));
      }
      return GFrameFamily(std::move(frames));
    }
  }
  throw InvalidArgument("unknown generator kind");
}

Partition random_partition(std::size_t n_indices, std::size_t m, std::uint64_t seed) {
  if (n_indices == 0) throw InvalidArgument("random_partition: N must be at least 1");
  if (m == 0) throw InvalidArgument("random_partition: m must be at least 1");
  CounterRng rng(seed);
  Partition p;
  p.labels.reserve(n_indices);
  for (std::size_t i = 0; i < n_indices; ++i) p.labels.push_back(rng.below(m));
  return p;
}

}  // namespace gweave
