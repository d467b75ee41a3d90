#include "gweave/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gweave {

void Tolerance::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0 && v <= 1e-2; };
  if (!ok(rank_rtol) || !ok(frame_rtol) || !ok(eq_atol)) {
    throw InvalidArgument("tolerances must lie in (0, 1e-2]");
  }
}

bool all_finite(const Matrix& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const Complex z = m.data()[k];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) {
    throw NumericFailure(std::string(what) + ": non-finite entry");
  }
}

std::string shape_string(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

Matrix hermitian_part(const Matrix& m, const Tolerance& tol) {
  if (m.rows() != m.cols()) {
    throw InvalidArgument("expected a square matrix, got " + shape_string(m));
  }
  require_finite(m, "hermitian_part");
  if (m.size() == 0) return m;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol.eq_atol * scale) {
    std::ostringstream os;
    os << "matrix is not Hermitian: max |M - M^*| = " << asym;
    throw InvalidArgument(os.str());
  }
  return (m + m.adjoint()) * 0.5;
}

RealVector hermitian_eigenvalues(const Matrix& m, const Tolerance& tol) {
  const Matrix h = hermitian_part(m, tol);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericFailure("Hermitian eigendecomposition did not converge");
  }
  return es.eigenvalues();
}

Extremes hermitian_extremes(const Matrix& m, const Tolerance& tol) {
  if (m.rows() == 0) throw InvalidArgument("hermitian_extremes: empty matrix");
  const RealVector ev = hermitian_eigenvalues(m, tol);
  return {ev(0), ev(ev.size() - 1)};
}

RealVector singular_values(const Matrix& m) {
  require_finite(m, "singular_values");
  if (m.size() == 0) return RealVector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

Extremes singular_extremes(const Matrix& m) {
  if (m.size() == 0) throw InvalidArgument("singular_extremes: empty matrix");
  const RealVector sv = singular_values(m);
  return {sv(sv.size() - 1), sv(0)};
}

Matrix pinv(const Matrix& m, const Tolerance& tol) {
  require_finite(m, "pinv");
  Matrix out = Matrix::Zero(m.cols(), m.rows());
  if (m.size() == 0) return out;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  if (sv(0) == 0.0) return out;
  const double cutoff = tol.rank_rtol * sv(0);
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) <= cutoff) break;
    out += (svd.matrixV().col(k) / sv(k)) * svd.matrixU().col(k).adjoint();
  }
  return out;
}

double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

std::size_t rank(const Matrix& m, const Tolerance& tol) {
  if (m.size() == 0) return 0;
  const RealVector sv = singular_values(m);
  const double cutoff =
      tol.rank_rtol * sv(0) * static_cast<double>(std::max(m.rows(), m.cols()));
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff) ++r;
  }
  return r;
}

Matrix checked_inverse(const Matrix& m, const Tolerance& tol) {
  if (m.rows() != m.cols()) {
    throw InvalidArgument("expected a square matrix, got " + shape_string(m));
  }
  if (rank(m, tol) < static_cast<std::size_t>(m.rows())) {
    throw NumericFailure("matrix is singular at tolerance");
  }
  return m.fullPivLu().inverse();
}

Matrix psd_range_basis(const Matrix& psd, const Tolerance& tol) {
  const Matrix h = hermitian_part(psd, tol);
  const Eigen::Index n = h.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const RealVector& ev = es.eigenvalues();
  const double top = n > 0 ? ev(n - 1) : 0.0;
  if (top <= 0.0) return Matrix(n, 0);
  const double cutoff = tol.rank_rtol * top * static_cast<double>(n);
  Eigen::Index first = 0;
  while (first < n && ev(first) <= cutoff) ++first;
  return es.eigenvectors().rightCols(n - first);
}

std::optional<double> max_generalized_ratio(const Matrix& numer, const Matrix& denom,
                                            const Tolerance& tol) {
  const Matrix nh = hermitian_part(numer, tol);
  const Matrix dh = hermitian_part(denom, tol);
  if (nh.rows() != dh.rows()) {
    throw InvalidArgument("max_generalized_ratio: size mismatch " + shape_string(nh) +
                          " vs " + shape_string(dh));
  }
  const Eigen::Index n = dh.rows();
  if (n == 0) return 0.0;

  Eigen::SelfAdjointEigenSolver<Matrix> es(dh);
  if (es.info() != Eigen::Success) {
    throw NumericFailure("generalized ratio: eigendecomposition failed");
  }
  const RealVector& mu = es.eigenvalues();
  const double numer_norm = nh.cwiseAbs().maxCoeff();
  const double top = std::max(mu(n - 1), 0.0);
  const double cutoff = tol.rank_rtol * top * static_cast<double>(n);

  Eigen::Index first = 0;
  while (first < n && mu(first) <= cutoff) ++first;
  const Matrix kernel = es.eigenvectors().leftCols(first);
  const Matrix range = es.eigenvectors().rightCols(n - first);

  // ker D must lie inside ker N, otherwise the ratio blows up along it.
  const double scale = std::max(numer_norm, top);
  if (first > 0) {
    const double leak = op_norm(kernel.adjoint() * nh * kernel);
    if (leak > tol.rank_rtol * static_cast<double>(n) * scale && leak > 0.0) {
      return std::nullopt;
    }
  }
  if (range.cols() == 0) return 0.0;

  RealVector inv_sqrt(range.cols());
  for (Eigen::Index k = 0; k < range.cols(); ++k) inv_sqrt(k) = 1.0 / std::sqrt(mu(first + k));
  const Matrix w = range * inv_sqrt.asDiagonal();
  Matrix reduced = w.adjoint() * nh * w;
  reduced = (reduced + reduced.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Matrix> rs(reduced, Eigen::EigenvaluesOnly);
  return std::max(0.0, rs.eigenvalues()(reduced.rows() - 1));
}

}  // namespace gweave
