#pragma once

// Dense complex linear algebra with an explicit tolerance contract.
//
// Every routine here is a pure function of its arguments. Hermitian inputs are
// symmetrized before decomposition; asymmetry beyond Tolerance::eq_atol (scaled
// by the largest entry) is rejected instead of silently projected away.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace gweave {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Precondition violations: bad shapes, out-of-range labels, malformed input.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical operation could not produce a trustworthy answer
/// (singular operator at tolerance, non-finite data, failed decomposition).
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerance {
  /// Singular values at or below rank_rtol * sigma_max * max(rows, cols) count as zero.
  double rank_rtol = 1e-10;
  /// A family is a g-frame iff lower > frame_rtol * upper.
  double frame_rtol = 1e-12;
  /// Absolute slack for identity and inequality checks.
  double eq_atol = 1e-9;

  /// Throws InvalidArgument unless every field lies in (0, 1e-2].
  void validate() const;
};

struct Extremes {
  double min = 0.0;
  double max = 0.0;
};

bool all_finite(const Matrix& m);

/// Throws NumericFailure when any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// (M + M^*) / 2 after checking squareness and asymmetry.
Matrix hermitian_part(const Matrix& m, const Tolerance& tol = {});

/// Ascending eigenvalues of a Hermitian matrix.
RealVector hermitian_eigenvalues(const Matrix& m, const Tolerance& tol = {});

Extremes hermitian_extremes(const Matrix& m, const Tolerance& tol = {});

/// Singular values in descending order (min(rows, cols) of them).
RealVector singular_values(const Matrix& m);

/// sigma_min is taken over the min(rows, cols) singular values.
Extremes singular_extremes(const Matrix& m);

/// Moore-Penrose pseudo-inverse; singular values below rank_rtol * sigma_max
/// are treated as zero. The zero matrix maps to the (transposed-shape) zero matrix.
Matrix pinv(const Matrix& m, const Tolerance& tol = {});

double op_norm(const Matrix& m);

std::size_t rank(const Matrix& m, const Tolerance& tol = {});

/// Inverse of a square matrix, or NumericFailure if it is singular at tolerance.
Matrix checked_inverse(const Matrix& m, const Tolerance& tol = {});

/// Orthonormal basis (as columns) of the range of a Hermitian PSD matrix.
Matrix psd_range_basis(const Matrix& psd, const Tolerance& tol = {});

/// Largest value of x^* N x / x^* D x over x with x^* D x > 0, for Hermitian
/// PSD N and D. Returns std::nullopt when the ratio is unbounded, i.e. when
/// ker D is not contained in ker N. Returns 0 when both forms vanish.
std::optional<double> max_generalized_ratio(const Matrix& numer, const Matrix& denom,
                                            const Tolerance& tol = {});

std::string shape_string(const Matrix& m);

}  // namespace gweave
