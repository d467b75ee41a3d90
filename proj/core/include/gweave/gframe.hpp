#pragma once

// g-frames on a finite-dimensional ambient space.
//
// A GFrame holds N blocks; block i is a d_i x n matrix representing the
// operator Lambda_i : C^n -> C^{d_i}. The coefficient space is the direct sum
// of the C^{d_i}, stored as one stacked vector of length sum(d_i).
//
//   synthesis  T{g_i} = sum_i Lambda_i^* g_i      (n x sum d_i)
//   analysis   T^* f  = (Lambda_i f)_i            (sum d_i x n)
//   frame op.  S = T T^* = sum_i Lambda_i^* Lambda_i

#include "gweave/numkernel.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace gweave {

class GFrame {
 public:
  /// Throws InvalidArgument on N = 0, empty blocks, or a column count other
  /// than ambient_dim; NumericFailure on non-finite entries.
  GFrame(std::size_t ambient_dim, std::vector<Matrix> blocks);

  std::size_t ambient_dim() const noexcept { return ambient_dim_; }
  std::size_t size() const noexcept { return blocks_.size(); }
  const Matrix& block(std::size_t i) const { return blocks_.at(i); }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }

  std::vector<std::size_t> block_dims() const;
  /// sum of d_i, the dimension of the coefficient space.
  std::size_t coefficient_dim() const noexcept { return coefficient_dim_; }
  /// Offset of block i inside a stacked coefficient vector.
  std::size_t offset(std::size_t i) const { return offsets_.at(i); }

 private:
  std::size_t ambient_dim_;
  std::vector<Matrix> blocks_;
  std::vector<std::size_t> offsets_;
  std::size_t coefficient_dim_ = 0;
};

/// An element {g_i} of the coefficient space, segmented by block.
class CoefficientVector {
 public:
  /// Zero vector shaped for `frame`.
  explicit CoefficientVector(const GFrame& frame);
  CoefficientVector(const GFrame& frame, Vector stacked);

  std::size_t segments() const noexcept { return offsets_.size(); }
  Eigen::VectorBlock<const Vector> segment(std::size_t i) const;
  Eigen::VectorBlock<Vector> segment(std::size_t i);
  const Vector& stacked() const noexcept { return stacked_; }

  /// sum_i ||g_i||^2.
  double squared_norm() const { return stacked_.squaredNorm(); }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> dims_;
  Vector stacked_;
};

// Every finite family is Bessel, so frame_bounds only ever yields GFrame or
// Degenerate; the other two labels exist for report schemas.
enum class FrameClass {
  GFrame,
  BesselOnly,
  NotBessel,
  Degenerate,
};

std::string_view to_string(FrameClass c);

struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
  FrameClass classification = FrameClass::Degenerate;

  bool is_frame() const noexcept { return classification == FrameClass::GFrame; }
};

Matrix synthesis_matrix(const GFrame& frame);
Matrix analysis_matrix(const GFrame& frame);
Matrix frame_operator(const GFrame& frame);

/// Frame operator with the sum restricted to the indices in `subset`.
Matrix partial_frame_operator(const GFrame& frame, std::span<const std::size_t> subset);

/// Optimal bounds: the extreme eigenvalues of the frame operator.
FrameBounds frame_bounds(const GFrame& frame, const Tolerance& tol = {});
FrameBounds classify_bounds(double lower, double upper, const Tolerance& tol = {});

Vector synthesize(const GFrame& frame, const CoefficientVector& g);
CoefficientVector analyze(const GFrame& frame, const Vector& f);

/// Blocks Lambda_i S^{-1}. Throws NumericFailure if the frame is degenerate.
GFrame canonical_dual(const GFrame& frame, const Tolerance& tol = {});

/// The classical frame u_{i,j} = Lambda_i^* e_{i,j}, one 1 x n row functional
/// per (i, j) ordered by i then j; the row for u_{i,j} is row j of Lambda_i.
GFrame induced_frame(const GFrame& frame);

/// T^* T = I on the coefficient space and S = I on the ambient space.
bool is_g_orthonormal(const GFrame& frame, const Tolerance& tol = {});

/// Blocks Lambda_i T for square T invertible at tolerance.
GFrame apply_operator(const GFrame& frame, const Matrix& op, const Tolerance& tol = {});

/// Blocks a_i Lambda_i.
GFrame scale_blocks(const GFrame& frame, std::span<const Complex> scalars);

/// Keep only the listed indices, in the given order.
GFrame select_blocks(const GFrame& frame, std::span<const std::size_t> indices);

/// Maximum entrywise distance between corresponding blocks; requires matching shapes.
double block_distance(const GFrame& a, const GFrame& b);

}  // namespace gweave
