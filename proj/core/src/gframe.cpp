#include "gweave/gframe.hpp"

#include <algorithm>
#include <sstream>

namespace gweave {

GFrame::GFrame(std::size_t ambient_dim, std::vector<Matrix> blocks)
    : ambient_dim_(ambient_dim), blocks_(std::move(blocks)) {
  if (ambient_dim_ == 0) throw InvalidArgument("GFrame: ambient dimension must be positive");
  if (blocks_.empty()) throw InvalidArgument("GFrame: index set must be nonempty");
  offsets_.reserve(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Matrix& b = blocks_[i];
    if (b.rows() < 1 || static_cast<std::size_t>(b.cols()) != ambient_dim_) {
      std::ostringstream os;
      os << "GFrame: block " << i << " has shape " << shape_string(b) << ", expected d x "
         << ambient_dim_ << " with d >= 1";
      throw InvalidArgument(os.str());
    }
    require_finite(b, "GFrame block");
    offsets_.push_back(coefficient_dim_);
    coefficient_dim_ += static_cast<std::size_t>(b.rows());
  }
}

std::vector<std::size_t> GFrame::block_dims() const {
  std::vector<std::size_t> dims;
  dims.reserve(blocks_.size());
  for (const auto& b : blocks_) dims.push_back(static_cast<std::size_t>(b.rows()));
  return dims;
}

CoefficientVector::CoefficientVector(const GFrame& frame)
    : CoefficientVector(frame, Vector::Zero(static_cast<Eigen::Index>(frame.coefficient_dim()))) {}

CoefficientVector::CoefficientVector(const GFrame& frame, Vector stacked)
    : dims_(frame.block_dims()), stacked_(std::move(stacked)) {
  if (static_cast<std::size_t>(stacked_.size()) != frame.coefficient_dim()) {
    throw InvalidArgument("CoefficientVector: length does not match the frame's block dimensions");
  }
  offsets_.reserve(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) offsets_.push_back(frame.offset(i));
}

Eigen::VectorBlock<const Vector> CoefficientVector::segment(std::size_t i) const {
  return stacked_.segment(static_cast<Eigen::Index>(offsets_.at(i)),
                          static_cast<Eigen::Index>(dims_.at(i)));
}

Eigen::VectorBlock<Vector> CoefficientVector::segment(std::size_t i) {
  return stacked_.segment(static_cast<Eigen::Index>(offsets_.at(i)),
                          static_cast<Eigen::Index>(dims_.at(i)));
}

std::string_view to_string(FrameClass c) {
  switch (c) {
    case FrameClass::GFrame: return "g-frame";
    case FrameClass::BesselOnly: return "g-bessel-only";
    case FrameClass::NotBessel: return "not-bessel";
    case FrameClass::Degenerate: return "degenerate";
  }
  return "unknown";
}

Matrix analysis_matrix(const GFrame& frame) {
  const auto n = static_cast<Eigen::Index>(frame.ambient_dim());
  Matrix out(static_cast<Eigen::Index>(frame.coefficient_dim()), n);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const Matrix& b = frame.block(i);
    out.middleRows(static_cast<Eigen::Index>(frame.offset(i)), b.rows()) = b;
  }
  return out;
}

Matrix synthesis_matrix(const GFrame& frame) { return analysis_matrix(frame).adjoint(); }

Matrix frame_operator(const GFrame& frame) {
  const auto n = static_cast<Eigen::Index>(frame.ambient_dim());
  Matrix s = Matrix::Zero(n, n);
  for (const auto& b : frame.blocks()) s.noalias() += b.adjoint() * b;
  return (s + s.adjoint()) * 0.5;
}

Matrix partial_frame_operator(const GFrame& frame, std::span<const std::size_t> subset) {
  const auto n = static_cast<Eigen::Index>(frame.ambient_dim());
  Matrix s = Matrix::Zero(n, n);
  for (std::size_t i : subset) {
    const Matrix& b = frame.block(i);
    s.noalias() += b.adjoint() * b;
  }
  return (s + s.adjoint()) * 0.5;
}

FrameBounds classify_bounds(double lower, double upper, const Tolerance& tol) {
  FrameBounds fb;
  fb.lower = std::max(0.0, lower);
  fb.upper = std::max(fb.lower, upper);
  fb.classification = (fb.upper > 0.0 && fb.lower > tol.frame_rtol * fb.upper)
                          ? FrameClass::GFrame
                          : FrameClass::Degenerate;
  return fb;
}

FrameBounds frame_bounds(const GFrame& frame, const Tolerance& tol) {
  const Extremes e = hermitian_extremes(frame_operator(frame), tol);
  return classify_bounds(e.min, e.max, tol);
}

Vector synthesize(const GFrame& frame, const CoefficientVector& g) {
  return synthesis_matrix(frame) * g.stacked();
}

CoefficientVector analyze(const GFrame& frame, const Vector& f) {
  if (static_cast<std::size_t>(f.size()) != frame.ambient_dim()) {
    throw InvalidArgument("analyze: vector length does not match the ambient dimension");
  }
  return CoefficientVector(frame, analysis_matrix(frame) * f);
}

GFrame canonical_dual(const GFrame& frame, const Tolerance& tol) {
  if (!frame_bounds(frame, tol).is_frame()) {
    throw NumericFailure("canonical_dual: frame operator is not invertible at tolerance");
  }
  const Matrix s_inv = checked_inverse(frame_operator(frame), tol);
  std::vector<Matrix> blocks;
  blocks.reserve(frame.size());
  for (const auto& b : frame.blocks()) blocks.push_back(b * s_inv);
  return GFrame(frame.ambient_dim(), std::move(blocks));
}

GFrame induced_frame(const GFrame& frame) {
  std::vector<Matrix> rows;
  rows.reserve(frame.coefficient_dim());
  for (const auto& b : frame.blocks()) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) rows.emplace_back(b.row(j));
  }
  return GFrame(frame.ambient_dim(), std::move(rows));
}

bool is_g_orthonormal(const GFrame& frame, const Tolerance& tol) {
  const Matrix t = synthesis_matrix(frame);
  const auto k = t.cols();
  const auto n = t.rows();
  const bool isometric_coeffs =
      ((t.adjoint() * t) - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <= tol.eq_atol;
  const bool parseval =
      (frame_operator(frame) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= tol.eq_atol;
  return isometric_coeffs && parseval;
}

GFrame apply_operator(const GFrame& frame, const Matrix& op, const Tolerance& tol) {
  const auto n = static_cast<Eigen::Index>(frame.ambient_dim());
  if (op.rows() != n || op.cols() != n) {
    throw InvalidArgument("apply_operator: operator has shape " + shape_string(op) +
                          ", expected square of the ambient dimension");
  }
  require_finite(op, "apply_operator");
  if (rank(op, tol) < static_cast<std::size_t>(n)) {
    throw NumericFailure("apply_operator: operator is singular at tolerance");
  }
  std::vector<Matrix> blocks;
  blocks.reserve(frame.size());
  for (const auto& b : frame.blocks()) blocks.push_back(b * op);
  return GFrame(frame.ambient_dim(), std::move(blocks));
}

GFrame scale_blocks(const GFrame& frame, std::span<const Complex> scalars) {
  if (scalars.size() != frame.size()) {
    throw InvalidArgument("scale_blocks: expected one scalar per index");
  }
  std::vector<Matrix> blocks;
  blocks.reserve(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) blocks.push_back(frame.block(i) * scalars[i]);
  return GFrame(frame.ambient_dim(), std::move(blocks));
}

GFrame select_blocks(const GFrame& frame, std::span<const std::size_t> indices) {
  std::vector<Matrix> blocks;
  blocks.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= frame.size()) throw InvalidArgument("select_blocks: index out of range");
    blocks.push_back(frame.block(i));
  }
  return GFrame(frame.ambient_dim(), std::move(blocks));
}

double block_distance(const GFrame& a, const GFrame& b) {
  if (a.ambient_dim() != b.ambient_dim() || a.block_dims() != b.block_dims()) {
    throw InvalidArgument("block_distance: frames have different shapes");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, (a.block(i) - b.block(i)).cwiseAbs().maxCoeff());
  }
  return d;
}

}  // namespace gweave
