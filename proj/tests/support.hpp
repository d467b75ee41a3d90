#pragma once

// Fixtures and independent oracles shared by the test binaries. The oracles
// deliberately avoid the library's own code paths: they build frame operators
// by hand, enumerate partitions recursively and solve with Eigen directly.

#include "gweave/genlab.hpp"
#include "gweave/rng.hpp"
#include "gweave/weaving.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <vector>

namespace gwtest {

using gweave::Complex;
using gweave::CounterRng;
using gweave::GFrame;
using gweave::GFrameFamily;
using gweave::Matrix;
using gweave::Partition;
using gweave::Vector;

inline Matrix row(std::initializer_list<double> xs) {
  Matrix m(1, static_cast<Eigen::Index>(xs.size()));
  Eigen::Index c = 0;
  for (double x : xs) m(0, c++) = x;
  return m;
}

inline Matrix diag(std::initializer_list<double> xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Matrix m = Matrix::Zero(n, n);
  Eigen::Index k = 0;
  for (double x : xs) {
    m(k, k) = x;
    ++k;
  }
  return m;
}

/// e_1^T, ..., e_n^T as 1 x n blocks.
inline GFrame onb(std::size_t n) {
  std::vector<Matrix> blocks;
  const auto ni = static_cast<Eigen::Index>(n);
  for (Eigen::Index i = 0; i < ni; ++i) blocks.push_back(Matrix::Identity(ni, ni).row(i));
  return GFrame(n, std::move(blocks));
}

/// e_{n}^T, ..., e_1^T.
inline GFrame reversed_onb(std::size_t n) {
  std::vector<Matrix> blocks;
  const auto ni = static_cast<Eigen::Index>(n);
  for (Eigen::Index i = ni - 1; i >= 0; --i) blocks.push_back(Matrix::Identity(ni, ni).row(i));
  return GFrame(n, std::move(blocks));
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng, bool complex) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      m(r, c) = complex ? rng.complex_normal() : Complex(rng.normal(), 0.0);
    }
  }
  return m;
}

inline Vector random_unit(Eigen::Index n, CounterRng& rng) {
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.complex_normal();
  return v / v.norm();
}

/// Gaussian blocks; a g-frame with probability 1 when sum(d_i) >= n.
inline GFrame random_frame(std::size_t n, const std::vector<std::size_t>& dims, std::uint64_t seed,
                           bool complex = true) {
  CounterRng rng(seed);
  std::vector<Matrix> blocks;
  for (std::size_t d : dims) {
    blocks.push_back(random_matrix(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n), rng, complex));
  }
  return GFrame(n, std::move(blocks));
}

inline GFrame scaled(const GFrame& f, double s) {
  std::vector<Matrix> blocks;
  for (const auto& b : f.blocks()) blocks.push_back(s * b);
  return GFrame(f.ambient_dim(), std::move(blocks));
}

inline GFrame times(const GFrame& f, const Matrix& t) {
  std::vector<Matrix> blocks;
  for (const auto& b : f.blocks()) blocks.push_back(b * t);
  return GFrame(f.ambient_dim(), std::move(blocks));
}

namespace oracle {

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Eigenvalue extremes of sum_i B_i^* B_i through Eigen's self-adjoint solver.
inline Bounds frame_bounds(const std::vector<Matrix>& blocks, Eigen::Index n) {
  Matrix s = Matrix::Zero(n, n);
  for (const auto& b : blocks) s.noalias() += b.adjoint() * b;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return {std::max(0.0, es.eigenvalues()(0)), es.eigenvalues()(n - 1)};
}

inline Bounds frame_bounds(const GFrame& f) {
  return frame_bounds(f.blocks(), static_cast<Eigen::Index>(f.ambient_dim()));
}

/// Extremes of x^H M x / ||x||^2 over random unit vectors.
inline Bounds rayleigh(const Matrix& m, std::size_t samples, std::uint64_t seed) {
  CounterRng rng(seed);
  Bounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = random_unit(m.rows(), rng);
    const double q = (x.adjoint() * m * x)(0, 0).real();
    b.lower = std::min(b.lower, q);
    b.upper = std::max(b.upper, q);
  }
  return b;
}

struct Enumeration {
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  bool every_weaving_spans = true;
  std::uint64_t count = 0;
};

/// Recursive walk over every label vector, calling visit(labels, blocks).
inline void for_each_weaving(
    const std::vector<std::vector<Matrix>>& members,
    const std::function<void(const std::vector<std::size_t>&, const std::vector<Matrix>&)>& visit) {
  const std::size_t n_idx = members.front().size();
  std::vector<std::size_t> labels(n_idx, 0);
  std::vector<Matrix> blocks(n_idx);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n_idx) {
      visit(labels, blocks);
      return;
    }
    for (std::size_t j = 0; j < members.size(); ++j) {
      labels[i] = j;
      blocks[i] = members[j][i];
      rec(i + 1);
    }
  };
  rec(0);
}

inline Enumeration enumerate(const GFrameFamily& fam) {
  std::vector<std::vector<Matrix>> members;
  for (const auto& f : fam.frames()) members.push_back(f.blocks());
  const auto n = static_cast<Eigen::Index>(fam.ambient_dim());
  Enumeration e;
  for_each_weaving(members, [&](const std::vector<std::size_t>&, const std::vector<Matrix>& blocks) {
    const Bounds b = frame_bounds(blocks, n);
    e.lower = std::min(e.lower, b.lower);
    e.upper = std::max(e.upper, b.upper);
    Matrix stack(0, n);
    for (const auto& blk : blocks) {
      Matrix grown(stack.rows() + blk.rows(), n);
      grown << stack, blk;
      stack = std::move(grown);
    }
    Eigen::FullPivLU<Matrix> lu(stack);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) e.every_weaving_spans = false;
    ++e.count;
  });
  return e;
}

}  // namespace oracle

}  // namespace gwtest
