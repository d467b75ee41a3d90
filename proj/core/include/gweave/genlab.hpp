#pragma once

// Seeded random instances for property tests.

#include "gweave/weaving.hpp"

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace gweave {

enum class GenKind { Parseval, PrescribedSpectrum, RieszBasis, GOrthonormal, Perturbed };

std::string_view to_string(GenKind k);
/// Throws InvalidArgument on an unknown name.
GenKind gen_kind_from_string(std::string_view name);

struct GenSpec {
  std::size_t ambient_dim = 0;
  std::vector<std::size_t> block_dims;
  GenKind kind = GenKind::Parseval;
  /// Frame operator eigenvalues for PrescribedSpectrum; n positive entries.
  std::vector<double> spectrum;
  /// Perturbed: the base frame is a Parseval frame drawn from base_seed, and
  /// each further member adds blockwise Gaussian noise of Frobenius norm
  /// noise_scale drawn from seed.
  std::uint64_t base_seed = 0;
  double noise_scale = 0.0;
  std::size_t members = 2;
  std::uint64_t seed = 0;
  bool complex = false;
};

using Generated = std::variant<GFrame, GFrameFamily>;

/// Throws InvalidArgument on inconsistent dimensions.
Generated generate(const GenSpec& spec);

/// n x n unitary (orthogonal when real) from the QR factor of a Gaussian matrix.
Matrix random_unitary(std::size_t n, std::uint64_t seed, bool complex = false);

/// Uniform over the m^N label vectors. Throws InvalidArgument if N or m is 0.
Partition random_partition(std::size_t n_indices, std::size_t m, std::uint64_t seed);

}  // namespace gweave
