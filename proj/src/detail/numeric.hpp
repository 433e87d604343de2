#pragma once

#include "slrfr/core.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace slrfr::detail {

/// Thresholds shared by every pursuit so that linear and kernel paths stop
/// at the same step.
inline double energy_floor(double initial_energy) {
  return 1e-12 * std::max(1.0, initial_energy);
}
inline double correlation_floor(double initial_energy) {
  return 1e-12 * std::sqrt(std::max(1.0, initial_energy));
}

/// Solves G x = b for symmetric positive semidefinite G. Adds the ridge
/// 1e-8 * trace(G) / n when G is numerically singular and sets *regularized.
Vector solve_spd(const Matrix& gram, const Vector& rhs,
                 bool* regularized = nullptr);
/// Same for several right-hand sides.
Matrix solve_spd(const Matrix& gram, const Matrix& rhs,
                 bool* regularized = nullptr);

/// Largest eigenpair of a symmetric matrix; the eigenvector's
/// largest-magnitude entry is made positive.
std::pair<double, Vector> top_eigenpair(const Matrix& sym);

/// Seeded Fisher-Yates permutation of [0, n).
std::vector<Index> seeded_permutation(Index n, std::mt19937_64& rng);

/// Pads X with perturbed copies of its columns up to `columns` columns.
Matrix replicate_columns(const Matrix& x, Index columns, double noise,
                         std::mt19937_64& rng);

/// SplitMix64 step, used to derive independent per-class seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace slrfr::detail
