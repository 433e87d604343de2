#pragma once

#include "slrfr/core.hpp"
#include "slrfr/image.hpp"

#include <iosfwd>

namespace slrfr {

/// Mean and orthonormal principal directions (columns), ordered by
/// decreasing variance. Each direction's largest-magnitude entry is positive.
struct PcaBasis {
  Vector mean;
  Matrix components;

  Index dim() const { return mean.size(); }
  Index p() const { return components.cols(); }
};

/// Requires 1 <= p <= min(dim, count).
PcaBasis compute_pca_basis(const StackedMatrix& training, Index p);

/// components^T (x - mean) per column.
StackedMatrix extract_features(const PcaBasis& basis, const StackedMatrix& x);
Vector extract_features(const PcaBasis& basis, const Vector& x);

/// mean + components * f per column.
StackedMatrix back_project(const PcaBasis& basis, const StackedMatrix& features);

void save_pca_basis(std::ostream& out, const PcaBasis& basis);
PcaBasis load_pca_basis(std::istream& in);

}  // namespace slrfr
