#pragma once

// Linear class dictionaries: OMP, K-SVD training and projection-residual
// classification.

#include "slrfr/core.hpp"
#include "slrfr/image.hpp"
#include "slrfr/sparse_code.hpp"

#include <iosfwd>
#include <span>
#include <string>

namespace slrfr {

/// Unit-norm atoms (columns) learned for one class.
class Dictionary {
 public:
  Dictionary() = default;
  /// Throws InvalidArgumentError unless every column has unit norm within
  /// 1e-9 and no entry is NaN.
  Dictionary(Matrix atoms, std::string label);

  Index dim() const { return atoms_.rows(); }
  Index n_atoms() const { return atoms_.cols(); }
  const Matrix& atoms() const { return atoms_; }
  const std::string& label() const { return label_; }

 private:
  Matrix atoms_;
  std::string label_;
};

/// Orthogonal matching pursuit with least-squares refit after every
/// selection. Stops early once the residual vanishes.
SparseCode omp(const Dictionary& dict, const Vector& y, int sparsity,
               PursuitTrace* trace = nullptr);

/// K-SVD (or, on request, the closed-form update) over the columns of X.
Dictionary ksvd_train(const StackedMatrix& x, const TrainOptions& opts,
                      TrainTrace* trace = nullptr);

/// ||X - D Gamma||_F^2 for the given codes, one per column of X.
double representation_error(const Dictionary& dict, const StackedMatrix& x,
                            std::span<const SparseCode> codes);

struct Projection {
  Vector approx;
  Vector coeffs;
  double residual_norm = 0.0;
  double condition = 1.0;  // of D^T D
  bool regularized = false;
};

/// Orthogonal projection onto span(D). A Tikhonov floor of
/// 1e-8 * trace(D^T D) / K is applied when cond(D^T D) > 1e12.
Projection project_residual(const Dictionary& dict, const Vector& y);

/// Minimum projection residual over classes; ties go to the lowest index.
ResidualReport classify_linear(std::span<const Dictionary> dicts,
                               const Vector& y,
                               bool keep_approximations = false);

// "SLRD" v1: u32 version, u32 dim, u32 K, label, dim x K float64.
void save_dictionary(std::ostream& out, const Dictionary& dict);
Dictionary load_dictionary(std::istream& in);

}  // namespace slrfr
