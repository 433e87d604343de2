#pragma once

// Kernel dictionaries living in the span of mapped training samples:
// KOMP coding, kernel K-SVD training and feature-space residuals.

#include "slrfr/core.hpp"
#include "slrfr/kernel.hpp"
#include "slrfr/sparse_code.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace slrfr {

/// Atoms phi(X) A_j with unit feature-space norm. The self-Gram is cached.
class KernelDictionary {
 public:
  KernelDictionary() = default;
  KernelDictionary(StackedMatrix base_samples, Matrix coefficients,
                   KernelSpec kernel, std::string label);

  Index dim() const { return base_.rows(); }
  Index samples() const { return base_.cols(); }
  Index n_atoms() const { return coeffs_.cols(); }
  const StackedMatrix& base_samples() const { return base_; }
  const Matrix& coefficients() const { return coeffs_; }
  const KernelSpec& kernel() const { return kernel_; }
  const GramMatrix& self_gram() const { return gram_; }
  const std::string& label() const { return label_; }

 private:
  StackedMatrix base_;
  Matrix coeffs_;
  KernelSpec kernel_;
  GramMatrix gram_;
  std::string label_;
};

/// Kernel orthogonal matching pursuit; at most `sparsity` atoms.
SparseCode komp(const KernelDictionary& dict, const Vector& z, int sparsity,
                PursuitTrace* trace = nullptr);

/// Squared feature-space distance ||phi(z) - phi(X) A code||^2, floored at 0.
double kernel_residual(const KernelDictionary& dict, const Vector& z,
                       const SparseCode& code);

/// Kernel dictionary learning over the columns of X. The default update is
/// the closed form A = G^T (G G^T)^-1 with feature-space normalization.
KernelDictionary kernel_ksvd_train(const StackedMatrix& x,
                                   const KernelSpec& kernel,
                                   const TrainOptions& opts,
                                   TrainTrace* trace = nullptr);

/// tr((I - A G)^T K (I - A G)) for codes G over the dictionary's samples.
double kernel_objective(const KernelDictionary& dict,
                        std::span<const SparseCode> codes);

/// Per class: komp then kernel_residual; minimum wins. All dictionaries
/// must share one kernel. The sparsity is capped at each class's K.
ResidualReport classify_kernel(std::span<const KernelDictionary> dicts,
                               const Vector& z, int sparsity);

struct WidthSelection {
  double c = 0.0;
  double median_sq_distance = 0.0;
  std::vector<double> candidates;
  std::vector<double> accuracy;
  /// Mean of (r_other - r_own) / (r_other + r_own) over held-out samples,
  /// r_other being the smallest residual of a wrong class.
  std::vector<double> margin;
};

/// Leave-one-out choice of the gaussian width over
/// median_sq_distance * multipliers. Class i is trained with seed
/// mix(opts.seed, i). Equal accuracies are separated by the mean margin,
/// remaining ties by multiplier order.
WidthSelection select_gaussian_width(
    std::span<const StackedMatrix> classes, const TrainOptions& opts,
    std::vector<double> multipliers = {1.0, 2.0, 0.5, 4.0, 8.0});

/// Seed used for class `index` by every per-class trainer.
std::uint64_t class_seed(std::uint64_t seed, std::size_t index);

// "KSLD" v1: version, kernel kind/c/degree, dim, m, K, label, X, A.
void save_kernel_dictionary(std::ostream& out, const KernelDictionary& dict);
KernelDictionary load_kernel_dictionary(std::istream& in);

void write_kernel_spec(std::ostream& out, const KernelSpec& kernel);
KernelSpec read_kernel_spec(std::istream& in);

}  // namespace slrfr
