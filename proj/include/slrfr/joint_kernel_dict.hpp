#pragma once

// Paired HR/LR kernel dictionaries trained with one shared sparse code per
// training pair. Probes are classified at LR only.

#include "slrfr/kernel_dict.hpp"

#include <iosfwd>
#include <span>
#include <string>

namespace slrfr {

class JointKernelDictionary {
 public:
  JointKernelDictionary() = default;
  /// Checks paired columns, lambda >= 0 and unit feature-space norm of every
  /// atom under its own resolution's kernel (1e-8).
  JointKernelDictionary(StackedMatrix hr_samples, StackedMatrix lr_samples,
                        Matrix a_hr, Matrix a_lr, KernelSpec kernel_hr,
                        KernelSpec kernel_lr, double lambda, std::string label);

  Index samples() const { return hr_.cols(); }
  Index n_atoms() const { return a_hr_.cols(); }
  const StackedMatrix& hr_samples() const { return hr_; }
  const StackedMatrix& lr_samples() const { return lr_; }
  const Matrix& a_hr() const { return a_hr_; }
  const Matrix& a_lr() const { return a_lr_; }
  const KernelSpec& kernel_hr() const { return kernel_hr_; }
  const KernelSpec& kernel_lr() const { return kernel_lr_; }
  double lambda() const { return lambda_; }
  const std::string& label() const { return label_; }
  const GramMatrix& hr_gram() const { return gram_hr_; }
  const GramMatrix& lr_gram() const { return gram_lr_; }

  /// [A_H; A_L], 2m x K.
  Matrix stacked_coefficients() const;
  /// LR half as a stand-alone kernel dictionary.
  KernelDictionary lr_dictionary() const;

 private:
  StackedMatrix hr_, lr_;
  Matrix a_hr_, a_lr_;
  KernelSpec kernel_hr_, kernel_lr_;
  double lambda_ = 1.0;
  std::string label_;
  GramMatrix gram_hr_, gram_lr_;
};

struct BlockGrams {
  Vector k1;  // [K_H(X_H, z_H); lambda K_L(X_L, z_L)]
  Matrix k2;  // diag(K_H(X_H, X_H), lambda K_L(X_L, X_L))
  double probe_energy = 0.0;  // K_H(z_H, z_H) + lambda K_L(z_L, z_L)
};

BlockGrams block_grams(const JointKernelDictionary& jd, const Vector& probe_hr,
                       const Vector& probe_lr);

/// KOMP on the stacked pair with one code for both resolutions.
SparseCode joint_komp(const JointKernelDictionary& jd, const Vector& probe_hr,
                      const Vector& probe_lr, int sparsity,
                      PursuitTrace* trace = nullptr);

/// ||phi_H(z_H) - phi_H(X_H) A_H g||^2 + lambda ||phi_L(z_L) - phi_L(X_L) A_L g||^2.
double joint_residual(const JointKernelDictionary& jd, const Vector& probe_hr,
                      const Vector& probe_lr, const SparseCode& code);

/// Sum of joint_residual over the training pairs.
double joint_objective(const JointKernelDictionary& jd,
                       std::span<const SparseCode> codes);

/// Alternates joint KOMP coding with the shared closed-form update; the
/// atom-wise rule is rejected. Columns of x_hr and x_lr are paired.
JointKernelDictionary joint_train(const StackedMatrix& x_hr,
                                  const StackedMatrix& x_lr, double lambda,
                                  const KernelSpec& kernel_hr,
                                  const KernelSpec& kernel_lr,
                                  const TrainOptions& opts,
                                  TrainTrace* trace = nullptr);

/// LR-only classification through each class's (X_L, A_L) dictionary.
ResidualReport classify_joint(std::span<const JointKernelDictionary> dicts,
                              const Vector& z_lr, int sparsity);

// "JKLD" v1: version, lambda, HR kernel, LR kernel, hr dim, lr dim, m, K,
// label, X_H, X_L, A_H, A_L.
void save_joint_dictionary(std::ostream& out, const JointKernelDictionary& jd);
JointKernelDictionary load_joint_dictionary(std::istream& in);

}  // namespace slrfr
