#pragma once

// Pursuit and training in coefficient space: every signal and atom is a
// combination of (possibly stacked) feature-space samples, so all inner
// products go through a Gram matrix.

#include "slrfr/sparse_code.hpp"

#include <vector>

namespace slrfr::detail {

/// Kernel OMP. `gram` is the Gram matrix of the sample block(s), `coeffs`
/// the atom coefficient matrix, `probe_gram` the probe's kernel values
/// against the samples and `probe_energy` its self kernel value.
SparseCode komp_core(const Matrix& gram, const Matrix& coeffs,
                     const Vector& probe_gram, double probe_energy,
                     int sparsity, PursuitTrace* trace, bool* regularized);

/// probe_energy - 2 probe_gram^T A g + g^T A^T K A g, floored at zero.
double gram_residual(const Matrix& gram, const Matrix& coeffs,
                     const Vector& probe_gram, double probe_energy,
                     const SparseCode& code);

/// Training geometry over `blocks` stacked copies of the sample set. Block b
/// holds the unweighted Gram `grams[b]` scaled by `weights[b]`; each atom is
/// normalized separately inside every block. Sample s is represented by
/// the coefficient vector with a one at position s of every block.
class GramGeometry {
 public:
  using AtomState = Vector;

  GramGeometry(std::vector<Matrix> grams, std::vector<double> weights,
               Index n_atoms);

  Index samples() const { return m_; }
  Index atoms() const { return coeffs_.cols(); }
  /// Stacked coefficient matrix (blocks * m) x K.
  const Matrix& coeffs() const { return coeffs_; }
  const Matrix& stacked_gram() const { return stacked_; }

  double sample_energy(Index s) const { return sample_energy_(s); }
  void set_atom_from_sample(Index j, Index s);
  double coherence(Index i, Index j) const;
  SparseCode pursue(Index s, int sparsity, bool* regularized) const;
  SparseCode refit(Index s, const std::vector<Index>& support,
                   bool* regularized) const;
  double residual_energy(Index s, const SparseCode& code) const;
  /// Kernel K-SVD rank-1 atom updates; single-block geometries only.
  void atom_svd_update(std::vector<SparseCode>& codes);
  int closed_form_update(const std::vector<SparseCode>& codes,
                         std::vector<bool>& degenerate);
  AtomState save_atom(Index j) const { return coeffs_.col(j); }
  void restore_atom(Index j, const AtomState& state) { coeffs_.col(j) = state; }

 private:
  double raw_energy(Index s, const SparseCode& code) const;
  Vector sample_gram(Index s) const { return sample_grams_.col(s); }

  Index m_ = 0;
  std::vector<Matrix> grams_;
  std::vector<double> weights_;
  Matrix stacked_;       // block-diagonal weighted Gram
  Matrix sample_grams_;  // column s = stacked_ * u_s
  Vector sample_energy_;
  Matrix coeffs_;
};

}  // namespace slrfr::detail
