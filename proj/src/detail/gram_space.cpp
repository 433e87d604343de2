#include "detail/gram_space.hpp"

#include "detail/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace slrfr::detail {
namespace {

Matrix select_columns(const Matrix& m, const std::vector<Index>& cols) {
  Matrix out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Index>(i)) = m.col(cols[i]);
  }
  return out;
}

Vector combine(const Matrix& coeffs, const SparseCode& code) {
  Vector x = Vector::Zero(coeffs.rows());
  for (std::size_t i = 0; i < code.support.size(); ++i) {
    x += code.values(static_cast<Index>(i)) * coeffs.col(code.support[i]);
  }
  return x;
}

}  // namespace

SparseCode komp_core(const Matrix& gram, const Matrix& coeffs,
                     const Vector& probe_gram, double probe_energy,
                     int sparsity, PursuitTrace* trace, bool* regularized) {
  const Index k = coeffs.cols();
  std::vector<Index> selected;
  std::vector<bool> in_support(static_cast<std::size_t>(k), false);
  Vector gamma;
  // Reconstruction in sample coordinates.
  Vector recon = Vector::Zero(gram.rows());
  double energy = probe_energy;
  if (trace) trace->residual_energy.push_back(energy);
  for (int step = 0; step < sparsity; ++step) {
    if (energy <= energy_floor(probe_energy)) break;
    // tau_t = (k(z, X) - recon^T K) a_t
    const Vector tau = coeffs.transpose() * (probe_gram - gram * recon);
    Index best = -1;
    double best_abs = -1.0;
    for (Index t = 0; t < k; ++t) {
      if (in_support[static_cast<std::size_t>(t)]) continue;
      if (std::abs(tau(t)) > best_abs) {
        best_abs = std::abs(tau(t));
        best = t;
      }
    }
    if (best < 0 || best_abs <= correlation_floor(probe_energy)) break;
    selected.push_back(best);
    in_support[static_cast<std::size_t>(best)] = true;
    const Matrix sub = select_columns(coeffs, selected);
    bool reg = false;
    gamma = solve_spd(Matrix(sub.transpose() * gram * sub),
                      Vector(sub.transpose() * probe_gram), &reg);
    if (reg) {
      if (regularized) *regularized = true;
      if (trace) trace->regularized = true;
    }
    recon = sub * gamma;
    energy = std::max(0.0, probe_energy - 2.0 * probe_gram.dot(recon) +
                               recon.dot(gram * recon));
    if (trace) trace->residual_energy.push_back(energy);
  }
  return SparseCode::from_selection(k, selected, gamma);
}

double gram_residual(const Matrix& gram, const Matrix& coeffs,
                     const Vector& probe_gram, double probe_energy,
                     const SparseCode& code) {
  const Vector x = combine(coeffs, code);
  return std::max(0.0, probe_energy - 2.0 * probe_gram.dot(x) +
                           x.dot(gram * x));
}

GramGeometry::GramGeometry(std::vector<Matrix> grams,
                           std::vector<double> weights, Index n_atoms)
    : m_(grams.front().rows()),
      grams_(std::move(grams)),
      weights_(std::move(weights)) {
  const Index blocks = static_cast<Index>(grams_.size());
  stacked_ = Matrix::Zero(blocks * m_, blocks * m_);
  for (Index b = 0; b < blocks; ++b) {
    stacked_.block(b * m_, b * m_, m_, m_) =
        weights_[static_cast<std::size_t>(b)] * grams_[static_cast<std::size_t>(b)];
  }
  sample_grams_ = Matrix::Zero(blocks * m_, m_);
  sample_energy_ = Vector::Zero(m_);
  for (Index b = 0; b < blocks; ++b) {
    const Matrix weighted =
        weights_[static_cast<std::size_t>(b)] * grams_[static_cast<std::size_t>(b)];
    sample_grams_.middleRows(b * m_, m_) = weighted;
    sample_energy_ += weighted.diagonal();
  }
  coeffs_ = Matrix::Zero(blocks * m_, n_atoms);
}

void GramGeometry::set_atom_from_sample(Index j, Index s) {
  coeffs_.col(j).setZero();
  for (std::size_t b = 0; b < grams_.size(); ++b) {
    const double self = grams_[b](s, s);
    coeffs_(static_cast<Index>(b) * m_ + s, j) = self > 0.0 ? 1.0 / std::sqrt(self) : 1.0;
  }
}

double GramGeometry::coherence(Index i, Index j) const {
  const Vector ki = stacked_ * coeffs_.col(i);
  const double ii = coeffs_.col(i).dot(ki);
  const double jj = coeffs_.col(j).dot(stacked_ * coeffs_.col(j));
  if (!(ii > 0.0) || !(jj > 0.0)) return 0.0;
  return std::abs(coeffs_.col(j).dot(ki)) / std::sqrt(ii * jj);
}

SparseCode GramGeometry::pursue(Index s, int sparsity, bool* regularized) const {
  return komp_core(stacked_, coeffs_, sample_gram(s), sample_energy_(s),
                   sparsity, nullptr, regularized);
}

SparseCode GramGeometry::refit(Index s, const std::vector<Index>& support,
                               bool* regularized) const {
  SparseCode code;
  code.length = atoms();
  code.support = support;
  const Matrix sub = select_columns(coeffs_, support);
  code.values = solve_spd(Matrix(sub.transpose() * stacked_ * sub),
                          Vector(sub.transpose() * sample_gram(s)), regularized);
  return code;
}

double GramGeometry::raw_energy(Index s, const SparseCode& code) const {
  const Vector x = combine(coeffs_, code);
  return sample_energy_(s) - 2.0 * sample_grams_.col(s).dot(x) +
         x.dot(stacked_ * x);
}

double GramGeometry::residual_energy(Index s, const SparseCode& code) const {
  return raw_energy(s, code);
}

void GramGeometry::atom_svd_update(std::vector<SparseCode>& codes) {
  if (grams_.size() != 1) {
    throw InvalidArgumentError("atom-wise updates need a single-resolution dictionary");
  }
  for (Index k = 0; k < atoms(); ++k) {
    std::vector<Index> users;
    std::vector<std::size_t> slot;
    for (Index s = 0; s < m_; ++s) {
      const auto& sup = codes[static_cast<std::size_t>(s)].support;
      const auto it = std::lower_bound(sup.begin(), sup.end(), k);
      if (it != sup.end() && *it == k) {
        users.push_back(s);
        slot.push_back(static_cast<std::size_t>(it - sup.begin()));
      }
    }
    if (users.empty()) continue;
    Matrix err(m_, static_cast<Index>(users.size()));
    for (std::size_t u = 0; u < users.size(); ++u) {
      const SparseCode& code = codes[static_cast<std::size_t>(users[u])];
      Vector e = -combine(coeffs_, code);
      e(users[u]) += 1.0;
      e += code.values(static_cast<Index>(slot[u])) * coeffs_.col(k);
      err.col(static_cast<Index>(u)) = e;
    }
    const Matrix inner = err.transpose() * stacked_ * err;
    const auto [lambda, v] = top_eigenpair(inner);
    if (!(lambda > 1e-14 * std::max(1.0, inner.trace()))) continue;
    const double sigma = std::sqrt(lambda);
    coeffs_.col(k) = err * v / sigma;
    for (std::size_t u = 0; u < users.size(); ++u) {
      codes[static_cast<std::size_t>(users[u])].values(
          static_cast<Index>(slot[u])) = sigma * v(static_cast<Index>(u));
    }
  }
}

int GramGeometry::closed_form_update(const std::vector<SparseCode>& codes,
                                     std::vector<bool>& degenerate) {
  std::vector<Index> used;
  for (Index j = 0; j < atoms(); ++j) {
    for (const auto& c : codes) {
      if (c.uses(j)) {
        used.push_back(j);
        break;
      }
    }
  }
  if (used.empty()) return 0;
  Matrix gamma(static_cast<Index>(used.size()), m_);
  for (Index s = 0; s < m_; ++s) {
    const Vector dense = codes[static_cast<std::size_t>(s)].dense();
    for (std::size_t r = 0; r < used.size(); ++r) {
      gamma(static_cast<Index>(r), s) = dense(used[r]);
    }
  }
  bool reg = false;
  // A = Gamma^T (Gamma Gamma^T)^-1, shared by every block.
  const Matrix a =
      solve_spd(Matrix(gamma * gamma.transpose()), gamma, &reg).transpose();
  for (std::size_t r = 0; r < used.size(); ++r) {
    const Vector col = a.col(static_cast<Index>(r));
    Vector stacked(coeffs_.rows());
    bool ok = true;
    for (std::size_t b = 0; b < grams_.size(); ++b) {
      const double norm_sq = col.dot(grams_[b] * col);
      if (!(norm_sq > 1e-24)) {
        ok = false;
        break;
      }
      stacked.segment(static_cast<Index>(b) * m_, m_) = col / std::sqrt(norm_sq);
    }
    if (!ok) {
      degenerate[static_cast<std::size_t>(used[r])] = true;
      continue;
    }
    coeffs_.col(used[r]) = stacked;
  }
  return reg ? 1 : 0;
}

}  // namespace slrfr::detail
