#include "slrfr/sparse_linear.hpp"

#include "slrfr/binary_io.hpp"
#include "detail/numeric.hpp"
#include "detail/training_engine.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace slrfr {
namespace {

constexpr std::uint32_t kDictionaryVersion = 1;

SparseCode omp_impl(const Matrix& atoms, const Vector& y, int sparsity,
                    PursuitTrace* trace, bool* regularized) {
  const Index k = atoms.cols();
  std::vector<Index> selected;
  std::vector<bool> in_support(static_cast<std::size_t>(k), false);
  Vector coeffs;
  Vector residual = y;
  const double initial = y.squaredNorm();
  if (trace) trace->residual_energy.push_back(initial);
  for (int step = 0; step < sparsity; ++step) {
    if (residual.squaredNorm() <= detail::energy_floor(initial)) break;
    const Vector corr = atoms.transpose() * residual;
    Index best = -1;
    double best_abs = -1.0;
    for (Index j = 0; j < k; ++j) {
      if (in_support[static_cast<std::size_t>(j)]) continue;
      if (std::abs(corr(j)) > best_abs) {
        best_abs = std::abs(corr(j));
        best = j;
      }
    }
    if (best < 0 || best_abs <= detail::correlation_floor(initial)) break;
    selected.push_back(best);
    in_support[static_cast<std::size_t>(best)] = true;
    Matrix sub(atoms.rows(), static_cast<Index>(selected.size()));
    for (std::size_t i = 0; i < selected.size(); ++i) {
      sub.col(static_cast<Index>(i)) = atoms.col(selected[i]);
    }
    bool reg = false;
    coeffs = detail::solve_spd(Matrix(sub.transpose() * sub),
                               Vector(sub.transpose() * y), &reg);
    if (reg) {
      if (regularized) *regularized = true;
      if (trace) trace->regularized = true;
    }
    residual = y - sub * coeffs;
    if (trace) trace->residual_energy.push_back(residual.squaredNorm());
  }
  return SparseCode::from_selection(k, selected, coeffs);
}

Vector reconstruct(const Matrix& atoms, const SparseCode& code) {
  Vector out = Vector::Zero(atoms.rows());
  for (std::size_t i = 0; i < code.support.size(); ++i) {
    out += code.values(static_cast<Index>(i)) * atoms.col(code.support[i]);
  }
  return out;
}

class LinearGeometry {
 public:
  using AtomState = Vector;

  LinearGeometry(const Matrix& x, Index n_atoms)
      : x_(x), atoms_(Matrix::Zero(x.rows(), n_atoms)) {}

  Index samples() const { return x_.cols(); }
  Index atoms() const { return atoms_.cols(); }
  const Matrix& dictionary() const { return atoms_; }

  double sample_energy(Index s) const { return x_.col(s).squaredNorm(); }

  void set_atom_from_sample(Index j, Index s) {
    atoms_.col(j) = x_.col(s) / x_.col(s).norm();
  }

  double coherence(Index i, Index j) const {
    return std::abs(atoms_.col(i).dot(atoms_.col(j)));
  }

  SparseCode pursue(Index s, int sparsity, bool* regularized) const {
    return omp_impl(atoms_, x_.col(s), sparsity, nullptr, regularized);
  }

  SparseCode refit(Index s, const std::vector<Index>& support,
                   bool* regularized) const {
    SparseCode code;
    code.length = atoms();
    code.support = support;
    Matrix sub(x_.rows(), static_cast<Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
      sub.col(static_cast<Index>(i)) = atoms_.col(support[i]);
    }
    code.values = detail::solve_spd(Matrix(sub.transpose() * sub),
                                    Vector(sub.transpose() * x_.col(s)),
                                    regularized);
    return code;
  }

  double residual_energy(Index s, const SparseCode& code) const {
    return (x_.col(s) - reconstruct(atoms_, code)).squaredNorm();
  }

  void atom_svd_update(std::vector<SparseCode>& codes) {
    for (Index k = 0; k < atoms(); ++k) {
      std::vector<Index> users;
      std::vector<std::size_t> slot;
      for (Index s = 0; s < samples(); ++s) {
        const auto& sup = codes[static_cast<std::size_t>(s)].support;
        const auto it = std::lower_bound(sup.begin(), sup.end(), k);
        if (it != sup.end() && *it == k) {
          users.push_back(s);
          slot.push_back(static_cast<std::size_t>(it - sup.begin()));
        }
      }
      if (users.empty()) continue;
      // Restricted error with atom k's contribution added back.
      Matrix err(x_.rows(), static_cast<Index>(users.size()));
      for (std::size_t u = 0; u < users.size(); ++u) {
        const SparseCode& code = codes[static_cast<std::size_t>(users[u])];
        err.col(static_cast<Index>(u)) =
            x_.col(users[u]) - reconstruct(atoms_, code) +
            code.values(static_cast<Index>(slot[u])) * atoms_.col(k);
      }
      const Matrix inner = err.transpose() * err;
      const auto [lambda, v] = detail::top_eigenpair(inner);
      if (!(lambda > 1e-14 * std::max(1.0, inner.trace()))) continue;
      const double sigma = std::sqrt(lambda);
      atoms_.col(k) = err * v / sigma;
      for (std::size_t u = 0; u < users.size(); ++u) {
        codes[static_cast<std::size_t>(users[u])].values(
            static_cast<Index>(slot[u])) = sigma * v(static_cast<Index>(u));
      }
    }
  }

  int closed_form_update(const std::vector<SparseCode>& codes,
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
    Matrix gamma(static_cast<Index>(used.size()), samples());
    for (Index s = 0; s < samples(); ++s) {
      const Vector dense = codes[static_cast<std::size_t>(s)].dense();
      for (std::size_t r = 0; r < used.size(); ++r) {
        gamma(static_cast<Index>(r), s) = dense(used[r]);
      }
    }
    bool reg = false;
    // A = Gamma^T (Gamma Gamma^T)^-1, D = X A.
    const Matrix coeffs =
        detail::solve_spd(Matrix(gamma * gamma.transpose()), gamma, &reg)
            .transpose();
    const Matrix updated = x_ * coeffs;
    for (std::size_t r = 0; r < used.size(); ++r) {
      const double n = updated.col(static_cast<Index>(r)).norm();
      if (!(n > 1e-12)) {
        degenerate[static_cast<std::size_t>(used[r])] = true;
        continue;
      }
      atoms_.col(used[r]) = updated.col(static_cast<Index>(r)) / n;
    }
    return reg ? 1 : 0;
  }

  AtomState save_atom(Index j) const { return atoms_.col(j); }
  void restore_atom(Index j, const AtomState& state) { atoms_.col(j) = state; }

 private:
  const Matrix& x_;
  Matrix atoms_;
};

}  // namespace

Dictionary::Dictionary(Matrix atoms, std::string label)
    : atoms_(std::move(atoms)), label_(std::move(label)) {
  if (atoms_.hasNaN()) throw InvalidArgumentError("dictionary contains NaN");
  for (Index j = 0; j < atoms_.cols(); ++j) {
    if (std::abs(atoms_.col(j).norm() - 1.0) > 1e-9) {
      throw InvalidArgumentError("dictionary atom " + std::to_string(j) +
                                 " is not unit norm");
    }
  }
}

SparseCode omp(const Dictionary& dict, const Vector& y, int sparsity,
               PursuitTrace* trace) {
  if (y.size() != dict.dim()) {
    throw InvalidArgumentError("omp: signal length " + std::to_string(y.size()) +
                               " does not match dictionary dim " +
                               std::to_string(dict.dim()));
  }
  if (sparsity < 1 || sparsity > dict.n_atoms()) {
    throw InvalidArgumentError("omp: sparsity must lie in [1, K]");
  }
  return omp_impl(dict.atoms(), y, sparsity, trace, nullptr);
}

Dictionary ksvd_train(const StackedMatrix& x, const TrainOptions& opts,
                      TrainTrace* trace) {
  const Index k = opts.n_atoms > 0 ? opts.n_atoms : x.cols();
  if (k < 1) throw InvalidArgumentError("ksvd_train: need at least one atom");
  if (opts.sparsity < 1 || opts.sparsity > k) {
    throw InvalidArgumentError("ksvd_train: sparsity must lie in [1, K]");
  }
  TrainTrace local;
  TrainTrace& tr = trace ? *trace : local;
  Matrix data = x;
  if (x.cols() < k) {
    if (!opts.replicate_short_classes || x.cols() == 0) {
      throw InvalidArgumentError("ksvd_train: " + std::to_string(x.cols()) +
                                 " samples for " + std::to_string(k) + " atoms");
    }
    std::mt19937_64 rng(detail::mix_seed(opts.seed, 0xC0FFEE));
    data = detail::replicate_columns(x, k, opts.replication_noise, rng);
    tr.replicated = true;
  }
  LinearGeometry geometry(data, k);
  detail::TrainingEngine engine(geometry, opts,
                                opts.update.value_or(DictionaryUpdate::kAtomSvd),
                                tr);
  engine.run();
  Matrix atoms = geometry.dictionary();
  // Rank-1 updates are unit norm up to rounding; pin it.
  atoms.colwise().normalize();
  return Dictionary(std::move(atoms), opts.label);
}

double representation_error(const Dictionary& dict, const StackedMatrix& x,
                            std::span<const SparseCode> codes) {
  if (static_cast<Index>(codes.size()) != x.cols()) {
    throw InvalidArgumentError("one code per column required");
  }
  double total = 0.0;
  for (Index s = 0; s < x.cols(); ++s) {
    total += (x.col(s) - reconstruct(dict.atoms(),
                                     codes[static_cast<std::size_t>(s)]))
                 .squaredNorm();
  }
  return total;
}

Projection project_residual(const Dictionary& dict, const Vector& y) {
  if (y.size() != dict.dim()) {
    throw InvalidArgumentError("project_residual: dimension mismatch");
  }
  const Matrix& d = dict.atoms();
  Matrix gram = d.transpose() * d;
  Projection p;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram,
                                                  Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  p.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (p.condition > 1e12) {
    p.regularized = true;
    gram.diagonal().array() +=
        1e-8 * gram.trace() / static_cast<double>(dict.n_atoms());
  }
  p.coeffs = gram.ldlt().solve(d.transpose() * y);
  p.approx = d * p.coeffs;
  p.residual_norm = (y - p.approx).norm();
  return p;
}

ResidualReport classify_linear(std::span<const Dictionary> dicts,
                               const Vector& y, bool keep_approximations) {
  if (dicts.empty()) throw InvalidArgumentError("classify_linear: no classes");
  std::vector<double> residuals;
  std::vector<std::string> labels;
  std::vector<Vector> approximations;
  for (const auto& dict : dicts) {
    Projection p = project_residual(dict, y);
    residuals.push_back(p.residual_norm);
    labels.push_back(dict.label());
    if (keep_approximations) approximations.push_back(std::move(p.approx));
  }
  ResidualReport report = make_report(std::move(residuals), std::move(labels));
  report.approximations = std::move(approximations);
  return report;
}

void save_dictionary(std::ostream& out, const Dictionary& dict) {
  binary::write_magic(out, "SLRD");
  binary::write_u32(out, kDictionaryVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(dict.dim()));
  binary::write_u32(out, static_cast<std::uint32_t>(dict.n_atoms()));
  binary::write_string(out, dict.label());
  binary::write_matrix_values(out, dict.atoms());
}

Dictionary load_dictionary(std::istream& in) {
  binary::expect_magic(in, "SLRD");
  if (const auto v = binary::read_u32(in); v != kDictionaryVersion) {
    throw DataError("unsupported SLRD version " + std::to_string(v));
  }
  const Index dim = binary::read_u32(in);
  const Index k = binary::read_u32(in);
  std::string label = binary::read_string(in);
  Matrix atoms = binary::read_matrix_values(in, dim, k);
  try {
    return Dictionary(std::move(atoms), std::move(label));
  } catch (const InvalidArgumentError& e) {
    throw DataError(std::string("corrupt dictionary: ") + e.what());
  }
}

}  // namespace slrfr
