#include "detail/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace slrfr::detail {
namespace {

constexpr double kMinRcond = 1e-12;

template <typename Rhs>
Rhs solve_impl(const Matrix& gram, const Rhs& rhs, bool* regularized) {
  const Index n = gram.rows();
  if (n == 0) return Rhs(rhs.rows(), rhs.cols());
  Eigen::LDLT<Matrix> ldlt(gram);
  const bool singular = ldlt.info() != Eigen::Success ||
                        !(ldlt.rcond() >= kMinRcond) ||
                        (ldlt.vectorD().array() <= 0.0).any();
  if (!singular) return ldlt.solve(rhs);
  if (regularized) *regularized = true;
  double ridge = 1e-8 * gram.trace() / static_cast<double>(n);
  if (!(ridge > 0.0)) ridge = 1e-12;
  Matrix shifted = gram;
  shifted.diagonal().array() += ridge;
  return Eigen::LDLT<Matrix>(shifted).solve(rhs);
}

}  // namespace

Vector solve_spd(const Matrix& gram, const Vector& rhs, bool* regularized) {
  return solve_impl(gram, rhs, regularized);
}

Matrix solve_spd(const Matrix& gram, const Matrix& rhs, bool* regularized) {
  return solve_impl(gram, rhs, regularized);
}

std::pair<double, Vector> top_eigenpair(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Index last = sym.rows() - 1;
  Vector v = eig.eigenvectors().col(last);
  Index pivot = 0;
  v.cwiseAbs().maxCoeff(&pivot);
  if (v(pivot) < 0.0) v = -v;
  return {eig.eigenvalues()(last), v};
}

std::vector<Index> seeded_permutation(Index n, std::mt19937_64& rng) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(pick(rng))]);
  }
  return order;
}

Matrix replicate_columns(const Matrix& x, Index columns, double noise,
                         std::mt19937_64& rng) {
  Matrix out(x.rows(), columns);
  out.leftCols(x.cols()) = x;
  std::normal_distribution<double> gauss(0.0, noise);
  for (Index j = x.cols(); j < columns; ++j) {
    out.col(j) = x.col(j % x.cols());
    for (Index i = 0; i < x.rows(); ++i) out(i, j) += gauss(rng);
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace slrfr::detail
