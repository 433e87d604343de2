#include "slrfr/pca.hpp"

#include "slrfr/binary_io.hpp"

#include <Eigen/SVD>

namespace slrfr {

PcaBasis compute_pca_basis(const StackedMatrix& training, Index p) {
  const Index dim = training.rows();
  const Index count = training.cols();
  if (count == 0 || dim == 0) {
    throw InvalidArgumentError("PCA needs a nonempty training matrix");
  }
  if (p < 1 || p > std::min(dim, count)) {
    throw InvalidArgumentError("PCA dimension " + std::to_string(p) +
                               " exceeds min(dim, count) = " +
                               std::to_string(std::min(dim, count)));
  }
  if (training.hasNaN()) throw InvalidArgumentError("PCA input contains NaN");
  PcaBasis basis;
  basis.mean = training.rowwise().mean();
  const Matrix centered = training.colwise() - basis.mean;
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU);
  basis.components = svd.matrixU().leftCols(p);
  for (Index j = 0; j < p; ++j) {
    Index arg = 0;
    basis.components.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis.components(arg, j) < 0.0) basis.components.col(j) *= -1.0;
  }
  return basis;
}

StackedMatrix extract_features(const PcaBasis& basis, const StackedMatrix& x) {
  if (x.rows() != basis.dim()) {
    throw InvalidArgumentError("feature extraction: sample dim " +
                               std::to_string(x.rows()) + " vs basis dim " +
                               std::to_string(basis.dim()));
  }
  return basis.components.transpose() * (x.colwise() - basis.mean);
}

Vector extract_features(const PcaBasis& basis, const Vector& x) {
  if (x.size() != basis.dim()) {
    throw InvalidArgumentError("feature extraction: sample dim mismatch");
  }
  return basis.components.transpose() * (x - basis.mean);
}

StackedMatrix back_project(const PcaBasis& basis, const StackedMatrix& features) {
  if (features.rows() != basis.p()) {
    throw InvalidArgumentError("back projection: feature dim mismatch");
  }
  return (basis.components * features).colwise() + basis.mean;
}

void save_pca_basis(std::ostream& out, const PcaBasis& basis) {
  binary::write_vector(out, basis.mean);
  binary::write_matrix(out, basis.components);
}

PcaBasis load_pca_basis(std::istream& in) {
  PcaBasis basis;
  basis.mean = binary::read_vector(in);
  basis.components = binary::read_matrix(in);
  if (basis.components.rows() != basis.mean.size()) {
    throw DataError("PCA basis components do not match mean length");
  }
  return basis;
}

}  // namespace slrfr
