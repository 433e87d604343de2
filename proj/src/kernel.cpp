#include "slrfr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slrfr {

void KernelSpec::validate() const {
  switch (kind) {
    case KernelKind::kLinear:
      return;
    case KernelKind::kPolynomial:
      if (degree < 1) throw InvalidArgumentError("polynomial degree must be >= 1");
      if (!std::isfinite(c)) throw InvalidArgumentError("polynomial c must be finite");
      return;
    case KernelKind::kGaussian:
      if (!(c > 0.0) || !std::isfinite(c)) {
        throw InvalidArgumentError("gaussian kernel width c must be > 0");
      }
      return;
  }
  throw InvalidArgumentError("unknown kernel kind");
}

double KernelSpec::operator()(const Vector& x, const Vector& y) const {
  switch (kind) {
    case KernelKind::kLinear:
      return x.dot(y);
    case KernelKind::kPolynomial:
      return std::pow(x.dot(y) + c, degree);
    case KernelKind::kGaussian:
      return std::exp(-(x - y).squaredNorm() / c);
  }
  return 0.0;
}

std::string KernelSpec::describe() const {
  std::ostringstream out;
  out << kernel_kind_name(kind);
  if (kind == KernelKind::kPolynomial) out << "(c=" << c << ", d=" << degree << ")";
  if (kind == KernelKind::kGaussian) out << "(c=" << c << ")";
  return out.str();
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "polynomial" || name == "poly") return KernelKind::kPolynomial;
  if (name == "gaussian" || name == "rbf") return KernelKind::kGaussian;
  throw InvalidArgumentError("unknown kernel \"" + name + "\"");
}

std::string kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kPolynomial: return "polynomial";
    case KernelKind::kGaussian: return "gaussian";
  }
  return "unknown";
}

GramMatrix gram(const StackedMatrix& x, const StackedMatrix& z,
                const KernelSpec& kernel) {
  if (x.rows() != z.rows()) {
    throw InvalidArgumentError("gram: sample dimensions differ");
  }
  kernel.validate();
  GramMatrix out(x.cols(), z.cols());
  if (&x == &z) {
    for (Index j = 0; j < x.cols(); ++j) {
      for (Index i = 0; i <= j; ++i) {
        out(i, j) = kernel(x.col(i), x.col(j));
        out(j, i) = out(i, j);
      }
    }
    return out;
  }
  for (Index j = 0; j < z.cols(); ++j) {
    for (Index i = 0; i < x.cols(); ++i) out(i, j) = kernel(x.col(i), z.col(j));
  }
  return out;
}

Vector gram_column(const StackedMatrix& x, const Vector& z,
                   const KernelSpec& kernel) {
  if (x.rows() != z.size()) {
    throw InvalidArgumentError("gram: probe length " + std::to_string(z.size()) +
                               " does not match sample dim " +
                               std::to_string(x.rows()));
  }
  Vector out(x.cols());
  for (Index i = 0; i < x.cols(); ++i) out(i) = kernel(x.col(i), z);
  return out;
}

double median_squared_distance(const StackedMatrix& x) {
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(x.cols() * (x.cols() - 1) / 2));
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < j; ++i) d.push_back((x.col(i) - x.col(j)).squaredNorm());
  }
  if (d.empty()) return 0.0;
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + mid, d.end());
  if (d.size() % 2 == 1) return d[mid];
  const double lower = *std::max_element(d.begin(), d.begin() + mid);
  return 0.5 * (lower + d[mid]);
}

}  // namespace slrfr
