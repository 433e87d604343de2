#pragma once

#include "slrfr/core.hpp"
#include "slrfr/image.hpp"

#include <string>

namespace slrfr {

enum class KernelKind { kLinear = 0, kPolynomial = 1, kGaussian = 2 };

/// Mercer kernel: linear <x,y>, polynomial (<x,y> + c)^d, or gaussian
/// exp(-||x - y||^2 / c).
struct KernelSpec {
  KernelKind kind = KernelKind::kLinear;
  double c = 0.0;
  int degree = 1;

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(double c, int degree) {
    return {KernelKind::kPolynomial, c, degree};
  }
  static KernelSpec gaussian(double c) { return {KernelKind::kGaussian, c, 1}; }

  /// Throws InvalidArgumentError for gaussian c <= 0 or polynomial d < 1.
  void validate() const;
  double operator()(const Vector& x, const Vector& y) const;
  std::string describe() const;

  bool operator==(const KernelSpec&) const = default;
};

KernelKind parse_kernel_kind(const std::string& name);
std::string kernel_kind_name(KernelKind kind);

/// Matrix of kernel values between the columns of X and of Z. The result
/// is exactly symmetric when X and Z are the same object.
using GramMatrix = Matrix;
GramMatrix gram(const StackedMatrix& x, const StackedMatrix& z,
                const KernelSpec& kernel);
/// kappa(x_i, z) for every column x_i of X.
Vector gram_column(const StackedMatrix& x, const Vector& z,
                   const KernelSpec& kernel);

/// Median of ||x_i - x_j||^2 over all pairs i < j.
double median_squared_distance(const StackedMatrix& x);

}  // namespace slrfr
