#include "slrfr/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace slrfr {

DegradationModel DegradationModel::standard(int factor, double blur_sigma,
                                            double noise_sigma) {
  if (factor < 1) throw InvalidArgumentError("downsample factor must be >= 1");
  DegradationModel model;
  model.downsample_factor = factor;
  model.blur_kernel =
      gaussian_kernel(blur_sigma < 0.0 ? factor / 2.0 : blur_sigma);
  model.noise_sigma = noise_sigma;
  model.validate();
  return model;
}

void DegradationModel::validate() const {
  if (blur_kernel.rows() % 2 == 0 || blur_kernel.cols() % 2 == 0) {
    throw InvalidArgumentError("blur kernel must be odd-sized");
  }
  if ((blur_kernel.array() < 0.0).any()) {
    throw InvalidArgumentError("blur kernel weights must be nonnegative");
  }
  if (std::abs(blur_kernel.sum() - 1.0) > 1e-12) {
    throw InvalidArgumentError("blur kernel weights must sum to 1");
  }
  if (downsample_factor < 1) {
    throw InvalidArgumentError("downsample factor must be >= 1");
  }
  if (!(noise_sigma >= 0.0)) {
    throw InvalidArgumentError("noise sigma must be >= 0");
  }
}

Matrix gaussian_kernel(double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgumentError("blur sigma must be >= 0");
  if (sigma == 0.0) return Matrix::Ones(1, 1);
  const Index half = static_cast<Index>(std::ceil(2.0 * sigma));
  const Index size = 2 * half + 1;
  Vector profile(size);
  for (Index i = 0; i < size; ++i) {
    const double x = static_cast<double>(i - half);
    profile(i) = std::exp(-x * x / (2.0 * sigma * sigma));
  }
  Matrix kernel = profile * profile.transpose();
  kernel /= kernel.sum();
  return kernel;
}

GrayImage blur(const GrayImage& img, const Matrix& kernel) {
  if (kernel.rows() % 2 == 0 || kernel.cols() % 2 == 0) {
    throw InvalidArgumentError("blur kernel must be odd-sized, got " +
                               std::to_string(kernel.rows()) + "x" +
                               std::to_string(kernel.cols()));
  }
  const Index hr = kernel.rows() / 2;
  const Index hc = kernel.cols() / 2;
  GrayImage out(img.rows(), img.cols());
  if (img.empty()) return out;
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c) {
      double acc = 0.0;
      for (Index a = 0; a < kernel.rows(); ++a) {
        const Index sr = std::clamp<Index>(r - (a - hr), 0, img.rows() - 1);
        for (Index b = 0; b < kernel.cols(); ++b) {
          const Index sc = std::clamp<Index>(c - (b - hc), 0, img.cols() - 1);
          acc += kernel(a, b) * img(sr, sc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

GrayImage downsample(const GrayImage& img, int factor) {
  if (factor < 1) throw InvalidArgumentError("downsample factor must be >= 1");
  if (factor == 1) return img;
  const Index rows = degraded_extent(img.rows(), factor);
  const Index cols = degraded_extent(img.cols(), factor);
  GrayImage out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Index r0 = r * factor;
    const Index r1 = std::min<Index>(r0 + factor, img.rows());
    for (Index c = 0; c < cols; ++c) {
      const Index c0 = c * factor;
      const Index c1 = std::min<Index>(c0 + factor, img.cols());
      double acc = 0.0;
      for (Index sr = r0; sr < r1; ++sr) {
        for (Index sc = c0; sc < c1; ++sc) acc += img(sr, sc);
      }
      out(r, c) = acc / static_cast<double>((r1 - r0) * (c1 - c0));
    }
  }
  return out;
}

GrayImage add_noise(const GrayImage& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgumentError("noise sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  GrayImage out = img;
  for (double& p : out.pixels()) p = std::clamp(p + noise(rng), 0.0, 1.0);
  return out;
}

GrayImage degrade(const GrayImage& img, const DegradationModel& model,
                  std::uint64_t seed) {
  GrayImage out = downsample(blur(img, model.blur_kernel),
                             model.downsample_factor);
  if (model.noise_sigma > 0.0) out = add_noise(out, model.noise_sigma, seed);
  return out;
}

}  // namespace slrfr
