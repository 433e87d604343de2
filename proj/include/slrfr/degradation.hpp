#pragma once

#include "slrfr/core.hpp"
#include "slrfr/image.hpp"

#include <cstdint>

namespace slrfr {

/// Blur-then-downsample operator with optional additive Gaussian noise.
struct DegradationModel {
  Matrix blur_kernel = Matrix::Ones(1, 1);
  int downsample_factor = 1;
  double noise_sigma = 0.0;

  /// Gaussian anti-aliasing blur with sigma = factor / 2 unless given.
  static DegradationModel standard(int factor, double blur_sigma = -1.0,
                                   double noise_sigma = 0.0);

  /// Throws InvalidArgumentError when an invariant is broken: odd
  /// nonnegative kernel summing to 1 within 1e-12, factor >= 1, sigma >= 0.
  void validate() const;
};

/// Normalized 2-D Gaussian with support 2 * ceil(2 sigma) + 1 per axis.
/// sigma == 0 yields the 1x1 identity kernel.
Matrix gaussian_kernel(double sigma);

/// Convolution with replicate-edge boundary handling. Odd kernel sizes only.
GrayImage blur(const GrayImage& img, const Matrix& kernel);

/// Block-mean downsampling; partial edge blocks average the pixels present.
GrayImage downsample(const GrayImage& img, int factor);

/// Zero-mean Gaussian noise (seeded), clamped to [0, 1].
GrayImage add_noise(const GrayImage& img, double sigma, std::uint64_t seed);

/// blur -> downsample -> (noise_sigma > 0) add_noise. Linear when the
/// model is noise-free.
GrayImage degrade(const GrayImage& img, const DegradationModel& model,
                  std::uint64_t seed = 0);

/// Output shape of degrade() for a given input shape.
inline Index degraded_extent(Index extent, int factor) {
  return (extent + factor - 1) / factor;
}

}  // namespace slrfr
