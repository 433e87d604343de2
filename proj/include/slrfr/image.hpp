#pragma once

#include "slrfr/core.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace slrfr {

/// Grayscale intensity field, row-major, nominally in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(Index rows, Index cols, double fill = 0.0);
  /// Throws InvalidArgumentError unless pixels.size() == rows * cols.
  GrayImage(Index rows, Index cols, std::vector<double> pixels);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }
  bool empty() const { return size() == 0; }
  bool same_shape(const GrayImage& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(Index r, Index c) { return pixels_[r * cols_ + c]; }
  double operator()(Index r, Index c) const { return pixels_[r * cols_ + c]; }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  /// Copy with every intensity clamped to [0, 1].
  GrayImage clamped() const;

  bool operator==(const GrayImage&) const = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> pixels_;
};

/// Matrix whose columns are vectorized samples (images or feature vectors)
/// of one common length.
using StackedMatrix = Matrix;

/// Column stacking: output[r + c * rows] = img(r, c).
Vector vectorize(const GrayImage& img);
GrayImage unvectorize(const Vector& v, Index rows, Index cols);

GrayImage horizontal_flip(const GrayImage& img);

/// Column j is vectorize(images[j]). All images must share one shape.
StackedMatrix stack(std::span<const GrayImage> images);

// Binary PGM (P5). 8-bit files are written for max_value <= 255, 16-bit
// big-endian samples otherwise. Intensities map linearly onto [0, 1].
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img,
               int max_value = 255);

}  // namespace slrfr
