#include "slrfr/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace slrfr {

GrayImage::GrayImage(Index rows, Index cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw InvalidArgumentError("negative image size");
  pixels_.assign(static_cast<std::size_t>(rows * cols), fill);
}

GrayImage::GrayImage(Index rows, Index cols, std::vector<double> pixels)
    : rows_(rows), cols_(cols), pixels_(std::move(pixels)) {
  if (rows < 0 || cols < 0 ||
      static_cast<Index>(pixels_.size()) != rows * cols) {
    throw InvalidArgumentError("pixel count does not match " +
                               std::to_string(rows) + "x" +
                               std::to_string(cols));
  }
}

GrayImage GrayImage::clamped() const {
  GrayImage out = *this;
  for (double& p : out.pixels_) p = std::clamp(p, 0.0, 1.0);
  return out;
}

Vector vectorize(const GrayImage& img) {
  Vector v(img.size());
  for (Index c = 0; c < img.cols(); ++c) {
    for (Index r = 0; r < img.rows(); ++r) v(r + c * img.rows()) = img(r, c);
  }
  return v;
}

GrayImage unvectorize(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw InvalidArgumentError("vector length does not match image shape");
  }
  GrayImage img(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) img(r, c) = v(r + c * rows);
  }
  return img;
}

GrayImage horizontal_flip(const GrayImage& img) {
  GrayImage out(img.rows(), img.cols());
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c) {
      out(r, c) = img(r, img.cols() - 1 - c);
    }
  }
  return out;
}

StackedMatrix stack(std::span<const GrayImage> images) {
  if (images.empty()) return {};
  const GrayImage& first = images.front();
  StackedMatrix m(first.size(), static_cast<Index>(images.size()));
  for (std::size_t j = 0; j < images.size(); ++j) {
    if (!images[j].same_shape(first)) {
      throw InvalidArgumentError(
          "stack: image " + std::to_string(j) + " is " +
          std::to_string(images[j].rows()) + "x" +
          std::to_string(images[j].cols()) + ", expected " +
          std::to_string(first.rows()) + "x" + std::to_string(first.cols()));
    }
    m.col(static_cast<Index>(j)) = vectorize(images[j]);
  }
  return m;
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string token;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(ch);
  }
  return token;
}

long pgm_number(std::istream& in, const std::filesystem::path& path) {
  const std::string token = pgm_token(in);
  try {
    std::size_t used = 0;
    const long value = std::stol(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw DataError(path.string() + ": malformed PGM header");
  }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  if (pgm_token(in) != "P5") {
    throw DataError(path.string() + ": not a binary PGM (P5)");
  }
  const long cols = pgm_number(in, path);
  const long rows = pgm_number(in, path);
  const long max_value = pgm_number(in, path);
  if (cols <= 0 || rows <= 0 || max_value <= 0 || max_value > 65535) {
    throw DataError(path.string() + ": PGM header out of range");
  }
  // pgm_token consumed exactly one whitespace byte after max_value.
  const bool wide = max_value > 255;
  const std::size_t count = static_cast<std::size_t>(rows * cols);
  std::vector<unsigned char> raw(count * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!in) throw DataError(path.string() + ": truncated PGM data");
  std::vector<double> pixels(count);
  const double scale = 1.0 / static_cast<double>(max_value);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned value =
        wide ? (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1]
             : raw[i];
    pixels[i] = std::min(1.0, value * scale);
  }
  return GrayImage(rows, cols, std::move(pixels));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img,
               int max_value) {
  if (max_value <= 0 || max_value > 65535) {
    throw InvalidArgumentError("PGM max value must lie in [1, 65535]");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << img.cols() << ' ' << img.rows() << '\n' << max_value << '\n';
  const bool wide = max_value > 255;
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(img.size()) * (wide ? 2 : 1));
  for (double p : img.pixels()) {
    const auto value = static_cast<unsigned>(
        std::lround(std::clamp(p, 0.0, 1.0) * max_value));
    if (wide) raw.push_back(static_cast<unsigned char>(value >> 8));
    raw.push_back(static_cast<unsigned char>(value & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace slrfr
