#pragma once

// Lambertian relighting of high-resolution gallery images.

#include "slrfr/core.hpp"
#include "slrfr/image.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace slrfr {

/// Unit light direction in camera coordinates (x right, y up, z towards
/// the viewer).
class LightDirection {
 public:
  /// Normalizes `v`; throws InvalidArgumentError for a zero vector.
  explicit LightDirection(const Eigen::Vector3d& v);
  static LightDirection from_angles(double azimuth_deg, double elevation_deg);

  const Eigen::Vector3d& vector() const { return s_; }

 private:
  Eigen::Vector3d s_;
};

class NormalField {
 public:
  NormalField() = default;
  /// Row-major normals; each is normalized, zero vectors are rejected.
  NormalField(Index rows, Index cols, std::vector<Eigen::Vector3d> normals);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const Eigen::Vector3d& operator()(Index r, Index c) const {
    return normals_[static_cast<std::size_t>(r * cols_ + c)];
  }
  bool matches(const GrayImage& img) const {
    return img.rows() == rows_ && img.cols() == cols_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Eigen::Vector3d> normals_;
};

/// Semi-axes of a synthetic head ellipsoid. `coverage` is the fraction of
/// the ellipsoid's half-width spanned by the image half-width; values
/// below ~0.7 keep every normal within a moderate tilt of the viewer.
struct EllipsoidShape {
  double width = 1.0;
  double height = 1.25;
  double depth = 0.9;
  double coverage = 0.55;
};

NormalField ellipsoid_normals(Index rows, Index cols,
                              const EllipsoidShape& shape = {});

/// Nonnegative per-pixel reflectance.
class AlbedoMap {
 public:
  AlbedoMap() = default;
  /// Throws InvalidArgumentError if any value is negative or NaN.
  explicit AlbedoMap(GrayImage values);

  const GrayImage& values() const { return values_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  double operator()(Index r, Index c) const { return values_(r, c); }

 private:
  GrayImage values_;
};

/// Least-squares light direction (sum n n^T)^-1 sum X n, normalized.
/// Throws DegenerateGeometryError when the 3x3 system is singular.
LightDirection estimate_light_source(const GrayImage& img,
                                     const NormalField& normals);

struct InitialAlbedo {
  AlbedoMap albedo;
  Index flagged_pixels = 0;
};

/// rho0 = X / (n^T s). Pixels with n^T s < shadow_eps are flagged and
/// filled with the median of valid 3x3 neighbours.
InitialAlbedo initial_albedo(const GrayImage& img, const NormalField& normals,
                             const LightDirection& s,
                             double shadow_eps = 1e-3);

struct MmseOptions {
  int window = 5;
  /// Overrides the median-of-local-variances noise estimate.
  std::optional<double> noise_variance;
};

/// Locally adaptive Wiener shrinkage towards the local window mean.
AlbedoMap refine_albedo_mmse(const AlbedoMap& rho0, const MmseOptions& opts = {});

/// X = rho * max(n^T s, 0), unclamped.
GrayImage render(const AlbedoMap& albedo, const NormalField& normals,
                 const LightDirection& s);

/// Renders under each of exactly nine directions.
std::vector<GrayImage> synthesize_basis_images(
    const AlbedoMap& albedo, const NormalField& normals,
    std::span<const LightDirection> directions);

/// Frontal, the four axis tilts of 40 degrees, then the four diagonals.
std::vector<LightDirection> default_light_directions();

struct ExtensionOptions {
  int n_lights = 5;
  bool include_flips = true;
  /// Empty means default_light_directions().
  std::vector<LightDirection> directions;
  MmseOptions mmse;
};

/// Estimates light and albedo from `img`, re-renders under the first
/// n_lights directions and optionally appends the horizontal flips.
std::vector<GrayImage> extend_gallery(const GrayImage& img,
                                      const NormalField& normals,
                                      const ExtensionOptions& opts = {});

// Normal maps: "PF\n<cols> <rows>\n-1.0\n" followed by row-major
// little-endian float32 triples, top row first. A positive scale marks
// big-endian data.
NormalField read_normal_map(const std::filesystem::path& path);
void write_normal_map(const std::filesystem::path& path,
                      const NormalField& normals);

// One "azimuth_deg elevation_deg" pair per line; '#' starts a comment.
std::vector<LightDirection> read_light_directions(
    const std::filesystem::path& path);

}  // namespace slrfr
