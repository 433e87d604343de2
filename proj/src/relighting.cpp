#include "slrfr/relighting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace slrfr {
namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

void require_match(const GrayImage& img, const NormalField& normals) {
  if (!normals.matches(img)) {
    throw InvalidArgumentError("normal field shape does not match image");
  }
}

}  // namespace

LightDirection::LightDirection(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InvalidArgumentError("light direction must be a nonzero vector");
  }
  s_ = v / n;
}

LightDirection LightDirection::from_angles(double azimuth_deg,
                                           double elevation_deg) {
  const double az = azimuth_deg * std::numbers::pi / 180.0;
  const double el = elevation_deg * std::numbers::pi / 180.0;
  return LightDirection(Eigen::Vector3d(std::cos(el) * std::sin(az),
                                        std::sin(el),
                                        std::cos(el) * std::cos(az)));
}

NormalField::NormalField(Index rows, Index cols,
                         std::vector<Eigen::Vector3d> normals)
    : rows_(rows), cols_(cols), normals_(std::move(normals)) {
  if (rows < 0 || cols < 0 ||
      static_cast<Index>(normals_.size()) != rows * cols) {
    throw InvalidArgumentError("normal count does not match field shape");
  }
  for (auto& n : normals_) {
    const double len = n.norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
      throw InvalidArgumentError("normal field contains a zero normal");
    }
    n /= len;
  }
}

NormalField ellipsoid_normals(Index rows, Index cols,
                              const EllipsoidShape& shape) {
  if (shape.width <= 0 || shape.height <= 0 || shape.depth <= 0 ||
      shape.coverage <= 0) {
    throw InvalidArgumentError("ellipsoid parameters must be positive");
  }
  std::vector<Eigen::Vector3d> normals;
  normals.reserve(static_cast<std::size_t>(rows * cols));
  for (Index r = 0; r < rows; ++r) {
    // Image rows grow downwards, camera y grows upwards.
    const double v = -((r + 0.5) / static_cast<double>(rows) * 2.0 - 1.0);
    for (Index c = 0; c < cols; ++c) {
      const double u = (c + 0.5) / static_cast<double>(cols) * 2.0 - 1.0;
      double x = shape.coverage * u;
      double y = shape.coverage * v;
      const double radius = std::hypot(x, y);
      constexpr double kRim = 0.999;
      if (radius > kRim) {
        x *= kRim / radius;
        y *= kRim / radius;
      }
      const double z = std::sqrt(std::max(0.0, 1.0 - x * x - y * y));
      normals.emplace_back(x / shape.width, y / shape.height, z / shape.depth);
    }
  }
  return NormalField(rows, cols, std::move(normals));
}

AlbedoMap::AlbedoMap(GrayImage values) : values_(std::move(values)) {
  for (double p : values_.pixels()) {
    if (!(p >= 0.0)) {
      throw InvalidArgumentError("albedo values must be nonnegative");
    }
  }
}

LightDirection estimate_light_source(const GrayImage& img,
                                     const NormalField& normals) {
  require_match(img, normals);
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c) {
      const Eigen::Vector3d& n = normals(r, c);
      outer.noalias() += n * n.transpose();
      moment += img(r, c) * n;
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(outer);
  const double largest = eig.eigenvalues().maxCoeff();
  if (!(largest > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * largest) {
    throw DegenerateGeometryError(
        "normal field does not span three dimensions; light source is not "
        "identifiable");
  }
  const Eigen::Vector3d s = outer.ldlt().solve(moment);
  if (!(s.norm() > 0.0)) {
    throw DegenerateGeometryError("image carries no shading information");
  }
  return LightDirection(s);
}

InitialAlbedo initial_albedo(const GrayImage& img, const NormalField& normals,
                             const LightDirection& s, double shadow_eps) {
  require_match(img, normals);
  const Index rows = img.rows();
  const Index cols = img.cols();
  GrayImage rho(rows, cols);
  std::vector<bool> valid(static_cast<std::size_t>(rows * cols), true);
  Index flagged = 0;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double shading = normals(r, c).dot(s.vector());
      if (shading < shadow_eps) {
        valid[static_cast<std::size_t>(r * cols + c)] = false;
        ++flagged;
      } else {
        rho(r, c) = std::max(0.0, img(r, c) / shading);
      }
    }
  }
  if (flagged > 0) {
    std::vector<double> all_valid;
    for (Index i = 0; i < rows * cols; ++i) {
      if (valid[static_cast<std::size_t>(i)]) all_valid.push_back(rho.pixels()[i]);
    }
    const double fallback = median_of(std::move(all_valid));
    GrayImage filled = rho;
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) {
        if (valid[static_cast<std::size_t>(r * cols + c)]) continue;
        std::vector<double> neighbours;
        for (Index dr = -1; dr <= 1; ++dr) {
          for (Index dc = -1; dc <= 1; ++dc) {
            const Index nr = r + dr;
            const Index nc = c + dc;
            if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
            if (valid[static_cast<std::size_t>(nr * cols + nc)]) {
              neighbours.push_back(rho(nr, nc));
            }
          }
        }
        filled(r, c) =
            neighbours.empty() ? fallback : median_of(std::move(neighbours));
      }
    }
    rho = std::move(filled);
  }
  return {AlbedoMap(std::move(rho)), flagged};
}

AlbedoMap refine_albedo_mmse(const AlbedoMap& rho0, const MmseOptions& opts) {
  if (opts.window < 1 || opts.window % 2 == 0) {
    throw InvalidArgumentError("Wiener window must be a positive odd size");
  }
  const GrayImage& in = rho0.values();
  const Index rows = in.rows();
  const Index cols = in.cols();
  const Index half = opts.window / 2;
  GrayImage mean(rows, cols);
  GrayImage var(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double sum = 0.0;
      double sum_sq = 0.0;
      Index n = 0;
      for (Index wr = std::max<Index>(0, r - half);
           wr <= std::min<Index>(rows - 1, r + half); ++wr) {
        for (Index wc = std::max<Index>(0, c - half);
             wc <= std::min<Index>(cols - 1, c + half); ++wc) {
          sum += in(wr, wc);
          sum_sq += in(wr, wc) * in(wr, wc);
          ++n;
        }
      }
      const double mu = sum / static_cast<double>(n);
      mean(r, c) = mu;
      var(r, c) = std::max(0.0, sum_sq / static_cast<double>(n) - mu * mu);
    }
  }
  const double noise_var =
      opts.noise_variance
          ? *opts.noise_variance
          : median_of({var.pixels().begin(), var.pixels().end()});
  constexpr double kVarianceFloor = 1e-12;
  GrayImage out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double v = var(r, c);
      const double gain = v > kVarianceFloor
                              ? std::max(v - noise_var, 0.0) / v
                              : 0.0;
      // A zero-variance window means in == mean; gain is irrelevant there.
      const double value =
          v > kVarianceFloor ? mean(r, c) + gain * (in(r, c) - mean(r, c))
                             : in(r, c);
      out(r, c) = std::max(0.0, value);
    }
  }
  return AlbedoMap(std::move(out));
}

GrayImage render(const AlbedoMap& albedo, const NormalField& normals,
                 const LightDirection& s) {
  require_match(albedo.values(), normals);
  GrayImage out(albedo.rows(), albedo.cols());
  for (Index r = 0; r < out.rows(); ++r) {
    for (Index c = 0; c < out.cols(); ++c) {
      out(r, c) = albedo(r, c) * std::max(normals(r, c).dot(s.vector()), 0.0);
    }
  }
  return out;
}

std::vector<GrayImage> synthesize_basis_images(
    const AlbedoMap& albedo, const NormalField& normals,
    std::span<const LightDirection> directions) {
  if (directions.size() != 9) {
    throw InvalidArgumentError("basis synthesis needs exactly nine directions, "
                               "got " + std::to_string(directions.size()));
  }
  std::vector<GrayImage> basis;
  basis.reserve(9);
  for (const auto& s : directions) basis.push_back(render(albedo, normals, s));
  return basis;
}

std::vector<LightDirection> default_light_directions() {
  constexpr double kTilt = 40.0;
  return {
      LightDirection::from_angles(0, 0),
      LightDirection::from_angles(kTilt, 0),
      LightDirection::from_angles(-kTilt, 0),
      LightDirection::from_angles(0, kTilt),
      LightDirection::from_angles(0, -kTilt),
      LightDirection::from_angles(kTilt, kTilt),
      LightDirection::from_angles(-kTilt, kTilt),
      LightDirection::from_angles(kTilt, -kTilt),
      LightDirection::from_angles(-kTilt, -kTilt),
  };
}

std::vector<GrayImage> extend_gallery(const GrayImage& img,
                                      const NormalField& normals,
                                      const ExtensionOptions& opts) {
  if (opts.n_lights < 1 || opts.n_lights > 9) {
    throw InvalidArgumentError("n_lights must lie in [1, 9]");
  }
  const std::vector<LightDirection> directions =
      opts.directions.empty() ? default_light_directions() : opts.directions;
  if (static_cast<int>(directions.size()) < opts.n_lights) {
    throw InvalidArgumentError("fewer light directions than n_lights");
  }
  const LightDirection s = estimate_light_source(img, normals);
  const AlbedoMap rho0 = initial_albedo(img, normals, s).albedo;
  const AlbedoMap rho = refine_albedo_mmse(rho0, opts.mmse);

  std::vector<GrayImage> out;
  out.reserve(static_cast<std::size_t>(opts.n_lights * (opts.include_flips ? 2 : 1)));
  for (int k = 0; k < opts.n_lights; ++k) {
    out.push_back(render(rho, normals, directions[static_cast<std::size_t>(k)]));
  }
  if (opts.include_flips) {
    for (int k = 0; k < opts.n_lights; ++k) {
      out.push_back(horizontal_flip(out[static_cast<std::size_t>(k)]));
    }
  }
  return out;
}

namespace {

std::string read_header_line(std::istream& in, const std::filesystem::path& p) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(p.string() + ": truncated normal-map header");
  }
  return line;
}

}  // namespace

NormalField read_normal_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  if (read_header_line(in, path) != "PF") {
    throw DataError(path.string() + ": not a 3-plane float map (PF)");
  }
  long cols = 0;
  long rows = 0;
  double scale = 0.0;
  {
    std::istringstream dims(read_header_line(in, path));
    if (!(dims >> cols >> rows) || cols <= 0 || rows <= 0) {
      throw DataError(path.string() + ": bad normal-map dimensions");
    }
    std::istringstream sc(read_header_line(in, path));
    if (!(sc >> scale) || scale == 0.0) {
      throw DataError(path.string() + ": bad normal-map scale");
    }
  }
  const bool little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;
  std::vector<Eigen::Vector3d> normals(static_cast<std::size_t>(rows * cols));
  for (auto& n : normals) {
    for (int k = 0; k < 3; ++k) {
      unsigned char bytes[4];
      in.read(reinterpret_cast<char*>(bytes), 4);
      if (!in) throw DataError(path.string() + ": truncated normal-map data");
      if (little != host_little) std::reverse(bytes, bytes + 4);
      float value = 0.0f;
      std::memcpy(&value, bytes, 4);
      n(k) = value;
    }
  }
  try {
    return NormalField(rows, cols, std::move(normals));
  } catch (const InvalidArgumentError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_normal_map(const std::filesystem::path& path,
                      const NormalField& normals) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "PF\n" << normals.cols() << ' ' << normals.rows() << "\n-1.0\n";
  for (Index r = 0; r < normals.rows(); ++r) {
    for (Index c = 0; c < normals.cols(); ++c) {
      for (int k = 0; k < 3; ++k) {
        const auto bits = std::bit_cast<std::uint32_t>(
            static_cast<float>(normals(r, c)(k)));
        const unsigned char bytes[4] = {
            static_cast<unsigned char>(bits & 0xFF),
            static_cast<unsigned char>((bits >> 8) & 0xFF),
            static_cast<unsigned char>((bits >> 16) & 0xFF),
            static_cast<unsigned char>((bits >> 24) & 0xFF)};
        out.write(reinterpret_cast<const char*>(bytes), 4);
      }
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<LightDirection> read_light_directions(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<LightDirection> directions;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    double az = 0.0;
    double el = 0.0;
    if (!(fields >> az)) continue;
    std::string rest;
    if (!(fields >> el) || (fields >> rest)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected \"azimuth_deg elevation_deg\"");
    }
    directions.push_back(LightDirection::from_angles(az, el));
  }
  return directions;
}

}  // namespace slrfr
