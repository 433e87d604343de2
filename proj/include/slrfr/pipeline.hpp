#pragma once

// End-to-end recognition: gallery extension, degradation, PCA features,
// per-class dictionary training, evaluation and noise sweeps.

#include "slrfr/degradation.hpp"
#include "slrfr/image.hpp"
#include "slrfr/joint_kernel_dict.hpp"
#include "slrfr/kernel_dict.hpp"
#include "slrfr/pca.hpp"
#include "slrfr/relighting.hpp"
#include "slrfr/sparse_linear.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace slrfr {

enum class Method { kSlrfr, kKerSlrfr, kJointKerSlrfr };

std::string method_name(Method method);
Method parse_method(const std::string& name);

struct PipelineConfig {
  Method method = Method::kKerSlrfr;
  /// 0 takes the shape of the first gallery image.
  Index hr_rows = 0;
  Index hr_cols = 0;
  int downsample = 4;
  double blur_sigma = -1.0;  // negative: factor / 2
  Index atoms = 0;           // 0: one atom per extended training image
  int sparsity = 3;
  int iterations = 20;
  KernelKind kernel = KernelKind::kGaussian;
  /// LR kernel parameter; unset means leave-one-out selection (gaussian).
  std::optional<double> kernel_c;
  /// HR kernel parameter for the joint method; unset follows kernel_c.
  std::optional<double> kernel_c_hr;
  int kernel_degree = 2;
  double lambda = 1.0;
  Index pca_dim = 0;  // 0: min(100, samples - 1)
  int n_lights = 5;
  bool flips = true;
  std::uint64_t seed = 0;
  /// Normal map file; empty uses the synthetic ellipsoid.
  std::string normals;
};

/// Flat "key = value" text; '#' starts a comment. Unknown keys and
/// malformed values raise InvalidArgumentError.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::filesystem::path& path);
/// Canonical text form accepted by parse_config.
std::string format_config(const PipelineConfig& config);

struct GalleryManifest {
  struct Entry {
    std::string label;
    std::vector<std::filesystem::path> images;
  };
  std::vector<Entry> classes;
};

/// One "label path" pair per line, grouped by label in order of first
/// appearance. Relative paths resolve against the manifest's directory.
GalleryManifest read_manifest(const std::filesystem::path& path);

struct Subject {
  std::string label;
  std::vector<GrayImage> images;
};

struct Probe {
  std::string id;
  std::string label;
  GrayImage image;
};

std::vector<Subject> load_gallery(const GalleryManifest& manifest);
/// Probe ids are the image file stems.
std::vector<Probe> load_probes(const GalleryManifest& manifest);

struct TrainedModel {
  Method method = Method::kKerSlrfr;
  PipelineConfig config;
  DegradationModel degradation;
  Index hr_rows = 0, hr_cols = 0, lr_rows = 0, lr_cols = 0;
  PcaBasis pca_lr;
  PcaBasis pca_hr;  // joint method only
  std::vector<std::string> labels;
  std::vector<Dictionary> linear;
  std::vector<KernelDictionary> kernel;
  std::vector<JointKernelDictionary> joint;

  Index class_count() const { return static_cast<Index>(labels.size()); }
  /// Residual ranking for an image already at the model's LR shape.
  ResidualReport classify_lr(const GrayImage& lr) const;
};

/// Relighting (and flip) extension of every gallery image, HR shape.
std::vector<std::vector<GrayImage>> extend_subjects(
    std::span<const Subject> gallery, const NormalField& normals,
    const PipelineConfig& config);

/// Training images are degraded without noise. Per-class failures are
/// rethrown with the class label prepended.
TrainedModel train_model(std::span<const Subject> gallery,
                         const PipelineConfig& config);

struct ProbeResult {
  std::string id;
  std::string true_label;
  std::string predicted_label;
  std::vector<double> residuals;
  Index true_rank = 0;  // 1-based position of the true class
};

struct EvaluationReport {
  double rank_one = 0.0;
  std::vector<double> cmc;  // cmc[r - 1]: fraction within the top r
  std::vector<ProbeResult> per_probe;
  /// Probes whose label is not a model class; not scored.
  std::vector<std::string> excluded;
  double seconds = 0.0;
  double seconds_per_probe = 0.0;
};

struct EvaluateOptions {
  /// Probes arrive at the model's LR shape instead of HR.
  bool lr_probes = false;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

/// Brings a probe to the model's LR shape: degradation for HR probes, then
/// seeded noise for probe `index` when noise_sigma > 0.
GrayImage prepare_probe(const TrainedModel& model, const GrayImage& image,
                        const EvaluateOptions& opts, std::size_t index);

EvaluationReport evaluate(const TrainedModel& model, std::span<const Probe> probes,
                          const EvaluateOptions& opts = {});

struct SweepEntry {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  EvaluationReport report;
};

struct SweepReport {
  std::vector<SweepEntry> entries;  // sigma-major, then seed
  std::vector<double> sigmas;
  std::vector<double> mean_rank_one;  // aligned with sigmas
};

/// Requires ascending sigmas and at least one seed.
SweepReport noise_sweep(const TrainedModel& model, std::span<const Probe> probes,
                        std::span<const double> sigmas,
                        std::span<const std::uint64_t> seeds,
                        bool lr_probes = false);

void write_cmc_csv(std::ostream& out, const EvaluationReport& report);
void write_sweep_csv(std::ostream& out, const SweepReport& sweep);
void write_per_probe_csv(std::ostream& out, const EvaluationReport& report);

// "SLRM" v1 model container.
void save_model(std::ostream& out, const TrainedModel& model);
TrainedModel load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

struct SyntheticOptions {
  Index classes = 10;
  Index gallery_per_class = 1;
  Index probes_per_class = 5;
  Index rows = 48;
  Index cols = 40;
  /// Probe lights are drawn uniformly within this many degrees of frontal.
  double probe_light_spread = 30.0;
  std::uint64_t seed = 0;
};

struct SyntheticFaces {
  std::vector<Subject> gallery;
  std::vector<Probe> probes;
  std::vector<AlbedoMap> prototypes;
};

/// Smooth random albedo prototypes on the default ellipsoid. Gallery images
/// are frontal renders, probes use random nearby light directions.
SyntheticFaces make_synthetic_faces(const SyntheticOptions& opts);

}  // namespace slrfr
