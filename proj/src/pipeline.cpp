#include "slrfr/pipeline.hpp"

#include "slrfr/binary_io.hpp"
#include "detail/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace slrfr {
namespace {

constexpr std::uint32_t kModelVersion = 1;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgumentError("config: bad value '" + text + "' for " + key);
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidArgumentError("config: bad boolean '" + text + "' for " + key);
}

std::optional<double> parse_optional_c(const std::string& key,
                                       const std::string& text) {
  if (text == "cv") return std::nullopt;
  return parse_number<double>(key, text);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Index default_pca_dim(const PipelineConfig& config, Index samples, Index dim) {
  const Index wanted =
      config.pca_dim > 0 ? config.pca_dim : std::min<Index>(100, samples - 1);
  return std::clamp<Index>(wanted, 1, std::min(samples, dim));
}

KernelSpec make_kernel(const PipelineConfig& config, double c) {
  switch (config.kernel) {
    case KernelKind::kLinear:
      return KernelSpec::linear();
    case KernelKind::kPolynomial:
      return KernelSpec::polynomial(c, config.kernel_degree);
    case KernelKind::kGaussian:
      return KernelSpec::gaussian(c);
  }
  throw InvalidArgumentError("unknown kernel kind");
}

TrainOptions train_options(const PipelineConfig& config) {
  TrainOptions o;
  o.n_atoms = config.atoms;
  o.sparsity = config.sparsity;
  o.iterations = config.iterations;
  o.seed = config.seed;
  return o;
}

// Kernel for features of one resolution: fixed parameter, polynomial
// default c = 1, or leave-one-out width selection for gaussians.
KernelSpec choose_kernel(const PipelineConfig& config, std::optional<double> c,
                         std::span<const StackedMatrix> features) {
  if (c) return make_kernel(config, *c);
  if (config.kernel != KernelKind::kGaussian) return make_kernel(config, 1.0);
  return KernelSpec::gaussian(
      select_gaussian_width(features, train_options(config)).c);
}

StackedMatrix stack_vectors(const std::vector<GrayImage>& images) {
  return stack(std::span<const GrayImage>(images));
}

void write_degradation(std::ostream& out, const DegradationModel& d) {
  binary::write_matrix(out, d.blur_kernel);
  binary::write_u32(out, static_cast<std::uint32_t>(d.downsample_factor));
  binary::write_f64(out, d.noise_sigma);
}

DegradationModel read_degradation(std::istream& in) {
  DegradationModel d;
  d.blur_kernel = binary::read_matrix(in);
  d.downsample_factor = static_cast<int>(binary::read_u32(in));
  d.noise_sigma = binary::read_f64(in);
  try {
    d.validate();
  } catch (const InvalidArgumentError& e) {
    throw DataError(std::string("corrupt degradation model: ") + e.what());
  }
  return d;
}

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::kSlrfr:
      return "slrfr";
    case Method::kKerSlrfr:
      return "kerslrfr";
    case Method::kJointKerSlrfr:
      return "jointkerslrfr";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "slrfr") return Method::kSlrfr;
  if (name == "kerslrfr") return Method::kKerSlrfr;
  if (name == "jointkerslrfr") return Method::kJointKerSlrfr;
  throw InvalidArgumentError("unknown method '" + name +
                             "' (slrfr, kerslrfr, jointkerslrfr)");
}

PipelineConfig parse_config(std::istream& in) {
  PipelineConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgumentError("config line " + std::to_string(line_no) +
                                 ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "method") c.method = parse_method(value);
    else if (key == "hr_rows") c.hr_rows = parse_number<Index>(key, value);
    else if (key == "hr_cols") c.hr_cols = parse_number<Index>(key, value);
    else if (key == "downsample") c.downsample = parse_number<int>(key, value);
    else if (key == "blur_sigma") c.blur_sigma = parse_number<double>(key, value);
    else if (key == "atoms") c.atoms = parse_number<Index>(key, value);
    else if (key == "sparsity") c.sparsity = parse_number<int>(key, value);
    else if (key == "iterations") c.iterations = parse_number<int>(key, value);
    else if (key == "kernel") c.kernel = parse_kernel_kind(value);
    else if (key == "kernel_c") c.kernel_c = parse_optional_c(key, value);
    else if (key == "kernel_c_hr") c.kernel_c_hr = parse_optional_c(key, value);
    else if (key == "kernel_degree") c.kernel_degree = parse_number<int>(key, value);
    else if (key == "lambda") c.lambda = parse_number<double>(key, value);
    else if (key == "pca_dim") c.pca_dim = parse_number<Index>(key, value);
    else if (key == "n_lights") c.n_lights = parse_number<int>(key, value);
    else if (key == "flips") c.flips = parse_bool(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "normals") c.normals = value;
    else throw InvalidArgumentError("config: unknown key '" + key + "'");
  }
  if (c.downsample < 1) throw InvalidArgumentError("config: downsample must be >= 1");
  if (c.sparsity < 1) throw InvalidArgumentError("config: sparsity must be >= 1");
  if (c.iterations < 0) throw InvalidArgumentError("config: iterations must be >= 0");
  if (c.atoms < 0 || c.pca_dim < 0 || c.hr_rows < 0 || c.hr_cols < 0) {
    throw InvalidArgumentError("config: sizes must be nonnegative");
  }
  if (!(c.lambda >= 0.0)) throw InvalidArgumentError("config: lambda must be >= 0");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open config " + path.string());
  return parse_config(in);
}

std::string format_config(const PipelineConfig& c) {
  std::ostringstream os;
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("cv");
  };
  os << "method = " << method_name(c.method) << '\n'
     << "hr_rows = " << c.hr_rows << '\n'
     << "hr_cols = " << c.hr_cols << '\n'
     << "downsample = " << c.downsample << '\n'
     << "blur_sigma = " << format_double(c.blur_sigma) << '\n'
     << "atoms = " << c.atoms << '\n'
     << "sparsity = " << c.sparsity << '\n'
     << "iterations = " << c.iterations << '\n'
     << "kernel = " << kernel_kind_name(c.kernel) << '\n'
     << "kernel_c = " << opt(c.kernel_c) << '\n'
     << "kernel_c_hr = " << opt(c.kernel_c_hr) << '\n'
     << "kernel_degree = " << c.kernel_degree << '\n'
     << "lambda = " << format_double(c.lambda) << '\n'
     << "pca_dim = " << c.pca_dim << '\n'
     << "n_lights = " << c.n_lights << '\n'
     << "flips = " << (c.flips ? "true" : "false") << '\n'
     << "seed = " << c.seed << '\n';
  if (!c.normals.empty()) os << "normals = " << c.normals << '\n';
  return os.str();
}

GalleryManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  GalleryManifest manifest;
  std::map<std::string, std::size_t> index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string label;
    std::string file;
    fields >> label;
    std::getline(fields, file);
    file = trim(file);
    if (label.empty() || file.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 'label path'");
    }
    std::filesystem::path image(file);
    if (image.is_relative()) image = path.parent_path() / image;
    auto [it, inserted] = index.emplace(label, manifest.classes.size());
    if (inserted) manifest.classes.push_back({label, {}});
    manifest.classes[it->second].images.push_back(image);
  }
  if (manifest.classes.empty()) {
    throw DataError(path.string() + ": manifest lists no images");
  }
  return manifest;
}

std::vector<Subject> load_gallery(const GalleryManifest& manifest) {
  std::vector<Subject> out;
  for (const auto& entry : manifest.classes) {
    Subject s{entry.label, {}};
    for (const auto& p : entry.images) s.images.push_back(read_pgm(p));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Probe> load_probes(const GalleryManifest& manifest) {
  std::vector<Probe> out;
  for (const auto& entry : manifest.classes) {
    for (const auto& p : entry.images) {
      out.push_back({p.stem().string(), entry.label, read_pgm(p)});
    }
  }
  return out;
}

ResidualReport TrainedModel::classify_lr(const GrayImage& lr) const {
  if (lr.rows() != lr_rows || lr.cols() != lr_cols) {
    throw InvalidArgumentError(
        "probe is " + std::to_string(lr.rows()) + "x" + std::to_string(lr.cols()) +
        ", model expects " + std::to_string(lr_rows) + "x" + std::to_string(lr_cols));
  }
  const Vector f = extract_features(pca_lr, vectorize(lr));
  const int t = config.sparsity;
  switch (method) {
    case Method::kSlrfr:
      return classify_linear(linear, f);
    case Method::kKerSlrfr:
      return classify_kernel(kernel, f, t);
    case Method::kJointKerSlrfr:
      return classify_joint(joint, f, t);
  }
  throw InvalidArgumentError("unknown method");
}

std::vector<std::vector<GrayImage>> extend_subjects(
    std::span<const Subject> gallery, const NormalField& normals,
    const PipelineConfig& config) {
  ExtensionOptions ext;
  ext.n_lights = config.n_lights;
  ext.include_flips = config.flips;
  std::vector<std::vector<GrayImage>> out;
  for (const auto& subject : gallery) {
    std::vector<GrayImage> images;
    for (const auto& img : subject.images) {
      if (!normals.matches(img)) {
        throw InvalidArgumentError(
            subject.label + ": image is " + std::to_string(img.rows()) + "x" +
            std::to_string(img.cols()) + ", normals are " +
            std::to_string(normals.rows()) + "x" + std::to_string(normals.cols()));
      }
      for (auto& e : extend_gallery(img, normals, ext)) images.push_back(std::move(e));
    }
    out.push_back(std::move(images));
  }
  return out;
}

TrainedModel train_model(std::span<const Subject> gallery,
                         const PipelineConfig& config) {
  if (gallery.empty()) throw InvalidArgumentError("gallery has no classes");
  {
    std::vector<std::string> labels;
    for (const auto& s : gallery) {
      if (s.images.empty()) {
        throw InvalidArgumentError("class '" + s.label + "' has no images");
      }
      labels.push_back(s.label);
    }
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
      throw InvalidArgumentError("gallery labels are not unique");
    }
  }
  TrainedModel model;
  model.method = config.method;
  model.config = config;
  model.hr_rows = config.hr_rows > 0 ? config.hr_rows : gallery.front().images.front().rows();
  model.hr_cols = config.hr_cols > 0 ? config.hr_cols : gallery.front().images.front().cols();
  model.degradation = DegradationModel::standard(config.downsample, config.blur_sigma);
  model.lr_rows = degraded_extent(model.hr_rows, config.downsample);
  model.lr_cols = degraded_extent(model.hr_cols, config.downsample);

  const NormalField normals =
      config.normals.empty() ? ellipsoid_normals(model.hr_rows, model.hr_cols)
                             : read_normal_map(config.normals);
  const auto extended = extend_subjects(gallery, normals, config);

  const std::size_t n_classes = gallery.size();
  std::vector<StackedMatrix> hr(n_classes), lr(n_classes);
  Index total = 0;
  for (std::size_t i = 0; i < n_classes; ++i) {
    std::vector<GrayImage> low;
    for (const auto& img : extended[i]) low.push_back(degrade(img, model.degradation));
    hr[i] = stack_vectors(extended[i]);
    lr[i] = stack_vectors(low);
    total += lr[i].cols();
  }
  const auto pool = [&](const std::vector<StackedMatrix>& parts) {
    StackedMatrix all(parts.front().rows(), total);
    Index at = 0;
    for (const auto& p : parts) {
      all.middleCols(at, p.cols()) = p;
      at += p.cols();
    }
    return all;
  };
  {
    const StackedMatrix all = pool(lr);
    model.pca_lr = compute_pca_basis(all, default_pca_dim(config, total, all.rows()));
  }
  std::vector<StackedMatrix> f_lr(n_classes), f_hr;
  for (std::size_t i = 0; i < n_classes; ++i) f_lr[i] = extract_features(model.pca_lr, lr[i]);
  if (config.method == Method::kJointKerSlrfr) {
    const StackedMatrix all = pool(hr);
    model.pca_hr = compute_pca_basis(all, default_pca_dim(config, total, all.rows()));
    f_hr.resize(n_classes);
    for (std::size_t i = 0; i < n_classes; ++i) f_hr[i] = extract_features(model.pca_hr, hr[i]);
  }

  KernelSpec kernel_lr, kernel_hr;
  if (config.method != Method::kSlrfr) {
    kernel_lr = choose_kernel(config, config.kernel_c, f_lr);
    if (config.method == Method::kJointKerSlrfr) {
      kernel_hr = choose_kernel(config, config.kernel_c_hr ? config.kernel_c_hr
                                                           : config.kernel_c,
                                f_hr);
    }
  }

  for (const auto& s : gallery) model.labels.push_back(s.label);
  const int n = static_cast<int>(n_classes);
  std::vector<std::string> errors(n_classes);
  switch (config.method) {
    case Method::kSlrfr: model.linear.resize(n_classes); break;
    case Method::kKerSlrfr: model.kernel.resize(n_classes); break;
    case Method::kJointKerSlrfr: model.joint.resize(n_classes); break;
  }
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    TrainOptions o = train_options(config);
    o.seed = class_seed(config.seed, u);
    o.label = gallery[u].label;
    try {
      switch (config.method) {
        case Method::kSlrfr:
          model.linear[u] = ksvd_train(f_lr[u], o);
          break;
        case Method::kKerSlrfr:
          model.kernel[u] = kernel_ksvd_train(f_lr[u], kernel_lr, o);
          break;
        case Method::kJointKerSlrfr:
          model.joint[u] = joint_train(f_hr[u], f_lr[u], config.lambda, kernel_hr,
                                       kernel_lr, o);
          break;
      }
    } catch (const std::exception& e) {
      errors[u] = e.what();
    }
  }
  for (std::size_t i = 0; i < n_classes; ++i) {
    if (!errors[i].empty()) {
      throw NumericalError("class '" + gallery[i].label + "': " + errors[i]);
    }
  }
  return model;
}

GrayImage prepare_probe(const TrainedModel& model, const GrayImage& image,
                        const EvaluateOptions& opts, std::size_t index) {
  GrayImage lr = opts.lr_probes ? image : degrade(image, model.degradation);
  if (opts.noise_sigma > 0.0) {
    lr = add_noise(lr, opts.noise_sigma, detail::mix_seed(opts.noise_seed, index));
  }
  return lr;
}

EvaluationReport evaluate(const TrainedModel& model, std::span<const Probe> probes,
                          const EvaluateOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  EvaluationReport report;
  const Index c = model.class_count();
  std::vector<std::size_t> scored;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const bool known = std::find(model.labels.begin(), model.labels.end(),
                                 probes[p].label) != model.labels.end();
    if (known) {
      scored.push_back(p);
    } else {
      report.excluded.push_back(probes[p].id);
    }
  }
  report.per_probe.resize(scored.size());
  std::vector<std::string> errors(scored.size());
  const int n = static_cast<int>(scored.size());
#pragma omp parallel for schedule(dynamic)
  for (int q = 0; q < n; ++q) {
    const auto u = static_cast<std::size_t>(q);
    const Probe& probe = probes[scored[u]];
    try {
      const ResidualReport r =
          model.classify_lr(prepare_probe(model, probe.image, opts, scored[u]));
      ProbeResult& out = report.per_probe[u];
      out.id = probe.id;
      out.true_label = probe.label;
      out.predicted_label = r.predicted_label;
      out.residuals = r.residuals;
      const auto ranking = r.ranking();
      for (std::size_t k = 0; k < ranking.size(); ++k) {
        if (r.labels[static_cast<std::size_t>(ranking[k])] == probe.label) {
          out.true_rank = static_cast<Index>(k) + 1;
          break;
        }
      }
    } catch (const std::exception& e) {
      errors[u] = probe.id + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw InvalidArgumentError(e);
  }
  report.cmc.assign(static_cast<std::size_t>(c), 0.0);
  if (!report.per_probe.empty()) {
    for (const auto& r : report.per_probe) {
      for (Index k = r.true_rank; k <= c; ++k) {
        report.cmc[static_cast<std::size_t>(k - 1)] += 1.0;
      }
    }
    for (auto& v : report.cmc) v /= static_cast<double>(report.per_probe.size());
    report.rank_one = report.cmc.front();
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.seconds_per_probe =
      report.per_probe.empty() ? 0.0
                               : report.seconds / static_cast<double>(report.per_probe.size());
  return report;
}

SweepReport noise_sweep(const TrainedModel& model, std::span<const Probe> probes,
                        std::span<const double> sigmas,
                        std::span<const std::uint64_t> seeds, bool lr_probes) {
  if (sigmas.empty() || seeds.empty()) {
    throw InvalidArgumentError("noise sweep needs at least one sigma and one seed");
  }
  if (!std::is_sorted(sigmas.begin(), sigmas.end())) {
    throw InvalidArgumentError("noise sweep sigmas must be ascending");
  }
  if (sigmas.front() < 0.0) throw InvalidArgumentError("noise sigma must be >= 0");
  SweepReport sweep;
  for (double sigma : sigmas) {
    double sum = 0.0;
    for (std::uint64_t seed : seeds) {
      EvaluateOptions o;
      o.lr_probes = lr_probes;
      o.noise_sigma = sigma;
      o.noise_seed = seed;
      SweepEntry entry{sigma, seed, evaluate(model, probes, o)};
      sum += entry.report.rank_one;
      sweep.entries.push_back(std::move(entry));
    }
    sweep.sigmas.push_back(sigma);
    sweep.mean_rank_one.push_back(sum / static_cast<double>(seeds.size()));
  }
  return sweep;
}

void write_cmc_csv(std::ostream& out, const EvaluationReport& report) {
  out << "rank,cumulative_accuracy\n";
  for (std::size_t r = 0; r < report.cmc.size(); ++r) {
    out << r + 1 << ',' << format_double(report.cmc[r]) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepReport& sweep) {
  out << "sigma,seed,rank_one\n";
  for (const auto& e : sweep.entries) {
    out << format_double(e.sigma) << ',' << e.seed << ','
        << format_double(e.report.rank_one) << '\n';
  }
}

void write_per_probe_csv(std::ostream& out, const EvaluationReport& report) {
  const std::size_t c = report.cmc.size();
  out << "probe_id,true,predicted";
  for (std::size_t k = 1; k <= c; ++k) out << ",residual_" << k;
  out << '\n';
  for (const auto& r : report.per_probe) {
    out << r.id << ',' << r.true_label << ',' << r.predicted_label;
    for (double v : r.residuals) out << ',' << format_double(v);
    out << '\n';
  }
}

void save_model(std::ostream& out, const TrainedModel& model) {
  binary::write_magic(out, "SLRM");
  binary::write_u32(out, kModelVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(model.method));
  binary::write_string(out, format_config(model.config));
  write_degradation(out, model.degradation);
  for (Index v : {model.hr_rows, model.hr_cols, model.lr_rows, model.lr_cols}) {
    binary::write_u32(out, static_cast<std::uint32_t>(v));
  }
  save_pca_basis(out, model.pca_lr);
  if (model.method == Method::kJointKerSlrfr) save_pca_basis(out, model.pca_hr);
  binary::write_u32(out, static_cast<std::uint32_t>(model.labels.size()));
  for (std::size_t i = 0; i < model.labels.size(); ++i) {
    binary::write_string(out, model.labels[i]);
    switch (model.method) {
      case Method::kSlrfr: save_dictionary(out, model.linear.at(i)); break;
      case Method::kKerSlrfr: save_kernel_dictionary(out, model.kernel.at(i)); break;
      case Method::kJointKerSlrfr: save_joint_dictionary(out, model.joint.at(i)); break;
    }
  }
  if (!out) throw DataError("failed to write model");
}

TrainedModel load_model(std::istream& in) {
  binary::expect_magic(in, "SLRM");
  if (const auto v = binary::read_u32(in); v != kModelVersion) {
    throw DataError("unsupported model version " + std::to_string(v));
  }
  TrainedModel model;
  const auto method = binary::read_u32(in);
  if (method > static_cast<std::uint32_t>(Method::kJointKerSlrfr)) {
    throw DataError("unknown method id " + std::to_string(method));
  }
  model.method = static_cast<Method>(method);
  {
    std::istringstream cfg(binary::read_string(in));
    try {
      model.config = parse_config(cfg);
    } catch (const InvalidArgumentError& e) {
      throw DataError(std::string("corrupt model config: ") + e.what());
    }
  }
  if (model.config.method != model.method) {
    throw DataError("model method does not match its config");
  }
  model.degradation = read_degradation(in);
  model.hr_rows = binary::read_u32(in);
  model.hr_cols = binary::read_u32(in);
  model.lr_rows = binary::read_u32(in);
  model.lr_cols = binary::read_u32(in);
  model.pca_lr = load_pca_basis(in);
  if (model.method == Method::kJointKerSlrfr) model.pca_hr = load_pca_basis(in);
  const auto n = binary::read_u32(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    model.labels.push_back(binary::read_string(in));
    switch (model.method) {
      case Method::kSlrfr: model.linear.push_back(load_dictionary(in)); break;
      case Method::kKerSlrfr: model.kernel.push_back(load_kernel_dictionary(in)); break;
      case Method::kJointKerSlrfr: model.joint.push_back(load_joint_dictionary(in)); break;
    }
  }
  return model;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  save_model(out, model);
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  return load_model(in);
}

SyntheticFaces make_synthetic_faces(const SyntheticOptions& opts) {
  if (opts.classes < 1 || opts.gallery_per_class < 1 || opts.rows < 3 ||
      opts.cols < 3 || opts.probes_per_class < 0) {
    throw InvalidArgumentError("synthetic options out of range");
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const NormalField normals = ellipsoid_normals(opts.rows, opts.cols);
  SyntheticFaces out;
  const auto random_light = [&] {
    const double spread = opts.probe_light_spread;
    return LightDirection::from_angles(spread * (2.0 * unit(rng) - 1.0),
                                       spread * (2.0 * unit(rng) - 1.0));
  };
  for (Index k = 0; k < opts.classes; ++k) {
    // Smooth, roughly mirror-symmetric albedo: a base level plus blob pairs.
    const double base = 0.5 + 0.1 * unit(rng);
    GrayImage albedo(opts.rows, opts.cols, base);
    for (int b = 0; b < 6; ++b) {
      const double cy = unit(rng) * static_cast<double>(opts.rows - 1);
      const double cx = unit(rng) * static_cast<double>(opts.cols - 1);
      const double mx = static_cast<double>(opts.cols - 1) - cx;
      const double w = (0.08 + 0.12 * unit(rng)) * static_cast<double>(opts.cols);
      const double amp = 0.25 * (2.0 * unit(rng) - 1.0);
      const double twin = amp * (0.7 + 0.6 * unit(rng));
      for (Index r = 0; r < opts.rows; ++r) {
        for (Index c = 0; c < opts.cols; ++c) {
          const double dy = (r - cy) * (r - cy);
          albedo(r, c) += amp * std::exp(-(dy + (c - cx) * (c - cx)) / (2.0 * w * w)) +
                          twin * std::exp(-(dy + (c - mx) * (c - mx)) / (2.0 * w * w));
        }
      }
    }
    // Remove the part of the variation correlated with n n^T so that the
    // constant-albedo light estimate is exact for the planted faces.
    {
      const Index n_pix = albedo.size();
      Matrix basis(n_pix, 6);
      Vector delta(n_pix);
      for (Index r = 0; r < opts.rows; ++r) {
        for (Index c = 0; c < opts.cols; ++c) {
          const Eigen::Vector3d& n = normals(r, c);
          const Index p = r * opts.cols + c;
          basis.row(p) << n.x() * n.x(), n.y() * n.y(), n.z() * n.z(),
              n.x() * n.y(), n.x() * n.z(), n.y() * n.z();
          delta(p) = albedo(r, c) - base;
        }
      }
      delta -= basis * basis.colPivHouseholderQr().solve(delta);
      for (Index p = 0; p < n_pix; ++p) albedo.pixels()[static_cast<std::size_t>(p)] = base + delta(p);
    }
    for (double& v : albedo.pixels()) v = std::clamp(v, 0.1, 0.95);
    const AlbedoMap rho(albedo);
    const std::string label = "s" + std::to_string(k);
    Subject subject{label, {}};
    subject.images.push_back(
        render(rho, normals, LightDirection::from_angles(0.0, 0.0)).clamped());
    for (Index g = 1; g < opts.gallery_per_class; ++g) {
      subject.images.push_back(render(rho, normals, random_light()).clamped());
    }
    for (Index p = 0; p < opts.probes_per_class; ++p) {
      out.probes.push_back({label + "_p" + std::to_string(p), label,
                            render(rho, normals, random_light()).clamped()});
    }
    out.gallery.push_back(std::move(subject));
    out.prototypes.push_back(rho);
  }
  return out;
}

}  // namespace slrfr
