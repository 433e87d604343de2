#include "slrfr/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace slrfr;

namespace {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidArgumentError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  return 3;
}

// Writes to `path`, or to stdout when the path is empty.
template <typename Writer>
void emit(const std::string& path, Writer&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write(out);
}

void write_manifest(const fs::path& path,
                    const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [label, file] : rows) out << label << ' ' << file << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-representation face recognition at very low resolution"};
  app.require_subcommand(1);

  // relight
  std::string relight_image, relight_out, relight_normals;
  int relight_lights = 5;
  bool relight_no_flips = false;
  auto* relight = app.add_subcommand("relight", "Extend one HR image by relighting");
  relight->add_option("--image", relight_image, "HR input (PGM)")->required();
  relight->add_option("--out", relight_out, "Output directory")->required();
  relight->add_option("--normals", relight_normals, "Normal map (PFM); default ellipsoid");
  relight->add_option("--n-lights", relight_lights, "Number of light directions (1-9)");
  relight->add_flag("--no-flips", relight_no_flips, "Skip horizontal flips");

  // train
  std::string train_gallery, train_config, train_out, train_method;
  std::optional<std::uint64_t> train_seed;
  auto* train = app.add_subcommand("train", "Train per-class dictionaries");
  train->add_option("--gallery", train_gallery, "Gallery manifest ('label path' lines)")->required();
  train->add_option("--config", train_config, "Config file (key = value)");
  train->add_option("--method", train_method, "Overrides the config method");
  train->add_option("--seed", train_seed, "Overrides the config seed");
  train->add_option("--out", train_out, "Model file")->required();

  // classify
  std::string cls_model, cls_image;
  bool cls_lr = false;
  auto* classify = app.add_subcommand("classify", "Classify one probe image");
  classify->add_option("--model", cls_model, "Model file")->required();
  classify->add_option("--image", cls_image, "Probe image (PGM)")->required();
  classify->add_flag("--lr", cls_lr, "Probe is already at the model's LR size");

  // evaluate
  std::string ev_model, ev_probes, ev_cmc, ev_per_probe;
  bool ev_lr = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a probe set");
  evaluate_cmd->add_option("--model", ev_model, "Model file")->required();
  evaluate_cmd->add_option("--probes", ev_probes, "Probe manifest")->required();
  evaluate_cmd->add_flag("--lr", ev_lr, "Probes are already at LR size");
  evaluate_cmd->add_option("--cmc", ev_cmc, "CMC CSV output (default stdout)");
  evaluate_cmd->add_option("--per-probe", ev_per_probe, "Per-probe residual CSV");

  // noise-sweep
  std::string sw_model, sw_probes, sw_out;
  std::vector<double> sw_sigmas{0.0, 0.02, 0.05, 0.1};
  std::vector<std::uint64_t> sw_seeds{0};
  bool sw_lr = false;
  auto* sweep = app.add_subcommand("noise-sweep", "Rank-one accuracy under probe noise");
  sweep->add_option("--model", sw_model, "Model file")->required();
  sweep->add_option("--probes", sw_probes, "Probe manifest")->required();
  sweep->add_option("--sigmas", sw_sigmas, "Ascending noise levels")->delimiter(',');
  sweep->add_option("--seeds", sw_seeds, "Noise seeds")->delimiter(',');
  sweep->add_flag("--lr", sw_lr, "Probes are already at LR size");
  sweep->add_option("--out", sw_out, "Sweep CSV output (default stdout)");

  // synth
  std::string syn_out;
  SyntheticOptions syn;
  auto* synth = app.add_subcommand("synth", "Write a synthetic gallery and probe set");
  synth->add_option("--out", syn_out, "Output directory")->required();
  synth->add_option("--classes", syn.classes, "Number of subjects");
  synth->add_option("--probes-per-class", syn.probes_per_class, "Probes per subject");
  synth->add_option("--rows", syn.rows, "HR rows");
  synth->add_option("--cols", syn.cols, "HR columns");
  synth->add_option("--seed", syn.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*relight) {
      const GrayImage img = read_pgm(relight_image);
      const NormalField normals = relight_normals.empty()
                                      ? ellipsoid_normals(img.rows(), img.cols())
                                      : read_normal_map(relight_normals);
      ExtensionOptions ext;
      ext.n_lights = relight_lights;
      ext.include_flips = !relight_no_flips;
      if (!normals.matches(img)) throw InvalidArgumentError("normal map shape differs from image");
      fs::create_directories(relight_out);
      const auto images = extend_gallery(img, normals, ext);
      const std::string stem = fs::path(relight_image).stem().string();
      for (std::size_t k = 0; k < images.size(); ++k) {
        const fs::path p = fs::path(relight_out) / (stem + "_" + std::to_string(k) + ".pgm");
        write_pgm(p, images[k].clamped());
        std::cout << p.string() << '\n';
      }
    } else if (*train) {
      PipelineConfig config = train_config.empty() ? PipelineConfig{} : load_config(train_config);
      if (!train_method.empty()) config.method = parse_method(train_method);
      if (train_seed) config.seed = *train_seed;
      const auto gallery = load_gallery(read_manifest(train_gallery));
      const TrainedModel model = train_model(gallery, config);
      save_model(fs::path(train_out), model);
      std::cout << "trained " << method_name(model.method) << " on "
                << model.class_count() << " classes, LR " << model.lr_rows << "x"
                << model.lr_cols << ", " << model.pca_lr.p() << " features\n";
    } else if (*classify) {
      const TrainedModel model = load_model(fs::path(cls_model));
      EvaluateOptions opts;
      opts.lr_probes = cls_lr;
      const ResidualReport r =
          model.classify_lr(prepare_probe(model, read_pgm(cls_image), opts, 0));
      std::cout << "predicted " << r.predicted_label << (r.tie ? " (tie)" : "") << '\n';
      std::cout << std::setprecision(10);
      for (Index k : r.ranking()) {
        const auto u = static_cast<std::size_t>(k);
        std::cout << r.labels[u] << ' ' << r.residuals[u] << '\n';
      }
    } else if (*evaluate_cmd) {
      const TrainedModel model = load_model(fs::path(ev_model));
      const auto probes = load_probes(read_manifest(ev_probes));
      EvaluateOptions opts;
      opts.lr_probes = ev_lr;
      const EvaluationReport report = evaluate(model, probes, opts);
      emit(ev_cmc, [&](std::ostream& o) { write_cmc_csv(o, report); });
      if (!ev_per_probe.empty()) {
        emit(ev_per_probe, [&](std::ostream& o) { write_per_probe_csv(o, report); });
      }
      std::cerr << "rank-one " << report.rank_one << " over "
                << report.per_probe.size() << " probes";
      if (!report.excluded.empty()) {
        std::cerr << ", " << report.excluded.size() << " excluded (unknown label)";
      }
      std::cerr << '\n';
    } else if (*sweep) {
      const TrainedModel model = load_model(fs::path(sw_model));
      const auto probes = load_probes(read_manifest(sw_probes));
      const SweepReport report = noise_sweep(model, probes, sw_sigmas, sw_seeds, sw_lr);
      emit(sw_out, [&](std::ostream& o) { write_sweep_csv(o, report); });
      for (std::size_t i = 0; i < report.sigmas.size(); ++i) {
        std::cerr << "sigma " << report.sigmas[i] << ": mean rank-one "
                  << report.mean_rank_one[i] << '\n';
      }
    } else if (*synth) {
      const SyntheticFaces data = make_synthetic_faces(syn);
      const fs::path root(syn_out);
      fs::create_directories(root / "gallery");
      fs::create_directories(root / "probes");
      std::vector<std::pair<std::string, std::string>> gallery_rows, probe_rows;
      for (const auto& subject : data.gallery) {
        for (std::size_t k = 0; k < subject.images.size(); ++k) {
          const std::string file = "gallery/" + subject.label + "_" + std::to_string(k) + ".pgm";
          write_pgm(root / file, subject.images[k], 65535);
          gallery_rows.emplace_back(subject.label, file);
        }
      }
      for (const auto& probe : data.probes) {
        const std::string file = "probes/" + probe.id + ".pgm";
        write_pgm(root / file, probe.image, 65535);
        probe_rows.emplace_back(probe.label, file);
      }
      write_manifest(root / "gallery.txt", gallery_rows);
      write_manifest(root / "probes.txt", probe_rows);
      std::cout << "wrote " << gallery_rows.size() << " gallery and "
                << probe_rows.size() << " probe images to " << root.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
