#include "slrfr/kernel_dict.hpp"

#include "slrfr/binary_io.hpp"
#include "detail/gram_space.hpp"
#include "detail/numeric.hpp"
#include "detail/training_engine.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

namespace slrfr {
namespace {

constexpr std::uint32_t kKernelDictionaryVersion = 1;

void check_probe(const KernelDictionary& dict, const Vector& z) {
  if (z.size() != dict.dim()) {
    throw InvalidArgumentError("probe length " + std::to_string(z.size()) +
                               " does not match sample dim " +
                               std::to_string(dict.dim()));
  }
}

}  // namespace

KernelDictionary::KernelDictionary(StackedMatrix base_samples,
                                   Matrix coefficients, KernelSpec kernel,
                                   std::string label)
    : base_(std::move(base_samples)),
      coeffs_(std::move(coefficients)),
      kernel_(kernel),
      label_(std::move(label)) {
  kernel_.validate();
  if (coeffs_.rows() != base_.cols()) {
    throw InvalidArgumentError("coefficient rows must equal sample count");
  }
  if (base_.hasNaN() || coeffs_.hasNaN()) {
    throw InvalidArgumentError("kernel dictionary contains NaN");
  }
  gram_ = gram(base_, base_, kernel_);
  for (Index j = 0; j < coeffs_.cols(); ++j) {
    const double norm_sq = coeffs_.col(j).dot(gram_ * coeffs_.col(j));
    if (std::abs(norm_sq - 1.0) > 1e-8) {
      throw InvalidArgumentError("kernel atom " + std::to_string(j) +
                                 " is not unit norm in feature space");
    }
  }
}

SparseCode komp(const KernelDictionary& dict, const Vector& z, int sparsity,
                PursuitTrace* trace) {
  check_probe(dict, z);
  if (sparsity < 1 || sparsity > dict.n_atoms()) {
    throw InvalidArgumentError("komp: sparsity must lie in [1, K]");
  }
  return detail::komp_core(dict.self_gram(), dict.coefficients(),
                           gram_column(dict.base_samples(), z, dict.kernel()),
                           dict.kernel()(z, z), sparsity, trace, nullptr);
}

double kernel_residual(const KernelDictionary& dict, const Vector& z,
                       const SparseCode& code) {
  check_probe(dict, z);
  if (code.length != dict.n_atoms()) {
    throw InvalidArgumentError("code length does not match atom count");
  }
  return detail::gram_residual(
      dict.self_gram(), dict.coefficients(),
      gram_column(dict.base_samples(), z, dict.kernel()), dict.kernel()(z, z),
      code);
}

KernelDictionary kernel_ksvd_train(const StackedMatrix& x,
                                   const KernelSpec& kernel,
                                   const TrainOptions& opts,
                                   TrainTrace* trace) {
  kernel.validate();
  const Index k = opts.n_atoms > 0 ? opts.n_atoms : x.cols();
  if (k < 1) throw InvalidArgumentError("kernel_ksvd_train: need at least one atom");
  if (opts.sparsity < 1 || opts.sparsity > k) {
    throw InvalidArgumentError("kernel_ksvd_train: sparsity must lie in [1, K]");
  }
  TrainTrace local;
  TrainTrace& tr = trace ? *trace : local;
  StackedMatrix data = x;
  if (x.cols() < k) {
    if (!opts.replicate_short_classes || x.cols() == 0) {
      throw InvalidArgumentError("kernel_ksvd_train: " +
                                 std::to_string(x.cols()) + " samples for " +
                                 std::to_string(k) + " atoms");
    }
    std::mt19937_64 rng(detail::mix_seed(opts.seed, 0xC0FFEE));
    data = detail::replicate_columns(x, k, opts.replication_noise, rng);
    tr.replicated = true;
  }
  detail::GramGeometry geometry({gram(data, data, kernel)}, {1.0}, k);
  detail::TrainingEngine engine(
      geometry, opts, opts.update.value_or(DictionaryUpdate::kClosedForm), tr);
  engine.run();
  return KernelDictionary(std::move(data), geometry.coeffs(), kernel,
                          opts.label);
}

double kernel_objective(const KernelDictionary& dict,
                        std::span<const SparseCode> codes) {
  if (static_cast<Index>(codes.size()) != dict.samples()) {
    throw InvalidArgumentError("one code per base sample required");
  }
  Matrix gamma(dict.n_atoms(), dict.samples());
  for (Index s = 0; s < dict.samples(); ++s) {
    gamma.col(s) = codes[static_cast<std::size_t>(s)].dense();
  }
  const Matrix resid =
      Matrix::Identity(dict.samples(), dict.samples()) -
      dict.coefficients() * gamma;
  return (resid.transpose() * dict.self_gram() * resid).trace();
}

ResidualReport classify_kernel(std::span<const KernelDictionary> dicts,
                               const Vector& z, int sparsity) {
  if (dicts.empty()) throw InvalidArgumentError("classify_kernel: no classes");
  if (sparsity < 1) throw InvalidArgumentError("classify_kernel: sparsity < 1");
  std::vector<double> residuals;
  std::vector<std::string> labels;
  for (const auto& dict : dicts) {
    if (!(dict.kernel() == dicts.front().kernel())) {
      throw InvalidArgumentError(
          "classify_kernel: classes use different kernels (" +
          dict.kernel().describe() + " vs " + dicts.front().kernel().describe() +
          ")");
    }
    const int t = static_cast<int>(std::min<Index>(sparsity, dict.n_atoms()));
    const SparseCode code = komp(dict, z, t);
    residuals.push_back(kernel_residual(dict, z, code));
    labels.push_back(dict.label());
  }
  return make_report(std::move(residuals), std::move(labels));
}

std::uint64_t class_seed(std::uint64_t seed, std::size_t index) {
  return detail::mix_seed(seed, index);
}

WidthSelection select_gaussian_width(std::span<const StackedMatrix> classes,
                                     const TrainOptions& opts,
                                     std::vector<double> multipliers) {
  if (classes.empty()) throw InvalidArgumentError("width selection: no classes");
  Index total = 0;
  for (const auto& x : classes) total += x.cols();
  StackedMatrix pooled(classes.front().rows(), total);
  Index at = 0;
  for (const auto& x : classes) {
    pooled.middleCols(at, x.cols()) = x;
    at += x.cols();
  }
  WidthSelection sel;
  sel.median_sq_distance = median_squared_distance(pooled);
  if (!(sel.median_sq_distance > 0.0)) {
    throw NumericalError("width selection: training vectors coincide");
  }
  double best_accuracy = -1.0;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (double mult : multipliers) {
    const KernelSpec kernel = KernelSpec::gaussian(mult * sel.median_sq_distance);
    std::vector<KernelDictionary> full;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      TrainOptions o = opts;
      o.seed = class_seed(opts.seed, i);
      full.push_back(kernel_ksvd_train(classes[i], kernel, o));
    }
    Index correct = 0;
    Index trials = 0;
    double margin = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const StackedMatrix& x = classes[i];
      if (x.cols() < 2) continue;
      for (Index j = 0; j < x.cols(); ++j) {
        StackedMatrix rest(x.rows(), x.cols() - 1);
        rest << x.leftCols(j), x.rightCols(x.cols() - 1 - j);
        TrainOptions o = opts;
        o.seed = class_seed(opts.seed, i);
        const Index k = o.n_atoms > 0 ? o.n_atoms : x.cols();
        o.n_atoms = std::min<Index>(k, rest.cols());
        o.sparsity = static_cast<int>(std::min<Index>(o.sparsity, o.n_atoms));
        std::vector<KernelDictionary> fold = full;
        fold[i] = kernel_ksvd_train(rest, kernel, o);
        const ResidualReport report =
            classify_kernel(fold, x.col(j), opts.sparsity);
        correct += report.predicted == static_cast<Index>(i) && !report.tie;
        ++trials;
        double other = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < report.residuals.size(); ++c) {
          if (c != i) other = std::min(other, report.residuals[c]);
        }
        const double own = report.residuals[i];
        if (std::isfinite(other) && own + other > 0.0) {
          margin += (other - own) / (other + own);
        }
      }
    }
    const double accuracy =
        trials > 0 ? static_cast<double>(correct) / static_cast<double>(trials)
                   : 0.0;
    const double mean_margin =
        trials > 0 ? margin / static_cast<double>(trials) : 0.0;
    sel.candidates.push_back(kernel.c);
    sel.accuracy.push_back(accuracy);
    sel.margin.push_back(mean_margin);
    if (accuracy > best_accuracy ||
        (accuracy == best_accuracy && mean_margin > best_margin)) {
      best_accuracy = accuracy;
      best_margin = mean_margin;
      sel.c = kernel.c;
    }
  }
  return sel;
}

void write_kernel_spec(std::ostream& out, const KernelSpec& kernel) {
  binary::write_u32(out, static_cast<std::uint32_t>(kernel.kind));
  binary::write_f64(out, kernel.c);
  binary::write_u32(out, static_cast<std::uint32_t>(kernel.degree));
}

KernelSpec read_kernel_spec(std::istream& in) {
  KernelSpec kernel;
  const auto kind = binary::read_u32(in);
  if (kind > static_cast<std::uint32_t>(KernelKind::kGaussian)) {
    throw DataError("unknown kernel kind " + std::to_string(kind));
  }
  kernel.kind = static_cast<KernelKind>(kind);
  kernel.c = binary::read_f64(in);
  kernel.degree = static_cast<int>(binary::read_u32(in));
  return kernel;
}

void save_kernel_dictionary(std::ostream& out, const KernelDictionary& dict) {
  binary::write_magic(out, "KSLD");
  binary::write_u32(out, kKernelDictionaryVersion);
  write_kernel_spec(out, dict.kernel());
  binary::write_u32(out, static_cast<std::uint32_t>(dict.dim()));
  binary::write_u32(out, static_cast<std::uint32_t>(dict.samples()));
  binary::write_u32(out, static_cast<std::uint32_t>(dict.n_atoms()));
  binary::write_string(out, dict.label());
  binary::write_matrix_values(out, dict.base_samples());
  binary::write_matrix_values(out, dict.coefficients());
}

KernelDictionary load_kernel_dictionary(std::istream& in) {
  binary::expect_magic(in, "KSLD");
  if (const auto v = binary::read_u32(in); v != kKernelDictionaryVersion) {
    throw DataError("unsupported KSLD version " + std::to_string(v));
  }
  const KernelSpec kernel = read_kernel_spec(in);
  const Index dim = binary::read_u32(in);
  const Index m = binary::read_u32(in);
  const Index k = binary::read_u32(in);
  std::string label = binary::read_string(in);
  StackedMatrix base = binary::read_matrix_values(in, dim, m);
  Matrix coeffs = binary::read_matrix_values(in, m, k);
  try {
    return KernelDictionary(std::move(base), std::move(coeffs), kernel,
                            std::move(label));
  } catch (const InvalidArgumentError& e) {
    throw DataError(std::string("corrupt kernel dictionary: ") + e.what());
  }
}

}  // namespace slrfr
