#include "slrfr/joint_kernel_dict.hpp"

#include "slrfr/binary_io.hpp"
#include "detail/gram_space.hpp"
#include "detail/numeric.hpp"
#include "detail/training_engine.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>

namespace slrfr {
namespace {

constexpr std::uint32_t kJointVersion = 1;

void check_unit_atoms(const Matrix& a, const GramMatrix& g, const char* which) {
  for (Index j = 0; j < a.cols(); ++j) {
    const double n = a.col(j).dot(g * a.col(j));
    if (std::abs(n - 1.0) > 1e-8) {
      throw InvalidArgumentError(std::string(which) + " atom " +
                                 std::to_string(j) + " is not unit norm");
    }
  }
}

}  // namespace

JointKernelDictionary::JointKernelDictionary(
    StackedMatrix hr_samples, StackedMatrix lr_samples, Matrix a_hr,
    Matrix a_lr, KernelSpec kernel_hr, KernelSpec kernel_lr, double lambda,
    std::string label)
    : hr_(std::move(hr_samples)),
      lr_(std::move(lr_samples)),
      a_hr_(std::move(a_hr)),
      a_lr_(std::move(a_lr)),
      kernel_hr_(kernel_hr),
      kernel_lr_(kernel_lr),
      lambda_(lambda),
      label_(std::move(label)) {
  kernel_hr_.validate();
  kernel_lr_.validate();
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) {
    throw InvalidArgumentError("lambda must be a finite nonnegative number");
  }
  if (hr_.cols() != lr_.cols()) {
    throw InvalidArgumentError("HR and LR sample counts differ");
  }
  if (a_hr_.rows() != hr_.cols() || a_lr_.rows() != lr_.cols() ||
      a_hr_.cols() != a_lr_.cols()) {
    throw InvalidArgumentError("joint coefficient shapes are inconsistent");
  }
  if (hr_.hasNaN() || lr_.hasNaN() || a_hr_.hasNaN() || a_lr_.hasNaN()) {
    throw InvalidArgumentError("joint dictionary contains NaN");
  }
  gram_hr_ = gram(hr_, hr_, kernel_hr_);
  gram_lr_ = gram(lr_, lr_, kernel_lr_);
  check_unit_atoms(a_hr_, gram_hr_, "HR");
  check_unit_atoms(a_lr_, gram_lr_, "LR");
}

Matrix JointKernelDictionary::stacked_coefficients() const {
  Matrix a(2 * samples(), n_atoms());
  a << a_hr_, a_lr_;
  return a;
}

KernelDictionary JointKernelDictionary::lr_dictionary() const {
  return KernelDictionary(lr_, a_lr_, kernel_lr_, label_);
}

BlockGrams block_grams(const JointKernelDictionary& jd, const Vector& probe_hr,
                       const Vector& probe_lr) {
  if (probe_hr.size() != jd.hr_samples().rows() ||
      probe_lr.size() != jd.lr_samples().rows()) {
    throw InvalidArgumentError("probe pair does not match sample dims");
  }
  const Index m = jd.samples();
  const double lambda = jd.lambda();
  BlockGrams out;
  out.k1.resize(2 * m);
  out.k1 << gram_column(jd.hr_samples(), probe_hr, jd.kernel_hr()),
      lambda * gram_column(jd.lr_samples(), probe_lr, jd.kernel_lr());
  out.k2 = Matrix::Zero(2 * m, 2 * m);
  out.k2.topLeftCorner(m, m) = jd.hr_gram();
  out.k2.bottomRightCorner(m, m) = lambda * jd.lr_gram();
  out.probe_energy = jd.kernel_hr()(probe_hr, probe_hr) +
                     lambda * jd.kernel_lr()(probe_lr, probe_lr);
  return out;
}

SparseCode joint_komp(const JointKernelDictionary& jd, const Vector& probe_hr,
                      const Vector& probe_lr, int sparsity,
                      PursuitTrace* trace) {
  if (sparsity < 1 || sparsity > jd.n_atoms()) {
    throw InvalidArgumentError("joint_komp: sparsity must lie in [1, K]");
  }
  const BlockGrams g = block_grams(jd, probe_hr, probe_lr);
  return detail::komp_core(g.k2, jd.stacked_coefficients(), g.k1,
                           g.probe_energy, sparsity, trace, nullptr);
}

double joint_residual(const JointKernelDictionary& jd, const Vector& probe_hr,
                      const Vector& probe_lr, const SparseCode& code) {
  if (code.length != jd.n_atoms()) {
    throw InvalidArgumentError("code length does not match atom count");
  }
  const BlockGrams g = block_grams(jd, probe_hr, probe_lr);
  return detail::gram_residual(g.k2, jd.stacked_coefficients(), g.k1,
                               g.probe_energy, code);
}

double joint_objective(const JointKernelDictionary& jd,
                       std::span<const SparseCode> codes) {
  if (static_cast<Index>(codes.size()) != jd.samples()) {
    throw InvalidArgumentError("one code per training pair required");
  }
  const Index m = jd.samples();
  Matrix gamma(jd.n_atoms(), m);
  for (Index s = 0; s < m; ++s) gamma.col(s) = codes[static_cast<std::size_t>(s)].dense();
  const Matrix eye = Matrix::Identity(m, m);
  const Matrix rh = eye - jd.a_hr() * gamma;
  const Matrix rl = eye - jd.a_lr() * gamma;
  return (rh.transpose() * jd.hr_gram() * rh).trace() +
         jd.lambda() * (rl.transpose() * jd.lr_gram() * rl).trace();
}

JointKernelDictionary joint_train(const StackedMatrix& x_hr,
                                  const StackedMatrix& x_lr, double lambda,
                                  const KernelSpec& kernel_hr,
                                  const KernelSpec& kernel_lr,
                                  const TrainOptions& opts,
                                  TrainTrace* trace) {
  kernel_hr.validate();
  kernel_lr.validate();
  if (x_hr.cols() != x_lr.cols()) {
    throw InvalidArgumentError("joint_train: HR and LR sample counts differ");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgumentError("joint_train: lambda must be nonnegative");
  }
  if (opts.update == DictionaryUpdate::kAtomSvd) {
    throw InvalidArgumentError(
        "joint_train: shared codes require the closed-form update");
  }
  const Index k = opts.n_atoms > 0 ? opts.n_atoms : x_hr.cols();
  if (k < 1) throw InvalidArgumentError("joint_train: need at least one atom");
  if (opts.sparsity < 1 || opts.sparsity > k) {
    throw InvalidArgumentError("joint_train: sparsity must lie in [1, K]");
  }
  TrainTrace local;
  TrainTrace& tr = trace ? *trace : local;
  StackedMatrix hr = x_hr;
  StackedMatrix lr = x_lr;
  if (x_hr.cols() < k) {
    if (!opts.replicate_short_classes || x_hr.cols() == 0) {
      throw InvalidArgumentError("joint_train: " + std::to_string(x_hr.cols()) +
                                 " pairs for " + std::to_string(k) + " atoms");
    }
    std::mt19937_64 rng(detail::mix_seed(opts.seed, 0xC0FFEE));
    hr = detail::replicate_columns(x_hr, k, opts.replication_noise, rng);
    lr = detail::replicate_columns(x_lr, k, opts.replication_noise, rng);
    tr.replicated = true;
  }
  detail::GramGeometry geometry({gram(hr, hr, kernel_hr), gram(lr, lr, kernel_lr)},
                                {1.0, lambda}, k);
  detail::TrainingEngine engine(geometry, opts, DictionaryUpdate::kClosedForm, tr);
  engine.run();
  const Index m = hr.cols();
  return JointKernelDictionary(std::move(hr), std::move(lr),
                               geometry.coeffs().topRows(m),
                               geometry.coeffs().bottomRows(m), kernel_hr,
                               kernel_lr, lambda, opts.label);
}

ResidualReport classify_joint(std::span<const JointKernelDictionary> dicts,
                              const Vector& z_lr, int sparsity) {
  std::vector<KernelDictionary> lr;
  lr.reserve(dicts.size());
  for (const auto& jd : dicts) lr.push_back(jd.lr_dictionary());
  return classify_kernel(lr, z_lr, sparsity);
}

void save_joint_dictionary(std::ostream& out, const JointKernelDictionary& jd) {
  binary::write_magic(out, "JKLD");
  binary::write_u32(out, kJointVersion);
  binary::write_f64(out, jd.lambda());
  write_kernel_spec(out, jd.kernel_hr());
  write_kernel_spec(out, jd.kernel_lr());
  binary::write_u32(out, static_cast<std::uint32_t>(jd.hr_samples().rows()));
  binary::write_u32(out, static_cast<std::uint32_t>(jd.lr_samples().rows()));
  binary::write_u32(out, static_cast<std::uint32_t>(jd.samples()));
  binary::write_u32(out, static_cast<std::uint32_t>(jd.n_atoms()));
  binary::write_string(out, jd.label());
  binary::write_matrix_values(out, jd.hr_samples());
  binary::write_matrix_values(out, jd.lr_samples());
  binary::write_matrix_values(out, jd.a_hr());
  binary::write_matrix_values(out, jd.a_lr());
}

JointKernelDictionary load_joint_dictionary(std::istream& in) {
  binary::expect_magic(in, "JKLD");
  if (const auto v = binary::read_u32(in); v != kJointVersion) {
    throw DataError("unsupported JKLD version " + std::to_string(v));
  }
  const double lambda = binary::read_f64(in);
  const KernelSpec kh = read_kernel_spec(in);
  const KernelSpec kl = read_kernel_spec(in);
  const Index dh = binary::read_u32(in);
  const Index dl = binary::read_u32(in);
  const Index m = binary::read_u32(in);
  const Index k = binary::read_u32(in);
  std::string label = binary::read_string(in);
  StackedMatrix hr = binary::read_matrix_values(in, dh, m);
  StackedMatrix lr = binary::read_matrix_values(in, dl, m);
  Matrix ah = binary::read_matrix_values(in, m, k);
  Matrix al = binary::read_matrix_values(in, m, k);
  try {
    return JointKernelDictionary(std::move(hr), std::move(lr), std::move(ah),
                                 std::move(al), kh, kl, lambda, std::move(label));
  } catch (const InvalidArgumentError& e) {
    throw DataError(std::string("corrupt joint dictionary: ") + e.what());
  }
}

}  // namespace slrfr
