#include "slrfr/joint_kernel_dict.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace slrfr;

namespace {

Matrix unit_atoms(const Matrix& gram, Matrix a) {
  for (Index j = 0; j < a.cols(); ++j) a.col(j) /= std::sqrt(a.col(j).dot(gram * a.col(j)));
  return a;
}

JointKernelDictionary random_joint(std::mt19937_64& rng, Index m, Index k, double lambda,
                                   const KernelSpec& kh, const KernelSpec& kl) {
  const Matrix xh = oracle::random_matrix(6, m, rng);
  const Matrix xl = oracle::random_matrix(3, m, rng);
  const Matrix a = oracle::random_matrix(m, k, rng);
  return JointKernelDictionary(xh, xl, unit_atoms(gram(xh, xh, kh), a),
                               unit_atoms(gram(xl, xl, kl), a), kh, kl, lambda, "j");
}

TrainOptions small_options(std::uint64_t seed) {
  TrainOptions o;
  o.n_atoms = 6;
  o.sparsity = 2;
  o.iterations = 8;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("joint dictionary invariants") {
  std::mt19937_64 rng(1);
  const KernelSpec k = KernelSpec::gaussian(2.0);
  const Matrix xh = oracle::random_matrix(4, 3, rng);
  const Matrix xl = oracle::random_matrix(2, 3, rng);
  const Matrix id = Matrix::Identity(3, 3);
  CHECK_NOTHROW(JointKernelDictionary(xh, xl, id, id, k, k, 1.0, "a"));
  CHECK_THROWS_AS(JointKernelDictionary(xh, xl.leftCols(2), id, id, k, k, 1.0, "a"), InvalidArgumentError);
  CHECK_THROWS_AS(JointKernelDictionary(xh, xl, id, id, k, k, -1.0, "a"), InvalidArgumentError);
  CHECK_THROWS_AS(JointKernelDictionary(xh, xl, 2.0 * id, id, k, k, 1.0, "a"), InvalidArgumentError);
}

TEST_CASE("block Gram structure") {
  std::mt19937_64 rng(2);
  const KernelSpec k = KernelSpec::gaussian(3.0);
  const JointKernelDictionary jd = random_joint(rng, 5, 4, 1.0, k, k);
  const Vector zh = oracle::random_matrix(6, 1, rng), zl = oracle::random_matrix(3, 1, rng);
  const BlockGrams g = block_grams(jd, zh, zl);
  CHECK(g.k1.size() == 10);
  CHECK((g.k1.head(5) - gram_column(jd.hr_samples(), zh, k)).norm() == 0.0);
  CHECK((g.k1.tail(5) - gram_column(jd.lr_samples(), zl, k)).norm() == 0.0);
  CHECK(g.k2.topRightCorner(5, 5).isZero());
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.k2);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);

  const JointKernelDictionary off(jd.hr_samples(), jd.lr_samples(), jd.a_hr(), jd.a_lr(), k, k, 0.0, "z");
  const BlockGrams g0 = block_grams(off, zh, zl);
  CHECK(g0.k1.tail(5).isZero());
  CHECK(g0.k2.bottomRightCorner(5, 5).isZero());

  const JointKernelDictionary same(jd.hr_samples(), jd.hr_samples(), jd.a_hr(), jd.a_hr(), k, k, 1.0, "s");
  const BlockGrams gs = block_grams(same, zh, zh);
  CHECK(gs.k2.topLeftCorner(5, 5) == gs.k2.bottomRightCorner(5, 5));
  CHECK_THROWS_AS(block_grams(jd, zl, zl), InvalidArgumentError);
}

TEST_CASE("joint KOMP reductions") {
  std::mt19937_64 rng(3);
  const KernelSpec k = KernelSpec::gaussian(4.0);
  for (int t = 0; t < 10; ++t) {
    const JointKernelDictionary jd = random_joint(rng, 7, 5, 0.0, k, k);
    const Vector zh = oracle::random_matrix(6, 1, rng), zl = oracle::random_matrix(3, 1, rng);
    const KernelDictionary hr(jd.hr_samples(), jd.a_hr(), k, "h");
    const SparseCode joint = joint_komp(jd, zh, zl, 3);
    const SparseCode single = komp(hr, zh, 3);
    CHECK(joint.support == single.support);
    CHECK((joint.values - single.values).norm() < 1e-8);

    const JointKernelDictionary dup(jd.hr_samples(), jd.hr_samples(), jd.a_hr(), jd.a_hr(), k, k, 1.0, "d");
    const SparseCode dj = joint_komp(dup, zh, zh, 3);
    CHECK(dj.support == single.support);
    CHECK((dj.values - single.values).norm() < 1e-8);
    CHECK(joint_residual(dup, zh, zh, dj) ==
          doctest::Approx(2.0 * kernel_residual(hr, zh, single)).epsilon(1e-10));
  }
}

TEST_CASE("joint KOMP objective is non-increasing and lambda-continuous") {
  std::mt19937_64 rng(4);
  const KernelSpec kh = KernelSpec::gaussian(5.0), kl = KernelSpec::gaussian(2.0);
  for (int t = 0; t < 10; ++t) {
    const JointKernelDictionary jd = random_joint(rng, 8, 6, 1.0, kh, kl);
    const Vector zh = oracle::random_matrix(6, 1, rng), zl = oracle::random_matrix(3, 1, rng);
    PursuitTrace tr;
    const SparseCode c = joint_komp(jd, zh, zl, 4, &tr);
    for (std::size_t i = 1; i < tr.residual_energy.size(); ++i)
      CHECK(tr.residual_energy[i] <= tr.residual_energy[i - 1] + 1e-12);
    CHECK(joint_residual(jd, zh, zl, c) == doctest::Approx(tr.residual_energy.back()).epsilon(1e-10));

    const JointKernelDictionary nudged(jd.hr_samples(), jd.lr_samples(), jd.a_hr(), jd.a_lr(), kh, kl,
                                       1.0 + 1e-9, "n");
    const SparseCode cn = joint_komp(nudged, zh, zl, 4);
    CHECK(cn.support == c.support);
    CHECK((cn.values - c.values).norm() < 1e-6);
  }
}

TEST_CASE("joint training: duplication and decoupled limits") {
  std::mt19937_64 rng(5);
  const KernelSpec k = KernelSpec::gaussian(6.0);
  const Matrix x = oracle::random_matrix(5, 10, rng);
  const TrainOptions o = small_options(11);
  TrainTrace single, dup, off;
  const KernelDictionary kd = kernel_ksvd_train(x, k, o, &single);
  const JointKernelDictionary jd = joint_train(x, x, 1.0, k, k, o, &dup);
  REQUIRE(dup.objective.size() == single.objective.size());
  for (std::size_t i = 0; i < single.objective.size(); ++i)
    CHECK(std::abs(dup.objective[i] - 2.0 * single.objective[i]) < 1e-6);
  CHECK((jd.a_hr() - kd.coefficients()).norm() < 1e-8);

  const Matrix xl = oracle::random_matrix(3, 10, rng);
  const JointKernelDictionary decoupled = joint_train(x, xl, 0.0, k, KernelSpec::gaussian(1.0), o, &off);
  for (std::size_t i = 0; i < single.objective.size(); ++i)
    CHECK(std::abs(off.objective[i] - single.objective[i]) < 1e-6);
  CHECK((decoupled.a_hr() - kd.coefficients()).norm() < 1e-8);
}

TEST_CASE("joint training invariants with gaussian kernels") {
  std::mt19937_64 rng(6);
  const Matrix xh = oracle::random_matrix(8, 10, rng);
  const Matrix xl = xh.topRows(3) + 0.1 * oracle::random_matrix(3, 10, rng);
  const KernelSpec kh = KernelSpec::gaussian(median_squared_distance(xh));
  const KernelSpec kl = KernelSpec::gaussian(median_squared_distance(xl));
  TrainTrace tr;
  const JointKernelDictionary jd = joint_train(xh, xl, 1.0, kh, kl, small_options(2), &tr);
  for (std::size_t i = 1; i < tr.objective.size(); ++i)
    CHECK(tr.objective[i] <= tr.objective[i - 1] + 1e-6);
  CHECK(joint_objective(jd, tr.codes) == doctest::Approx(tr.objective.back()).epsilon(1e-8));
  for (Index j = 0; j < jd.n_atoms(); ++j) {
    CHECK(jd.a_hr().col(j).dot(jd.hr_gram() * jd.a_hr().col(j)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(jd.a_lr().col(j).dot(jd.lr_gram() * jd.a_lr().col(j)) == doctest::Approx(1.0).epsilon(1e-8));
  }
  // One code drives both halves: every used atom has both an HR and an LR column.
  for (const SparseCode& c : tr.codes) CHECK(c.length == jd.n_atoms());

  TrainOptions atomwise = small_options(2);
  atomwise.update = DictionaryUpdate::kAtomSvd;
  CHECK_THROWS_AS(joint_train(xh, xl, 1.0, kh, kl, atomwise), InvalidArgumentError);
  CHECK_THROWS_AS(joint_train(xh, xl.leftCols(9), 1.0, kh, kl, small_options(2)), InvalidArgumentError);
  CHECK_THROWS_AS(joint_train(xh, xl, -0.5, kh, kl, small_options(2)), InvalidArgumentError);
}

TEST_CASE("joint classification uses the LR dictionaries") {
  std::mt19937_64 rng(7);
  std::vector<JointKernelDictionary> dicts;
  std::vector<Matrix> lr_samples;
  for (int c = 0; c < 4; ++c) {
    Matrix xh = 0.3 * oracle::random_matrix(6, 8, rng);
    xh.row(c).array() += 3.0;
    const Matrix xl = xh.topRows(4);
    TrainOptions o = small_options(static_cast<std::uint64_t>(c));
    o.label = "c" + std::to_string(c);
    dicts.push_back(joint_train(xh, xl, 1.0, KernelSpec::gaussian(4.0), KernelSpec::gaussian(2.0), o));
    lr_samples.push_back(xl);
  }
  int correct = 0, total = 0;
  for (int c = 0; c < 4; ++c)
    for (Index j = 0; j < 8; ++j) {
      const ResidualReport r = classify_joint(dicts, lr_samples[static_cast<std::size_t>(c)].col(j), 2);
      for (double v : r.residuals) CHECK(std::isfinite(v));
      correct += r.predicted == c;
      ++total;
    }
  CHECK(correct == total);

  // lambda = 0 still yields a well-formed report.
  const Matrix xh = oracle::random_matrix(6, 8, rng);
  const JointKernelDictionary loose =
      joint_train(xh, xh.topRows(4), 0.0, KernelSpec::gaussian(4.0), KernelSpec::gaussian(2.0), small_options(3));
  const std::vector<JointKernelDictionary> one{loose};
  const ResidualReport r = classify_joint(one, Vector::Ones(4), 2);
  CHECK(r.residuals.size() == 1);
  CHECK(std::isfinite(r.residuals[0]));
  CHECK(r.residuals[0] >= 0.0);

  std::vector<JointKernelDictionary> mixed{dicts[0], joint_train(xh, xh.topRows(4), 1.0, KernelSpec::gaussian(4.0),
                                                                 KernelSpec::gaussian(9.0), small_options(4))};
  CHECK_THROWS_AS(classify_joint(mixed, Vector::Ones(4), 2), InvalidArgumentError);
}

TEST_CASE("joint dictionary serialization round trip") {
  std::mt19937_64 rng(8);
  const KernelSpec kh = KernelSpec::gaussian(3.0), kl = KernelSpec::polynomial(1.0, 2);
  const JointKernelDictionary jd = random_joint(rng, 6, 4, 0.7, kh, kl);
  std::stringstream buf;
  save_joint_dictionary(buf, jd);
  CHECK(buf.str().substr(0, 4) == "JKLD");
  const JointKernelDictionary back = load_joint_dictionary(buf);
  CHECK(back.a_hr() == jd.a_hr());
  CHECK(back.a_lr() == jd.a_lr());
  CHECK(back.hr_samples() == jd.hr_samples());
  CHECK(back.lr_samples() == jd.lr_samples());
  CHECK(back.lambda() == 0.7);
  CHECK(back.kernel_lr() == kl);
}
