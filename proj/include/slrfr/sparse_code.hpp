#pragma once

#include "slrfr/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slrfr {

/// K-length coefficient vector stored by its support.
struct SparseCode {
  Index length = 0;
  std::vector<Index> support;  // strictly increasing
  Vector values;               // aligned with support

  /// Builds a code from atoms in selection order, sorting the support.
  static SparseCode from_selection(Index length,
                                   const std::vector<Index>& selected,
                                   const Vector& coefficients);

  Vector dense() const;
  Index nonzeros() const { return static_cast<Index>(support.size()); }
  bool uses(Index atom) const;
};

/// Residual energy before the first selection and after each selection.
struct PursuitTrace {
  std::vector<double> residual_energy;
  bool regularized = false;
};

/// Rule for the dictionary half-step of an alternation.
enum class DictionaryUpdate {
  kAtomSvd,     // atom-by-atom rank-1 updates (K-SVD)
  kClosedForm,  // A = G^T (G G^T)^-1 followed by atom normalization
};

struct TrainOptions {
  Index n_atoms = 0;  // 0: one atom per training sample
  int sparsity = 3;
  int iterations = 20;
  std::uint64_t seed = 0;
  /// Unset: kAtomSvd for linear dictionaries, kClosedForm for kernel ones.
  std::optional<DictionaryUpdate> update;
  /// Pad short classes with perturbed copies instead of failing.
  bool replicate_short_classes = true;
  double replication_noise = 1e-4;
  double coherence_limit = 0.99;
  std::string label;
};

struct TrainTrace {
  /// Objective after every full alternation (code, update, replace).
  std::vector<double> objective;
  std::vector<SparseCode> codes;
  int replaced_atoms = 0;
  int rejected_replacements = 0;
  int regularized_solves = 0;
  bool replicated = false;
};

/// Per-class residuals and the resulting decision.
struct ResidualReport {
  std::vector<double> residuals;
  std::vector<std::string> labels;
  Index predicted = 0;
  std::string predicted_label;
  bool tie = false;
  /// Per-class approximations; filled only on request.
  std::vector<Vector> approximations;

  /// Class indices by ascending residual, ties by index.
  std::vector<Index> ranking() const;
};

ResidualReport make_report(std::vector<double> residuals,
                           std::vector<std::string> labels);

}  // namespace slrfr
