#pragma once

// Alternating sparse-coding / dictionary-update loop shared by the linear,
// kernel and joint trainers. A geometry supplies the inner products:
//
//   Index samples() const;  Index atoms() const;
//   double sample_energy(Index s) const;
//   void set_atom_from_sample(Index atom, Index s);
//   double coherence(Index i, Index j) const;
//   SparseCode pursue(Index s, int sparsity, bool* regularized) const;
//   SparseCode refit(Index s, const std::vector<Index>& support,
//                    bool* regularized) const;
//   double residual_energy(Index s, const SparseCode& code) const;
//   void atom_svd_update(std::vector<SparseCode>& codes);
//   int closed_form_update(const std::vector<SparseCode>& codes,
//                          std::vector<bool>& degenerate);
//   AtomState save_atom(Index j) const;  void restore_atom(Index j, const AtomState&);

#include "slrfr/sparse_code.hpp"
#include "detail/numeric.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

namespace slrfr::detail {

template <typename Geometry>
class TrainingEngine {
 public:
  TrainingEngine(Geometry& geometry, const TrainOptions& opts,
                 DictionaryUpdate rule, TrainTrace& trace)
      : g_(geometry), opts_(opts), rule_(rule), trace_(trace) {}

  void run() {
    std::mt19937_64 rng(opts_.seed);
    initialize(rng);
    std::vector<SparseCode> codes;
    for (int it = 0; it < opts_.iterations; ++it) {
      code_all(codes);
      update(codes);
      replace_atoms(codes);
      trace_.objective.push_back(total_energy(codes));
    }
    if (opts_.iterations <= 0) code_all(codes);
    trace_.codes = std::move(codes);
  }

 private:
  void initialize(std::mt19937_64& rng) {
    const Index n = g_.samples();
    const Index k = g_.atoms();
    std::vector<Index> skipped;
    Index next = 0;
    for (Index s : seeded_permutation(n, rng)) {
      if (next == k) break;
      if (!(g_.sample_energy(s) > 0.0)) continue;
      g_.set_atom_from_sample(next, s);
      bool duplicate = false;
      for (Index j = 0; j < next && !duplicate; ++j) {
        duplicate = g_.coherence(j, next) > opts_.coherence_limit;
      }
      if (duplicate) {
        skipped.push_back(s);
      } else {
        ++next;
      }
    }
    for (Index s : skipped) {
      if (next == k) break;
      g_.set_atom_from_sample(next++, s);
    }
    if (next < k) {
      throw NumericalError("fewer nonzero training samples than atoms");
    }
  }

  void code_all(std::vector<SparseCode>& codes) {
    const bool have_previous = !codes.empty();
    codes.resize(static_cast<std::size_t>(g_.samples()));
    for (Index s = 0; s < g_.samples(); ++s) {
      bool regularized = false;
      SparseCode fresh = g_.pursue(s, opts_.sparsity, &regularized);
      auto& current = codes[static_cast<std::size_t>(s)];
      if (have_previous &&
          g_.residual_energy(s, current) < g_.residual_energy(s, fresh)) {
        continue;
      }
      if (regularized) ++trace_.regularized_solves;
      current = std::move(fresh);
    }
  }

  void update(std::vector<SparseCode>& codes) {
    if (rule_ == DictionaryUpdate::kAtomSvd) {
      g_.atom_svd_update(codes);
      return;
    }
    std::vector<bool> degenerate(static_cast<std::size_t>(g_.atoms()), false);
    trace_.regularized_solves += g_.closed_form_update(codes, degenerate);
    for (Index s = 0; s < g_.samples(); ++s) {
      auto& code = codes[static_cast<std::size_t>(s)];
      std::vector<Index> support;
      for (Index j : code.support) {
        if (!degenerate[static_cast<std::size_t>(j)]) support.push_back(j);
      }
      bool regularized = false;
      code = g_.refit(s, support, &regularized);
      if (regularized) ++trace_.regularized_solves;
    }
  }

  // Worst-represented nonzero sample not yet used this round.
  Index worst_sample(const std::vector<double>& energy,
                     const std::vector<bool>& taken) const {
    Index best = -1;
    double best_energy = -1.0;
    for (Index s = 0; s < g_.samples(); ++s) {
      if (taken[static_cast<std::size_t>(s)] || !(g_.sample_energy(s) > 0.0)) {
        continue;
      }
      if (energy[static_cast<std::size_t>(s)] > best_energy) {
        best_energy = energy[static_cast<std::size_t>(s)];
        best = s;
      }
    }
    return best;
  }

  void replace_atoms(std::vector<SparseCode>& codes) {
    const Index k = g_.atoms();
    std::vector<double> energy(static_cast<std::size_t>(g_.samples()));
    for (Index s = 0; s < g_.samples(); ++s) {
      energy[static_cast<std::size_t>(s)] =
          g_.residual_energy(s, codes[static_cast<std::size_t>(s)]);
    }
    std::vector<bool> taken(static_cast<std::size_t>(g_.samples()), false);

    // Unused atoms: swapping them never changes the objective.
    for (Index j = 0; j < k; ++j) {
      const bool used = std::any_of(codes.begin(), codes.end(),
                                    [j](const SparseCode& c) { return c.uses(j); });
      if (used) continue;
      const Index s = worst_sample(energy, taken);
      if (s < 0) break;
      g_.set_atom_from_sample(j, s);
      taken[static_cast<std::size_t>(s)] = true;
      ++trace_.replaced_atoms;
    }

    // Coherent pairs: replace the later atom if that does not raise the
    // objective once the affected codes are refit.
    for (Index j = 1; j < k; ++j) {
      bool coherent = false;
      for (Index i = 0; i < j && !coherent; ++i) {
        coherent = g_.coherence(i, j) > opts_.coherence_limit;
      }
      if (!coherent) continue;
      const Index s = worst_sample(energy, taken);
      if (s < 0) break;
      const auto saved_atom = g_.save_atom(j);
      std::vector<std::pair<Index, SparseCode>> saved_codes;
      double before = 0.0;
      double after = 0.0;
      g_.set_atom_from_sample(j, s);
      for (Index t = 0; t < g_.samples(); ++t) {
        auto& code = codes[static_cast<std::size_t>(t)];
        if (!code.uses(j)) continue;
        saved_codes.emplace_back(t, code);
        before += energy[static_cast<std::size_t>(t)];
        code = g_.refit(t, code.support, nullptr);
        after += g_.residual_energy(t, code);
      }
      if (after <= before) {
        taken[static_cast<std::size_t>(s)] = true;
        for (const auto& [t, unused] : saved_codes) {
          energy[static_cast<std::size_t>(t)] =
              g_.residual_energy(t, codes[static_cast<std::size_t>(t)]);
        }
        ++trace_.replaced_atoms;
      } else {
        g_.restore_atom(j, saved_atom);
        for (auto& [t, code] : saved_codes) {
          codes[static_cast<std::size_t>(t)] = std::move(code);
        }
        ++trace_.rejected_replacements;
      }
    }
  }

  double total_energy(const std::vector<SparseCode>& codes) const {
    double total = 0.0;
    for (Index s = 0; s < g_.samples(); ++s) {
      total += g_.residual_energy(s, codes[static_cast<std::size_t>(s)]);
    }
    return total;
  }

  Geometry& g_;
  const TrainOptions& opts_;
  DictionaryUpdate rule_;
  TrainTrace& trace_;
};

}  // namespace slrfr::detail
