#include "slrfr/sparse_code.hpp"

#include <algorithm>
#include <numeric>

namespace slrfr {

SparseCode SparseCode::from_selection(Index length,
                                      const std::vector<Index>& selected,
                                      const Vector& coefficients) {
  std::vector<std::size_t> order(selected.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return selected[a] < selected[b]; });
  SparseCode code;
  code.length = length;
  code.values.resize(static_cast<Index>(selected.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    code.support.push_back(selected[order[i]]);
    code.values(static_cast<Index>(i)) = coefficients(static_cast<Index>(order[i]));
  }
  return code;
}

Vector SparseCode::dense() const {
  Vector v = Vector::Zero(length);
  for (std::size_t i = 0; i < support.size(); ++i) {
    v(support[i]) = values(static_cast<Index>(i));
  }
  return v;
}

bool SparseCode::uses(Index atom) const {
  return std::binary_search(support.begin(), support.end(), atom);
}

std::vector<Index> ResidualReport::ranking() const {
  std::vector<Index> order(residuals.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return residuals[static_cast<std::size_t>(a)] <
           residuals[static_cast<std::size_t>(b)];
  });
  return order;
}

ResidualReport make_report(std::vector<double> residuals,
                           std::vector<std::string> labels) {
  ResidualReport report;
  report.residuals = std::move(residuals);
  report.labels = std::move(labels);
  const auto best =
      std::min_element(report.residuals.begin(), report.residuals.end());
  report.predicted = best - report.residuals.begin();
  report.tie = std::count(report.residuals.begin(), report.residuals.end(),
                          *best) > 1;
  report.predicted_label =
      report.labels.at(static_cast<std::size_t>(report.predicted));
  return report;
}

}  // namespace slrfr
