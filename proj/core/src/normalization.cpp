#include "scengen/normalization.hpp"

#include <cmath>
#include <stdexcept>

namespace scengen {

NormalizationStats fit_normalization(const std::vector<Scenario>& train_scenarios,
                                     const Eigen::Vector2d& roundabout_center) {
  if (train_scenarios.empty()) {
    throw std::invalid_argument("normalization: empty training set");
  }
  double sum_sq = 0.0;
  long count = 0;
  for (const auto& s : train_scenarios) {
    for (int row = 0; row < s.steps(); ++row) {
      for (int v = 0; v < 2; ++v) {
        const double dx = s.positions(row, 2 * v) - roundabout_center.x();
        const double dy = s.positions(row, 2 * v + 1) - roundabout_center.y();
        sum_sq += dx * dx + dy * dy;
        count += 2;
      }
    }
  }
  const double variance = sum_sq / static_cast<double>(count);
  if (!(variance > 0.0)) {
    throw std::invalid_argument("normalization: zero variance in training coordinates");
  }
  return {roundabout_center, std::sqrt(variance)};
}

Eigen::MatrixXd apply_normalization(const Eigen::MatrixXd& positions,
                                    const NormalizationStats& stats) {
  Eigen::MatrixXd out = positions;
  for (int c = 0; c < out.cols(); ++c) {
    const double offset = (c % 2 == 0) ? stats.center_offset.x() : stats.center_offset.y();
    out.col(c) = (out.col(c).array() - offset) / stats.scale;
  }
  return out;
}

Eigen::MatrixXd invert_normalization(const Eigen::MatrixXd& normalized,
                                     const NormalizationStats& stats) {
  Eigen::MatrixXd out = normalized;
  for (int c = 0; c < out.cols(); ++c) {
    const double offset = (c % 2 == 0) ? stats.center_offset.x() : stats.center_offset.y();
    out.col(c) = out.col(c).array() * stats.scale + offset;
  }
  return out;
}

}  // namespace scengen
