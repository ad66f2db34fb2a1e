#pragma once

#include <Eigen/Core>
#include <vector>

#include "scengen/scenario.hpp"

namespace scengen {

/// Isotropic normalization: one planar offset and a single scale for both
/// axes, so circles stay circles.
struct NormalizationStats {
  Eigen::Vector2d center_offset{0.0, 0.0};
  double scale = 1.0;
};

/// Offset is the roundabout center; scale is the standard deviation of all
/// centered coordinates pooled over x and y, both vehicles, all frames.
/// Throws on an empty set or zero variance.
NormalizationStats fit_normalization(const std::vector<Scenario>& train_scenarios,
                                     const Eigen::Vector2d& roundabout_center);

/// (p - offset) / scale, columnwise on a T x 4 (or stacked) position matrix.
Eigen::MatrixXd apply_normalization(const Eigen::MatrixXd& positions,
                                    const NormalizationStats& stats);

/// Inverse transform; invert(apply(S)) == S to machine precision.
Eigen::MatrixXd invert_normalization(const Eigen::MatrixXd& normalized,
                                     const NormalizationStats& stats);

}  // namespace scengen
