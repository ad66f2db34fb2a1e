#pragma once

#include <Eigen/Core>
#include <utility>

namespace scengen {

inline constexpr int kScenarioFeatures = 4;   // x1, y1, x2, y2
inline constexpr int kWindowFrames = 700;     // 28 s at 25 Hz
inline constexpr int kDownsampledFrames = 234;
inline constexpr int kNumConditionCategories = 78;  // n(n+1)/2 with n = 12

/// Fixed-length joint record of two vehicles' planar positions plus the
/// condition label of their route pair.
struct Scenario {
  Eigen::MatrixXd positions;  // T x 4, columns (x1, y1, x2, y2), meters
  int condition_id = 0;       // 1..78
  int frame_origin = 0;       // first source frame of the window
  double dt = 0.04;           // seconds per step

  int steps() const { return static_cast<int>(positions.rows()); }

  /// Shape, finiteness and dt sanity. Throws std::invalid_argument.
  void validate() const;
};

/// Canonical index of the unordered pair of the two vehicles' routes.
struct ConditionCategory {
  int category_id = 0;  // 1..78
  int route_low = 0;    // min route id
  int route_high = 0;   // max route id
};

/// Order-insensitive encoding of two route ids (0..11) onto 1..78.
ConditionCategory encode_condition(int route_a, int route_b);

/// Inverse of encode_condition: (route_low, route_high).
std::pair<int, int> decode_condition(int category_id);

}  // namespace scengen
