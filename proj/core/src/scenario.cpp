#include "scengen/scenario.hpp"

#include <stdexcept>
#include <string>

namespace scengen {

void Scenario::validate() const {
  if (positions.cols() != kScenarioFeatures) {
    throw std::invalid_argument("scenario: expected 4 position columns");
  }
  if (positions.rows() < 1) {
    throw std::invalid_argument("scenario: empty position matrix");
  }
  if (!positions.allFinite()) {
    throw std::invalid_argument("scenario: non-finite position entries");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("scenario: dt must be positive");
  }
  if (condition_id < 1 || condition_id > kNumConditionCategories) {
    throw std::invalid_argument("scenario: condition id out of range 1..78");
  }
}

ConditionCategory encode_condition(int route_a, int route_b) {
  constexpr int n = 12;
  if (route_a < 0 || route_a >= n || route_b < 0 || route_b >= n) {
    throw std::invalid_argument("condition: route id out of range 0..11, got " +
                                std::to_string(route_a) + "/" + std::to_string(route_b));
  }
  const int r1 = std::min(route_a, route_b);
  const int r2 = std::max(route_a, route_b);
  const int id = r1 * (2 * n - r1 + 1) / 2 + (r2 - r1) + 1;
  return {id, r1, r2};
}

std::pair<int, int> decode_condition(int category_id) {
  constexpr int n = 12;
  if (category_id < 1 || category_id > kNumConditionCategories) {
    throw std::invalid_argument("condition: category id out of range 1..78");
  }
  for (int r1 = 0; r1 < n; ++r1) {
    const int base = r1 * (2 * n - r1 + 1) / 2;
    const int last = base + (n - 1 - r1) + 1;
    if (category_id <= last) {
      return {r1, r1 + (category_id - base - 1)};
    }
  }
  throw std::logic_error("condition: decode fell through");
}

}  // namespace scengen
