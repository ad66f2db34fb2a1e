#include "scengen/extraction.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scengen/rng.hpp"

namespace scengen {

std::vector<Track> filter_short_tracks(std::vector<Track> tracks, int min_frames) {
  std::erase_if(tracks, [min_frames](const Track& t) { return t.size() < min_frames; });
  return tracks;
}

std::vector<TrackPair> pair_tracks(const std::vector<Track>& tracks, int min_overlap) {
  std::vector<TrackPair> pairs;
  const int n = static_cast<int>(tracks.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Track& a = tracks[static_cast<std::size_t>(i)];
      const Track& b = tracks[static_cast<std::size_t>(j)];
      const int overlap = std::min(a.last_frame(), b.last_frame()) -
                          std::max(a.first_frame, b.first_frame) + 1;
      if (overlap >= min_overlap) pairs.push_back({i, j});
    }
  }
  return pairs;
}

std::optional<Scenario> build_scenario(const Track& track_a, const Track& track_b,
                                       Route route_a, Route route_b,
                                       int window_frames, double frame_rate,
                                       std::string* reject_reason) {
  const Track& first = track_a.track_id <= track_b.track_id ? track_a : track_b;
  const Track& second = track_a.track_id <= track_b.track_id ? track_b : track_a;
  const Route first_route = track_a.track_id <= track_b.track_id ? route_a : route_b;
  const Route second_route = track_a.track_id <= track_b.track_id ? route_b : route_a;

  const int start = std::min(first.first_frame, second.first_frame);
  const int span = std::max(first.last_frame(), second.last_frame()) - start + 1;
  if (span > window_frames) {
    if (reject_reason) {
      *reject_reason = "combined span " + std::to_string(span) + " exceeds window " +
                       std::to_string(window_frames);
    }
    return std::nullopt;
  }

  Scenario s;
  s.positions.resize(window_frames, kScenarioFeatures);
  for (int row = 0; row < window_frames; ++row) {
    const int frame = start + row;
    const Eigen::Vector2d& p1 = first.position_at_clamped(frame);
    const Eigen::Vector2d& p2 = second.position_at_clamped(frame);
    s.positions(row, 0) = p1.x();
    s.positions(row, 1) = p1.y();
    s.positions(row, 2) = p2.x();
    s.positions(row, 3) = p2.y();
  }
  s.condition_id = encode_condition(route_id(first_route), route_id(second_route)).category_id;
  s.frame_origin = start;
  s.dt = 1.0 / frame_rate;
  return s;
}

Scenario downsample(const Scenario& scenario, int factor) {
  if (factor < 1) throw std::invalid_argument("downsample: factor must be >= 1");
  if (factor == 1) return scenario;
  if (scenario.steps() != kWindowFrames) {
    throw std::invalid_argument("downsample: expected a 700-frame scenario, got " +
                                std::to_string(scenario.steps()));
  }
  const int kept = (scenario.steps() - 1) / factor + 1;
  Scenario out = scenario;
  out.positions.resize(kept, kScenarioFeatures);
  for (int i = 0; i < kept; ++i) {
    out.positions.row(i) = scenario.positions.row(i * factor);
  }
  out.dt = scenario.dt * factor;
  return out;
}

std::vector<Scenario> filter_rare_categories(std::vector<Scenario> scenarios,
                                             int min_count) {
  std::map<int, int> counts;
  for (const auto& s : scenarios) counts[s.condition_id]++;
  std::erase_if(scenarios, [&](const Scenario& s) {
    return counts[s.condition_id] < min_count;
  });
  return scenarios;
}

SplitIndices split_dataset(int scenario_count, std::uint64_t seed,
                           double train_fraction, double validation_fraction) {
  if (scenario_count < 10) {
    throw std::invalid_argument("split: need at least 10 scenarios");
  }
  if (train_fraction <= 0.0 || validation_fraction <= 0.0 ||
      train_fraction + validation_fraction >= 1.0) {
    throw std::invalid_argument("split: fractions must be positive and sum below 1");
  }
  std::vector<int> order(static_cast<std::size_t>(scenario_count));
  for (int i = 0; i < scenario_count; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  // Floor the first two shares; the test split takes the remainder.
  const int n_train = static_cast<int>(train_fraction * scenario_count);
  const int n_val = static_cast<int>(validation_fraction * scenario_count);

  SplitIndices split;
  split.seed = seed;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

std::string ExtractionReport::to_json() const {
  nlohmann::json j;
  j["tracks_total"] = tracks_total;
  j["tracks_malformed"] = tracks_malformed;
  j["tracks_after_short_filter"] = tracks_after_short_filter;
  j["tracks_with_route"] = tracks_with_route;
  j["route_rejections"] = route_rejections;
  j["pairs_overlapping"] = pairs_overlapping;
  j["windows_built"] = windows_built;
  j["window_rejections"] = window_rejections;
  j["scenarios_after_category_filter"] = scenarios_after_category_filter;
  j["categories_final"] = categories_final;
  return j.dump(2);
}

}  // namespace scengen
