#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scengen/routes.hpp"
#include "scengen/scenario.hpp"
#include "scengen/tracks.hpp"

namespace scengen {

/// Thresholds of the scenario-extraction pipeline. Defaults follow the
/// production configuration; tests shrink them.
struct ExtractionParams {
  int min_track_frames = 250;
  int min_overlap_frames = 100;
  int window_frames = kWindowFrames;
  int downsample_factor = 3;
  int min_category_count = 300;
  double frame_rate = 25.0;
};

/// Keeps tracks with at least min_frames frames.
std::vector<Track> filter_short_tracks(std::vector<Track> tracks, int min_frames);

/// Indices into the track vector; a < b by track_id order.
struct TrackPair {
  int a = 0;
  int b = 0;
};

/// All unordered pairs within one recording whose temporal overlap is at
/// least min_overlap frames. Tracks must be sorted by track_id.
std::vector<TrackPair> pair_tracks(const std::vector<Track>& tracks, int min_overlap);

/// Places both trajectories into a window_frames-long window anchored at the
/// earlier vehicle's first frame; positions outside a vehicle's lifespan are
/// edge-held. The lower track_id takes the (x1, y1) columns. Returns nullopt
/// with a diagnostic when the combined span exceeds the window.
std::optional<Scenario> build_scenario(const Track& track_a, const Track& track_b,
                                       Route route_a, Route route_b,
                                       int window_frames, double frame_rate,
                                       std::string* reject_reason = nullptr);

/// Keeps every factor-th row starting at row 0 and scales dt. factor 1 is
/// the identity; factor > 1 requires the canonical 700-frame window.
Scenario downsample(const Scenario& scenario, int factor = 3);

/// Drops all scenarios of categories with fewer than min_count samples.
std::vector<Scenario> filter_rare_categories(std::vector<Scenario> scenarios,
                                             int min_count);

/// Disjoint 70/15/15 index split, deterministic given seed.
struct SplitIndices {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
  std::uint64_t seed = 0;
};

SplitIndices split_dataset(int scenario_count, std::uint64_t seed,
                           double train_fraction = 0.70,
                           double validation_fraction = 0.15);

/// Per-stage counts of the extraction pipeline, for auditability.
struct ExtractionReport {
  int tracks_total = 0;
  int tracks_malformed = 0;
  int tracks_after_short_filter = 0;
  int tracks_with_route = 0;
  int route_rejections = 0;
  int pairs_overlapping = 0;
  int windows_built = 0;
  int window_rejections = 0;
  int scenarios_after_category_filter = 0;
  int categories_final = 0;

  std::string to_json() const;
};

}  // namespace scengen
