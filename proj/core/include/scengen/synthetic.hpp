#pragma once

#include <cstdint>
#include <vector>

#include "scengen/geometry.hpp"
#include "scengen/routes.hpp"
#include "scengen/tracks.hpp"

namespace scengen {

/// Tuning for the synthetic-traffic generator. Defaults keep every vehicle
/// inside the pairing and 700-frame window constraints of the extraction
/// pipeline so synthetic recordings flow through it end to end.
struct SyntheticConfig {
  double min_speed = 5.0;        // m/s
  double max_speed = 12.0;       // m/s
  double frame_rate = 25.0;      // Hz
  double spawn_radius = 45.0;    // m, start/end distance from the center
  int max_start_frame = 150;     // entry times staggered over [0, this]
  int min_frames = 260;          // accepted track length range
  int max_frames = 545;
};

/// Synthetic recording with per-track ground truth, aligned by index.
struct SyntheticRecording {
  std::vector<Track> tracks;
  std::vector<Route> routes;
};

/// Scripted traffic: each vehicle drives straight toward the ring along its
/// entry arm, follows a counterclockwise arc, and leaves straight along its
/// exit arm, with a smooth bounded speed profile. Deterministic given seed.
SyntheticRecording generate_synthetic_recording(const RoundaboutGeometry& geom,
                                                int n_vehicles, std::uint64_t seed,
                                                const SyntheticConfig& config = {},
                                                int recording_id = 0);

}  // namespace scengen
