#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

namespace scengen {

/// One vehicle's raw per-frame state as read from a recording (25 Hz source).
struct TrackRecord {
  int recording_id = 0;
  int track_id = 0;
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
};

/// A frame-sorted, gap-free trajectory. positions[i] is the state at frame
/// first_frame + i.
struct Track {
  int recording_id = 0;
  int track_id = 0;
  int first_frame = 0;
  std::vector<Eigen::Vector2d> positions;

  int size() const { return static_cast<int>(positions.size()); }
  int last_frame() const { return first_frame + size() - 1; }

  /// Position at an absolute frame, edge-held outside the lifespan.
  const Eigen::Vector2d& position_at_clamped(int frame) const;
};

struct TrackRejection {
  int track_id = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<Track> tracks;                // sorted by track_id
  std::vector<TrackRejection> rejected;     // malformed tracks, with diagnostics
};

/// Parses a rounD-style CSV (required columns: recordingId, trackId, frame,
/// xCenter, yCenter; extras ignored). Rows of other recordings are skipped.
/// Tracks with frame gaps, duplicate or non-monotone frames, or non-finite
/// positions are reported in `rejected` instead of being returned.
/// Throws std::runtime_error on a missing file or missing required column.
LoadResult load_tracks(const std::filesystem::path& file, int recording_id);

/// Writes tracks in the same CSV schema load_tracks reads.
void write_tracks_csv(const std::filesystem::path& file,
                      const std::vector<Track>& tracks);

}  // namespace scengen
