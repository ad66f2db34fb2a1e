#include "scengen/tracks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "scengen/csv.hpp"

namespace scengen {

const Eigen::Vector2d& Track::position_at_clamped(int frame) const {
  const int idx = std::clamp(frame - first_frame, 0, size() - 1);
  return positions[static_cast<std::size_t>(idx)];
}

LoadResult load_tracks(const std::filesystem::path& file, int recording_id) {
  const CsvTable table = read_csv(file);
  const int col_rec = table.require_column("recordingId");
  const int col_track = table.require_column("trackId");
  const int col_frame = table.require_column("frame");
  const int col_x = table.require_column("xCenter");
  const int col_y = table.require_column("yCenter");

  std::map<int, std::vector<TrackRecord>> by_track;
  for (const auto& row : table.rows) {
    TrackRecord rec;
    rec.recording_id = std::stoi(row[static_cast<std::size_t>(col_rec)]);
    if (rec.recording_id != recording_id) continue;
    rec.track_id = std::stoi(row[static_cast<std::size_t>(col_track)]);
    rec.frame = std::stoi(row[static_cast<std::size_t>(col_frame)]);
    rec.x = std::stod(row[static_cast<std::size_t>(col_x)]);
    rec.y = std::stod(row[static_cast<std::size_t>(col_y)]);
    by_track[rec.track_id].push_back(rec);
  }

  LoadResult result;
  for (auto& [track_id, records] : by_track) {
    std::sort(records.begin(), records.end(),
              [](const TrackRecord& a, const TrackRecord& b) { return a.frame < b.frame; });
    bool ok = true;
    for (std::size_t i = 0; ok && i + 1 < records.size(); ++i) {
      const int step = records[i + 1].frame - records[i].frame;
      if (step != 1) {
        result.rejected.push_back(
            {track_id, step == 0
                           ? "duplicate frame " + std::to_string(records[i].frame)
                           : "frame gap " + std::to_string(records[i].frame) + " -> " +
                                 std::to_string(records[i + 1].frame)});
        ok = false;
      }
    }
    for (std::size_t i = 0; ok && i < records.size(); ++i) {
      if (!std::isfinite(records[i].x) || !std::isfinite(records[i].y)) {
        result.rejected.push_back(
            {track_id, "non-finite position at frame " + std::to_string(records[i].frame)});
        ok = false;
      }
    }
    if (!ok) continue;

    Track t;
    t.recording_id = recording_id;
    t.track_id = track_id;
    t.first_frame = records.front().frame;
    t.positions.reserve(records.size());
    for (const auto& r : records) t.positions.emplace_back(r.x, r.y);
    result.tracks.push_back(std::move(t));
  }
  return result;
}

void write_tracks_csv(const std::filesystem::path& file,
                      const std::vector<Track>& tracks) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& t : tracks) {
    for (int i = 0; i < t.size(); ++i) {
      const auto& p = t.positions[static_cast<std::size_t>(i)];
      rows.push_back({std::to_string(t.recording_id), std::to_string(t.track_id),
                      std::to_string(t.first_frame + i), format_double(p.x()),
                      format_double(p.y())});
    }
  }
  write_csv(file, {}, {"recordingId", "trackId", "frame", "xCenter", "yCenter"}, rows);
}

}  // namespace scengen
