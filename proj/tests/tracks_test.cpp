#include "scengen/tracks.hpp"

#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "scengen/geometry.hpp"
#include "scengen/synthetic.hpp"

namespace scengen {
namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_lines(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

TEST(LoadTracks, TwoCleanTracks) {
  const auto path = temp_file("scengen_tracks_two.csv");
  std::ofstream out(path);
  out << "recordingId,trackId,frame,xCenter,yCenter\n";
  for (int f = 0; f < 300; ++f) out << "0,1," << f << "," << f * 0.1 << ",0\n";
  for (int f = 50; f < 550; ++f) out << "0,2," << f << ",0," << f * 0.1 << "\n";
  out.close();

  const LoadResult r = load_tracks(path, 0);
  ASSERT_EQ(r.tracks.size(), 2u);
  EXPECT_TRUE(r.rejected.empty());
  EXPECT_EQ(r.tracks[0].track_id, 1);
  EXPECT_EQ(r.tracks[0].size(), 300);
  EXPECT_EQ(r.tracks[0].first_frame, 0);
  EXPECT_EQ(r.tracks[1].track_id, 2);
  EXPECT_EQ(r.tracks[1].size(), 500);
  EXPECT_EQ(r.tracks[1].first_frame, 50);
  EXPECT_NEAR(r.tracks[1].positions[3].y(), 5.3, 1e-12);
  std::filesystem::remove(path);
}

TEST(LoadTracks, FrameGapRejectedOthersKept) {
  const auto path = temp_file("scengen_tracks_gap.csv");
  write_lines(path,
              "recordingId,trackId,frame,xCenter,yCenter\n"
              "0,1,9,0,0\n"
              "0,1,10,1,0\n"
              "0,1,12,2,0\n"  // jump 10 -> 12
              "0,2,0,5,5\n"
              "0,2,1,6,5\n");
  const LoadResult r = load_tracks(path, 0);
  ASSERT_EQ(r.tracks.size(), 1u);
  EXPECT_EQ(r.tracks[0].track_id, 2);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].track_id, 1);
  EXPECT_NE(r.rejected[0].reason.find("frame"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(LoadTracks, NonFinitePositionRejected) {
  const auto path = temp_file("scengen_tracks_nan.csv");
  write_lines(path,
              "recordingId,trackId,frame,xCenter,yCenter\n"
              "0,1,0,nan,0\n"
              "0,1,1,1,0\n");
  const LoadResult r = load_tracks(path, 0);
  EXPECT_TRUE(r.tracks.empty());
  ASSERT_EQ(r.rejected.size(), 1u);
  std::filesystem::remove(path);
}

TEST(LoadTracks, OtherRecordingRowsSkipped) {
  const auto path = temp_file("scengen_tracks_other.csv");
  write_lines(path,
              "recordingId,trackId,frame,xCenter,yCenter\n"
              "3,1,0,0,0\n"
              "3,1,1,1,0\n"
              "4,9,0,2,2\n");
  const LoadResult r = load_tracks(path, 3);
  ASSERT_EQ(r.tracks.size(), 1u);
  EXPECT_EQ(r.tracks[0].recording_id, 3);
  std::filesystem::remove(path);
}

TEST(LoadTracks, MissingFileThrows) {
  EXPECT_THROW(load_tracks("/nonexistent/rec.csv", 0), std::runtime_error);
}

TEST(LoadTracks, MissingColumnThrows) {
  const auto path = temp_file("scengen_tracks_nocol.csv");
  write_lines(path, "recordingId,trackId,frame,xCenter\n0,1,0,0\n");
  EXPECT_THROW(load_tracks(path, 0), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(LoadTracks, ExtraColumnsIgnored) {
  const auto path = temp_file("scengen_tracks_extra.csv");
  write_lines(path,
              "recordingId,trackId,frame,trackLifetime,xCenter,yCenter,heading\n"
              "0,1,0,99,1.5,2.5,0.3\n"
              "0,1,1,99,1.6,2.6,0.3\n");
  const LoadResult r = load_tracks(path, 0);
  ASSERT_EQ(r.tracks.size(), 1u);
  EXPECT_NEAR(r.tracks[0].positions[1].x(), 1.6, 1e-12);
  std::filesystem::remove(path);
}

TEST(LoadTracks, SyntheticRecordingRoundTrips) {
  const RoundaboutGeometry geom = default_test_geometry();
  const SyntheticRecording rec = generate_synthetic_recording(geom, 6, 77);
  const auto path = temp_file("scengen_tracks_synth.csv");
  write_tracks_csv(path, rec.tracks);

  const LoadResult r = load_tracks(path, 0);
  EXPECT_TRUE(r.rejected.empty());
  ASSERT_EQ(r.tracks.size(), rec.tracks.size());
  for (std::size_t i = 0; i < rec.tracks.size(); ++i) {
    const Track& a = rec.tracks[i];
    const Track& b = r.tracks[i];
    EXPECT_EQ(a.track_id, b.track_id);
    EXPECT_EQ(a.first_frame, b.first_frame);
    ASSERT_EQ(a.size(), b.size());
    for (int f = 0; f < a.size(); ++f) {
      ASSERT_EQ(a.positions[static_cast<std::size_t>(f)],
                b.positions[static_cast<std::size_t>(f)]);
    }
  }
  std::filesystem::remove(path);
}

TEST(Track, PositionAtClamped) {
  Track t;
  t.first_frame = 10;
  t.positions = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}};
  EXPECT_EQ(t.position_at_clamped(5), t.positions.front());
  EXPECT_EQ(t.position_at_clamped(11), t.positions[1]);
  EXPECT_EQ(t.position_at_clamped(99), t.positions.back());
  EXPECT_EQ(t.last_frame(), 12);
}

}  // namespace
}  // namespace scengen
