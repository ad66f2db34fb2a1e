#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "scengen/extraction.hpp"
#include "scengen/geometry.hpp"
#include "scengen/normalization.hpp"
#include "scengen/scenario.hpp"

namespace scengen {

/// Provenance of one scenario: source recording and the two track ids.
struct ScenarioSource {
  int recording_id = 0;
  int track1_id = 0;
  int track2_id = 0;
};

/// The persisted training corpus: scenario tensor, condition labels, split,
/// normalization stats and a manifest. One container file on disk.
struct Dataset {
  static constexpr int kSchemaVersion = 1;

  Eigen::MatrixXd tensor;          // (N * steps) x 4, meters, sample-major
  std::vector<int> conditions;     // N, category ids
  std::vector<int> frame_origins;  // N
  std::vector<ScenarioSource> sources;  // N
  int steps = kDownsampledFrames;
  double dt = 0.12;
  SplitIndices split;
  NormalizationStats norm;
  std::vector<int> recording_ids;
  ExtractionParams params;

  int count() const { return static_cast<int>(conditions.size()); }

  /// View of scenario i as a steps x 4 block.
  Eigen::Block<const Eigen::MatrixXd> scenario_block(int i) const;
  Scenario scenario(int i) const;

  /// Distinct category ids present, ascending.
  std::vector<int> category_ids() const;

  void save(const std::filesystem::path& file) const;
  static Dataset load(const std::filesystem::path& file);
};

/// Runs the full extraction pipeline over already-loaded recordings:
/// short-track filter, route classification, pairing, windowing,
/// downsampling, rare-category filter, split, normalization fit (train
/// split only). Throws if no scenario survives.
Dataset build_dataset(const std::vector<std::vector<Track>>& recordings,
                      const RoundaboutGeometry& geom, const ExtractionParams& params,
                      std::uint64_t split_seed, ExtractionReport* report = nullptr);

}  // namespace scengen
