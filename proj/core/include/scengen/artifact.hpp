#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scengen/model.hpp"
#include "scengen/normalization.hpp"
#include "scengen/scenario.hpp"
#include "scengen/train.hpp"

namespace scengen {

/// Everything needed to reuse a trained model: weights by name, both
/// configs, normalization stats, category vocabulary and the loss history.
/// Directory layout: config.json, weights.bin, history.csv. Save after load
/// reproduces the files byte for byte.
struct ModelArtifact {
  ModelConfig model_config;
  TrainConfig train_config;
  NormalizationStats norm;
  std::vector<int> vocabulary;
  int steps = kDownsampledFrames;  // scenario length the model was trained on
  double dt = 0.12;
  int best_epoch = -1;
  std::vector<EpochStats> history;
  std::map<std::string, Eigen::MatrixXd> weights;

  static ModelArtifact from_model(const TransformerCvae& model,
                                  const TrainConfig& train_config,
                                  const NormalizationStats& norm, int steps, double dt,
                                  std::vector<EpochStats> history, int best_epoch);

  /// Rebuilds the model and installs the stored weights. Throws when a
  /// parameter is missing, unknown, or has the wrong shape.
  TransformerCvae instantiate() const;

  void save(const std::filesystem::path& dir) const;
  static ModelArtifact load(const std::filesystem::path& dir);
};

/// Draws z ~ N(0, I), decodes under the category, and maps back to meters.
/// Chunked internally; deterministic given seed regardless of chunking.
std::vector<Scenario> generate_scenarios(TransformerCvae& model,
                                         const NormalizationStats& norm,
                                         int category_id, int count,
                                         std::uint64_t seed, int steps, double dt);

/// Posterior-mean round trip: normalize, encode, decode mu, denormalize.
Scenario reconstruct_scenario(TransformerCvae& model, const NormalizationStats& norm,
                              const Scenario& scenario);

}  // namespace scengen
