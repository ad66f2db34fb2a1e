#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scengen/geometry.hpp"
#include "scengen/kpi.hpp"
#include "scengen/model.hpp"
#include "scengen/normalization.hpp"
#include "scengen/scenario.hpp"

namespace scengen {

/// Meter-space reconstruction error, split by axis (x: longitudinal,
/// y: lateral) and vehicle. Totals pool both vehicles' squared errors, so
/// total^2 * 2NT = sse_v1 + sse_v2 per axis.
struct RmseReport {
  double longitudinal_v1 = 0.0;
  double longitudinal_v2 = 0.0;
  double longitudinal_total = 0.0;
  double lateral_v1 = 0.0;
  double lateral_v2 = 0.0;
  double lateral_total = 0.0;
};

/// Pairs originals[i] with reconstructions[i]. Throws on count or shape
/// mismatch or empty input.
RmseReport rmse_report(const std::vector<Scenario>& originals,
                       const std::vector<Scenario>& reconstructions);

/// One decoded scenario of a latent sweep, with per-frame speeds masked to
/// the in-roundabout portion.
struct TraversalEntry {
  double value = 0.0;  // the varied latent coordinate
  Scenario scenario;
  Eigen::VectorXd speed1;  // |velocity| per frame, meters/second
  Eigen::VectorXd speed2;
  std::vector<bool> inside1;  // speeds are reported only where true
  std::vector<bool> inside2;
};

inline constexpr double kTraversalValues[5] = {-3.0, -1.5, 0.0, 1.5, 3.0};

struct TraversalGrid {
  int dimension = 0;
  int condition = 0;
  std::vector<TraversalEntry> entries;  // one per kTraversalValues entry
};

/// Decodes the five controlled latent vectors (all coordinates zero except
/// the varied one) under the condition. Deterministic.
TraversalGrid latent_traversal(TransformerCvae& model, const NormalizationStats& norm,
                               const RoundaboutGeometry& geom, int condition,
                               int dimension, int steps, double dt);

/// Fixed-width PET histogram; bin i covers [i*w, (i+1)*w).
struct PetHistogram {
  double bin_width = 0.5;
  std::vector<int> counts;
  int defined = 0;
  int undefined = 0;
};

struct ScatterRow {
  std::string set;  // "a" or "b"
  std::string scenario_id;
  std::optional<double> pet;
  std::optional<double> min_ttc;
};

/// Histograms of defined PET values over shared bin edges (covering the max
/// of both sets) plus the per-scenario PET/TTC scatter table.
struct KpiComparison {
  PetHistogram hist_a;
  PetHistogram hist_b;
  std::vector<ScatterRow> scatter;
};

KpiComparison kpi_distribution_compare(const std::vector<KpiRow>& set_a,
                                       const std::vector<KpiRow>& set_b,
                                       double pet_bin_width = 0.5);

/// Report bundle files. write_report_bundle emits rmse.csv (when present),
/// pet_hist_a.csv, pet_hist_b.csv and pet_vs_ttc.csv into dir.
void write_rmse_csv(const std::filesystem::path& path, const RmseReport& report);
RmseReport read_rmse_csv(const std::filesystem::path& path);
void write_pet_histogram_csv(const std::filesystem::path& path,
                             const PetHistogram& hist);
void write_scatter_csv(const std::filesystem::path& path,
                       const std::vector<ScatterRow>& rows);
void write_traversal_csv(const std::filesystem::path& path, const TraversalGrid& grid);
void write_report_bundle(const std::filesystem::path& dir,
                         const std::optional<RmseReport>& rmse,
                         const KpiComparison& comparison);

}  // namespace scengen
