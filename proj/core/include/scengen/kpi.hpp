#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scengen/geometry.hpp"
#include "scengen/scenario.hpp"

namespace scengen {

/// Position plus finite-difference velocity at one frame.
struct VehicleState {
  Eigen::Vector2d position{0.0, 0.0};
  Eigen::Vector2d velocity{0.0, 0.0};
};

/// Closest pair of path samples; point_a lies on vehicle 1's path, point_b
/// on vehicle 2's. Indices are scenario frame numbers.
struct ConflictZone {
  Eigen::Vector2d point_a{0.0, 0.0};
  Eigen::Vector2d point_b{0.0, 0.0};
  double separation = 0.0;
  int frame_a = 0;
  int frame_b = 0;
};

struct KpiResult {
  std::optional<double> min_ttc;  // seconds, > 0 when defined
  std::optional<int> min_ttc_frame;
  std::optional<double> pet;  // seconds, >= 0 when defined
  std::optional<ConflictZone> conflict_zone;
  bool critical = false;  // simultaneous conflict-zone occupancy
};

struct KpiParams {
  double collision_distance = 2.0;  // disc diameter sum for TTC, meters
  double conflict_threshold = 5.0;  // zone separation bound, meters
};

/// Forward differences divided by dt; the last row repeats the previous one.
/// trajectory is T x 2, T >= 2.
Eigen::MatrixXd velocity_profile(const Eigen::MatrixXd& trajectory, double dt);

/// True where the sample lies within outer_radius of the center.
std::vector<bool> inside_roundabout_mask(const Eigen::MatrixXd& trajectory,
                                         const RoundaboutGeometry& geom);

/// Smallest t >= 0 with |dp + dv t| = collision_distance under constant
/// velocities. nullopt when the paths never reach that separation.
std::optional<double> ttc_at_frame(const VehicleState& a, const VehicleState& b,
                                   double collision_distance = 2.0);

/// Minimum defined TTC over frames where both vehicles are inside the
/// roundabout, with the frame it occurs at.
struct MinTtc {
  double seconds = 0.0;
  int frame = 0;
};
std::optional<MinTtc> min_ttc(const Scenario& scenario, const RoundaboutGeometry& geom,
                              const KpiParams& params = {});

/// Closest sample pair of two paths (rows are samples), accepted only when
/// the separation is within threshold. Ties break toward the earliest path-1
/// index, then the earliest path-2 index. frame_a/frame_b are row indices
/// into the given paths.
std::optional<ConflictZone> find_conflict_zone(const Eigen::MatrixXd& path1,
                                               const Eigen::MatrixXd& path2,
                                               double threshold = 5.0);

struct PetResult {
  double seconds = 0.0;
  bool critical = false;  // occupancies overlapped; seconds forced to 0
};
/// Post-encroachment time at the scenario's conflict zone: the gap between
/// the earlier vehicle leaving and the later one entering. Occupancy is the
/// contiguous run of frames within threshold of the vehicle's own zone
/// point, the run containing the zone frame. nullopt without a zone.
std::optional<PetResult> pet(const Scenario& scenario, const RoundaboutGeometry& geom,
                             const KpiParams& params = {});

/// All measures for one scenario.
KpiResult evaluate_kpis(const Scenario& scenario, const RoundaboutGeometry& geom,
                        const KpiParams& params = {});

/// Batch row for the KPI CSV.
struct KpiRow {
  std::string scenario_id;
  int condition = 0;
  KpiResult result;
};

/// Header: scenario_id,condition,min_ttc,min_ttc_frame,pet,conflict_x,
/// conflict_y,critical_flag. Undefined values become empty fields; the
/// conflict point is the midpoint of the zone's two path points.
void write_kpi_csv(const std::filesystem::path& path, const std::vector<KpiRow>& rows);
std::vector<KpiRow> read_kpi_csv(const std::filesystem::path& path);

}  // namespace scengen
