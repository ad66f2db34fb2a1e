#include "scengen/kpi.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "scengen/csv.hpp"

namespace scengen {
namespace {

Eigen::MatrixXd vehicle_path(const Scenario& s, int vehicle) {
  return s.positions.middleCols(vehicle == 0 ? 0 : 2, 2);
}

/// Conflict zone over the in-roundabout portions of both paths, with frames
/// mapped back to scenario frame numbers. nullopt when either portion is
/// empty or no pair comes within threshold.
std::optional<ConflictZone> scenario_conflict_zone(const Scenario& s,
                                                   const RoundaboutGeometry& geom,
                                                   double threshold) {
  const Eigen::MatrixXd p1 = vehicle_path(s, 0);
  const Eigen::MatrixXd p2 = vehicle_path(s, 1);
  const auto m1 = inside_roundabout_mask(p1, geom);
  const auto m2 = inside_roundabout_mask(p2, geom);
  std::vector<int> idx1, idx2;
  for (int t = 0; t < s.steps(); ++t) {
    if (m1[static_cast<std::size_t>(t)]) idx1.push_back(t);
    if (m2[static_cast<std::size_t>(t)]) idx2.push_back(t);
  }
  if (idx1.empty() || idx2.empty()) return std::nullopt;
  Eigen::MatrixXd r1(static_cast<Eigen::Index>(idx1.size()), 2);
  Eigen::MatrixXd r2(static_cast<Eigen::Index>(idx2.size()), 2);
  for (std::size_t i = 0; i < idx1.size(); ++i) r1.row(static_cast<Eigen::Index>(i)) = p1.row(idx1[i]);
  for (std::size_t i = 0; i < idx2.size(); ++i) r2.row(static_cast<Eigen::Index>(i)) = p2.row(idx2[i]);
  auto zone = find_conflict_zone(r1, r2, threshold);
  if (!zone) return std::nullopt;
  zone->frame_a = idx1[static_cast<std::size_t>(zone->frame_a)];
  zone->frame_b = idx2[static_cast<std::size_t>(zone->frame_b)];
  return zone;
}

struct Run {
  int first = 0;
  int last = 0;
};

/// Contiguous run of frames within threshold of the zone point, containing
/// anchor_frame. The anchor sits on the path, so the run is never empty.
Run occupancy_run(const Eigen::MatrixXd& path, const Eigen::Vector2d& zone_point,
                  int anchor_frame, double threshold) {
  const auto near = [&](int t) {
    return (path.row(t).transpose() - zone_point).norm() <= threshold;
  };
  Run run{anchor_frame, anchor_frame};
  while (run.first > 0 && near(run.first - 1)) --run.first;
  while (run.last + 1 < path.rows() && near(run.last + 1)) ++run.last;
  return run;
}

std::optional<PetResult> pet_from_zone(const Scenario& s, const ConflictZone& zone,
                                       double threshold) {
  const Run a = occupancy_run(vehicle_path(s, 0), zone.point_a, zone.frame_a, threshold);
  const Run b = occupancy_run(vehicle_path(s, 1), zone.point_b, zone.frame_b, threshold);
  PetResult out;
  if (std::max(a.first, b.first) <= std::min(a.last, b.last)) {
    out.seconds = 0.0;
    out.critical = true;
    return out;
  }
  const int gap = a.last < b.first ? b.first - a.last : a.first - b.last;
  out.seconds = gap * s.dt;
  return out;
}

std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

Eigen::MatrixXd velocity_profile(const Eigen::MatrixXd& trajectory, double dt) {
  if (trajectory.rows() < 2)
    throw std::invalid_argument("velocity_profile: need at least two samples");
  if (trajectory.cols() != 2)
    throw std::invalid_argument("velocity_profile: trajectory must be T x 2");
  if (!(dt > 0.0)) throw std::invalid_argument("velocity_profile: dt must be positive");
  const Eigen::Index t = trajectory.rows();
  Eigen::MatrixXd v(t, 2);
  v.topRows(t - 1) = (trajectory.bottomRows(t - 1) - trajectory.topRows(t - 1)) / dt;
  v.row(t - 1) = v.row(t - 2);
  return v;
}

std::vector<bool> inside_roundabout_mask(const Eigen::MatrixXd& trajectory,
                                         const RoundaboutGeometry& geom) {
  geom.validate();
  if (trajectory.cols() != 2)
    throw std::invalid_argument("inside_roundabout_mask: trajectory must be T x 2");
  std::vector<bool> mask(static_cast<std::size_t>(trajectory.rows()));
  for (Eigen::Index i = 0; i < trajectory.rows(); ++i)
    mask[static_cast<std::size_t>(i)] =
        (trajectory.row(i).transpose() - geom.center).norm() <= geom.outer_radius;
  return mask;
}

std::optional<double> ttc_at_frame(const VehicleState& a, const VehicleState& b,
                                   double collision_distance) {
  const Eigen::Vector2d dp = b.position - a.position;
  const Eigen::Vector2d dv = b.velocity - a.velocity;
  const double qa = dv.squaredNorm();
  const double qc = dp.squaredNorm() - collision_distance * collision_distance;
  if (qa < 1e-12) {
    // No relative motion: the separation never changes.
    if (std::abs(dp.norm() - collision_distance) < 1e-12) return 0.0;
    return std::nullopt;
  }
  const double qb = 2.0 * dp.dot(dv);
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double t1 = (-qb - root) / (2.0 * qa);
  const double t2 = (-qb + root) / (2.0 * qa);
  if (t1 >= 0.0) return t1;
  if (t2 >= 0.0) return t2;
  return std::nullopt;
}

std::optional<MinTtc> min_ttc(const Scenario& scenario, const RoundaboutGeometry& geom,
                              const KpiParams& params) {
  scenario.validate();
  const Eigen::MatrixXd p1 = vehicle_path(scenario, 0);
  const Eigen::MatrixXd p2 = vehicle_path(scenario, 1);
  const Eigen::MatrixXd v1 = velocity_profile(p1, scenario.dt);
  const Eigen::MatrixXd v2 = velocity_profile(p2, scenario.dt);
  const auto m1 = inside_roundabout_mask(p1, geom);
  const auto m2 = inside_roundabout_mask(p2, geom);

  std::optional<MinTtc> best;
  for (int t = 0; t < scenario.steps(); ++t) {
    if (!m1[static_cast<std::size_t>(t)] || !m2[static_cast<std::size_t>(t)]) continue;
    VehicleState a{p1.row(t).transpose(), v1.row(t).transpose()};
    VehicleState b{p2.row(t).transpose(), v2.row(t).transpose()};
    const auto ttc = ttc_at_frame(a, b, params.collision_distance);
    if (ttc && (!best || *ttc < best->seconds)) best = MinTtc{*ttc, t};
  }
  return best;
}

std::optional<ConflictZone> find_conflict_zone(const Eigen::MatrixXd& path1,
                                               const Eigen::MatrixXd& path2,
                                               double threshold) {
  if (path1.rows() == 0 || path2.rows() == 0)
    throw std::invalid_argument("find_conflict_zone: empty path");
  double best = std::numeric_limits<double>::infinity();
  Eigen::Index bi = 0, bj = 0;
  for (Eigen::Index i = 0; i < path1.rows(); ++i)
    for (Eigen::Index j = 0; j < path2.rows(); ++j) {
      const double d = (path1.row(i) - path2.row(j)).norm();
      if (d < best) {  // strict: ties keep the earliest (i, j)
        best = d;
        bi = i;
        bj = j;
      }
    }
  if (best > threshold) return std::nullopt;
  ConflictZone zone;
  zone.point_a = path1.row(bi).transpose();
  zone.point_b = path2.row(bj).transpose();
  zone.separation = best;
  zone.frame_a = static_cast<int>(bi);
  zone.frame_b = static_cast<int>(bj);
  return zone;
}

std::optional<PetResult> pet(const Scenario& scenario, const RoundaboutGeometry& geom,
                             const KpiParams& params) {
  scenario.validate();
  const auto zone = scenario_conflict_zone(scenario, geom, params.conflict_threshold);
  if (!zone) return std::nullopt;
  return pet_from_zone(scenario, *zone, params.conflict_threshold);
}

KpiResult evaluate_kpis(const Scenario& scenario, const RoundaboutGeometry& geom,
                        const KpiParams& params) {
  scenario.validate();
  KpiResult out;
  if (const auto m = min_ttc(scenario, geom, params)) {
    out.min_ttc = m->seconds;
    out.min_ttc_frame = m->frame;
  }
  out.conflict_zone = scenario_conflict_zone(scenario, geom, params.conflict_threshold);
  if (out.conflict_zone) {
    if (const auto p = pet_from_zone(scenario, *out.conflict_zone,
                                     params.conflict_threshold)) {
      out.pet = p->seconds;
      out.critical = p->critical;
    }
  }
  return out;
}

void write_kpi_csv(const std::filesystem::path& path, const std::vector<KpiRow>& rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    std::string zone_x, zone_y;
    if (r.result.conflict_zone) {
      const Eigen::Vector2d mid =
          0.5 * (r.result.conflict_zone->point_a + r.result.conflict_zone->point_b);
      zone_x = format_double(mid.x());
      zone_y = format_double(mid.y());
    }
    out.push_back({r.scenario_id, std::to_string(r.condition),
                   opt_field(r.result.min_ttc),
                   r.result.min_ttc_frame ? std::to_string(*r.result.min_ttc_frame)
                                          : std::string(),
                   opt_field(r.result.pet), zone_x, zone_y,
                   r.result.critical ? "1" : "0"});
  }
  write_csv(path, {},
            {"scenario_id", "condition", "min_ttc", "min_ttc_frame", "pet",
             "conflict_x", "conflict_y", "critical_flag"},
            out);
}

std::vector<KpiRow> read_kpi_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::vector<std::string> expect{"scenario_id", "condition",  "min_ttc",
                                        "min_ttc_frame", "pet",      "conflict_x",
                                        "conflict_y",  "critical_flag"};
  if (table.header != expect)
    throw std::runtime_error("kpi csv: unexpected header in " + path.string());
  std::vector<KpiRow> rows;
  for (const auto& r : table.rows) {
    KpiRow row;
    row.scenario_id = r[0];
    row.condition = std::stoi(r[1]);
    if (!r[2].empty()) row.result.min_ttc = std::stod(r[2]);
    if (!r[3].empty()) row.result.min_ttc_frame = std::stoi(r[3]);
    if (!r[4].empty()) row.result.pet = std::stod(r[4]);
    if (!r[5].empty() && !r[6].empty()) {
      // Only the midpoint survives serialization; both points carry it.
      ConflictZone zone;
      zone.point_a = {std::stod(r[5]), std::stod(r[6])};
      zone.point_b = zone.point_a;
      row.result.conflict_zone = zone;
    }
    row.result.critical = r[7] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace scengen
