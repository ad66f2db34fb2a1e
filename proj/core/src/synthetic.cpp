#include "scengen/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "scengen/rng.hpp"

namespace scengen {

namespace {

Eigen::Vector2d unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

struct PathScript {
  const RoundaboutGeometry* geom;
  double theta_in = 0.0;
  double theta_out = 0.0;
  double sweep = 0.0;       // CCW arc length in radians
  double ring_radius = 0.0;
  double spawn_radius = 0.0;

  double leg_in() const { return spawn_radius - ring_radius; }
  double leg_arc() const { return sweep * ring_radius; }
  double length() const { return 2.0 * leg_in() + leg_arc(); }

  Eigen::Vector2d at(double s) const {
    const double l1 = leg_in();
    const double l2 = leg_arc();
    if (s <= l1) {
      return geom->center + (spawn_radius - s) * unit(theta_in);
    }
    if (s <= l1 + l2) {
      return geom->center + ring_radius * unit(theta_in + (s - l1) / ring_radius);
    }
    return geom->center + (ring_radius + (s - l1 - l2)) * unit(theta_out);
  }
};

}  // namespace

SyntheticRecording generate_synthetic_recording(const RoundaboutGeometry& geom,
                                                int n_vehicles, std::uint64_t seed,
                                                const SyntheticConfig& config,
                                                int recording_id) {
  if (n_vehicles < 1) {
    throw std::invalid_argument("synthetic: n_vehicles must be >= 1");
  }
  geom.validate();
  const double dt = 1.0 / config.frame_rate;
  const double ring_radius = 0.5 * (geom.inner_radius + geom.gate_radius);
  const double spawn_radius = std::max(config.spawn_radius, 1.5 * geom.outer_radius);

  SyntheticRecording rec;
  Rng master(seed);
  for (int v = 0; v < n_vehicles; ++v) {
    Rng rng = master.fork(static_cast<std::uint64_t>(v));
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      const Route route = route_from_id(rng.uniform_int(0, kNumRoutes - 1));
      PathScript path;
      path.geom = &geom;
      path.theta_in = geom.ports[static_cast<std::size_t>(route.entry)].center();
      path.theta_out = geom.ports[static_cast<std::size_t>(route.exit)].center();
      path.sweep = wrap_angle(path.theta_out - path.theta_in);
      path.ring_radius = ring_radius;
      path.spawn_radius = spawn_radius;

      // Smooth speed profile v(s) = v0 + A*sin(...), held inside the bounds.
      const double margin = 0.25 * (config.max_speed - config.min_speed);
      const double v0 = rng.uniform(config.min_speed + margin, config.max_speed - margin);
      const double amp = std::min({rng.uniform(0.0, margin), v0 - config.min_speed,
                                   config.max_speed - v0});
      const double cycles = static_cast<double>(rng.uniform_int(1, 2));
      const double phase = rng.uniform(0.0, kTwoPi);
      const int start_frame = rng.uniform_int(0, config.max_start_frame);

      const double total = path.length();
      std::vector<Eigen::Vector2d> positions;
      positions.reserve(600);
      double s = 0.0;
      while (s < total && static_cast<int>(positions.size()) <= config.max_frames) {
        positions.push_back(path.at(s));
        const double speed = v0 + amp * std::sin(kTwoPi * cycles * s / total + phase);
        s += speed * dt;
      }
      const int frames = static_cast<int>(positions.size());
      if (frames < config.min_frames || frames > config.max_frames) {
        continue;
      }

      Track t;
      t.recording_id = recording_id;
      t.track_id = v;
      t.first_frame = start_frame;
      t.positions = std::move(positions);
      rec.tracks.push_back(std::move(t));
      rec.routes.push_back(route);
      placed = true;
    }
    if (!placed) {
      throw std::logic_error("synthetic: could not place vehicle within constraints");
    }
  }
  return rec;
}

}  // namespace scengen
