#include "scengen/routes.hpp"

#include <cmath>
#include <stdexcept>

namespace scengen {

namespace {
constexpr double kFullCircleSlack = 0.35;  // rad beyond 2*pi before rejection
}

char port_name(Port p) { return static_cast<char>('A' + static_cast<int>(p)); }

int route_id(Route r) {
  const int e = static_cast<int>(r.entry);
  const int x = static_cast<int>(r.exit);
  if (e == x) throw std::invalid_argument("route: entry and exit port must differ");
  return e * 3 + (x < e ? x : x - 1);
}

Route route_from_id(int id) {
  if (id < 0 || id >= kNumRoutes) {
    throw std::invalid_argument("route: id out of range 0..11");
  }
  const int e = id / 3;
  const int pos = id % 3;
  const int x = pos + (pos >= e ? 1 : 0);
  return Route{static_cast<Port>(e), static_cast<Port>(x)};
}

std::string_view rejection_text(RouteRejection r) {
  switch (r) {
    case RouteRejection::NeverEntered: return "never entered";
    case RouteRejection::NeverExited: return "never exited";
    case RouteRejection::SamePort: return "same port";
    case RouteRejection::MultipleCircles: return "multiple circles";
    case RouteRejection::OutsidePortSector: return "outside port sector";
  }
  return "unknown";
}

RouteClassification classify_route(const Track& track, const RoundaboutGeometry& geom) {
  if (track.size() < 2) {
    throw std::invalid_argument("classify_route: track needs at least 2 frames");
  }
  const double gate = geom.gate_radius;
  const int n = track.size();

  // Interpolated crossing angle between consecutive samples i, i+1.
  const auto crossing_angle = [&](int i) {
    const Eigen::Vector2d& a = track.positions[static_cast<std::size_t>(i)];
    const Eigen::Vector2d& b = track.positions[static_cast<std::size_t>(i + 1)];
    const double ra = geom.radius_of(a);
    const double rb = geom.radius_of(b);
    const double t = (std::abs(ra - rb) < 1e-12) ? 0.5 : (ra - gate) / (ra - rb);
    const Eigen::Vector2d p = a + t * (b - a);
    return geom.angle_of(p);
  };

  int entry_idx = -1;
  for (int i = 0; i + 1 < n; ++i) {
    const double ra = geom.radius_of(track.positions[static_cast<std::size_t>(i)]);
    const double rb = geom.radius_of(track.positions[static_cast<std::size_t>(i + 1)]);
    if (ra > gate && rb <= gate) {
      entry_idx = i;
      break;
    }
  }
  if (entry_idx < 0) {
    return {std::nullopt, RouteRejection::NeverEntered};
  }

  int exit_idx = -1;
  for (int i = n - 2; i > entry_idx; --i) {
    const double ra = geom.radius_of(track.positions[static_cast<std::size_t>(i)]);
    const double rb = geom.radius_of(track.positions[static_cast<std::size_t>(i + 1)]);
    if (ra <= gate && rb > gate) {
      exit_idx = i;
      break;
    }
  }
  if (exit_idx < 0) {
    return {std::nullopt, RouteRejection::NeverExited};
  }

  // Net swept polar angle over the in-roundabout traversal.
  double swept = 0.0;
  for (int i = entry_idx; i < exit_idx + 1; ++i) {
    const double a0 = geom.angle_of(track.positions[static_cast<std::size_t>(i)]);
    const double a1 = geom.angle_of(track.positions[static_cast<std::size_t>(i + 1)]);
    swept += angle_diff(a1, a0);
  }
  if (std::abs(swept) > kTwoPi + kFullCircleSlack) {
    return {std::nullopt, RouteRejection::MultipleCircles};
  }

  const int entry_port = geom.port_at_angle(crossing_angle(entry_idx));
  const int exit_port = geom.port_at_angle(crossing_angle(exit_idx));
  if (entry_port < 0 || exit_port < 0) {
    return {std::nullopt, RouteRejection::OutsidePortSector};
  }
  if (entry_port == exit_port) {
    return {std::nullopt, RouteRejection::SamePort};
  }
  return {Route{static_cast<Port>(entry_port), static_cast<Port>(exit_port)}, std::nullopt};
}

}  // namespace scengen
