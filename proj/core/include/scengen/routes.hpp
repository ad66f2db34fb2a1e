#pragma once

#include <optional>
#include <string_view>

#include "scengen/geometry.hpp"
#include "scengen/tracks.hpp"

namespace scengen {

inline constexpr int kNumPorts = 4;
inline constexpr int kNumRoutes = 12;  // ordered (entry, exit) pairs, entry != exit

enum class Port : int { A = 0, B = 1, C = 2, D = 3 };

char port_name(Port p);

/// One vehicle's way through the roundabout: in at one arm, out at another.
struct Route {
  Port entry = Port::A;
  Port exit = Port::B;

  bool operator==(const Route&) const = default;
};

/// Bijection between routes and 0..11.
int route_id(Route r);
Route route_from_id(int id);

enum class RouteRejection {
  NeverEntered,     // no inward gate crossing observed
  NeverExited,      // entered but no outward crossing afterwards
  SamePort,         // entry and exit through the same arm
  MultipleCircles,  // swept angle beyond one revolution
  OutsidePortSector // gate crossing fell between arm sectors
};

std::string_view rejection_text(RouteRejection r);

struct RouteClassification {
  std::optional<Route> route;
  std::optional<RouteRejection> rejection;

  bool ok() const { return route.has_value(); }
};

/// Derives the route from gate-circle crossings: entry port from the first
/// inward crossing, exit port from the last outward crossing. Rejects
/// same-port traversals, swept angles above 2*pi + 0.35 rad, and tracks that
/// never cross the gate. Requires >= 2 frames.
RouteClassification classify_route(const Track& track, const RoundaboutGeometry& geom);

}  // namespace scengen
