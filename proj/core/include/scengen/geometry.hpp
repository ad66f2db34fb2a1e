#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>

namespace scengen {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wraps an angle to [0, 2*pi).
double wrap_angle(double a);

/// Signed smallest difference a - b, wrapped to (-pi, pi].
double angle_diff(double a, double b);

/// Angular interval [angle_start, angle_end] measured counterclockwise,
/// radians. May wrap through 2*pi.
struct PortSector {
  double angle_start = 0.0;
  double angle_end = 0.0;

  double width() const;
  bool contains(double angle) const;
  double center() const;
};

/// Four-armed roundabout described by three concentric circles and the
/// angular sectors of its arms. Stands in for a full HD map: entry/exit
/// classification only needs where the arms meet the gate circle.
struct RoundaboutGeometry {
  Eigen::Vector2d center{0.0, 0.0};
  double outer_radius = 0.0;
  double inner_radius = 0.0;
  double gate_radius = 0.0;
  std::array<PortSector, 4> ports{};  // order A, B, C, D

  /// Throws std::invalid_argument on violated invariants: radii ordering,
  /// overlapping sectors, sectors exceeding the full circle.
  void validate() const;

  /// Port index 0..3 whose sector contains the angle, or -1.
  int port_at_angle(double angle) const;

  /// Angle of a point relative to the center.
  double angle_of(const Eigen::Vector2d& p) const;
  double radius_of(const Eigen::Vector2d& p) const;

  static RoundaboutGeometry load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
};

/// Geometry used throughout the test and synthetic-data tooling: 24 m outer,
/// 8 m island, 20 m gate circle, four 0.6 rad sectors at the compass points.
RoundaboutGeometry default_test_geometry();

}  // namespace scengen
