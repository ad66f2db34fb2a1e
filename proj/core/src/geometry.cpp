#include "scengen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace scengen {

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

double angle_diff(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d > kPi) d -= kTwoPi;
  if (d <= -kPi) d += kTwoPi;
  return d;
}

double PortSector::width() const { return wrap_angle(angle_end - angle_start); }

bool PortSector::contains(double angle) const {
  return wrap_angle(angle - angle_start) <= width();
}

double PortSector::center() const {
  return wrap_angle(angle_start + 0.5 * width());
}

void RoundaboutGeometry::validate() const {
  if (!(inner_radius > 0.0) || !(outer_radius > inner_radius)) {
    throw std::invalid_argument("geometry: need 0 < inner_radius < outer_radius");
  }
  if (!(gate_radius > inner_radius)) {
    throw std::invalid_argument("geometry: need inner_radius < gate_radius");
  }
  double total_width = 0.0;
  std::vector<std::pair<double, double>> spans;  // (start, width)
  for (const auto& p : ports) {
    const double w = p.width();
    if (w <= 0.0) {
      throw std::invalid_argument("geometry: port sector has nonpositive width");
    }
    total_width += w;
    spans.emplace_back(wrap_angle(p.angle_start), w);
  }
  if (total_width > kTwoPi + 1e-12) {
    throw std::invalid_argument("geometry: port sectors exceed the full circle");
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& [start, width] = spans[i];
    const auto& [next_start, next_width] = spans[(i + 1) % spans.size()];
    const double gap = (i + 1 < spans.size()) ? next_start - start
                                              : next_start + kTwoPi - start;
    (void)next_width;
    if (gap < width - 1e-12) {
      throw std::invalid_argument("geometry: port sectors overlap");
    }
  }
}

int RoundaboutGeometry::port_at_angle(double angle) const {
  for (int i = 0; i < 4; ++i) {
    if (ports[static_cast<std::size_t>(i)].contains(angle)) return i;
  }
  return -1;
}

double RoundaboutGeometry::angle_of(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d d = p - center;
  return wrap_angle(std::atan2(d.y(), d.x()));
}

double RoundaboutGeometry::radius_of(const Eigen::Vector2d& p) const {
  return (p - center).norm();
}

RoundaboutGeometry RoundaboutGeometry::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("geometry: cannot open '" + file.string() + "'");
  }
  nlohmann::json j;
  in >> j;
  RoundaboutGeometry g;
  g.center = {j.at("center_x").get<double>(), j.at("center_y").get<double>()};
  g.outer_radius = j.at("outer_radius").get<double>();
  g.inner_radius = j.at("inner_radius").get<double>();
  g.gate_radius = j.at("gate_radius").get<double>();
  const char* keys[4] = {"port_A", "port_B", "port_C", "port_D"};
  for (int i = 0; i < 4; ++i) {
    const auto& arr = j.at(keys[i]);
    if (!arr.is_array() || arr.size() != 2) {
      throw std::runtime_error(std::string("geometry: ") + keys[i] +
                               " must be [angle_start, angle_end]");
    }
    g.ports[static_cast<std::size_t>(i)] = {arr[0].get<double>(), arr[1].get<double>()};
  }
  g.validate();
  return g;
}

void RoundaboutGeometry::save(const std::filesystem::path& file) const {
  nlohmann::json j;
  j["center_x"] = center.x();
  j["center_y"] = center.y();
  j["outer_radius"] = outer_radius;
  j["inner_radius"] = inner_radius;
  j["gate_radius"] = gate_radius;
  const char* keys[4] = {"port_A", "port_B", "port_C", "port_D"};
  for (int i = 0; i < 4; ++i) {
    const auto& p = ports[static_cast<std::size_t>(i)];
    j[keys[i]] = {p.angle_start, p.angle_end};
  }
  std::ofstream out(file);
  if (!out) {
    throw std::runtime_error("geometry: cannot write '" + file.string() + "'");
  }
  out << j.dump(2) << '\n';
}

RoundaboutGeometry default_test_geometry() {
  RoundaboutGeometry g;
  g.center = {0.0, 0.0};
  g.outer_radius = 24.0;
  g.inner_radius = 8.0;
  g.gate_radius = 20.0;
  const double half = 0.3;
  const double centers[4] = {0.0, 0.5 * kPi, kPi, 1.5 * kPi};
  for (int i = 0; i < 4; ++i) {
    g.ports[static_cast<std::size_t>(i)] = {wrap_angle(centers[i] - half),
                                            wrap_angle(centers[i] + half)};
  }
  return g;
}

}  // namespace scengen
