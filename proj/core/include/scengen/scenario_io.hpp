#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scengen/scenario.hpp"

namespace scengen {

/// One scenario as CSV: header `frame,x1,y1,x2,y2`, metadata in leading
/// comment lines (`# dt=`, `# condition=`, `# frame_origin=`). frame is the
/// zero-based step index. Values round-trip exactly.
void save_scenario_csv(const std::filesystem::path& path, const Scenario& scenario);
Scenario load_scenario_csv(const std::filesystem::path& path);

/// Writes scenarios as scenario_00000.csv ... under dir plus manifest.json
/// (count, files, conditions, dt, generator seed when provided). Existing
/// files of the same names are overwritten.
void save_scenario_dir(const std::filesystem::path& dir,
                       const std::vector<Scenario>& scenarios,
                       const std::string& label = "",
                       std::uint64_t seed = 0, bool record_seed = false);

/// Loads every file listed in dir's manifest.json, in manifest order.
std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir);

}  // namespace scengen
