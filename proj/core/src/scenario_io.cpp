#include "scengen/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include "scengen/csv.hpp"

namespace scengen {
namespace {

std::string scenario_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scenario_%05d.csv", index);
  return buf;
}

}  // namespace

void save_scenario_csv(const std::filesystem::path& path, const Scenario& scenario) {
  scenario.validate();
  std::vector<std::string> comments{
      "# dt=" + format_double(scenario.dt),
      "# condition=" + std::to_string(scenario.condition_id),
      "# frame_origin=" + std::to_string(scenario.frame_origin)};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(scenario.steps()));
  for (int t = 0; t < scenario.steps(); ++t)
    rows.push_back({std::to_string(t), format_double(scenario.positions(t, 0)),
                    format_double(scenario.positions(t, 1)),
                    format_double(scenario.positions(t, 2)),
                    format_double(scenario.positions(t, 3))});
  write_csv(path, comments, {"frame", "x1", "y1", "x2", "y2"}, rows);
}

Scenario load_scenario_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::vector<std::string> expect{"frame", "x1", "y1", "x2", "y2"};
  if (table.header != expect)
    throw std::runtime_error("scenario csv: unexpected header in " + path.string());

  Scenario s;
  for (const auto& comment : table.comments) {
    const auto eq = comment.find('=');
    if (eq == std::string::npos) continue;
    std::string key = comment.substr(0, eq);
    while (!key.empty() && (key.front() == '#' || key.front() == ' '))
      key.erase(key.begin());
    const std::string value = comment.substr(eq + 1);
    if (key == "dt")
      s.dt = std::stod(value);
    else if (key == "condition")
      s.condition_id = std::stoi(value);
    else if (key == "frame_origin")
      s.frame_origin = std::stoi(value);
  }

  s.positions.resize(static_cast<Eigen::Index>(table.rows.size()), kScenarioFeatures);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    for (int c = 0; c < kScenarioFeatures; ++c)
      s.positions(static_cast<Eigen::Index>(i), c) = std::stod(r[static_cast<std::size_t>(c) + 1]);
  }
  s.validate();
  return s;
}

void save_scenario_dir(const std::filesystem::path& dir,
                       const std::vector<Scenario>& scenarios,
                       const std::string& label, std::uint64_t seed,
                       bool record_seed) {
  if (scenarios.empty())
    throw std::invalid_argument("scenario dir: nothing to write");
  std::filesystem::create_directories(dir);

  nlohmann::json files = nlohmann::json::array();
  nlohmann::json conds = nlohmann::json::array();
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const std::string name = scenario_filename(static_cast<int>(i));
    save_scenario_csv(dir / name, scenarios[i]);
    files.push_back(name);
    conds.push_back(scenarios[i].condition_id);
  }
  nlohmann::json manifest{{"count", scenarios.size()},
                          {"files", files},
                          {"conditions", conds},
                          {"dt", scenarios.front().dt}};
  if (!label.empty()) manifest["label"] = label;
  if (record_seed) manifest["seed"] = seed;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("scenario dir: cannot write manifest.json");
  out << manifest.dump(2) << '\n';
}

std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in)
    throw std::runtime_error("scenario dir: cannot open " +
                             (dir / "manifest.json").string());
  const nlohmann::json manifest = nlohmann::json::parse(in);
  std::vector<Scenario> out;
  for (const auto& name : manifest.at("files"))
    out.push_back(load_scenario_csv(dir / name.get<std::string>()));
  return out;
}

}  // namespace scengen
