#include "scengen/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace scengen {
namespace {

constexpr char kMagic[4] = {'S', 'G', 'D', 'S'};

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

Eigen::Block<const Eigen::MatrixXd> Dataset::scenario_block(int i) const {
  if (i < 0 || i >= count()) throw std::out_of_range("dataset: scenario index");
  return tensor.block(static_cast<Eigen::Index>(i) * steps, 0, steps, kScenarioFeatures);
}

Scenario Dataset::scenario(int i) const {
  Scenario s;
  s.positions = scenario_block(i);
  s.condition_id = conditions[static_cast<std::size_t>(i)];
  s.frame_origin = frame_origins[static_cast<std::size_t>(i)];
  s.dt = dt;
  return s;
}

std::vector<int> Dataset::category_ids() const {
  std::set<int> ids(conditions.begin(), conditions.end());
  return {ids.begin(), ids.end()};
}

void Dataset::save(const std::filesystem::path& file) const {
  const int n = count();
  if (tensor.rows() != static_cast<Eigen::Index>(n) * steps ||
      tensor.cols() != kScenarioFeatures)
    throw std::invalid_argument("dataset: tensor shape inconsistent with count");
  if (frame_origins.size() != conditions.size() || sources.size() != conditions.size())
    throw std::invalid_argument("dataset: per-scenario vectors disagree in length");

  nlohmann::json src = nlohmann::json::array();
  for (const auto& s : sources)
    src.push_back({{"recording_id", s.recording_id},
                   {"track1_id", s.track1_id},
                   {"track2_id", s.track2_id}});
  nlohmann::json header{
      {"schema_version", kSchemaVersion},
      {"n", n},
      {"steps", steps},
      {"feat", kScenarioFeatures},
      {"dt", dt},
      {"conditions", conditions},
      {"frame_origins", frame_origins},
      {"sources", src},
      {"recording_ids", recording_ids},
      {"split",
       {{"train", split.train},
        {"validation", split.validation},
        {"test", split.test},
        {"seed", split.seed}}},
      {"normalization",
       {{"center_x", norm.center_offset.x()},
        {"center_y", norm.center_offset.y()},
        {"scale", norm.scale}}},
      {"params",
       {{"min_track_frames", params.min_track_frames},
        {"min_overlap_frames", params.min_overlap_frames},
        {"window_frames", params.window_frames},
        {"downsample_factor", params.downsample_factor},
        {"min_category_count", params.min_category_count},
        {"frame_rate", params.frame_rate}}}};
  const std::string head = header.dump();

  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("dataset: cannot open " + file.string() + " for write");
  out.write(kMagic, 4);
  write_u32(out, static_cast<std::uint32_t>(kSchemaVersion));
  write_u64(out, head.size());
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  // Row-by-row keeps the on-disk order sample-major regardless of Eigen's
  // internal (column-major) storage.
  std::vector<double> row(kScenarioFeatures);
  for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
    for (int c = 0; c < kScenarioFeatures; ++c) row[static_cast<std::size_t>(c)] = tensor(r, c);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("dataset: write failed for " + file.string());
}

Dataset Dataset::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("dataset: cannot open " + file.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("dataset: bad magic in " + file.string());
  const std::uint32_t version = read_u32(in);
  if (version != static_cast<std::uint32_t>(kSchemaVersion))
    throw std::runtime_error("dataset: unsupported schema version " + std::to_string(version));
  const std::uint64_t head_len = read_u64(in);
  std::string head(head_len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!in) throw std::runtime_error("dataset: truncated header in " + file.string());
  const nlohmann::json header = nlohmann::json::parse(head);

  Dataset ds;
  const int n = header.at("n").get<int>();
  ds.steps = header.at("steps").get<int>();
  const int feat = header.at("feat").get<int>();
  if (feat != kScenarioFeatures)
    throw std::runtime_error("dataset: unexpected feature count " + std::to_string(feat));
  ds.dt = header.at("dt").get<double>();
  ds.conditions = header.at("conditions").get<std::vector<int>>();
  ds.frame_origins = header.at("frame_origins").get<std::vector<int>>();
  for (const auto& s : header.at("sources"))
    ds.sources.push_back({s.at("recording_id").get<int>(), s.at("track1_id").get<int>(),
                          s.at("track2_id").get<int>()});
  ds.recording_ids = header.at("recording_ids").get<std::vector<int>>();
  const auto& sp = header.at("split");
  ds.split.train = sp.at("train").get<std::vector<int>>();
  ds.split.validation = sp.at("validation").get<std::vector<int>>();
  ds.split.test = sp.at("test").get<std::vector<int>>();
  ds.split.seed = sp.at("seed").get<std::uint64_t>();
  const auto& nm = header.at("normalization");
  ds.norm.center_offset = {nm.at("center_x").get<double>(), nm.at("center_y").get<double>()};
  ds.norm.scale = nm.at("scale").get<double>();
  const auto& pr = header.at("params");
  ds.params.min_track_frames = pr.at("min_track_frames").get<int>();
  ds.params.min_overlap_frames = pr.at("min_overlap_frames").get<int>();
  ds.params.window_frames = pr.at("window_frames").get<int>();
  ds.params.downsample_factor = pr.at("downsample_factor").get<int>();
  ds.params.min_category_count = pr.at("min_category_count").get<int>();
  ds.params.frame_rate = pr.at("frame_rate").get<double>();

  if (static_cast<int>(ds.conditions.size()) != n ||
      static_cast<int>(ds.frame_origins.size()) != n ||
      static_cast<int>(ds.sources.size()) != n)
    throw std::runtime_error("dataset: header counts disagree");

  ds.tensor.resize(static_cast<Eigen::Index>(n) * ds.steps, kScenarioFeatures);
  std::vector<double> row(kScenarioFeatures);
  for (Eigen::Index r = 0; r < ds.tensor.rows(); ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw std::runtime_error("dataset: truncated tensor in " + file.string());
    for (int c = 0; c < kScenarioFeatures; ++c) ds.tensor(r, c) = row[static_cast<std::size_t>(c)];
  }
  return ds;
}

Dataset build_dataset(const std::vector<std::vector<Track>>& recordings,
                      const RoundaboutGeometry& geom, const ExtractionParams& params,
                      std::uint64_t split_seed, ExtractionReport* report) {
  ExtractionReport rep;
  struct Labeled {
    Scenario scenario;
    ScenarioSource source;
  };
  std::vector<Labeled> kept;

  for (const auto& recording : recordings) {
    rep.tracks_total += static_cast<int>(recording.size());
    std::vector<Track> tracks = filter_short_tracks(recording, params.min_track_frames);
    rep.tracks_after_short_filter += static_cast<int>(tracks.size());

    std::vector<Track> routed;
    std::vector<Route> routes;
    for (const auto& t : tracks) {
      const auto c = classify_route(t, geom);
      if (c.route) {
        routed.push_back(t);
        routes.push_back(*c.route);
      } else {
        ++rep.route_rejections;
      }
    }
    rep.tracks_with_route += static_cast<int>(routed.size());

    const auto pairs = pair_tracks(routed, params.min_overlap_frames);
    rep.pairs_overlapping += static_cast<int>(pairs.size());
    for (const auto& [ia, ib] : pairs) {
      std::string reason;
      auto s = build_scenario(routed[static_cast<std::size_t>(ia)],
                              routed[static_cast<std::size_t>(ib)],
                              routes[static_cast<std::size_t>(ia)],
                              routes[static_cast<std::size_t>(ib)], params.window_frames,
                              params.frame_rate, &reason);
      if (!s) {
        ++rep.window_rejections;
        continue;
      }
      ++rep.windows_built;
      Scenario down = downsample(*s, params.downsample_factor);
      const auto& a = routed[static_cast<std::size_t>(ia)];
      const auto& b = routed[static_cast<std::size_t>(ib)];
      const int lo = std::min(a.track_id, b.track_id);
      const int hi = std::max(a.track_id, b.track_id);
      kept.push_back({std::move(down), {a.recording_id, lo, hi}});
    }
  }

  {
    std::map<int, int> counts;
    for (const auto& k : kept) ++counts[k.scenario.condition_id];
    std::erase_if(kept, [&](const Labeled& k) {
      return counts.at(k.scenario.condition_id) < params.min_category_count;
    });
  }
  rep.scenarios_after_category_filter = static_cast<int>(kept.size());
  if (kept.empty()) throw std::runtime_error("extraction produced no scenarios");
  {
    std::set<int> cats;
    for (const auto& k : kept) cats.insert(k.scenario.condition_id);
    rep.categories_final = static_cast<int>(cats.size());
  }

  Dataset ds;
  ds.steps = static_cast<int>(kept.front().scenario.positions.rows());
  ds.dt = kept.front().scenario.dt;
  ds.params = params;
  ds.tensor.resize(static_cast<Eigen::Index>(kept.size()) * ds.steps, kScenarioFeatures);
  std::set<int> rec_ids;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    ds.tensor.block(static_cast<Eigen::Index>(i) * ds.steps, 0, ds.steps, kScenarioFeatures) =
        kept[i].scenario.positions;
    ds.conditions.push_back(kept[i].scenario.condition_id);
    ds.frame_origins.push_back(kept[i].scenario.frame_origin);
    ds.sources.push_back(kept[i].source);
    rec_ids.insert(kept[i].source.recording_id);
  }
  ds.recording_ids = {rec_ids.begin(), rec_ids.end()};

  ds.split = split_dataset(static_cast<int>(kept.size()), split_seed);

  std::vector<Scenario> train;
  train.reserve(ds.split.train.size());
  for (int i : ds.split.train) train.push_back(ds.scenario(i));
  ds.norm = fit_normalization(train, geom.center);

  if (report) *report = rep;
  return ds;
}

}  // namespace scengen
