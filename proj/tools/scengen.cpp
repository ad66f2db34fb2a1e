// Command-line front end for the scenario pipeline: synthetic recordings,
// extraction, training, conditional generation, KPI evaluation and latent
// traversal. Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "scengen/analysis.hpp"
#include "scengen/csv.hpp"
#include "scengen/artifact.hpp"
#include "scengen/dataset.hpp"
#include "scengen/extraction.hpp"
#include "scengen/geometry.hpp"
#include "scengen/kpi.hpp"
#include "scengen/model.hpp"
#include "scengen/routes.hpp"
#include "scengen/scenario_io.hpp"
#include "scengen/synthetic.hpp"
#include "scengen/tracks.hpp"
#include "scengen/train.hpp"

namespace fs = std::filesystem;
using scengen::Dataset;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr const char* kDataRootEnv = "SCENGEN_DATA_ROOT";

/// Raised for bad user input (config, arguments, missing files): exit 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  fs::path data_root = "data";
  fs::path artifact_dir = "artifact";
  fs::path report_dir = "report";
  fs::path geometry_file = "geometry.json";
  fs::path dataset_file = "dataset.sgds";
  scengen::ExtractionParams extraction;
  scengen::ModelConfig model;
  scengen::TrainConfig train;
  std::uint64_t seed = 0;
  bool verbose = false;
};

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void maybe_path(const nlohmann::json& j, const char* key, fs::path& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

RunConfig load_config(const std::string& config_path) {
  RunConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ValidationError("cannot open config file " + config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config parse error: " + std::string(e.what()));
    }
    maybe_path(j, "data_root", cfg.data_root);
    maybe_path(j, "artifact_dir", cfg.artifact_dir);
    maybe_path(j, "report_dir", cfg.report_dir);
    maybe_path(j, "geometry", cfg.geometry_file);
    maybe_path(j, "dataset", cfg.dataset_file);
    maybe(j, "seed", cfg.seed);
    if (j.contains("extraction")) {
      const auto& e = j.at("extraction");
      maybe(e, "min_track_frames", cfg.extraction.min_track_frames);
      maybe(e, "min_overlap_frames", cfg.extraction.min_overlap_frames);
      maybe(e, "window_frames", cfg.extraction.window_frames);
      maybe(e, "downsample_factor", cfg.extraction.downsample_factor);
      maybe(e, "min_category_count", cfg.extraction.min_category_count);
      maybe(e, "frame_rate", cfg.extraction.frame_rate);
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      maybe(m, "latent_dim", cfg.model.latent_dim);
      maybe(m, "attention_head_size", cfg.model.attention_head_size);
      maybe(m, "feedforward_dim", cfg.model.feedforward_dim);
      maybe(m, "attention_heads", cfg.model.attention_heads);
      maybe(m, "condition_embedding_dim", cfg.model.condition_embedding_dim);
      maybe(m, "conv_channels", cfg.model.conv_channels);
      maybe(m, "conv_kernel", cfg.model.conv_kernel);
      maybe(m, "recurrent_hidden", cfg.model.recurrent_hidden);
      maybe(m, "transformer_blocks", cfg.model.transformer_blocks);
      maybe(m, "positional_dim", cfg.model.positional_dim);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      maybe(t, "epochs", cfg.train.epochs);
      maybe(t, "batch_size", cfg.train.batch_size);
      maybe(t, "learning_rate", cfg.train.learning_rate);
      maybe(t, "beta_start", cfg.train.beta_start);
      maybe(t, "beta_end", cfg.train.beta_end);
      maybe(t, "beta_warmup_epochs", cfg.train.beta_warmup_epochs);
      maybe(t, "seed", cfg.train.seed);
    }
  }
  if (const char* env = std::getenv(kDataRootEnv); env && *env) cfg.data_root = env;
  return cfg;
}

scengen::RoundaboutGeometry load_geometry_checked(const RunConfig& cfg) {
  if (!fs::exists(cfg.geometry_file))
    throw ValidationError("geometry config not found: " + cfg.geometry_file.string());
  auto geom = scengen::RoundaboutGeometry::load(cfg.geometry_file);
  geom.validate();
  return geom;
}

/// Exclusive-create lock file, removed on destruction. Guards an artifact
/// directory against concurrent writers.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    if (fs::exists(path_))
      throw ValidationError("directory is locked by another run: " + path_.string() +
                            " (remove the file if that run is dead)");
    std::ofstream out(path_);
    out << "pid=" << ::getpid() << '\n';
    if (!out) throw std::runtime_error("cannot create lock file " + path_.string());
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

char port_letter(scengen::Port p) { return static_cast<char>('A' + static_cast<int>(p)); }

int cmd_synth(const RunConfig& cfg, int recordings, int vehicles) {
  if (recordings <= 0 || vehicles <= 0)
    throw ValidationError("synth: --recordings and --vehicles must be positive");
  const auto geom = fs::exists(cfg.geometry_file)
                        ? scengen::RoundaboutGeometry::load(cfg.geometry_file)
                        : scengen::default_test_geometry();
  geom.validate();
  fs::create_directories(cfg.data_root);
  if (!fs::exists(cfg.geometry_file)) geom.save(cfg.geometry_file);

  for (int r = 0; r < recordings; ++r) {
    const auto rec = scengen::generate_synthetic_recording(
        geom, vehicles, cfg.seed + static_cast<std::uint64_t>(r), {}, r);
    char name[64];
    std::snprintf(name, sizeof name, "recording_%02d_tracks.csv", r);
    scengen::write_tracks_csv(cfg.data_root / name, rec.tracks);

    std::snprintf(name, sizeof name, "recording_%02d_routes.csv", r);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < rec.tracks.size(); ++i) {
      const auto& route = rec.routes[i];
      rows.push_back({std::to_string(rec.tracks[i].track_id),
                      std::string(1, port_letter(route.entry)),
                      std::string(1, port_letter(route.exit)),
                      std::to_string(scengen::route_id(route))});
    }
    scengen::write_csv(cfg.data_root / name, {},
                       {"trackId", "entry", "exit", "routeId"}, rows);
    if (cfg.verbose)
      std::cout << "recording " << r << ": " << rec.tracks.size() << " tracks\n";
  }
  std::cout << "wrote " << recordings << " recording(s) to " << cfg.data_root.string()
            << '\n';
  return kExitOk;
}

int cmd_extract(const RunConfig& cfg) {
  const auto geom = load_geometry_checked(cfg);
  if (!fs::exists(cfg.data_root))
    throw ValidationError("data root not found: " + cfg.data_root.string());

  const std::regex pattern("recording_([0-9]+)_tracks\\.csv");
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(cfg.data_root)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files.emplace_back(std::stoi(m[1]), entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw ValidationError("no recording_*_tracks.csv files under " +
                          cfg.data_root.string());

  std::vector<std::vector<scengen::Track>> recordings;
  int malformed = 0;
  for (const auto& [rec_id, path] : files) {
    auto loaded = scengen::load_tracks(path, rec_id);
    malformed += static_cast<int>(loaded.rejected.size());
    if (cfg.verbose)
      for (const auto& rej : loaded.rejected)
        std::cerr << path.filename().string() << ": track " << rej.track_id
                  << " rejected: " << rej.reason << '\n';
    recordings.push_back(std::move(loaded.tracks));
  }

  scengen::ExtractionReport report;
  Dataset ds = scengen::build_dataset(recordings, geom, cfg.extraction, cfg.seed, &report);
  report.tracks_malformed = malformed;
  if (cfg.dataset_file.has_parent_path())
    fs::create_directories(cfg.dataset_file.parent_path());
  ds.save(cfg.dataset_file);

  const fs::path report_path = cfg.dataset_file.string() + ".report.json";
  std::ofstream rep(report_path);
  rep << report.to_json() << '\n';

  std::cout << "tracks: " << report.tracks_total << " total, " << malformed
            << " malformed, " << report.tracks_after_short_filter
            << " after length filter, " << report.tracks_with_route << " with route\n"
            << "pairs: " << report.pairs_overlapping << " overlapping, "
            << report.windows_built << " windows built, " << report.window_rejections
            << " window-rejected\n"
            << "scenarios: " << report.scenarios_after_category_filter << " kept in "
            << report.categories_final << " categories (split "
            << ds.split.train.size() << "/" << ds.split.validation.size() << "/"
            << ds.split.test.size() << ")\n"
            << "dataset: " << cfg.dataset_file.string() << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, bool resume) {
  if (!fs::exists(cfg.dataset_file))
    throw ValidationError("dataset not found: " + cfg.dataset_file.string() +
                          " (run extract first)");
  cfg.model.validate();
  cfg.train.validate();
  Dataset ds = Dataset::load(cfg.dataset_file);

  DirLock lock(cfg.artifact_dir);
  std::optional<scengen::TransformerCvae> model;
  std::vector<scengen::EpochStats> history;
  if (resume) {
    auto prior = scengen::ModelArtifact::load(cfg.artifact_dir);
    model.emplace(prior.instantiate());
    history = std::move(prior.history);
    if (static_cast<int>(history.size()) >= cfg.train.epochs) {
      std::cout << "nothing to do: history already has " << history.size()
                << " epochs\n";
      return kExitOk;
    }
  } else {
    model.emplace(cfg.model, ds.category_ids(), cfg.train.seed);
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto result = scengen::train_model(
      *model, ds, cfg.train, std::move(history), [&](const scengen::EpochStats& e) {
        if (cfg.verbose)
          std::cout << "epoch " << e.epoch << " beta " << e.beta << " train "
                    << e.train_recon << "/" << e.train_kl << " val " << e.val_recon
                    << "/" << e.val_kl << '\n';
      });
  const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);

  auto artifact = scengen::ModelArtifact::from_model(*model, cfg.train, ds.norm,
                                                     ds.steps, ds.dt, result.history,
                                                     result.best_epoch);
  artifact.save(cfg.artifact_dir);
  std::cout << "trained " << result.history.size() << " epochs in " << secs.count()
            << " s; best epoch " << result.best_epoch << " (val total "
            << result.best_val_total << "); artifact: " << cfg.artifact_dir.string()
            << '\n';
  return kExitOk;
}

int cmd_generate(const RunConfig& cfg, int condition, int count,
                 const std::string& out_dir) {
  if (count <= 0) throw ValidationError("generate: --count must be positive");
  auto artifact = scengen::ModelArtifact::load(cfg.artifact_dir);
  auto model = artifact.instantiate();
  try {
    model.vocabulary_row(condition);
  } catch (const std::out_of_range& e) {
    throw ValidationError(e.what());
  }
  const fs::path dir = out_dir.empty() ? cfg.report_dir / "generated" : fs::path(out_dir);
  auto scenarios = scengen::generate_scenarios(model, artifact.norm, condition, count,
                                               cfg.seed, artifact.steps, artifact.dt);
  scengen::save_scenario_dir(dir, scenarios, "generated", cfg.seed, true);
  std::cout << "wrote " << scenarios.size() << " scenario(s) to " << dir.string()
            << '\n';
  return kExitOk;
}

std::vector<scengen::KpiRow> kpi_rows_for(const std::vector<scengen::Scenario>& set,
                                          const scengen::RoundaboutGeometry& geom,
                                          const std::string& prefix) {
  std::vector<scengen::KpiRow> rows;
  rows.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    scengen::KpiRow row;
    row.scenario_id = prefix + std::to_string(i);
    row.condition = set[i].condition_id;
    row.result = scengen::evaluate_kpis(set[i], geom);
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& set_a_dir,
                 const std::string& set_b_dir, bool paired, bool reconstruct,
                 double pet_bin_width) {
  const auto geom = load_geometry_checked(cfg);
  if (reconstruct && !set_b_dir.empty())
    throw ValidationError("evaluate: --reconstruct derives set B; drop --set-b");
  if (!reconstruct && set_b_dir.empty())
    throw ValidationError("evaluate: need --set-b or --reconstruct");

  const auto set_a = scengen::load_scenario_dir(set_a_dir);
  std::vector<scengen::Scenario> set_b;
  if (reconstruct) {
    auto artifact = scengen::ModelArtifact::load(cfg.artifact_dir);
    auto model = artifact.instantiate();
    set_b.reserve(set_a.size());
    for (const auto& s : set_a)
      set_b.push_back(scengen::reconstruct_scenario(model, artifact.norm, s));
    paired = true;
  } else {
    set_b = scengen::load_scenario_dir(set_b_dir);
  }

  std::optional<scengen::RmseReport> rmse;
  if (paired) {
    if (set_a.size() != set_b.size())
      throw ValidationError("evaluate: paired sets differ in size (" +
                            std::to_string(set_a.size()) + " vs " +
                            std::to_string(set_b.size()) + ")");
    rmse = scengen::rmse_report(set_a, set_b);
  }

  const auto rows_a = kpi_rows_for(set_a, geom, "a");
  const auto rows_b = kpi_rows_for(set_b, geom, "b");
  const auto comparison = scengen::kpi_distribution_compare(rows_a, rows_b, pet_bin_width);

  fs::create_directories(cfg.report_dir);
  scengen::write_kpi_csv(cfg.report_dir / "kpi_a.csv", rows_a);
  scengen::write_kpi_csv(cfg.report_dir / "kpi_b.csv", rows_b);
  scengen::write_report_bundle(cfg.report_dir, rmse, comparison);

  if (rmse)
    std::cout << "rmse longitudinal total " << rmse->longitudinal_total
              << " m, lateral total " << rmse->lateral_total << " m\n";
  std::cout << "kpi rows: " << rows_a.size() << " + " << rows_b.size()
            << "; report bundle: " << cfg.report_dir.string() << '\n';
  return kExitOk;
}

int cmd_traverse(const RunConfig& cfg, int condition, std::vector<int> dims) {
  auto artifact = scengen::ModelArtifact::load(cfg.artifact_dir);
  auto model = artifact.instantiate();
  try {
    model.vocabulary_row(condition);
  } catch (const std::out_of_range& e) {
    throw ValidationError(e.what());
  }
  if (dims.empty())
    for (int d = 0; d < model.config().latent_dim; ++d) dims.push_back(d);
  for (int d : dims)
    if (d < 0 || d >= model.config().latent_dim)
      throw ValidationError("traverse: dimension " + std::to_string(d) +
                            " out of range [0, " +
                            std::to_string(model.config().latent_dim) + ")");
  const auto geom = load_geometry_checked(cfg);

  fs::create_directories(cfg.report_dir);
  for (int d : dims) {
    const auto grid = scengen::latent_traversal(model, artifact.norm, geom, condition,
                                                d, artifact.steps, artifact.dt);
    scengen::write_traversal_csv(
        cfg.report_dir / ("traversal_dim" + std::to_string(d) + ".csv"), grid);
  }
  std::cout << "wrote " << dims.size() << " traversal grid(s) to "
            << cfg.report_dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-vehicle roundabout scenario pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed_override, "Override the config seed");
  app.add_flag("--verbose", verbose, "Per-stage progress output");

  auto* synth = app.add_subcommand("synth", "Write synthetic recordings");
  int synth_recordings = 1, synth_vehicles = 20;
  synth->add_option("--recordings", synth_recordings, "Number of recordings");
  synth->add_option("--vehicles", synth_vehicles, "Vehicles per recording");

  auto* extract = app.add_subcommand("extract", "Build the scenario dataset");

  auto* train = app.add_subcommand("train", "Train the generator");
  bool resume = false;
  train->add_flag("--resume", resume, "Continue from the saved artifact");

  auto* generate = app.add_subcommand("generate", "Sample scenarios for a condition");
  int gen_condition = 0, gen_count = 1;
  std::string gen_out;
  generate->add_option("--condition", gen_condition, "Condition category id")
      ->required();
  generate->add_option("--count", gen_count, "Number of scenarios");
  generate->add_option("--out", gen_out, "Output directory");

  auto* evaluate = app.add_subcommand("evaluate", "KPIs and comparison reports");
  std::string eval_a, eval_b;
  bool eval_paired = false, eval_reconstruct = false;
  double pet_bin_width = 0.5;
  evaluate->add_option("--set-a", eval_a, "Scenario directory A (originals)")
      ->required();
  evaluate->add_option("--set-b", eval_b, "Scenario directory B");
  evaluate->add_flag("--paired", eval_paired, "Sets are index-matched; compute RMSE");
  evaluate->add_flag("--reconstruct", eval_reconstruct,
                     "Build set B by reconstructing set A with the artifact");
  evaluate->add_option("--pet-bin-width", pet_bin_width, "PET histogram bin width, s");

  auto* traverse = app.add_subcommand("traverse", "Latent traversal grids");
  int trav_condition = 0;
  std::vector<int> trav_dims;
  traverse->add_option("--condition", trav_condition, "Condition category id")
      ->required();
  traverse->add_option("--dims", trav_dims, "Latent dimensions (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (seed_override) {
      cfg.seed = *seed_override;
      cfg.train.seed = *seed_override;
    }
    cfg.verbose = verbose;

    if (*synth) return cmd_synth(cfg, synth_recordings, synth_vehicles);
    if (*extract) return cmd_extract(cfg);
    if (*train) return cmd_train(cfg, resume);
    if (*generate) return cmd_generate(cfg, gen_condition, gen_count, gen_out);
    if (*evaluate)
      return cmd_evaluate(cfg, eval_a, eval_b, eval_paired, eval_reconstruct,
                          pet_bin_width);
    if (*traverse) return cmd_traverse(cfg, trav_condition, trav_dims);
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kExitRuntime;
  }
}
