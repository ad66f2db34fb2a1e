#include "scengen/artifact.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include "scengen/csv.hpp"
#include "scengen/rng.hpp"

namespace scengen {
namespace {

constexpr char kWeightsMagic[4] = {'S', 'G', 'W', 'T'};
constexpr std::uint32_t kWeightsVersion = 1;

nlohmann::json model_config_json(const ModelConfig& c) {
  return {{"latent_dim", c.latent_dim},
          {"attention_head_size", c.attention_head_size},
          {"feedforward_dim", c.feedforward_dim},
          {"attention_heads", c.attention_heads},
          {"condition_embedding_dim", c.condition_embedding_dim},
          {"conv_channels", c.conv_channels},
          {"conv_kernel", c.conv_kernel},
          {"recurrent_hidden", c.recurrent_hidden},
          {"transformer_blocks", c.transformer_blocks},
          {"positional_dim", c.positional_dim}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.latent_dim = j.at("latent_dim").get<int>();
  c.attention_head_size = j.at("attention_head_size").get<int>();
  c.feedforward_dim = j.at("feedforward_dim").get<int>();
  c.attention_heads = j.at("attention_heads").get<int>();
  c.condition_embedding_dim = j.at("condition_embedding_dim").get<int>();
  c.conv_channels = j.at("conv_channels").get<int>();
  c.conv_kernel = j.at("conv_kernel").get<int>();
  c.recurrent_hidden = j.at("recurrent_hidden").get<int>();
  c.transformer_blocks = j.at("transformer_blocks").get<int>();
  c.positional_dim = j.at("positional_dim").get<int>();
  return c;
}

nlohmann::json train_config_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"beta_start", c.beta_start},
          {"beta_end", c.beta_end},
          {"beta_warmup_epochs", c.beta_warmup_epochs},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.beta_start = j.at("beta_start").get<double>();
  c.beta_end = j.at("beta_end").get<double>();
  c.beta_warmup_epochs = j.at("beta_warmup_epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

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

ModelArtifact ModelArtifact::from_model(const TransformerCvae& model,
                                        const TrainConfig& train_config,
                                        const NormalizationStats& norm, int steps,
                                        double dt, std::vector<EpochStats> history,
                                        int best_epoch) {
  ModelArtifact a;
  a.model_config = model.config();
  a.train_config = train_config;
  a.norm = norm;
  a.vocabulary = model.vocabulary();
  a.steps = steps;
  a.dt = dt;
  a.history = std::move(history);
  a.best_epoch = best_epoch;
  for (const auto& p : model.parameters()) a.weights.emplace(p.name, p.value);
  return a;
}

TransformerCvae ModelArtifact::instantiate() const {
  TransformerCvae model(model_config, vocabulary, 0);
  std::size_t used = 0;
  for (auto& p : model.parameters()) {
    const auto it = weights.find(p.name);
    if (it == weights.end())
      throw std::runtime_error("artifact: missing weight " + p.name);
    if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols())
      throw std::runtime_error("artifact: shape mismatch for " + p.name);
    p.value = it->second;
    ++used;
  }
  if (used != weights.size())
    throw std::runtime_error("artifact: weight blob has unknown entries");
  return model;
}

void ModelArtifact::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);

  nlohmann::json cfg{
      {"model_config", model_config_json(model_config)},
      {"train_config", train_config_json(train_config)},
      {"normalization",
       {{"center_x", norm.center_offset.x()},
        {"center_y", norm.center_offset.y()},
        {"scale", norm.scale}}},
      {"vocabulary", vocabulary},
      {"steps", steps},
      {"dt", dt},
      {"best_epoch", best_epoch}};
  std::ofstream cfg_out(dir / "config.json");
  if (!cfg_out) throw std::runtime_error("artifact: cannot write config.json");
  cfg_out << cfg.dump(2) << '\n';

  std::ofstream wout(dir / "weights.bin", std::ios::binary);
  if (!wout) throw std::runtime_error("artifact: cannot write weights.bin");
  wout.write(kWeightsMagic, 4);
  write_u32(wout, kWeightsVersion);
  write_u32(wout, static_cast<std::uint32_t>(weights.size()));
  for (const auto& [name, value] : weights) {
    write_u32(wout, static_cast<std::uint32_t>(name.size()));
    wout.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(wout, static_cast<std::uint64_t>(value.rows()));
    write_u64(wout, static_cast<std::uint64_t>(value.cols()));
    for (Eigen::Index i = 0; i < value.rows(); ++i)
      for (Eigen::Index j = 0; j < value.cols(); ++j) {
        const double d = value(i, j);
        wout.write(reinterpret_cast<const char*>(&d), sizeof d);
      }
  }
  if (!wout) throw std::runtime_error("artifact: write failed for weights.bin");

  std::vector<std::vector<std::string>> hist_rows;
  for (const auto& e : history)
    hist_rows.push_back({std::to_string(e.epoch), format_double(e.beta),
                         format_double(e.train_recon), format_double(e.train_kl),
                         format_double(e.val_recon), format_double(e.val_kl)});
  write_csv(dir / "history.csv", {},
            {"epoch", "beta", "train_recon", "train_kl", "val_recon", "val_kl"},
            hist_rows);
}

ModelArtifact ModelArtifact::load(const std::filesystem::path& dir) {
  std::ifstream cfg_in(dir / "config.json");
  if (!cfg_in)
    throw std::runtime_error("artifact: cannot open " + (dir / "config.json").string());
  const nlohmann::json cfg = nlohmann::json::parse(cfg_in);

  ModelArtifact a;
  a.model_config = model_config_from_json(cfg.at("model_config"));
  a.train_config = train_config_from_json(cfg.at("train_config"));
  const auto& nm = cfg.at("normalization");
  a.norm.center_offset = {nm.at("center_x").get<double>(), nm.at("center_y").get<double>()};
  a.norm.scale = nm.at("scale").get<double>();
  a.vocabulary = cfg.at("vocabulary").get<std::vector<int>>();
  a.steps = cfg.at("steps").get<int>();
  a.dt = cfg.at("dt").get<double>();
  a.best_epoch = cfg.at("best_epoch").get<int>();

  std::ifstream win(dir / "weights.bin", std::ios::binary);
  if (!win)
    throw std::runtime_error("artifact: cannot open " + (dir / "weights.bin").string());
  char magic[4] = {};
  win.read(magic, 4);
  if (!win || std::memcmp(magic, kWeightsMagic, 4) != 0)
    throw std::runtime_error("artifact: bad weights magic");
  if (read_u32(win) != kWeightsVersion)
    throw std::runtime_error("artifact: unsupported weights version");
  const std::uint32_t count = read_u32(win);
  for (std::uint32_t w = 0; w < count; ++w) {
    const std::uint32_t name_len = read_u32(win);
    std::string name(name_len, '\0');
    win.read(name.data(), name_len);
    const auto rows = static_cast<Eigen::Index>(read_u64(win));
    const auto cols = static_cast<Eigen::Index>(read_u64(win));
    Eigen::MatrixXd value(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        double d = 0.0;
        win.read(reinterpret_cast<char*>(&d), sizeof d);
        value(i, j) = d;
      }
    if (!win) throw std::runtime_error("artifact: truncated weights.bin");
    a.weights.emplace(std::move(name), std::move(value));
  }

  const CsvTable hist = read_csv(dir / "history.csv");
  const std::vector<std::string> expect{"epoch",    "beta",      "train_recon",
                                        "train_kl", "val_recon", "val_kl"};
  if (hist.header != expect)
    throw std::runtime_error("artifact: unexpected history.csv header");
  for (const auto& row : hist.rows) {
    EpochStats e;
    e.epoch = std::stoi(row[0]);
    e.beta = std::stod(row[1]);
    e.train_recon = std::stod(row[2]);
    e.train_kl = std::stod(row[3]);
    e.val_recon = std::stod(row[4]);
    e.val_kl = std::stod(row[5]);
    a.history.push_back(e);
  }
  return a;
}

std::vector<Scenario> generate_scenarios(TransformerCvae& model,
                                         const NormalizationStats& norm,
                                         int category_id, int count,
                                         std::uint64_t seed, int steps, double dt) {
  if (count <= 0) throw std::invalid_argument("generate: count must be positive");
  model.vocabulary_row(category_id);  // unknown category throws here

  const int latent = model.config().latent_dim;
  Rng rng(seed);
  Eigen::MatrixXd z(count, latent);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < latent; ++j) z(i, j) = rng.normal();

  // Chunking bounds tape memory; the draws above fix the result.
  constexpr int kChunk = 32;
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int start = 0; start < count; start += kChunk) {
    const int n = std::min(kChunk, count - start);
    const std::vector<int> cats(static_cast<std::size_t>(n), category_id);
    const Eigen::MatrixXd block = model.decode(z.middleRows(start, n), cats, steps);
    for (int i = 0; i < n; ++i) {
      Scenario s;
      s.positions = invert_normalization(block.middleRows(i * steps, steps), norm);
      s.condition_id = category_id;
      s.frame_origin = 0;
      s.dt = dt;
      out.push_back(std::move(s));
    }
  }
  return out;
}

Scenario reconstruct_scenario(TransformerCvae& model, const NormalizationStats& norm,
                              const Scenario& scenario) {
  scenario.validate();
  const Eigen::MatrixXd x = apply_normalization(scenario.positions, norm);
  const std::vector<int> cats{scenario.condition_id};
  const auto post = model.encode(x, cats);
  const Eigen::MatrixXd y = model.decode(post.mu, cats, scenario.steps());
  Scenario out = scenario;
  out.positions = invert_normalization(y, norm);
  return out;
}

}  // namespace scengen
