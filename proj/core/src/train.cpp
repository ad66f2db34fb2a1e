#include "scengen/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "scengen/normalization.hpp"
#include "scengen/rng.hpp"

namespace scengen {

void TrainConfig::validate() const {
  if (epochs <= 0) throw std::invalid_argument("train config: epochs must be positive");
  if (batch_size <= 0)
    throw std::invalid_argument("train config: batch_size must be positive");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("train config: learning_rate must be positive");
  if (!(beta_start > 0.0) || beta_start > beta_end)
    throw std::invalid_argument("train config: need 0 < beta_start <= beta_end");
  if (beta_warmup_epochs < 0 || beta_warmup_epochs > epochs)
    throw std::invalid_argument("train config: warmup must lie within epochs");
}

double beta_at(int epoch, const TrainConfig& config) {
  if (epoch < 0) throw std::invalid_argument("beta_at: negative epoch");
  if (config.beta_warmup_epochs == 0) return config.beta_end;
  const double frac =
      std::min(static_cast<double>(epoch) / config.beta_warmup_epochs, 1.0);
  return config.beta_start + (config.beta_end - config.beta_start) * frac;
}

double recon_loss(const Eigen::MatrixXd& target, const Eigen::MatrixXd& output) {
  if (target.rows() != output.rows() || target.cols() != output.cols())
    throw std::invalid_argument("recon_loss: shape mismatch");
  return (target - output).array().square().mean();
}

double kl_loss(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& log_var) {
  if (mu.rows() != log_var.rows() || mu.cols() != log_var.cols())
    throw std::invalid_argument("kl_loss: shape mismatch");
  const auto var = log_var.array().exp();
  const double per_batch =
      0.5 * (mu.array().square() + var - log_var.array() - 1.0).sum();
  return per_batch / static_cast<double>(mu.rows());
}

double total_loss(const Eigen::MatrixXd& target, const Eigen::MatrixXd& output,
                  const Eigen::MatrixXd& mu, const Eigen::MatrixXd& log_var,
                  double beta) {
  return recon_loss(target, output) + beta * kl_loss(mu, log_var);
}

Eigen::MatrixXd reparameterize(const Eigen::MatrixXd& mu,
                               const Eigen::MatrixXd& log_var,
                               const Eigen::MatrixXd& noise) {
  if (mu.rows() != log_var.rows() || mu.cols() != log_var.cols() ||
      mu.rows() != noise.rows() || mu.cols() != noise.cols())
    throw std::invalid_argument("reparameterize: shape mismatch");
  return mu.array() + (0.5 * log_var.array()).exp() * noise.array();
}

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2,
                             double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(std::deque<ad::Parameter>& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
      v_.emplace_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
    }
  }
  if (m_.size() != params.size())
    throw std::logic_error("optimizer: parameter list changed size");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t i = 0;
  for (auto& p : params) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = (beta2_ * v_[i].array() + (1.0 - beta2_) * p.grad.array().square()).matrix();
    const auto m_hat = m_[i].array() / c1;
    const auto v_hat = v_[i].array() / c2;
    p.value.array() -= lr_ * m_hat / (v_hat.sqrt() + eps_);
    p.zero_grad();
    ++i;
  }
}

namespace {

struct BatchLoss {
  double recon = 0.0;
  double kl = 0.0;
};

Eigen::MatrixXd normalized_batch(const Dataset& ds, const std::vector<int>& idx) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()) * ds.steps, kScenarioFeatures);
  for (std::size_t i = 0; i < idx.size(); ++i)
    x.middleRows(static_cast<Eigen::Index>(i) * ds.steps, ds.steps) =
        ds.scenario_block(idx[i]);
  return apply_normalization(x, ds.norm);
}

std::vector<int> batch_conditions(const Dataset& ds, const std::vector<int>& idx) {
  std::vector<int> cats;
  cats.reserve(idx.size());
  for (int i : idx) cats.push_back(ds.conditions[static_cast<std::size_t>(i)]);
  return cats;
}

Eigen::MatrixXd draw_noise(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd eps(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) eps(i, j) = rng.normal();
  return eps;
}

/// Builds the full loss graph for one batch. Backward is the caller's call.
struct StepGraph {
  ad::Var recon;
  ad::Var kl;
  ad::Var total;
};

StepGraph build_step(ad::Tape& tape, TransformerCvae& model, const Eigen::MatrixXd& x,
                     const std::vector<int>& cats, const Eigen::MatrixXd& eps,
                     double beta, int steps) {
  const int batch = static_cast<int>(cats.size());
  ad::Var x_in = tape.constant(x);
  auto post = model.encode_graph(tape, x_in, cats);
  ad::Var z = tape.add(post.mu, tape.mul(tape.exp(tape.scale(post.log_var, 0.5)),
                                         tape.constant(eps)));
  ad::Var out = model.decode_graph(tape, z, cats, steps);
  StepGraph g;
  g.recon = tape.mean_all(tape.square(tape.sub(out, x_in)));
  ad::Var kl_terms = tape.add_scalar(
      tape.sub(tape.add(tape.square(post.mu), tape.exp(post.log_var)), post.log_var),
      -1.0);
  g.kl = tape.scale(tape.sum_all(kl_terms), 0.5 / static_cast<double>(batch));
  g.total = tape.add(g.recon, tape.scale(g.kl, beta));
  return g;
}

BatchLoss eval_split(ad::Tape& tape, TransformerCvae& model, const Dataset& ds,
                     const std::vector<int>& split, int batch_size, Rng& rng) {
  BatchLoss acc;
  std::size_t n = 0;
  for (std::size_t start = 0; start < split.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t count =
        std::min(static_cast<std::size_t>(batch_size), split.size() - start);
    std::vector<int> idx(split.begin() + static_cast<std::ptrdiff_t>(start),
                         split.begin() + static_cast<std::ptrdiff_t>(start + count));
    const Eigen::MatrixXd x = normalized_batch(ds, idx);
    const auto cats = batch_conditions(ds, idx);
    const Eigen::MatrixXd eps =
        draw_noise(rng, static_cast<Eigen::Index>(count), model.config().latent_dim);
    tape.clear();
    auto g = build_step(tape, model, x, cats, eps, 1.0, ds.steps);
    acc.recon += tape.value(g.recon)(0, 0) * static_cast<double>(count);
    acc.kl += tape.value(g.kl)(0, 0) * static_cast<double>(count);
    n += count;
  }
  tape.clear();
  if (n > 0) {
    acc.recon /= static_cast<double>(n);
    acc.kl /= static_cast<double>(n);
  }
  return acc;
}

std::vector<Eigen::MatrixXd> snapshot(const std::deque<ad::Parameter>& params) {
  std::vector<Eigen::MatrixXd> s;
  s.reserve(params.size());
  for (const auto& p : params) s.push_back(p.value);
  return s;
}

void restore(std::deque<ad::Parameter>& params, const std::vector<Eigen::MatrixXd>& s) {
  std::size_t i = 0;
  for (auto& p : params) p.value = s[i++];
}

}  // namespace

TrainResult train_model(TransformerCvae& model, const Dataset& dataset,
                        const TrainConfig& config,
                        std::vector<EpochStats> prior_history,
                        const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  if (dataset.split.train.empty())
    throw std::invalid_argument("train: empty training split");
  for (int i : dataset.split.train)
    if (i < 0 || i >= dataset.count())
      throw std::invalid_argument("train: split index out of range");

  const int start_epoch = static_cast<int>(prior_history.size());
  TrainResult result;
  result.history = std::move(prior_history);

  AdamOptimizer opt(config.learning_rate);
  Rng root(config.seed);
  ad::Tape tape;

  std::vector<Eigen::MatrixXd> best_weights = snapshot(model.parameters());
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;

  std::vector<int> order = dataset.split.train;
  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    const double beta = beta_at(epoch, config);
    Rng epoch_rng = root.fork(static_cast<std::uint64_t>(epoch));
    epoch_rng.shuffle(order);

    double train_recon = 0.0, train_kl = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count = std::min(static_cast<std::size_t>(config.batch_size),
                                         order.size() - start);
      std::vector<int> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                           order.begin() + static_cast<std::ptrdiff_t>(start + count));
      const Eigen::MatrixXd x = normalized_batch(dataset, idx);
      const auto cats = batch_conditions(dataset, idx);
      const Eigen::MatrixXd eps = draw_noise(epoch_rng, static_cast<Eigen::Index>(count),
                                             model.config().latent_dim);
      tape.clear();
      auto g = build_step(tape, model, x, cats, eps, beta, dataset.steps);
      const double total = tape.value(g.total)(0, 0);
      if (!std::isfinite(total))
        throw std::runtime_error("train: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch offset " +
                                 std::to_string(start));
      train_recon += tape.value(g.recon)(0, 0) * static_cast<double>(count);
      train_kl += tape.value(g.kl)(0, 0) * static_cast<double>(count);
      seen += count;
      tape.backward(g.total);
      opt.step(model.parameters());
    }
    tape.clear();
    train_recon /= static_cast<double>(seen);
    train_kl /= static_cast<double>(seen);

    Rng val_rng = root.fork(0x76616cULL * 1000003ULL + static_cast<std::uint64_t>(epoch));
    const BatchLoss val = eval_split(tape, model, dataset, dataset.split.validation,
                                     config.batch_size, val_rng);

    EpochStats stats{epoch, beta, train_recon, train_kl, val.recon, val.kl};
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);

    const double val_total = dataset.split.validation.empty()
                                 ? train_recon + beta * train_kl
                                 : val.recon + beta * val.kl;
    if (val_total < best_val) {
      best_val = val_total;
      best_epoch = epoch;
      best_weights = snapshot(model.parameters());
    }
  }

  if (best_epoch >= 0) restore(model.parameters(), best_weights);
  result.best_epoch = best_epoch;
  result.best_val_total = best_val;
  return result;
}

}  // namespace scengen
