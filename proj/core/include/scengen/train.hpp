#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "scengen/autodiff.hpp"
#include "scengen/dataset.hpp"
#include "scengen/model.hpp"

namespace scengen {

/// Optimization hyperparameters. Defaults follow the production recipe.
struct TrainConfig {
  int epochs = 400;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double beta_start = 0.4;
  double beta_end = 0.8;
  int beta_warmup_epochs = 200;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// KL weight at an epoch: linear ramp from beta_start to beta_end over the
/// warmup, clamped afterwards. Monotone nondecreasing.
double beta_at(int epoch, const TrainConfig& config);

/// Mean squared error over all elements.
double recon_loss(const Eigen::MatrixXd& target, const Eigen::MatrixXd& output);

/// Batch mean of the per-sample Gaussian KL to the standard normal prior:
/// 0.5 * sum_j (mu_j^2 + sigma_j^2 - log sigma_j^2 - 1).
double kl_loss(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& log_var);

double total_loss(const Eigen::MatrixXd& target, const Eigen::MatrixXd& output,
                  const Eigen::MatrixXd& mu, const Eigen::MatrixXd& log_var,
                  double beta);

/// z = mu + exp(0.5 * log_var) .* noise, elementwise.
Eigen::MatrixXd reparameterize(const Eigen::MatrixXd& mu,
                               const Eigen::MatrixXd& log_var,
                               const Eigen::MatrixXd& noise);

/// One row of the training history.
struct EpochStats {
  int epoch = 0;  // zero-based, global across resumes
  double beta = 0.0;
  double train_recon = 0.0;
  double train_kl = 0.0;
  double val_recon = 0.0;
  double val_kl = 0.0;
};

/// Adaptive moment estimation. step() applies accumulated gradients and
/// zeroes them. Moment buffers are keyed by position in the parameter list.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double learning_rate, double beta1 = 0.9,
                         double beta2 = 0.999, double eps = 1e-8);

  void step(std::deque<ad::Parameter>& params);
  long long steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
};

struct TrainResult {
  std::vector<EpochStats> history;  // prior history plus the epochs run now
  int best_epoch = -1;              // epoch whose weights the model now holds
  double best_val_total = 0.0;
};

/// Mini-batch training over the dataset's train split with per-epoch
/// validation. Scenarios are normalized on the fly with the dataset's stats.
/// The model is left holding the weights of the best-validation epoch.
/// Deterministic given config.seed. Resuming: pass the artifact's history;
/// epoch numbering continues from its length. Throws on empty train split or
/// non-finite loss.
TrainResult train_model(TransformerCvae& model, const Dataset& dataset,
                        const TrainConfig& config,
                        std::vector<EpochStats> prior_history = {},
                        const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace scengen
