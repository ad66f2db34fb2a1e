#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "scengen/autodiff.hpp"

namespace scengen {

/// Architecture hyperparameters. Production defaults; tests shrink widths.
struct ModelConfig {
  int latent_dim = 20;
  int attention_head_size = 256;
  int feedforward_dim = 512;
  int attention_heads = 4;
  int condition_embedding_dim = 16;
  int conv_channels = 64;
  int conv_kernel = 5;  // taps of the temporal convolution, odd
  int recurrent_hidden = 128;
  int transformer_blocks = 2;
  int positional_dim = 0;  // sinusoidal features appended when > 0

  void validate() const;  // throws std::invalid_argument
  bool operator==(const ModelConfig&) const = default;
};

/// Conditional VAE over two-vehicle scenario windows. The encoder embeds the
/// condition, broadcasts it along time, runs a temporal convolution, a
/// bidirectional recurrent layer and multi-head self-attention blocks, pools
/// over time and emits a Gaussian posterior. The decoder expands a latent
/// code along time, concatenates the condition embedding, and mirrors the
/// recurrent plus attention stack down to per-step coordinates.
///
/// Batches are sample-major: row b*T + t of a (B*T) x F matrix is sample b
/// at step t. All math is double precision.
class TransformerCvae {
 public:
  struct PosteriorVars {
    ad::Var mu;
    ad::Var log_var;  // clamped to [-10, 10]
  };
  struct PosteriorBatch {
    Eigen::MatrixXd mu;       // B x latent_dim
    Eigen::MatrixXd log_var;  // B x latent_dim
  };

  /// Fresh model with Glorot-initialized weights. vocabulary lists the
  /// trainable category ids (sorted, deduplicated internally).
  TransformerCvae(ModelConfig config, std::vector<int> vocabulary,
                  std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  const std::vector<int>& vocabulary() const { return vocabulary_; }
  /// Embedding row for a category id; throws std::out_of_range if unknown.
  int vocabulary_row(int category_id) const;

  // Deque keeps parameter references stable while the registry grows.
  std::deque<ad::Parameter>& parameters() { return params_; }
  const std::deque<ad::Parameter>& parameters() const { return params_; }
  std::size_t parameter_count() const;  // total scalar count

  /// Graph-building forms, for the training loop. x is (B*T) x 4 normalized
  /// positions, categories has length B, T inferred from the shapes.
  PosteriorVars encode_graph(ad::Tape& tape, ad::Var x,
                             const std::vector<int>& categories);
  /// z is B x latent_dim; returns (B*steps) x 4.
  ad::Var decode_graph(ad::Tape& tape, ad::Var z, const std::vector<int>& categories,
                       int steps);

  /// Evaluation forms (no gradient bookkeeping kept by the caller).
  PosteriorBatch encode(const Eigen::MatrixXd& x, const std::vector<int>& categories);
  Eigen::MatrixXd decode(const Eigen::MatrixXd& z, const std::vector<int>& categories,
                         int steps);

 private:
  struct GruParams {
    ad::Parameter* wr;
    ad::Parameter* wz;
    ad::Parameter* wn;
    ad::Parameter* ur;
    ad::Parameter* uz;
    ad::Parameter* un;
    ad::Parameter* br;
    ad::Parameter* bz;
    ad::Parameter* b_in;
    ad::Parameter* b_hn;
  };
  struct BlockParams {
    ad::Parameter* wq;
    ad::Parameter* wk;
    ad::Parameter* wv;
    ad::Parameter* bq;
    ad::Parameter* bk;
    ad::Parameter* bv;
    ad::Parameter* wo;
    ad::Parameter* bo;
    ad::Parameter* ff_w1;
    ad::Parameter* ff_b1;
    ad::Parameter* ff_w2;
    ad::Parameter* ff_b2;
    ad::Parameter* ln1_gamma;
    ad::Parameter* ln1_beta;
    ad::Parameter* ln2_gamma;
    ad::Parameter* ln2_beta;
  };

  ad::Parameter* add_param(const std::string& name, Eigen::Index rows,
                           Eigen::Index cols);
  GruParams add_gru(const std::string& prefix, int input_dim, int hidden);
  BlockParams add_block(const std::string& prefix, int d_model);
  void init_weights(std::uint64_t seed);

  /// Broadcasts per-sample rows (B x d) to (B*steps) x d.
  ad::Var broadcast_rows(ad::Tape& tape, ad::Var per_sample, int steps) const;
  ad::Var embedding_rows(ad::Tape& tape, const std::vector<int>& categories,
                         int steps);
  ad::Var positional_rows(ad::Tape& tape, int batch, int steps) const;
  ad::Var conv1d(ad::Tape& tape, ad::Var x, int batch, int steps);
  ad::Var gru(ad::Tape& tape, ad::Var x_sample_major, int batch, int steps,
              const GruParams& p, bool reverse);
  ad::Var attention_block(ad::Tape& tape, ad::Var x, int batch, int steps,
                          const BlockParams& p);

  ModelConfig config_;
  std::vector<int> vocabulary_;
  std::deque<ad::Parameter> params_;

  ad::Parameter* embedding_ = nullptr;
  ad::Parameter* enc_conv_w_ = nullptr;
  ad::Parameter* enc_conv_b_ = nullptr;
  GruParams enc_gru_fwd_{};
  GruParams enc_gru_bwd_{};
  std::vector<BlockParams> enc_blocks_;
  ad::Parameter* enc_mu_w_ = nullptr;
  ad::Parameter* enc_mu_b_ = nullptr;
  ad::Parameter* enc_lv_w_ = nullptr;
  ad::Parameter* enc_lv_b_ = nullptr;
  GruParams dec_gru_{};
  std::vector<BlockParams> dec_blocks_;
  ad::Parameter* dec_out_w_ = nullptr;
  ad::Parameter* dec_out_b_ = nullptr;
};

}  // namespace scengen
