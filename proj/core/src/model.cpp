#include "scengen/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scengen/rng.hpp"

namespace scengen {
namespace {

void require_positive(int v, const char* what) {
  if (v <= 0) throw std::invalid_argument(std::string("model config: ") + what +
                                          " must be positive");
}

}  // namespace

void ModelConfig::validate() const {
  require_positive(latent_dim, "latent_dim");
  require_positive(attention_head_size, "attention_head_size");
  require_positive(feedforward_dim, "feedforward_dim");
  require_positive(attention_heads, "attention_heads");
  require_positive(condition_embedding_dim, "condition_embedding_dim");
  require_positive(conv_channels, "conv_channels");
  require_positive(conv_kernel, "conv_kernel");
  require_positive(recurrent_hidden, "recurrent_hidden");
  require_positive(transformer_blocks, "transformer_blocks");
  if (conv_kernel % 2 == 0)
    throw std::invalid_argument("model config: conv_kernel must be odd");
  if (positional_dim < 0 || positional_dim % 2 != 0)
    throw std::invalid_argument("model config: positional_dim must be even and >= 0");
}

TransformerCvae::TransformerCvae(ModelConfig config, std::vector<int> vocabulary,
                                 std::uint64_t init_seed)
    : config_(config) {
  config_.validate();
  std::sort(vocabulary.begin(), vocabulary.end());
  vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
  if (vocabulary.empty()) throw std::invalid_argument("model: empty category vocabulary");
  vocabulary_ = std::move(vocabulary);

  const int emb = config_.condition_embedding_dim;
  const int pos = config_.positional_dim;
  const int hidden = config_.recurrent_hidden;
  const int d_enc = 2 * hidden;
  const int d_dec = hidden;
  const int enc_in = 4 + emb + pos;
  const int dec_in = config_.latent_dim + emb + pos;

  embedding_ = add_param("cond_embedding", static_cast<int>(vocabulary_.size()), emb);
  enc_conv_w_ = add_param("enc_conv_w", config_.conv_kernel * enc_in, config_.conv_channels);
  enc_conv_b_ = add_param("enc_conv_b", 1, config_.conv_channels);
  enc_gru_fwd_ = add_gru("enc_gru_f", config_.conv_channels, hidden);
  enc_gru_bwd_ = add_gru("enc_gru_b", config_.conv_channels, hidden);
  for (int b = 0; b < config_.transformer_blocks; ++b)
    enc_blocks_.push_back(add_block("enc_blk" + std::to_string(b), d_enc));
  enc_mu_w_ = add_param("enc_mu_w", d_enc, config_.latent_dim);
  enc_mu_b_ = add_param("enc_mu_b", 1, config_.latent_dim);
  enc_lv_w_ = add_param("enc_lv_w", d_enc, config_.latent_dim);
  enc_lv_b_ = add_param("enc_lv_b", 1, config_.latent_dim);

  dec_gru_ = add_gru("dec_gru", dec_in, hidden);
  for (int b = 0; b < config_.transformer_blocks; ++b)
    dec_blocks_.push_back(add_block("dec_blk" + std::to_string(b), d_dec));
  dec_out_w_ = add_param("dec_out_w", d_dec, 4);
  dec_out_b_ = add_param("dec_out_b", 1, 4);

  init_weights(init_seed);
}

int TransformerCvae::vocabulary_row(int category_id) const {
  const auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), category_id);
  if (it == vocabulary_.end() || *it != category_id)
    throw std::out_of_range("model: category " + std::to_string(category_id) +
                            " not in vocabulary");
  return static_cast<int>(it - vocabulary_.begin());
}

ad::Parameter* TransformerCvae::add_param(const std::string& name, Eigen::Index rows,
                                          Eigen::Index cols) {
  params_.emplace_back(name, rows, cols);
  return &params_.back();
}

TransformerCvae::GruParams TransformerCvae::add_gru(const std::string& prefix,
                                                    int input_dim, int hidden) {
  GruParams g;
  g.wr = add_param(prefix + "_wr", input_dim, hidden);
  g.wz = add_param(prefix + "_wz", input_dim, hidden);
  g.wn = add_param(prefix + "_wn", input_dim, hidden);
  g.ur = add_param(prefix + "_ur", hidden, hidden);
  g.uz = add_param(prefix + "_uz", hidden, hidden);
  g.un = add_param(prefix + "_un", hidden, hidden);
  g.br = add_param(prefix + "_br", 1, hidden);
  g.bz = add_param(prefix + "_bz", 1, hidden);
  g.b_in = add_param(prefix + "_bin", 1, hidden);
  g.b_hn = add_param(prefix + "_bhn", 1, hidden);
  return g;
}

TransformerCvae::BlockParams TransformerCvae::add_block(const std::string& prefix,
                                                        int d_model) {
  const int inner = config_.attention_heads * config_.attention_head_size;
  BlockParams b;
  b.wq = add_param(prefix + "_wq", d_model, inner);
  b.wk = add_param(prefix + "_wk", d_model, inner);
  b.wv = add_param(prefix + "_wv", d_model, inner);
  b.bq = add_param(prefix + "_bq", 1, inner);
  b.bk = add_param(prefix + "_bk", 1, inner);
  b.bv = add_param(prefix + "_bv", 1, inner);
  b.wo = add_param(prefix + "_wo", inner, d_model);
  b.bo = add_param(prefix + "_bo", 1, d_model);
  b.ff_w1 = add_param(prefix + "_ff_w1", d_model, config_.feedforward_dim);
  b.ff_b1 = add_param(prefix + "_ff_b1", 1, config_.feedforward_dim);
  b.ff_w2 = add_param(prefix + "_ff_w2", config_.feedforward_dim, d_model);
  b.ff_b2 = add_param(prefix + "_ff_b2", 1, d_model);
  b.ln1_gamma = add_param(prefix + "_ln1_gamma", 1, d_model);
  b.ln1_beta = add_param(prefix + "_ln1_beta", 1, d_model);
  b.ln2_gamma = add_param(prefix + "_ln2_gamma", 1, d_model);
  b.ln2_beta = add_param(prefix + "_ln2_beta", 1, d_model);
  return b;
}

void TransformerCvae::init_weights(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& p : params_) {
    if (p.name.find("gamma") != std::string::npos) {
      p.value.setOnes();
    } else if (p.value.rows() == 1) {
      p.value.setZero();  // biases and layer-norm shifts
    } else if (p.name == "cond_embedding") {
      for (Eigen::Index i = 0; i < p.value.rows(); ++i)
        for (Eigen::Index j = 0; j < p.value.cols(); ++j)
          p.value(i, j) = 0.05 * (2.0 * rng.uniform() - 1.0);
    } else {
      const double limit =
          std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
      for (Eigen::Index i = 0; i < p.value.rows(); ++i)
        for (Eigen::Index j = 0; j < p.value.cols(); ++j)
          p.value(i, j) = limit * (2.0 * rng.uniform() - 1.0);
    }
  }
}

std::size_t TransformerCvae::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

ad::Var TransformerCvae::broadcast_rows(ad::Tape& tape, ad::Var per_sample,
                                        int steps) const {
  const int batch = static_cast<int>(tape.rows(per_sample));
  std::vector<int> idx(static_cast<std::size_t>(batch) * steps);
  for (int b = 0; b < batch; ++b)
    for (int t = 0; t < steps; ++t) idx[static_cast<std::size_t>(b) * steps + t] = b;
  return tape.gather_rows(per_sample, std::move(idx));
}

ad::Var TransformerCvae::embedding_rows(ad::Tape& tape,
                                        const std::vector<int>& categories, int steps) {
  std::vector<int> idx(categories.size() * static_cast<std::size_t>(steps));
  for (std::size_t b = 0; b < categories.size(); ++b) {
    const int row = vocabulary_row(categories[b]);
    for (int t = 0; t < steps; ++t) idx[b * static_cast<std::size_t>(steps) + t] = row;
  }
  return tape.gather_rows(tape.param(*embedding_), std::move(idx));
}

ad::Var TransformerCvae::positional_rows(ad::Tape& tape, int batch, int steps) const {
  const int pos = config_.positional_dim;
  Eigen::MatrixXd pe(static_cast<Eigen::Index>(batch) * steps, pos);
  for (int t = 0; t < steps; ++t) {
    for (int j = 0; j < pos / 2; ++j) {
      const double rate = std::pow(10000.0, -2.0 * j / pos);
      const double a = t * rate;
      pe(t, 2 * j) = std::sin(a);
      pe(t, 2 * j + 1) = std::cos(a);
    }
  }
  for (int b = 1; b < batch; ++b)
    pe.middleRows(static_cast<Eigen::Index>(b) * steps, steps) = pe.topRows(steps);
  return tape.constant(std::move(pe));
}

ad::Var TransformerCvae::conv1d(ad::Tape& tape, ad::Var x, int batch, int steps) {
  const int in = static_cast<int>(tape.cols(x));
  const int k = config_.conv_kernel;
  const int half = k / 2;
  ad::Var w = tape.param(*enc_conv_w_);
  ad::Var acc{};
  for (int tap = 0; tap < k; ++tap) {
    const int offset = tap - half;
    std::vector<int> idx(static_cast<std::size_t>(batch) * steps);
    for (int b = 0; b < batch; ++b)
      for (int t = 0; t < steps; ++t) {
        const int src = std::clamp(t + offset, 0, steps - 1);  // edge-replicate pad
        idx[static_cast<std::size_t>(b) * steps + t] = b * steps + src;
      }
    ad::Var shifted = tape.gather_rows(x, std::move(idx));
    ad::Var wk = tape.slice_rows(w, static_cast<Eigen::Index>(tap) * in, in);
    ad::Var term = tape.matmul(shifted, wk);
    acc = acc.valid() ? tape.add(acc, term) : term;
  }
  return tape.gelu(tape.add_rowvec(acc, tape.param(*enc_conv_b_)));
}

ad::Var TransformerCvae::gru(ad::Tape& tape, ad::Var x_sample_major, int batch,
                             int steps, const GruParams& p, bool reverse) {
  const int hidden = static_cast<int>(p.ur->value.rows());
  // Time-major layout keeps each step's batch rows contiguous for slicing.
  std::vector<int> to_tm(static_cast<std::size_t>(batch) * steps);
  std::vector<int> to_sm(to_tm.size());
  for (int b = 0; b < batch; ++b)
    for (int t = 0; t < steps; ++t) {
      to_tm[static_cast<std::size_t>(t) * batch + b] = b * steps + t;
      to_sm[static_cast<std::size_t>(b) * steps + t] = t * batch + b;
    }
  ad::Var x_tm = tape.gather_rows(x_sample_major, std::move(to_tm));

  ad::Var wr = tape.param(*p.wr), wz = tape.param(*p.wz), wn = tape.param(*p.wn);
  ad::Var ur = tape.param(*p.ur), uz = tape.param(*p.uz), un = tape.param(*p.un);
  ad::Var br = tape.param(*p.br), bz = tape.param(*p.bz);
  ad::Var b_in = tape.param(*p.b_in), b_hn = tape.param(*p.b_hn);

  ad::Var h = tape.constant(Eigen::MatrixXd::Zero(batch, hidden));
  std::vector<ad::Var> outs(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const int t = reverse ? steps - 1 - i : i;
    ad::Var xt = tape.slice_rows(x_tm, static_cast<Eigen::Index>(t) * batch, batch);
    ad::Var r = tape.sigmoid(
        tape.add_rowvec(tape.add(tape.matmul(xt, wr), tape.matmul(h, ur)), br));
    ad::Var zg = tape.sigmoid(
        tape.add_rowvec(tape.add(tape.matmul(xt, wz), tape.matmul(h, uz)), bz));
    ad::Var hn = tape.add_rowvec(tape.matmul(h, un), b_hn);
    ad::Var n = tape.tanh(
        tape.add(tape.add_rowvec(tape.matmul(xt, wn), b_in), tape.mul(r, hn)));
    h = tape.add(n, tape.mul(zg, tape.sub(h, n)));
    outs[static_cast<std::size_t>(t)] = h;
  }
  ad::Var out_tm = tape.concat_rows(outs);
  return tape.gather_rows(out_tm, std::move(to_sm));
}

ad::Var TransformerCvae::attention_block(ad::Tape& tape, ad::Var x, int batch,
                                         int steps, const BlockParams& p) {
  const int heads = config_.attention_heads;
  const int dh = config_.attention_head_size;
  const double factor = 1.0 / std::sqrt(static_cast<double>(dh));

  ad::Var q = tape.add_rowvec(tape.matmul(x, tape.param(*p.wq)), tape.param(*p.bq));
  ad::Var k = tape.add_rowvec(tape.matmul(x, tape.param(*p.wk)), tape.param(*p.bk));
  ad::Var v = tape.add_rowvec(tape.matmul(x, tape.param(*p.wv)), tape.param(*p.bv));

  std::vector<ad::Var> per_sample(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index row0 = static_cast<Eigen::Index>(b) * steps;
    std::vector<ad::Var> head_ctx(static_cast<std::size_t>(heads));
    for (int hd = 0; hd < heads; ++hd) {
      const Eigen::Index col0 = static_cast<Eigen::Index>(hd) * dh;
      ad::Var qb = tape.slice_cols(tape.slice_rows(q, row0, steps), col0, dh);
      ad::Var kb = tape.slice_cols(tape.slice_rows(k, row0, steps), col0, dh);
      ad::Var vb = tape.slice_cols(tape.slice_rows(v, row0, steps), col0, dh);
      ad::Var scores = tape.matmul(qb, tape.transpose(kb));
      ad::Var attn = tape.softmax_rows(scores, factor);
      head_ctx[static_cast<std::size_t>(hd)] = tape.matmul(attn, vb);
    }
    per_sample[static_cast<std::size_t>(b)] = tape.concat_cols(head_ctx);
  }
  ad::Var ctx = tape.concat_rows(per_sample);
  ad::Var proj = tape.add_rowvec(tape.matmul(ctx, tape.param(*p.wo)), tape.param(*p.bo));
  ad::Var norm1 = tape.layer_norm(tape.add(x, proj));
  ad::Var a1 = tape.add_rowvec(tape.mul_rowvec(norm1, tape.param(*p.ln1_gamma)),
                               tape.param(*p.ln1_beta));

  ad::Var ff = tape.add_rowvec(
      tape.matmul(tape.gelu(tape.add_rowvec(tape.matmul(a1, tape.param(*p.ff_w1)),
                                            tape.param(*p.ff_b1))),
                  tape.param(*p.ff_w2)),
      tape.param(*p.ff_b2));
  ad::Var norm2 = tape.layer_norm(tape.add(a1, ff));
  return tape.add_rowvec(tape.mul_rowvec(norm2, tape.param(*p.ln2_gamma)),
                         tape.param(*p.ln2_beta));
}

TransformerCvae::PosteriorVars TransformerCvae::encode_graph(
    ad::Tape& tape, ad::Var x, const std::vector<int>& categories) {
  if (categories.empty()) throw std::invalid_argument("model: empty batch");
  const int batch = static_cast<int>(categories.size());
  if (tape.rows(x) % batch != 0 || tape.cols(x) != 4)
    throw std::invalid_argument("model: encoder input must be (B*T) x 4");
  const int steps = static_cast<int>(tape.rows(x)) / batch;

  std::vector<ad::Var> parts{x, embedding_rows(tape, categories, steps)};
  if (config_.positional_dim > 0) parts.push_back(positional_rows(tape, batch, steps));
  ad::Var h = conv1d(tape, tape.concat_cols(parts), batch, steps);
  ad::Var fwd = gru(tape, h, batch, steps, enc_gru_fwd_, false);
  ad::Var bwd = gru(tape, h, batch, steps, enc_gru_bwd_, true);
  ad::Var seq = tape.concat_cols({fwd, bwd});
  for (const auto& blk : enc_blocks_) seq = attention_block(tape, seq, batch, steps, blk);
  ad::Var pooled = tape.mean_pool_rows(seq, steps);

  PosteriorVars out;
  out.mu = tape.add_rowvec(tape.matmul(pooled, tape.param(*enc_mu_w_)),
                           tape.param(*enc_mu_b_));
  out.log_var = tape.clamp(tape.add_rowvec(tape.matmul(pooled, tape.param(*enc_lv_w_)),
                                           tape.param(*enc_lv_b_)),
                           -10.0, 10.0);
  return out;
}

ad::Var TransformerCvae::decode_graph(ad::Tape& tape, ad::Var z,
                                      const std::vector<int>& categories, int steps) {
  if (categories.empty()) throw std::invalid_argument("model: empty batch");
  const int batch = static_cast<int>(categories.size());
  if (tape.rows(z) != batch || tape.cols(z) != config_.latent_dim)
    throw std::invalid_argument("model: latent batch must be B x latent_dim");
  if (steps <= 0) throw std::invalid_argument("model: steps must be positive");

  std::vector<ad::Var> parts{broadcast_rows(tape, z, steps),
                             embedding_rows(tape, categories, steps)};
  if (config_.positional_dim > 0) parts.push_back(positional_rows(tape, batch, steps));
  ad::Var h = gru(tape, tape.concat_cols(parts), batch, steps, dec_gru_, false);
  for (const auto& blk : dec_blocks_) h = attention_block(tape, h, batch, steps, blk);
  return tape.add_rowvec(tape.matmul(h, tape.param(*dec_out_w_)),
                         tape.param(*dec_out_b_));
}

TransformerCvae::PosteriorBatch TransformerCvae::encode(
    const Eigen::MatrixXd& x, const std::vector<int>& categories) {
  if (!x.allFinite()) throw std::invalid_argument("model: non-finite encoder input");
  ad::Tape tape;
  PosteriorVars post = encode_graph(tape, tape.constant(x), categories);
  return {tape.value(post.mu), tape.value(post.log_var)};
}

Eigen::MatrixXd TransformerCvae::decode(const Eigen::MatrixXd& z,
                                        const std::vector<int>& categories, int steps) {
  if (!z.allFinite()) throw std::invalid_argument("model: non-finite latent input");
  ad::Tape tape;
  ad::Var out = decode_graph(tape, tape.constant(z), categories, steps);
  return tape.value(out);
}

}  // namespace scengen
