// Acceptance gate: thirteen numbered criteria, one printed pass/fail line
// each. Tolerances are pinned in the assertions, not shared constants, so a
// loosened bound is visible in the diff.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gtest/gtest.h"
#include "scengen/analysis.hpp"
#include "scengen/artifact.hpp"
#include "scengen/dataset.hpp"
#include "scengen/extraction.hpp"
#include "scengen/geometry.hpp"
#include "scengen/kpi.hpp"
#include "scengen/model.hpp"
#include "scengen/normalization.hpp"
#include "scengen/rng.hpp"
#include "scengen/scenario.hpp"
#include "scengen/synthetic.hpp"
#include "scengen/tracks.hpp"
#include "scengen/train.hpp"

namespace scengen {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int index, const std::string& summary) {
  std::cout << "[CRITERION " << index << "] "
            << (::testing::Test::HasFailure() ? "FAIL" : "PASS") << ": " << summary
            << std::endl;
}

TEST(Acceptance, Criterion01ConditionEnumeration) {
  const auto t0 = Clock::now();
  std::set<int> ids;
  for (int a = 0; a < 12; ++a)
    for (int b = a; b < 12; ++b) {
      const ConditionCategory c = encode_condition(a, b);
      EXPECT_EQ(c.category_id, encode_condition(b, a).category_id);
      const auto [lo, hi] = decode_condition(c.category_id);
      EXPECT_EQ(lo, a);
      EXPECT_EQ(hi, b);
      ids.insert(c.category_id);
    }
  EXPECT_EQ(ids.size(), 78u);
  EXPECT_EQ(*ids.begin(), 1);
  EXPECT_EQ(*ids.rbegin(), 78);
  const double elapsed = seconds_since(t0);
  EXPECT_LT(elapsed, 1.0);
  report(1, "78 distinct categories covering 1..78, order-insensitive, "
            "round-trip decode, enumerated in under a second");
}

TEST(Acceptance, Criterion02Downsampling) {
  Scenario s;
  s.condition_id = 1;
  s.dt = 1.0 / 25.0;
  Rng rng(2);
  s.positions.resize(700, kScenarioFeatures);
  for (Eigen::Index i = 0; i < s.positions.rows(); ++i)
    for (Eigen::Index j = 0; j < s.positions.cols(); ++j)
      s.positions(i, j) = rng.normal();

  const Scenario down = downsample(s, 3);
  EXPECT_EQ(down.steps(), 234);
  EXPECT_EQ(down.dt, 0.12);  // bitwise: (1/25) * 3 rounds onto the literal
  for (int i = 0; i < down.steps(); ++i)
    EXPECT_EQ(down.positions.row(i), s.positions.row(3 * i)) << i;
  report(2, "700-frame window downsampled by 3 gives exactly 234 frames at "
            "dt = 0.12 s, rows copied bitwise");
}

TEST(Acceptance, Criterion03BetaSchedule) {
  const TrainConfig c;  // 0.4 -> 0.8 over 200 warmup epochs, 400 epochs
  EXPECT_DOUBLE_EQ(beta_at(0, c), 0.4);
  EXPECT_DOUBLE_EQ(beta_at(100, c), 0.6);
  EXPECT_DOUBLE_EQ(beta_at(200, c), 0.8);
  EXPECT_DOUBLE_EQ(beta_at(399, c), 0.8);
  double prev = beta_at(0, c);
  for (int e = 1; e < 400; ++e) {
    EXPECT_GE(beta_at(e, c), prev) << e;
    prev = beta_at(e, c);
  }
  report(3, "beta(0)=0.4, beta(100)=0.6, beta(200)=beta(399)=0.8, monotone "
            "nondecreasing over the full run");
}

TEST(Acceptance, Criterion04KlClosedForm) {
  EXPECT_EQ(kl_loss(Eigen::MatrixXd::Zero(4, 20), Eigen::MatrixXd::Zero(4, 20)), 0.0);
  EXPECT_NEAR(kl_loss(Eigen::MatrixXd::Ones(1, 20), Eigen::MatrixXd::Zero(1, 20)),
              10.0, 1e-6);
  EXPECT_NEAR(kl_loss(Eigen::MatrixXd::Ones(8, 20), Eigen::MatrixXd::Zero(8, 20)),
              10.0, 1e-6);  // batch mean keeps the per-sample value
  report(4, "KL is 0 at the standard-normal posterior and 10.0 +- 1e-6 for "
            "unit means over 20 dimensions");
}

TEST(Acceptance, Criterion05Reparameterization) {
  Rng rng(5);
  Eigen::MatrixXd mu(6, 4), lv(6, 4);
  for (Eigen::Index i = 0; i < mu.rows(); ++i)
    for (Eigen::Index j = 0; j < mu.cols(); ++j) {
      mu(i, j) = rng.normal();
      lv(i, j) = rng.normal();
    }
  EXPECT_EQ(reparameterize(mu, lv, Eigen::MatrixXd::Zero(6, 4)), mu);

  const int draws = 100000;
  const double mean_true = 1.0;
  const double sigma_true = 0.5;
  const Eigen::MatrixXd mu_mc = Eigen::MatrixXd::Constant(draws, 1, mean_true);
  const Eigen::MatrixXd lv_mc =
      Eigen::MatrixXd::Constant(draws, 1, 2.0 * std::log(sigma_true));
  Eigen::MatrixXd eps(draws, 1);
  for (int i = 0; i < draws; ++i) eps(i, 0) = rng.normal();
  const Eigen::MatrixXd z = reparameterize(mu_mc, lv_mc, eps);
  const double mean = z.mean();
  const double sd = std::sqrt((z.array() - mean).square().sum() / (draws - 1));
  EXPECT_NEAR(mean, mean_true, 0.02 * mean_true);
  EXPECT_NEAR(sd, sigma_true, 0.02 * sigma_true);
  report(5, "z equals mu exactly at eps = 0; Monte-Carlo mean and std over "
            "1e5 draws within 2% of (1.0, 0.5)");
}

// Full training loss on a tape: recon + beta * kl with fixed noise.
double loss_value(ad::Tape& tape, TransformerCvae& model, const Eigen::MatrixXd& x,
                  const std::vector<int>& cats, const Eigen::MatrixXd& eps,
                  double beta, int steps, ad::Var* total_out = nullptr) {
  const int batch = static_cast<int>(cats.size());
  ad::Var x_in = tape.constant(x);
  auto post = model.encode_graph(tape, x_in, cats);
  ad::Var z = tape.add(post.mu, tape.mul(tape.exp(tape.scale(post.log_var, 0.5)),
                                         tape.constant(eps)));
  ad::Var out = model.decode_graph(tape, z, cats, steps);
  ad::Var recon = tape.mean_all(tape.square(tape.sub(out, x_in)));
  ad::Var kl_terms = tape.add_scalar(
      tape.sub(tape.add(tape.square(post.mu), tape.exp(post.log_var)), post.log_var),
      -1.0);
  ad::Var kl = tape.scale(tape.sum_all(kl_terms), 0.5 / static_cast<double>(batch));
  ad::Var total = tape.add(recon, tape.scale(kl, beta));
  if (total_out) *total_out = total;
  return tape.value(total)(0, 0);
}

TEST(Acceptance, Criterion06GradientCheck) {
  const auto t0 = Clock::now();
  ModelConfig cfg;
  cfg.latent_dim = 2;
  cfg.attention_head_size = 4;
  cfg.feedforward_dim = 8;
  cfg.attention_heads = 2;
  cfg.condition_embedding_dim = 4;
  cfg.conv_channels = 6;
  cfg.conv_kernel = 3;
  cfg.recurrent_hidden = 6;
  cfg.transformer_blocks = 1;

  const int batch = 4;
  const int steps = 8;
  const double beta = 0.7;
  TransformerCvae model(cfg, {1, 2}, 6);
  const std::vector<int> cats{1, 2, 1, 2};
  Rng rng(66);
  Eigen::MatrixXd x(batch * steps, kScenarioFeatures);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  Eigen::MatrixXd eps(batch, cfg.latent_dim);
  for (Eigen::Index i = 0; i < eps.rows(); ++i)
    for (Eigen::Index j = 0; j < eps.cols(); ++j) eps(i, j) = rng.normal();

  ad::Tape tape;
  for (auto& p : model.parameters()) p.zero_grad();
  ad::Var total;
  loss_value(tape, model, x, cats, eps, beta, steps, &total);
  tape.backward(total);
  std::vector<Eigen::MatrixXd> analytic;
  for (const auto& p : model.parameters()) analytic.push_back(p.grad);
  tape.clear();

  const double h = 1e-5;
  int checked = 0;
  std::size_t pi = 0;
  for (auto& p : model.parameters()) {
    const Eigen::Index n = p.value.size();
    std::vector<Eigen::Index> entries{0, n / 3, (2 * n) / 3, n - 1};
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    for (const Eigen::Index e : entries) {
      double* slot = p.value.data() + e;
      const double saved = *slot;
      *slot = saved + h;
      tape.clear();
      const double up = loss_value(tape, model, x, cats, eps, beta, steps);
      *slot = saved - h;
      tape.clear();
      const double down = loss_value(tape, model, x, cats, eps, beta, steps);
      *slot = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[pi](e);
      EXPECT_LE(std::abs(a - numeric),
                1e-3 * std::max(std::abs(a), std::abs(numeric)) + 1e-8)
          << p.name << " entry " << e << ": analytic " << a << " numeric " << numeric;
      ++checked;
    }
    ++pi;
  }
  tape.clear();
  const double elapsed = seconds_since(t0);
  EXPECT_LT(elapsed, 120.0);
  report(6, "analytic gradients match central differences within 1e-3 "
            "relative on " +
                std::to_string(checked) + " sampled entries (latent 2, "
                "sequence 8, batch 4) in " +
                std::to_string(elapsed) + " s");
}

TEST(Acceptance, Criterion07ShapeContract) {
  const ModelConfig cfg;  // production widths, latent 20
  TransformerCvae model(cfg, {1, 40}, 7);
  Rng rng(77);
  for (const int batch : {1, 32}) {
    Eigen::MatrixXd x(batch * kDownsampledFrames, kScenarioFeatures);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
    std::vector<int> cats(static_cast<std::size_t>(batch), 40);
    const auto post = model.encode(x, cats);
    EXPECT_EQ(post.mu.rows(), batch);
    EXPECT_EQ(post.mu.cols(), 20);
    EXPECT_EQ(post.log_var.rows(), batch);
    EXPECT_EQ(post.log_var.cols(), 20);
    const Eigen::MatrixXd out = model.decode(post.mu, cats, kDownsampledFrames);
    EXPECT_EQ(out.rows(), batch * kDownsampledFrames);
    EXPECT_EQ(out.cols(), 4);
    EXPECT_TRUE(out.allFinite());
  }
  report(7, "encode maps Bx234x4 to two Bx20 posteriors and decode returns "
            "Bx234x4 for B in {1, 32}");
}

TEST(Acceptance, Criterion08OverfitSmoke) {
  const auto t0 = Clock::now();
  const RoundaboutGeometry geom = default_test_geometry();
  const auto rec = generate_synthetic_recording(geom, 9, 8);

  ExtractionParams params;
  params.min_category_count = 1;
  Dataset full = build_dataset({rec.tracks}, geom, params, 8);
  ASSERT_GE(full.count(), 32);

  // Exactly 32 scenarios, all of them the training split.
  Dataset ds;
  ds.steps = full.steps;
  ds.dt = full.dt;
  ds.tensor.resize(32 * ds.steps, kScenarioFeatures);
  std::vector<Scenario> originals;
  for (int i = 0; i < 32; ++i) {
    ds.tensor.middleRows(i * ds.steps, ds.steps) = full.scenario_block(i);
    ds.conditions.push_back(full.conditions[static_cast<std::size_t>(i)]);
    ds.frame_origins.push_back(full.frame_origins[static_cast<std::size_t>(i)]);
    ds.sources.push_back(full.sources[static_cast<std::size_t>(i)]);
    ds.split.train.push_back(i);
    originals.push_back(full.scenario(i));
  }
  ds.recording_ids = full.recording_ids;
  ds.norm = fit_normalization(originals, geom.center);

  ModelConfig cfg;
  cfg.latent_dim = 10;
  cfg.attention_head_size = 16;
  cfg.feedforward_dim = 32;
  cfg.attention_heads = 2;
  cfg.condition_embedding_dim = 8;
  cfg.conv_channels = 16;
  cfg.conv_kernel = 5;
  cfg.recurrent_hidden = 48;
  cfg.transformer_blocks = 1;
  // Positional features matter here: without them the decoder GRU sees a
  // constant per-step input and stalls well short of the RMSE bound.
  cfg.positional_dim = 16;
  TransformerCvae model(cfg, ds.category_ids(), 88);

  TrainConfig tc;
  tc.epochs = 300;  // the stated budget
  tc.batch_size = 4;  // 8 optimizer steps per epoch on the 32 samples
  tc.learning_rate = 2e-3;
  tc.beta_start = 1e-5;  // near-pure reconstruction for the overfit probe
  tc.beta_end = 1e-5;
  tc.beta_warmup_epochs = 0;
  tc.seed = 8;
  const TrainResult result = train_model(model, ds, tc);

  ASSERT_FALSE(result.history.empty());
  const double first = result.history.front().train_recon;
  const double last = result.history.back().train_recon;
  EXPECT_LT(last, 0.10 * first)
      << "epoch-1 recon " << first << ", final recon " << last;

  std::vector<Scenario> recons;
  recons.reserve(originals.size());
  for (const auto& s : originals)
    recons.push_back(reconstruct_scenario(model, ds.norm, s));
  const RmseReport rmse = rmse_report(originals, recons);
  EXPECT_LT(rmse.longitudinal_total, 2.0);
  EXPECT_LT(rmse.lateral_total, 2.0);

  const double elapsed = seconds_since(t0);
  EXPECT_LT(elapsed, 900.0);
  report(8, "32-scenario overfit: recon fell to " +
                std::to_string(100.0 * last / first) + "% of epoch 1, meter "
                "RMSE long/lat " +
                std::to_string(rmse.longitudinal_total) + "/" +
                std::to_string(rmse.lateral_total) + " m in " +
                std::to_string(elapsed) + " s (rounD-gated variant needs the "
                "licensed dataset and is not asserted here)");
}

TEST(Acceptance, Criterion09TtcAnalyticAndScanOracle) {
  VehicleState a{{0.0, 0.0}, {5.0, 0.0}};
  VehicleState b{{20.0, 0.0}, {-5.0, 0.0}};
  const auto head_on = ttc_at_frame(a, b, 2.0);
  ASSERT_TRUE(head_on.has_value());
  EXPECT_NEAR(*head_on, 1.8, 1e-9);

  Rng rng(99);
  int compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    VehicleState s1, s2;
    s1.position = {rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
    s1.velocity = {rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)};
    if (trial % 2 == 0) {
      const double angle = rng.uniform(0.0, 2.0 * kPi);
      const double dist = rng.uniform(12.0, 40.0);
      s2.position =
          s1.position + dist * Eigen::Vector2d(std::cos(angle), std::sin(angle));
      const Eigen::Vector2d toward = (s1.position - s2.position).normalized();
      s2.velocity = s1.velocity + rng.uniform(3.0, 7.0) * toward +
                    Eigen::Vector2d(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
    } else {
      s2.position = {rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
      s2.velocity = {rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)};
      if ((s2.position - s1.position).norm() < 3.0) s2.position.x() += 10.0;
    }

    const auto analytic = ttc_at_frame(s1, s2, 2.0);
    std::optional<double> scanned;
    const Eigen::Vector2d dp = s2.position - s1.position;
    const Eigen::Vector2d dv = s2.velocity - s1.velocity;
    for (double t = 0.0; t <= 60.0; t += 1e-3) {
      if ((dp + t * dv).norm() <= 2.0) {
        scanned = t;
        break;
      }
    }
    if (analytic && *analytic <= 60.0) {
      ASSERT_TRUE(scanned.has_value()) << trial;
      EXPECT_NEAR(*analytic, *scanned, 2e-3) << trial;
      ++compared;
    } else {
      EXPECT_FALSE(scanned.has_value()) << trial;
    }
  }
  EXPECT_GE(compared, 15);
  report(9, "head-on TTC is 1.8 s +- 1e-9 and the quadratic solution agrees "
            "with a 1 ms scan within 2 ms on " +
                std::to_string(compared) + " of 50 random pairs (rest "
                "consistently undefined)");
}

Scenario scripted_crossing(int frames, int cross2, double dt) {
  Scenario s;
  s.positions.resize(frames, kScenarioFeatures);
  for (int t = 0; t < frames; ++t) {
    s.positions(t, 0) = static_cast<double>(t - 55);
    s.positions(t, 1) = 0.0;
    s.positions(t, 2) = 0.0;
    s.positions(t, 3) = static_cast<double>(t - cross2);
  }
  s.condition_id = 1;
  s.dt = dt;
  return s;
}

TEST(Acceptance, Criterion10PetOracleAndSwapInvariance) {
  const RoundaboutGeometry geom = default_test_geometry();
  const KpiParams params;
  const double dt = 0.12;
  Rng rng(1010);
  int defined = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int frames = 140;
    const int cross2 = rng.uniform_int(5, 130);
    const Scenario s = scripted_crossing(frames, cross2, dt);
    const auto measured = pet(s, geom);
    ASSERT_TRUE(measured.has_value()) << trial;

    // Frame-scan oracle: boolean occupancy of the 5 m zone around the
    // crossing point, runs grown around each vehicle's own crossing frame.
    const Eigen::MatrixXd p1 = s.positions.leftCols(2);
    const Eigen::MatrixXd p2 = s.positions.rightCols(2);
    double best = std::numeric_limits<double>::infinity();
    int fa = -1, fb = -1;
    const auto m1 = inside_roundabout_mask(p1, geom);
    const auto m2 = inside_roundabout_mask(p2, geom);
    for (int i = 0; i < frames; ++i) {
      if (!m1[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < frames; ++j) {
        if (!m2[static_cast<std::size_t>(j)]) continue;
        const double d = (p1.row(i) - p2.row(j)).norm();
        if (d < best) {
          best = d;
          fa = i;
          fb = j;
        }
      }
    }
    ASSERT_LE(best, params.conflict_threshold) << trial;
    const auto run_bounds = [&](const Eigen::MatrixXd& p, const Eigen::Vector2d& zone,
                                int anchor) {
      int first = anchor, last = anchor;
      const auto near_zone = [&](int t) {
        return (p.row(t).transpose() - zone).norm() <= params.conflict_threshold;
      };
      while (first > 0 && near_zone(first - 1)) --first;
      while (last + 1 < frames && near_zone(last + 1)) ++last;
      return std::pair<int, int>{first, last};
    };
    const auto [a1, a2] = run_bounds(p1, p1.row(fa).transpose(), fa);
    const auto [b1, b2] = run_bounds(p2, p2.row(fb).transpose(), fb);
    double oracle = 0.0;
    bool critical = std::max(a1, b1) <= std::min(a2, b2);
    if (!critical) oracle = (a2 < b1 ? b1 - a2 : a1 - b2) * dt;

    EXPECT_EQ(measured->critical, critical) << trial;
    EXPECT_NEAR(measured->seconds, oracle, dt) << trial;
    if (!critical) ++defined;

    Scenario swapped = s;
    swapped.positions.leftCols(2) = s.positions.rightCols(2);
    swapped.positions.rightCols(2) = s.positions.leftCols(2);
    const auto mirrored = pet(swapped, geom);
    ASSERT_TRUE(mirrored.has_value()) << trial;
    EXPECT_EQ(mirrored->seconds, measured->seconds) << trial;
    EXPECT_EQ(mirrored->critical, measured->critical) << trial;
  }
  report(10, "geometric PET matches the frame-scan oracle within one dt and "
             "is swap-invariant on all 50 scripted crossings (" +
                 std::to_string(defined) + " with a positive gap)");
}

TEST(Acceptance, Criterion11ConflictZoneScanAgreement) {
  Rng rng(1111);
  for (int trial = 0; trial < 50; ++trial) {
    const int n1 = rng.uniform_int(5, 60);
    const int n2 = rng.uniform_int(5, 60);
    Eigen::MatrixXd p1(n1, 2), p2(n2, 2);
    for (int i = 0; i < n1; ++i)
      p1.row(i) << rng.uniform(-12.0, 12.0), rng.uniform(-12.0, 12.0);
    for (int j = 0; j < n2; ++j)
      p2.row(j) << rng.uniform(-12.0, 12.0), rng.uniform(-12.0, 12.0);

    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) {
        const double d = (p1.row(i) - p2.row(j)).norm();
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }

    const auto zone = find_conflict_zone(p1, p2, 5.0);
    if (best > 5.0) {
      EXPECT_FALSE(zone.has_value()) << trial;
      continue;
    }
    ASSERT_TRUE(zone.has_value()) << trial;
    EXPECT_EQ(zone->frame_a, bi) << trial;
    EXPECT_EQ(zone->frame_b, bj) << trial;
    EXPECT_EQ(zone->separation, best) << trial;
  }
  report(11, "closest-pair search matches the quadratic scan with exact "
             "index agreement under earliest-index tie-breaking on 50 "
             "random path pairs");
}

TEST(Acceptance, Criterion12TraversalZeroRowConsistency) {
  ModelConfig cfg;  // latent kept at the production 20; widths shrunk
  cfg.latent_dim = 20;
  cfg.attention_head_size = 8;
  cfg.feedforward_dim = 16;
  cfg.attention_heads = 2;
  cfg.condition_embedding_dim = 8;
  cfg.conv_channels = 8;
  cfg.conv_kernel = 3;
  cfg.recurrent_hidden = 12;
  cfg.transformer_blocks = 1;
  TransformerCvae model(cfg, {1, 2}, 12);
  NormalizationStats norm;
  norm.center_offset = {2.0, -1.0};
  norm.scale = 13.0;
  const RoundaboutGeometry geom = default_test_geometry();
  const int condition = 2;

  std::vector<TraversalGrid> grids;
  for (int d = 0; d < cfg.latent_dim; ++d)
    grids.push_back(latent_traversal(model, norm, geom, condition, d,
                                     kDownsampledFrames, 0.12));
  ASSERT_EQ(grids.size(), 20u);
  for (const auto& g : grids) {
    ASSERT_EQ(g.entries.size(), 5u);
    for (int i = 0; i < 5; ++i)
      EXPECT_DOUBLE_EQ(g.entries[static_cast<std::size_t>(i)].value,
                       kTraversalValues[i]);
  }

  // Batch-matched origin: same 5-row decode shape as a grid, all-zero z.
  // A lone 1-row decode takes different Eigen kernel paths and may drift in
  // the last bits, so it gets a tolerance instead of bit equality.
  const std::vector<int> cats(5, condition);
  const Eigen::MatrixXd zero_batch = invert_normalization(
      model.decode(Eigen::MatrixXd::Zero(5, cfg.latent_dim), cats, kDownsampledFrames),
      norm);
  const Eigen::MatrixXd origin_batched =
      zero_batch.middleRows(2 * kDownsampledFrames, kDownsampledFrames);
  const Eigen::MatrixXd origin_single = invert_normalization(
      model.decode(Eigen::MatrixXd::Zero(1, cfg.latent_dim), {condition},
                   kDownsampledFrames),
      norm);
  for (int d = 0; d < 20; ++d) {
    const Eigen::MatrixXd& row0 =
        grids[static_cast<std::size_t>(d)].entries[2].scenario.positions;
    EXPECT_EQ(row0, grids[0].entries[2].scenario.positions) << d;
    EXPECT_EQ(row0, origin_batched) << d;
    EXPECT_LT((row0 - origin_single).cwiseAbs().maxCoeff(), 1e-9) << d;
  }
  report(12, "20 traversal grids of 5 scenarios each; the value-0 rows are "
             "bitwise identical across dimensions and to the batch-matched "
             "zero-latent decode, and match a single decode within 1e-9 m");
}

TEST(Acceptance, Criterion13RoundDataGated) {
  const char* root = std::getenv("SCENGEN_ROUND_DIR");
  if (!root || !*root) {
    std::cout << "[CRITERION 13] SKIP: data-gated check needs the licensed "
                 "recording set; point SCENGEN_ROUND_DIR at a directory with "
                 "recording_*_tracks.csv and geometry.json to enable it"
              << std::endl;
    GTEST_SKIP() << "SCENGEN_ROUND_DIR not set";
  }

  namespace fs = std::filesystem;
  const fs::path dir(root);
  ASSERT_TRUE(fs::exists(dir / "geometry.json"));
  const auto geom = RoundaboutGeometry::load(dir / "geometry.json");
  geom.validate();

  const std::regex pattern("recording_([0-9]+)_tracks\\.csv");
  std::vector<std::pair<int, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern))
      files.emplace_back(std::stoi(m[1]), entry.path());
  }
  std::sort(files.begin(), files.end());
  ASSERT_FALSE(files.empty());

  std::vector<std::vector<Track>> recordings;
  for (const auto& [rec_id, path] : files)
    recordings.push_back(load_tracks(path, rec_id).tracks);

  const ExtractionParams params;  // production thresholds
  const Dataset ds = build_dataset(recordings, geom, params, 0);
  EXPECT_EQ(ds.count(), 30329);
  EXPECT_EQ(ds.category_ids().size(), 28u);

  int defined = 0, in_range = 0;
  const int sample = std::min(ds.count(), 500);
  for (int i = 0; i < sample; ++i) {
    const auto p = pet(ds.scenario(i), geom);
    if (!p || p->critical) continue;
    ++defined;
    if (p->seconds >= 1.5 && p->seconds <= 16.0) ++in_range;
  }
  ASSERT_GT(defined, 0);
  EXPECT_GE(static_cast<double>(in_range) / defined, 0.80);
  report(13, "recording-set extraction reproduces 30329 scenarios in 28 "
             "categories; PET of the sampled originals lies predominantly "
             "in 1.5..16 s");
}

}  // namespace
}  // namespace scengen
