#include <benchmark/benchmark.h>

#include <vector>

#include "scengen/artifact.hpp"
#include "scengen/autodiff.hpp"
#include "scengen/dataset.hpp"
#include "scengen/extraction.hpp"
#include "scengen/kpi.hpp"
#include "scengen/model.hpp"
#include "scengen/rng.hpp"
#include "scengen/routes.hpp"
#include "scengen/synthetic.hpp"
#include "scengen/train.hpp"

namespace {

using namespace scengen;

// Widths small enough to iterate quickly; sequence length stays at the
// production 234 steps so timings reflect the real temporal extent.
ModelConfig bench_model_config() {
  ModelConfig c;
  c.latent_dim = 8;
  c.attention_head_size = 16;
  c.feedforward_dim = 32;
  c.attention_heads = 2;
  c.condition_embedding_dim = 8;
  c.conv_channels = 16;
  c.recurrent_hidden = 32;
  c.transformer_blocks = 1;
  return c;
}

Eigen::MatrixXd random_batch(int batch, int steps, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(batch * steps, kScenarioFeatures);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  }
  return x;
}

Scenario scripted_scenario(std::uint64_t seed) {
  const RoundaboutGeometry geom = default_test_geometry();
  const SyntheticRecording rec = generate_synthetic_recording(geom, 2, seed);
  const auto s = build_scenario(rec.tracks[0], rec.tracks[1], rec.routes[0],
                                rec.routes[1], kWindowFrames, 25.0);
  return downsample(*s, 3);
}

void BM_EncodeForward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  TransformerCvae model(bench_model_config(), {1, 2, 3}, 7);
  const Eigen::MatrixXd x = random_batch(batch, kDownsampledFrames, 11);
  const std::vector<int> cats(static_cast<std::size_t>(batch), 2);
  for (auto _ : state) {
    auto posterior = model.encode(x, cats);
    benchmark::DoNotOptimize(posterior.mu.data());
  }
}
BENCHMARK(BM_EncodeForward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_DecodeForward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  TransformerCvae model(bench_model_config(), {1, 2, 3}, 7);
  Rng rng(13);
  Eigen::MatrixXd z(batch, model.config().latent_dim);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  const std::vector<int> cats(static_cast<std::size_t>(batch), 2);
  for (auto _ : state) {
    Eigen::MatrixXd out = model.decode(z, cats, kDownsampledFrames);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_DecodeForward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  TransformerCvae model(bench_model_config(), {1, 2, 3}, 7);
  AdamOptimizer opt(1e-4);
  const Eigen::MatrixXd x = random_batch(batch, kDownsampledFrames, 17);
  const std::vector<int> cats(static_cast<std::size_t>(batch), 1);
  Rng rng(19);
  Eigen::MatrixXd noise(batch, model.config().latent_dim);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = rng.normal();

  ad::Tape tape;
  for (auto _ : state) {
    tape.clear();
    ad::Var xv = tape.constant(x);
    auto posterior = model.encode_graph(tape, xv, cats);
    ad::Var sigma = tape.exp(tape.scale(posterior.log_var, 0.5));
    ad::Var z = tape.add(posterior.mu, tape.mul(sigma, tape.constant(noise)));
    ad::Var out = model.decode_graph(tape, z, cats, kDownsampledFrames);
    ad::Var recon = tape.mean_all(tape.square(tape.sub(out, xv)));
    ad::Var kl_terms = tape.add_scalar(
        tape.sub(tape.add(tape.square(posterior.mu), tape.exp(posterior.log_var)),
                 posterior.log_var),
        -1.0);
    ad::Var kl = tape.scale(tape.sum_all(kl_terms), 0.5 / batch);
    ad::Var total = tape.add(recon, tape.scale(kl, 0.5));
    tape.backward(total);
    opt.step(model.parameters());
    benchmark::DoNotOptimize(tape.value(total).data());
  }
}
BENCHMARK(BM_TrainStep)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GenerateScenarios(benchmark::State& state) {
  TransformerCvae model(bench_model_config(), {1, 2, 3}, 7);
  NormalizationStats norm;
  norm.center_offset = {10.0, -4.0};
  norm.scale = 22.0;
  for (auto _ : state) {
    auto scenarios =
        generate_scenarios(model, norm, 2, 8, 5, kDownsampledFrames, 0.12);
    benchmark::DoNotOptimize(scenarios.data());
  }
}
BENCHMARK(BM_GenerateScenarios)->Unit(benchmark::kMillisecond);

void BM_EvaluateKpis(benchmark::State& state) {
  const RoundaboutGeometry geom = default_test_geometry();
  const Scenario s = scripted_scenario(29);
  for (auto _ : state) {
    KpiResult r = evaluate_kpis(s, geom);
    benchmark::DoNotOptimize(&r);
  }
}
BENCHMARK(BM_EvaluateKpis)->Unit(benchmark::kMicrosecond);

void BM_ConflictZoneScan(benchmark::State& state) {
  Rng rng(31);
  const int n = 234;
  Eigen::MatrixXd p1(n, 2), p2(n, 2);
  for (int i = 0; i < n; ++i) {
    p1.row(i) << rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0);
    p2.row(i) << rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0);
  }
  for (auto _ : state) {
    auto zone = find_conflict_zone(p1, p2);
    benchmark::DoNotOptimize(&zone);
  }
}
BENCHMARK(BM_ConflictZoneScan)->Unit(benchmark::kMicrosecond);

void BM_ClassifyRoute(benchmark::State& state) {
  const RoundaboutGeometry geom = default_test_geometry();
  const SyntheticRecording rec = generate_synthetic_recording(geom, 1, 37);
  for (auto _ : state) {
    auto c = classify_route(rec.tracks[0], geom);
    benchmark::DoNotOptimize(&c);
  }
}
BENCHMARK(BM_ClassifyRoute)->Unit(benchmark::kMicrosecond);

void BM_BuildDataset(benchmark::State& state) {
  const RoundaboutGeometry geom = default_test_geometry();
  const SyntheticRecording rec = generate_synthetic_recording(geom, 24, 41);
  ExtractionParams params;
  params.min_category_count = 1;
  for (auto _ : state) {
    Dataset ds = build_dataset({rec.tracks}, geom, params, 3);
    benchmark::DoNotOptimize(&ds);
  }
}
BENCHMARK(BM_BuildDataset)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
