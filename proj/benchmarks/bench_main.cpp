#include <benchmark/benchmark.h>

#include "ooda/datasets.hpp"
#include "ooda/eval.hpp"
#include "ooda/nets.hpp"
#include "ooda/sampler.hpp"
#include "ooda/tensorize.hpp"

namespace {

using namespace ooda;

DiffusionSde vp() {
  DiffusionSde s;
  return s;
}

GraphDataset bench_data(int count) {
  SplitConfig cfg;
  cfg.shift_kind = ShiftKind::base;
  cfg.train_count = count;
  cfg.val_count = 0;
  cfg.test_count = 0;
  cfg.base_size_min = 6;
  cfg.base_size_max = 9;
  cfg.seed = 1;
  auto [train, val, test] = make_motif_splits(cfg);
  return train;
}

NetConfig bench_arch(const GraphDataset& ds, int classes) {
  NetConfig c;
  c.layers = 3;
  c.heads = 4;
  c.hidden_x = 64;
  c.hidden_a = 16;
  c.time_dim = 32;
  c.feat_dim = ds.feat_dim();
  c.edge_dim = ds.edge_dim();
  c.n_max = ds.n_max();
  c.num_classes = classes;
  return c;
}

void BM_perturb(benchmark::State& state) {
  GraphDataset ds = bench_data(4);
  const DenseGraph& g = ds.graphs.front();
  Rng rng(2);
  Mask mask = mask_of(g);
  Eigen::MatrixXd x = node_tensor(g);
  for (auto _ : state) {
    auto [noisy, z] = perturb_nodes(vp(), x, 0.5, mask, rng);
    benchmark::DoNotOptimize(noisy);
  }
}
BENCHMARK(BM_perturb);

void BM_score_forward(benchmark::State& state) {
  GraphDataset ds = bench_data(4);
  GraphAttentionNet net(bench_arch(ds, 0), 3);
  const DenseGraph& g = ds.graphs.front();
  Mask mask = mask_of(g);
  Eigen::MatrixXd x = node_tensor(g);
  AdjChannels a = adj_tensor(g);
  for (auto _ : state) {
    ScoreEstimate s = score_forward(net, vp(), vp(), x, a, mask, 0.5);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_score_forward);

void BM_class_logprob_grad(benchmark::State& state) {
  GraphDataset ds = bench_data(4);
  GraphAttentionNet phi(bench_arch(ds, 3), 4);
  const DenseGraph& g = ds.graphs.front();
  Mask mask = mask_of(g);
  Eigen::MatrixXd x = node_tensor(g);
  AdjChannels a = adj_tensor(g);
  for (auto _ : state) {
    auto gr = class_logprob_grad(phi, x, a, mask, 0.5, 1);
    benchmark::DoNotOptimize(gr);
  }
}
BENCHMARK(BM_class_logprob_grad);

void BM_reverse_sample_unguided(benchmark::State& state) {
  GraphDataset ds = bench_data(4);
  GraphAttentionNet net(bench_arch(ds, 0), 3);
  GuidanceConfig g;
  g.r1 = 0.0;
  g.r2 = 0.0;
  SamplerConfig sc;
  sc.num_steps = int(state.range(0));
  int k = 0;
  for (auto _ : state) {
    Rng rng(child_seed(11, std::uint64_t(k++)));
    DenseGraph out = reverse_sample(net, nullptr, vp(), vp(), g, sc, 12, rng);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_reverse_sample_unguided)->Arg(25)->Arg(50);

void BM_gin_embed(benchmark::State& state) {
  GraphDataset ds = bench_data(int(state.range(0)));
  RandomGinConfig cfg;
  cfg.seed = 5;
  for (auto _ : state) {
    Eigen::MatrixXd emb = random_gin_embed(ds.graphs, cfg, 0);
    benchmark::DoNotOptimize(emb);
  }
}
BENCHMARK(BM_gin_embed)->Arg(30)->Arg(120);

void BM_emd(benchmark::State& state) {
  Rng rng(9);
  Eigen::VectorXd u(192), v(192);
  for (int i = 0; i < 192; ++i) {
    u(i) = rng.normal();
    v(i) = rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(emd_distance(u, v));
}
BENCHMARK(BM_emd);

void BM_mmd_rbf(benchmark::State& state) {
  GraphDataset a = bench_data(int(state.range(0)));
  SplitConfig cfg;
  cfg.train_count = int(state.range(0));
  cfg.val_count = 0;
  cfg.test_count = 0;
  cfg.base_size_min = 6;
  cfg.base_size_max = 9;
  cfg.seed = 77;
  auto [b, v, t] = make_motif_splits(cfg);
  RandomGinConfig gin;
  gin.num_seeds = 1;
  gin.seed = 3;
  for (auto _ : state) {
    MmdResult r = mmd_rbf(a.graphs, b.graphs, gin);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_mmd_rbf)->Arg(30)->Arg(60);

void BM_quantize(benchmark::State& state) {
  Rng rng(13);
  Mask mask(14, 1);
  DenseGraph g = DenseGraph::zeros(14, 11, 1, 14);
  g.node_features = node_noise(14, 11, mask, rng).cast<float>();
  g.adjacency[0] = adj_noise(14, 1, mask, rng)[0].cast<float>();
  for (auto _ : state) benchmark::DoNotOptimize(quantize(g, {11}));
}
BENCHMARK(BM_quantize);

}  // namespace

BENCHMARK_MAIN();
