#include "ooda/datasets.hpp"

#include <algorithm>
#include <utility>
#include <vector>

#include "ooda/errors.hpp"

namespace ooda {
namespace {

using EdgeList = std::vector<std::pair<int, int>>;

EdgeList motif_edges(MotifKind kind) {
  switch (kind) {
    case MotifKind::house:
      return {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}, {1, 4}};
    case MotifKind::cycle:
      return {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
    case MotifKind::crane:
      return {{0, 1}, {1, 2}, {2, 0}, {1, 3}, {2, 4}};
  }
  return {};
}

EdgeList base_edges(BaseKind kind, int k, Rng& rng) {
  if (k < 4)
    throw ConfigError("base_size " + std::to_string(k) + " below minimum 4 for " +
                      to_string(kind) + " base");
  EdgeList e;
  switch (kind) {
    case BaseKind::wheel:
      // hub 0, rim cycle 1..k-1
      for (int i = 1; i < k; ++i) e.emplace_back(0, i);
      for (int i = 1; i < k - 1; ++i) e.emplace_back(i, i + 1);
      e.emplace_back(k - 1, 1);
      break;
    case BaseKind::tree:
      // uniform random recursive tree
      for (int i = 1; i < k; ++i) e.emplace_back(rng.uniform_int(0, i - 1), i);
      break;
    case BaseKind::ladder: {
      if (k % 2 != 0)
        throw ConfigError("ladder base requires an even node count, got " +
                          std::to_string(k));
      int half = k / 2;
      for (int i = 0; i + 1 < half; ++i) {
        e.emplace_back(i, i + 1);
        e.emplace_back(half + i, half + i + 1);
      }
      for (int i = 0; i < half; ++i) e.emplace_back(i, half + i);
      break;
    }
    case BaseKind::star:
      for (int i = 1; i < k; ++i) e.emplace_back(0, i);
      break;
    case BaseKind::path:
      for (int i = 0; i + 1 < k; ++i) e.emplace_back(i, i + 1);
      break;
  }
  return e;
}

DenseGraph assemble(const MotifSpec& spec, int max_degree, int n_max,
                    std::optional<int> color, int num_colors, Rng& rng) {
  const int nb = spec.base_size;
  const int n = nb + kMotifNodes;
  if (n > n_max)
    throw ConfigError("n_max " + std::to_string(n_max) + " too small for " +
                      std::to_string(n) + " nodes");
  const int deg_dim = max_degree + 1;
  const int a = deg_dim + (color ? num_colors : 0);

  EdgeList edges = base_edges(spec.base_kind, nb, rng);
  for (auto [u, v] : motif_edges(spec.motif_kind)) edges.emplace_back(nb + u, nb + v);
  // connector: uniformly chosen base node to motif node 0
  edges.emplace_back(rng.uniform_int(0, nb - 1), nb);

  DenseGraph g = DenseGraph::zeros(n_max, a, 1, n);
  auto& A = g.adjacency[0];
  for (auto [u, v] : edges) {
    A(u, v) = 1.0f;
    A(v, u) = 1.0f;
  }
  for (int i = 0; i < n; ++i) {
    int d = 0;
    for (int j = 0; j < n; ++j) d += A(i, j) > 0.5f ? 1 : 0;
    g.node_features(i, std::min(d, max_degree)) = 1.0f;
    if (color) g.node_features(i, deg_dim + *color) = 1.0f;
  }
  g.label = int(spec.motif_kind);
  g.meta["motif_kind"] = to_string(spec.motif_kind);
  g.meta["base_kind"] = to_string(spec.base_kind);
  if (color) g.meta["color"] = std::to_string(*color);
  return g;
}

MotifKind class_for_index(int idx) { return MotifKind(idx % kNumMotifClasses); }

// Total node count drawn from [lo, hi], reduced to a feasible base size for
// the chosen topology (>= 4, even for ladders).
int draw_base_size_for_total(BaseKind kind, int lo, int hi, Rng& rng) {
  int total = rng.uniform_int(lo, hi);
  int base = std::max(4, total - kMotifNodes);
  if (kind == BaseKind::ladder && base % 2 != 0) {
    if (base + 1 + kMotifNodes <= hi)
      base += 1;
    else
      base -= 1;
    base = std::max(4, base);
  }
  return base;
}

GraphDataset finalize(std::vector<DenseGraph> graphs, SplitTag tag,
                      std::vector<int> blocks) {
  GraphDataset ds;
  ds.graphs = std::move(graphs);
  ds.num_classes = kNumMotifClasses;
  ds.split_tag = tag;
  ds.feature_blocks = std::move(blocks);
  ds.check_consistent();
  return ds;
}

}  // namespace

std::string to_string(MotifKind k) {
  switch (k) {
    case MotifKind::house: return "house";
    case MotifKind::cycle: return "cycle";
    case MotifKind::crane: return "crane";
  }
  return "house";
}

std::string to_string(BaseKind k) {
  switch (k) {
    case BaseKind::wheel: return "wheel";
    case BaseKind::tree: return "tree";
    case BaseKind::ladder: return "ladder";
    case BaseKind::star: return "star";
    case BaseKind::path: return "path";
  }
  return "tree";
}

std::string to_string(ShiftKind k) {
  switch (k) {
    case ShiftKind::base: return "base";
    case ShiftKind::size: return "size";
    case ShiftKind::color: return "color";
  }
  return "base";
}

MotifKind motif_kind_from_string(const std::string& s) {
  if (s == "house") return MotifKind::house;
  if (s == "cycle") return MotifKind::cycle;
  if (s == "crane") return MotifKind::crane;
  throw ConfigError("unknown motif kind: " + s);
}

BaseKind base_kind_from_string(const std::string& s) {
  if (s == "wheel") return BaseKind::wheel;
  if (s == "tree") return BaseKind::tree;
  if (s == "ladder") return BaseKind::ladder;
  if (s == "star") return BaseKind::star;
  if (s == "path") return BaseKind::path;
  throw ConfigError("unknown base kind: " + s);
}

ShiftKind shift_kind_from_string(const std::string& s) {
  if (s == "base") return ShiftKind::base;
  if (s == "size") return ShiftKind::size;
  if (s == "color") return ShiftKind::color;
  throw ConfigError("unknown shift kind: " + s);
}

DenseGraph gen_motif_graph(const MotifSpec& spec, int max_degree, int n_max, Rng& rng) {
  return assemble(spec, max_degree, n_max, std::nullopt, 0, rng);
}

DenseGraph gen_motif_graph_colored(const MotifSpec& spec, int max_degree, int n_max,
                                   int color, int num_colors, Rng& rng) {
  if (color < 0 || color >= num_colors) throw ConfigError("color index out of range");
  return assemble(spec, max_degree, n_max, color, num_colors, rng);
}

std::tuple<GraphDataset, GraphDataset, GraphDataset> make_motif_splits(const SplitConfig& cfg) {
  if (cfg.shift_kind == ShiftKind::color)
    throw ConfigError("make_motif_splits handles base and size shifts only");
  if (cfg.train_count < 0 || cfg.val_count < 0 || cfg.test_count < 0)
    throw ConfigError("split sizes must be nonnegative");

  const bool base_shift = cfg.shift_kind == ShiftKind::base;
  int n_max = 0;
  if (base_shift) {
    if (cfg.base_size_min < 4 || cfg.base_size_max < cfg.base_size_min)
      throw ConfigError("base_size range invalid (needs 4 <= min <= max)");
    n_max = cfg.base_size_max + kMotifNodes;
  } else {
    for (auto r : {cfg.train_sizes, cfg.val_sizes, cfg.test_sizes}) {
      if (r[0] > r[1] || r[1] < 4 + kMotifNodes)
        throw ConfigError("size range cannot fit a 4-node base plus the motif");
      n_max = std::max(n_max, r[1]);
    }
  }

  const std::array<BaseKind, 3> train_bases{BaseKind::wheel, BaseKind::tree,
                                            BaseKind::ladder};
  const std::array<BaseKind, 5> all_bases{BaseKind::wheel, BaseKind::tree,
                                          BaseKind::ladder, BaseKind::star,
                                          BaseKind::path};

  auto gen_split = [&](int split_idx, int count, SplitTag tag,
                       std::array<int, 2> sizes) {
    std::vector<DenseGraph> graphs;
    graphs.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
      Rng rng(child_seed(cfg.seed, std::uint64_t(split_idx), std::uint64_t(i)));
      MotifSpec spec;
      spec.motif_kind = class_for_index(i);
      if (base_shift) {
        if (tag == SplitTag::train)
          spec.base_kind = train_bases[std::size_t(rng.uniform_int(0, 2))];
        else
          spec.base_kind = tag == SplitTag::val ? BaseKind::star : BaseKind::path;
        spec.base_size = rng.uniform_int(cfg.base_size_min, cfg.base_size_max);
        if (spec.base_kind == BaseKind::ladder && spec.base_size % 2 != 0)
          spec.base_size = std::max(4, spec.base_size - 1);
      } else {
        spec.base_kind = all_bases[std::size_t(rng.uniform_int(0, 4))];
        spec.base_size = draw_base_size_for_total(spec.base_kind, sizes[0], sizes[1], rng);
      }
      graphs.push_back(gen_motif_graph(spec, cfg.max_degree, n_max, rng));
    }
    return finalize(std::move(graphs), tag, {cfg.max_degree + 1});
  };

  return {gen_split(0, cfg.train_count, SplitTag::train, cfg.train_sizes),
          gen_split(1, cfg.val_count, SplitTag::val, cfg.val_sizes),
          gen_split(2, cfg.test_count, SplitTag::test, cfg.test_sizes)};
}

std::tuple<GraphDataset, GraphDataset, GraphDataset> make_color_splits(const SplitConfig& cfg) {
  if (cfg.shift_kind != ShiftKind::color)
    throw ConfigError("make_color_splits requires shift_kind = color");
  if (cfg.base_size_min < 4 || cfg.base_size_max < cfg.base_size_min)
    throw ConfigError("base_size range invalid (needs 4 <= min <= max)");
  const int n_max = cfg.base_size_max + kMotifNodes;
  const std::array<BaseKind, 5> all_bases{BaseKind::wheel, BaseKind::tree,
                                          BaseKind::ladder, BaseKind::star,
                                          BaseKind::path};

  auto gen_split = [&](int split_idx, int count, SplitTag tag) {
    std::vector<DenseGraph> graphs;
    graphs.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
      Rng rng(child_seed(cfg.seed, std::uint64_t(split_idx), std::uint64_t(i)));
      MotifSpec spec;
      spec.motif_kind = class_for_index(i);
      spec.base_kind = all_bases[std::size_t(rng.uniform_int(0, 4))];
      spec.base_size = rng.uniform_int(cfg.base_size_min, cfg.base_size_max);
      if (spec.base_kind == BaseKind::ladder && spec.base_size % 2 != 0)
        spec.base_size = std::max(4, spec.base_size - 1);
      int color = tag == SplitTag::train ? rng.uniform_int(0, kTrainColorMax)
                  : tag == SplitTag::val ? kValColor
                                         : kTestColor;
      graphs.push_back(
          gen_motif_graph_colored(spec, cfg.max_degree, n_max, color, kNumColors, rng));
    }
    return finalize(std::move(graphs), tag, {cfg.max_degree + 1, kNumColors});
  };

  return {gen_split(0, cfg.train_count, SplitTag::train),
          gen_split(1, cfg.val_count, SplitTag::val),
          gen_split(2, cfg.test_count, SplitTag::test)};
}

}  // namespace ooda
