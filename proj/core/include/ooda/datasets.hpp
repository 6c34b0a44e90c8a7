#pragma once

#include <array>
#include <cstdint>
#include <tuple>

#include "ooda/graph.hpp"
#include "ooda/rng.hpp"

namespace ooda {

/// Label-determining 5-node motifs. The enum value is the class label.
enum class MotifKind { house = 0, cycle = 1, crane = 2 };

/// Environmental base component the motif is attached to.
enum class BaseKind { wheel = 0, tree = 1, ladder = 2, star = 3, path = 4 };

enum class ShiftKind { base, size, color };

std::string to_string(MotifKind k);
std::string to_string(BaseKind k);
MotifKind motif_kind_from_string(const std::string& s);
BaseKind base_kind_from_string(const std::string& s);
ShiftKind shift_kind_from_string(const std::string& s);
std::string to_string(ShiftKind k);

inline constexpr int kMotifNodes = 5;
inline constexpr int kNumMotifClasses = 3;
inline constexpr int kNumColors = 7;
inline constexpr int kTrainColorMax = 4;  // train colors {0..4}
inline constexpr int kValColor = 5;
inline constexpr int kTestColor = 6;

struct MotifSpec {
  MotifKind motif_kind = MotifKind::house;
  BaseKind base_kind = BaseKind::tree;
  int base_size = 8;  // node count of the base component, >= 4
  std::uint64_t seed = 0;
};

/// Split construction parameters. Size ranges bound the total active node
/// count per split in size-shift mode; base_size_* bound the base component
/// in base- and color-shift modes.
struct SplitConfig {
  ShiftKind shift_kind = ShiftKind::base;
  int train_count = 300;
  int val_count = 300;
  int test_count = 300;
  int max_degree = 10;  // degree one-hot clamp; feature dim = max_degree + 1
  int base_size_min = 8;
  int base_size_max = 12;
  std::array<int, 2> train_sizes{6, 45};
  std::array<int, 2> val_sizes{20, 75};
  std::array<int, 2> test_sizes{68, 155};
  std::uint64_t seed = 0;
};

/// Builds one motif graph: the base component, the 5-node motif template and
/// one connector edge from a uniformly chosen base node to motif node 0.
/// Node features are the one-hot encoded (clamped) node degree; label is the
/// motif class. Throws ConfigError when base_size is below the topology's
/// minimum. Pads to n_max, which must fit base_size + 5 nodes.
DenseGraph gen_motif_graph(const MotifSpec& spec, int max_degree, int n_max, Rng& rng);

/// gen_motif_graph plus a graph-wide color one-hot appended to every node's
/// features (feature dim = max_degree + 1 + num_colors).
DenseGraph gen_motif_graph_colored(const MotifSpec& spec, int max_degree, int n_max,
                                   int color, int num_colors, Rng& rng);

/// Base covariate shift (train: wheel/tree/ladder, val: star, test: path) or
/// size covariate shift (all bases, per-split total-node ranges).
std::tuple<GraphDataset, GraphDataset, GraphDataset> make_motif_splits(const SplitConfig& cfg);

/// Color covariate shift: identical structural distribution in every split,
/// disjoint graph-wide color palettes (train {0..4}, val {5}, test {6}).
std::tuple<GraphDataset, GraphDataset, GraphDataset> make_color_splits(const SplitConfig& cfg);

}  // namespace ooda
