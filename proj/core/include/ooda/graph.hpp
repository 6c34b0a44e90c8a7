#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ooda {

/// Padded dense graph: the carrier shared by every module.
///
/// Node features X are n_max x a, the adjacency A is b channels of
/// n_max x n_max (edge features are the channels), and node_mask marks the
/// real nodes. Values are float32 so that the 9-significant-digit text
/// serialization round-trips bit-exactly. Instances are immutable by
/// convention after construction; mutate by building a new value.
struct DenseGraph {
  Eigen::MatrixXf node_features;           // n_max x a
  std::vector<Eigen::MatrixXf> adjacency;  // b channels, each n_max x n_max
  std::vector<std::uint8_t> node_mask;     // 1 = real node
  std::optional<int> label;
  std::map<std::string, std::string> meta;  // provenance tags

  int n_max() const { return int(node_features.rows()); }
  int feat_dim() const { return int(node_features.cols()); }
  int edge_dim() const { return int(adjacency.size()); }

  int active_nodes() const {
    int n = 0;
    for (auto m : node_mask) n += m ? 1 : 0;
    return n;
  }

  /// Zero-initialized graph with the first n_active nodes unmasked.
  static DenseGraph zeros(int n_max, int a, int b, int n_active);

  /// Degree of node i in channel-summed adjacency, counting entries > 0.5.
  int degree(int i) const;
};

/// A named invariant violation with the first offending index.
struct Violation {
  std::string invariant;
  int i = -1, j = -1, c = -1;
  std::string describe() const;
};

/// Structural invariant check: per-channel symmetry, zero diagonal, zeroed
/// masked rows/columns. Empty result means the graph is valid. Reports at
/// most one violation per invariant, carrying the first offending index.
std::vector<Violation> validate(const DenseGraph& g);

/// validate() plus the discrete-graph requirement that every feature and
/// adjacency entry is exactly 0 or 1.
std::vector<Violation> validate_discrete(const DenseGraph& g);

/// (A + A^T)/2 per channel. Idempotent; a fixpoint on valid graphs.
std::vector<Eigen::MatrixXf> sym_channels(const std::vector<Eigen::MatrixXf>& a);

/// True if the unmasked subgraph is connected (BFS over entries > 0.5 in any
/// channel). Graphs with zero or one active node count as connected.
bool is_connected(const DenseGraph& g);

/// is_connected after dropping isolated (degree-0) active nodes: sampled
/// graphs occasionally leave a node unattached, and the reported
/// connectivity metric treats such nodes as padding.
bool is_connected_ignoring_isolated(const DenseGraph& g);

enum class SplitTag { train, val, test, augmented };

std::string to_string(SplitTag tag);
SplitTag split_tag_from_string(const std::string& s);

/// Ordered collection of graphs sharing one schema (n_max, a, b).
struct GraphDataset {
  std::vector<DenseGraph> graphs;
  int num_classes = 0;
  SplitTag split_tag = SplitTag::train;
  /// One-hot block sizes of the feature dimension (e.g. {11, 7} for
  /// degree + color). Sums to a. Quantization argmaxes within each block.
  std::vector<int> feature_blocks;
  std::map<std::string, std::string> meta;

  int n_max() const { return graphs.empty() ? 0 : graphs.front().n_max(); }
  int feat_dim() const { return graphs.empty() ? 0 : graphs.front().feat_dim(); }
  int edge_dim() const { return graphs.empty() ? 0 : graphs.front().edge_dim(); }
  std::size_t size() const { return graphs.size(); }

  /// Throws DataError if graphs disagree on shape or a label >= num_classes.
  void check_consistent() const;
};

}  // namespace ooda
