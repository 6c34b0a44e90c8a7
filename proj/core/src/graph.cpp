#include "ooda/graph.hpp"

#include <queue>
#include <sstream>

#include "ooda/errors.hpp"

namespace ooda {

DenseGraph DenseGraph::zeros(int n_max, int a, int b, int n_active) {
  if (n_max <= 0 || a <= 0 || b <= 0)
    throw ShapeError("DenseGraph dimensions must be positive");
  if (n_active < 0 || n_active > n_max)
    throw ShapeError("active node count out of range");
  DenseGraph g;
  g.node_features = Eigen::MatrixXf::Zero(n_max, a);
  g.adjacency.assign(std::size_t(b), Eigen::MatrixXf::Zero(n_max, n_max));
  g.node_mask.assign(std::size_t(n_max), 0);
  for (int i = 0; i < n_active; ++i) g.node_mask[std::size_t(i)] = 1;
  return g;
}

int DenseGraph::degree(int i) const {
  int d = 0;
  for (int j = 0; j < n_max(); ++j) {
    if (j == i) continue;
    float w = 0.0f;
    for (const auto& ch : adjacency) w += ch(i, j);
    if (w > 0.5f) ++d;
  }
  return d;
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << invariant << " at (";
  if (i >= 0) os << i;
  if (j >= 0) os << "," << j;
  if (c >= 0) os << "," << c;
  os << ")";
  return os.str();
}

namespace {

void check_structure(const DenseGraph& g, std::vector<Violation>& out) {
  const int n = g.n_max();
  const int b = g.edge_dim();
  if (int(g.node_mask.size()) != n) {
    out.push_back({"mask length mismatch", int(g.node_mask.size()), -1, -1});
    return;
  }
  for (int c = 0; c < b; ++c) {
    if (g.adjacency[std::size_t(c)].rows() != n ||
        g.adjacency[std::size_t(c)].cols() != n) {
      out.push_back({"adjacency shape mismatch", -1, -1, c});
      return;
    }
  }

  bool asym = false, diag = false, masked_x = false, masked_a = false;
  for (int c = 0; c < b && !asym; ++c) {
    const auto& A = g.adjacency[std::size_t(c)];
    for (int i = 0; i < n && !asym; ++i)
      for (int j = i + 1; j < n; ++j)
        if (A(i, j) != A(j, i)) {
          out.push_back({"asymmetry", i, j, c});
          asym = true;
          break;
        }
  }
  for (int c = 0; c < b && !diag; ++c) {
    const auto& A = g.adjacency[std::size_t(c)];
    for (int i = 0; i < n; ++i)
      if (A(i, i) != 0.0f) {
        out.push_back({"nonzero diagonal", i, -1, c});
        diag = true;
        break;
      }
  }
  for (int i = 0; i < n && !masked_x; ++i) {
    if (g.node_mask[std::size_t(i)]) continue;
    for (int k = 0; k < g.feat_dim(); ++k)
      if (g.node_features(i, k) != 0.0f) {
        out.push_back({"masked row nonzero", i, k, -1});
        masked_x = true;
        break;
      }
  }
  for (int c = 0; c < b && !masked_a; ++c) {
    const auto& A = g.adjacency[std::size_t(c)];
    for (int i = 0; i < n && !masked_a; ++i) {
      for (int j = 0; j < n; ++j) {
        bool masked = !g.node_mask[std::size_t(i)] || !g.node_mask[std::size_t(j)];
        if (masked && A(i, j) != 0.0f) {
          out.push_back({"masked adjacency nonzero", i, j, c});
          masked_a = true;
          break;
        }
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate(const DenseGraph& g) {
  std::vector<Violation> out;
  check_structure(g, out);
  return out;
}

std::vector<Violation> validate_discrete(const DenseGraph& g) {
  std::vector<Violation> out;
  check_structure(g, out);
  bool bad_a = false, bad_x = false;
  for (int c = 0; c < g.edge_dim() && !bad_a; ++c) {
    const auto& A = g.adjacency[std::size_t(c)];
    for (int i = 0; i < g.n_max() && !bad_a; ++i)
      for (int j = 0; j < g.n_max(); ++j) {
        float v = A(i, j);
        if (v != 0.0f && v != 1.0f) {
          out.push_back({"non-binary adjacency entry", i, j, c});
          bad_a = true;
          break;
        }
      }
  }
  for (int i = 0; i < g.n_max() && !bad_x; ++i)
    for (int k = 0; k < g.feat_dim(); ++k) {
      float v = g.node_features(i, k);
      if (v != 0.0f && v != 1.0f) {
        out.push_back({"non-binary feature entry", i, k, -1});
        bad_x = true;
        break;
      }
    }
  return out;
}

std::vector<Eigen::MatrixXf> sym_channels(const std::vector<Eigen::MatrixXf>& a) {
  std::vector<Eigen::MatrixXf> out;
  out.reserve(a.size());
  for (const auto& ch : a) out.push_back(0.5f * (ch + ch.transpose()));
  return out;
}

bool is_connected(const DenseGraph& g) {
  const int n = g.n_max();
  int start = -1, active = 0;
  for (int i = 0; i < n; ++i)
    if (g.node_mask[std::size_t(i)]) {
      if (start < 0) start = i;
      ++active;
    }
  if (active <= 1) return true;

  std::vector<char> seen(std::size_t(n), 0);
  std::queue<int> q;
  q.push(start);
  seen[std::size_t(start)] = 1;
  int reached = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      if (seen[std::size_t(v)] || !g.node_mask[std::size_t(v)] || v == u) continue;
      float w = 0.0f;
      for (const auto& ch : g.adjacency) w += ch(u, v);
      if (w > 0.5f) {
        seen[std::size_t(v)] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  return reached == active;
}

bool is_connected_ignoring_isolated(const DenseGraph& g) {
  DenseGraph pruned = g;
  for (int i = 0; i < g.n_max(); ++i)
    if (g.node_mask[std::size_t(i)] && g.degree(i) == 0)
      pruned.node_mask[std::size_t(i)] = 0;
  // the pruned mask may be non-contiguous; is_connected only reads it
  return is_connected(pruned);
}

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    case SplitTag::test: return "test";
    case SplitTag::augmented: return "augmented";
  }
  return "train";
}

SplitTag split_tag_from_string(const std::string& s) {
  if (s == "train") return SplitTag::train;
  if (s == "val") return SplitTag::val;
  if (s == "test") return SplitTag::test;
  if (s == "augmented") return SplitTag::augmented;
  throw ParseError("unknown split tag: " + s);
}

void GraphDataset::check_consistent() const {
  if (graphs.empty()) return;
  const int n = graphs.front().n_max();
  const int a = graphs.front().feat_dim();
  const int b = graphs.front().edge_dim();
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto& g = graphs[k];
    if (g.n_max() != n || g.feat_dim() != a || g.edge_dim() != b)
      throw DataError("graph " + std::to_string(k) + " disagrees with dataset schema");
    if (g.label && (*g.label < 0 || *g.label >= num_classes))
      throw DataError("graph " + std::to_string(k) + " label out of range");
  }
  if (!feature_blocks.empty()) {
    int sum = 0;
    for (int s : feature_blocks) sum += s;
    if (sum != a) throw DataError("feature_blocks do not sum to feature dim");
  }
}

}  // namespace ooda
