#pragma once

#include "ooda/graph.hpp"
#include "ooda/sde.hpp"

namespace ooda {

inline Mask mask_of(const DenseGraph& g) { return g.node_mask; }

inline Eigen::MatrixXd node_tensor(const DenseGraph& g) {
  return g.node_features.cast<double>();
}

inline AdjChannels adj_tensor(const DenseGraph& g) {
  AdjChannels out;
  out.reserve(g.adjacency.size());
  for (const auto& ch : g.adjacency) out.push_back(ch.cast<double>());
  return out;
}

}  // namespace ooda
