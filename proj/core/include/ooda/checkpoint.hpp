#pragma once

#include <string>

#include "ooda/nets.hpp"

namespace ooda {

/// Binary checkpoint: magic "OODA", u32 format version, little-endian
/// architecture header (net kind, L, H, hidden_x, hidden_a, time_dim, a, b,
/// n_max, M), u32 total float count, then float32 parameter blocks in
/// declaration order.
void save_checkpoint(const GraphAttentionNet& net, const std::string& path);

/// Rebuilds the network from the header. Throws ParseError on a bad magic,
/// version or truncated file.
GraphAttentionNet load_checkpoint(const std::string& path);

/// Loads and additionally rejects checkpoints whose header disagrees with
/// the expected architecture (shape-compatibility gate for callers that
/// already know the schema).
GraphAttentionNet load_checkpoint_expecting(const std::string& path,
                                            const NetConfig& expected);

}  // namespace ooda
