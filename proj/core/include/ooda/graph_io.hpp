#pragma once

#include <string>

#include "ooda/graph.hpp"

namespace ooda {

/// Line-delimited JSON dataset format (`.graphs.jsonl`).
///
/// Line 1 is a header record {n_max, a, b, M, split_tag, feature_blocks,
/// meta?}; each following line is one graph {n, x, edges, label, meta?} where
/// n is the active node count, x the n x a feature rows, and edges the list
/// of [i, j, [channel values]] with i < j (the diagonal is zero and the
/// adjacency symmetric, so one triangle suffices). Floats are written with 9
/// significant digits, which round-trips float32 bit-exactly.
void write_dataset(const GraphDataset& ds, const std::string& path);

/// Inverse of write_dataset. Throws ParseError with the offending line
/// number on malformed records and ShapeError on dimension mismatches
/// against the header.
GraphDataset read_dataset(const std::string& path);

/// Serialize to a string (same bytes write_dataset puts in the file).
std::string dataset_to_string(const GraphDataset& ds);

}  // namespace ooda
