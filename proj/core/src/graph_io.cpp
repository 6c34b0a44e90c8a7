#include "ooda/graph_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ooda/errors.hpp"

namespace ooda {
namespace {

using nlohmann::json;

std::string fmt_float(float v) {
  if (!std::isfinite(v)) throw DataError("non-finite value in dataset");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", double(v));
  return buf;
}

std::string escape_json(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void append_meta(std::ostringstream& os, const std::map<std::string, std::string>& meta) {
  os << "{";
  bool first = true;
  for (const auto& [k, v] : meta) {
    if (!first) os << ",";
    first = false;
    os << "\"" << escape_json(k) << "\":\"" << escape_json(v) << "\"";
  }
  os << "}";
}

int contiguous_active_count(const DenseGraph& g) {
  int n = 0;
  bool in_padding = false;
  for (auto m : g.node_mask) {
    if (m) {
      if (in_padding)
        throw DataError("write_dataset requires a contiguous node mask");
      ++n;
    } else {
      in_padding = true;
    }
  }
  return n;
}

void write_graph_record(std::ostringstream& os, const DenseGraph& g) {
  const int n = contiguous_active_count(g);
  const int a = g.feat_dim();
  const int b = g.edge_dim();
  os << "{\"n\":" << n << ",\"x\":[";
  for (int i = 0; i < n; ++i) {
    if (i) os << ",";
    os << "[";
    for (int k = 0; k < a; ++k) {
      if (k) os << ",";
      os << fmt_float(g.node_features(i, k));
    }
    os << "]";
  }
  os << "],\"edges\":[";
  bool first = true;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool nonzero = false;
      for (int c = 0; c < b; ++c)
        if (g.adjacency[std::size_t(c)](i, j) != 0.0f) nonzero = true;
      if (!nonzero) continue;
      if (!first) os << ",";
      first = false;
      os << "[" << i << "," << j << ",[";
      for (int c = 0; c < b; ++c) {
        if (c) os << ",";
        os << fmt_float(g.adjacency[std::size_t(c)](i, j));
      }
      os << "]]";
    }
  }
  os << "],\"label\":";
  if (g.label)
    os << *g.label;
  else
    os << "null";
  if (!g.meta.empty()) {
    os << ",\"meta\":";
    append_meta(os, g.meta);
  }
  os << "}\n";
}

DenseGraph parse_graph_record(const json& j, int n_max, int a, int b, int line) {
  auto fail = [line](const std::string& what) -> ShapeError {
    return ShapeError("line " + std::to_string(line) + ": " + what);
  };
  if (!j.contains("n") || !j.contains("x") || !j.contains("edges"))
    throw ParseError("line " + std::to_string(line) + ": missing record field");
  const int n = j.at("n").get<int>();
  if (n < 0 || n > n_max) throw fail("active node count exceeds header n_max");
  DenseGraph g = DenseGraph::zeros(n_max, a, b, n);
  const auto& x = j.at("x");
  if (int(x.size()) != n) throw fail("x row count disagrees with n");
  for (int i = 0; i < n; ++i) {
    const auto& row = x.at(std::size_t(i));
    if (int(row.size()) != a) throw fail("x row width disagrees with header a");
    for (int k = 0; k < a; ++k)
      g.node_features(i, k) = float(row.at(std::size_t(k)).get<double>());
  }
  for (const auto& e : j.at("edges")) {
    if (e.size() != 3) throw fail("edge entry is not [i, j, channels]");
    const int i = e.at(0).get<int>();
    const int jj = e.at(1).get<int>();
    if (i < 0 || jj < 0 || i >= n || jj >= n) throw fail("edge endpoint out of range");
    const auto& ch = e.at(2);
    if (int(ch.size()) != b) throw fail("edge channel count disagrees with header b");
    for (int c = 0; c < b; ++c) {
      auto v = float(ch.at(std::size_t(c)).get<double>());
      g.adjacency[std::size_t(c)](i, jj) = v;
      g.adjacency[std::size_t(c)](jj, i) = v;
    }
  }
  if (j.contains("label") && !j.at("label").is_null())
    g.label = j.at("label").get<int>();
  if (j.contains("meta"))
    for (const auto& [k, v] : j.at("meta").items())
      g.meta[k] = v.get<std::string>();
  return g;
}

}  // namespace

std::string dataset_to_string(const GraphDataset& ds) {
  ds.check_consistent();
  std::ostringstream os;
  const int n_max = ds.n_max();
  const int a = ds.feat_dim();
  const int b = ds.edge_dim();
  os << "{\"n_max\":" << n_max << ",\"a\":" << a << ",\"b\":" << b
     << ",\"M\":" << ds.num_classes << ",\"split_tag\":\"" << to_string(ds.split_tag)
     << "\",\"feature_blocks\":[";
  for (std::size_t k = 0; k < ds.feature_blocks.size(); ++k) {
    if (k) os << ",";
    os << ds.feature_blocks[k];
  }
  os << "]";
  if (!ds.meta.empty()) {
    os << ",\"meta\":";
    append_meta(os, ds.meta);
  }
  os << "}\n";
  for (const auto& g : ds.graphs) write_graph_record(os, g);
  return os.str();
}

void write_dataset(const GraphDataset& ds, const std::string& path) {
  std::string text = dataset_to_string(ds);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

GraphDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);

  GraphDataset ds;
  std::string line;
  int line_no = 0;
  int n_max = 0, a = 0, b = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("parse error at line " + std::to_string(line_no) +
                       " (last complete line: " + std::to_string(line_no - 1) +
                       "): " + e.what());
    }
    if (line_no == 1) {
      try {
        n_max = j.at("n_max").get<int>();
        a = j.at("a").get<int>();
        b = j.at("b").get<int>();
        ds.num_classes = j.at("M").get<int>();
        ds.split_tag = split_tag_from_string(j.at("split_tag").get<std::string>());
        for (const auto& s : j.at("feature_blocks")) ds.feature_blocks.push_back(s.get<int>());
        if (j.contains("meta"))
          for (const auto& [k, v] : j.at("meta").items()) ds.meta[k] = v.get<std::string>();
      } catch (const json::exception& e) {
        throw ParseError(std::string("malformed header record: ") + e.what());
      }
      continue;
    }
    ds.graphs.push_back(parse_graph_record(j, n_max, a, b, line_no));
  }
  if (line_no == 0) throw ParseError("empty dataset file: " + path);
  ds.check_consistent();
  return ds;
}

}  // namespace ooda
