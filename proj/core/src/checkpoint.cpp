#include "ooda/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "ooda/errors.hpp"

namespace ooda {
namespace {

constexpr char kMagic[4] = {'O', 'O', 'D', 'A'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw ParseError("checkpoint truncated");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(os, bits);
}

float get_f32(std::istream& is) {
  std::uint32_t bits = get_u32(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void save_checkpoint(const GraphAttentionNet& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  const NetConfig& c = net.config();
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, c.is_classifier() ? 1 : 0);
  put_u32(os, std::uint32_t(c.layers));
  put_u32(os, std::uint32_t(c.heads));
  put_u32(os, std::uint32_t(c.hidden_x));
  put_u32(os, std::uint32_t(c.hidden_a));
  put_u32(os, std::uint32_t(c.time_dim));
  put_u32(os, std::uint32_t(c.feat_dim));
  put_u32(os, std::uint32_t(c.edge_dim));
  put_u32(os, std::uint32_t(c.n_max));
  put_u32(os, std::uint32_t(c.num_classes));
  std::uint32_t total = 0;
  for (const auto& m : net.params()) total += std::uint32_t(m.size());
  put_u32(os, total);
  for (const auto& m : net.params())
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) put_f32(os, float(m(i, j)));
  if (!os) throw IoError("checkpoint write failed: " + path);
}

GraphAttentionNet load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError("bad checkpoint magic in " + path);
  if (get_u32(is) != kVersion) throw ParseError("unsupported checkpoint version");
  NetConfig c;
  bool classifier = get_u32(is) != 0;
  c.layers = int(get_u32(is));
  c.heads = int(get_u32(is));
  c.hidden_x = int(get_u32(is));
  c.hidden_a = int(get_u32(is));
  c.time_dim = int(get_u32(is));
  c.feat_dim = int(get_u32(is));
  c.edge_dim = int(get_u32(is));
  c.n_max = int(get_u32(is));
  c.num_classes = int(get_u32(is));
  if (classifier != c.is_classifier())
    throw ParseError("checkpoint kind disagrees with class count");

  GraphAttentionNet net(c, 0);
  std::uint32_t total = get_u32(is);
  std::uint32_t expect = 0;
  for (const auto& m : net.params()) expect += std::uint32_t(m.size());
  if (total != expect)
    throw ParseError("checkpoint parameter count mismatch (header " +
                     std::to_string(total) + ", architecture " + std::to_string(expect) + ")");
  for (auto& m : net.params())
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) m(i, j) = double(get_f32(is));
  return net;
}

GraphAttentionNet load_checkpoint_expecting(const std::string& path,
                                            const NetConfig& expected) {
  GraphAttentionNet net = load_checkpoint(path);
  const NetConfig& c = net.config();
  auto mismatch = [&](const std::string& field) {
    throw ParseError("checkpoint " + path + " header mismatch: " + field);
  };
  if (c.layers != expected.layers) mismatch("layers");
  if (c.heads != expected.heads) mismatch("heads");
  if (c.hidden_x != expected.hidden_x) mismatch("hidden_x");
  if (c.hidden_a != expected.hidden_a) mismatch("hidden_a");
  if (c.time_dim != expected.time_dim) mismatch("time_dim");
  if (c.feat_dim != expected.feat_dim) mismatch("feat_dim");
  if (c.edge_dim != expected.edge_dim) mismatch("edge_dim");
  if (c.n_max != expected.n_max) mismatch("n_max");
  if (c.num_classes != expected.num_classes) mismatch("num_classes");
  return net;
}

}  // namespace ooda
