#include "tucktree/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace tucktree {

namespace {

constexpr char kTensorMagic[4] = {'T', 'T', 'S', '1'};
constexpr char kTreeMagic[4] = {'S', 'S', 'T', '1'};
constexpr std::uint16_t kFormatVersion = 1;

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void read_bytes(std::istream& in, void* data, std::size_t n, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    fail(std::string("truncated input while reading ") + what);
  }
}

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T> && std::is_unsigned_v<T>);
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  }
  write_bytes(out, bytes, sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(T)];
  read_bytes(in, bytes, sizeof(T), what);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return value;
}

void write_f64(std::ostream& out, double value) {
  write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(value));
}

double read_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(read_le<std::uint64_t>(in, what));
}

void write_f64_span(std::ostream& out, std::span<const double> values) {
  for (double v : values) write_f64(out, v);
}

void read_f64_span(std::istream& in, std::span<double> values, const char* what) {
  for (double& v : values) v = read_f64(in, what);
}

Index read_extent(std::istream& in, const char* what) {
  const std::uint64_t raw = read_le<std::uint64_t>(in, what);
  if (raw == 0 || raw > static_cast<std::uint64_t>(std::numeric_limits<Index>::max())) {
    fail(std::string("invalid extent in ") + what);
  }
  return static_cast<Index>(raw);
}

void expect_magic(std::istream& in, const char (&magic)[4], const char* what) {
  char got[4];
  read_bytes(in, got, 4, what);
  if (std::memcmp(got, magic, 4) != 0) fail(std::string("bad magic for ") + what);
  const std::uint16_t version = read_le<std::uint16_t>(in, what);
  if (version != kFormatVersion) {
    fail(std::string("unsupported version ") + std::to_string(version) + " for " + what);
  }
}

void write_factors(std::ostream& out, const TuckerFactors& f) {
  const Index p = f.order();
  write_le<std::uint8_t>(out, static_cast<std::uint8_t>(p));
  for (Index n = 0; n < p; ++n) {
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(f.core.dim(n)));
  }
  write_f64_span(out, f.core.data());
  for (const Eigen::MatrixXd& u : f.factors) {
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(u.rows()));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(u.cols()));
    for (Index i = 0; i < u.rows(); ++i) {
      for (Index j = 0; j < u.cols(); ++j) write_f64(out, u(i, j));
    }
  }
}

TuckerFactors read_factors(std::istream& in) {
  const Index p = read_le<std::uint8_t>(in, "factor header");
  if (p < 1) fail("factor header: order must be >= 1");
  std::vector<Index> core_dims(static_cast<std::size_t>(p));
  for (Index& d : core_dims) d = read_extent(in, "core dims");
  TuckerFactors f;
  f.core = DenseTensor(Shape(core_dims));
  read_f64_span(in, f.core.data(), "core payload");
  for (Index n = 0; n < p; ++n) {
    const Index rows = read_extent(in, "factor rows");
    const Index cols = read_extent(in, "factor cols");
    Eigen::MatrixXd u(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) u(i, j) = read_f64(in, "factor payload");
    }
    f.factors.push_back(std::move(u));
  }
  return f;
}

}  // namespace

void write_tensor(std::ostream& out, const DenseTensor& x) {
  write_bytes(out, kTensorMagic, 4);
  write_le<std::uint16_t>(out, kFormatVersion);
  write_le<std::uint8_t>(out, static_cast<std::uint8_t>(x.order()));
  for (Index n = 0; n < x.order(); ++n) {
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.dim(n)));
  }
  write_f64_span(out, x.data());
  if (!out) fail("tensor write failed");
}

DenseTensor read_tensor(std::istream& in) {
  expect_magic(in, kTensorMagic, "tensor file");
  const Index p = read_le<std::uint8_t>(in, "tensor header");
  if (p < 1) fail("tensor header: order must be >= 1");
  std::vector<Index> dims(static_cast<std::size_t>(p));
  for (Index& d : dims) d = read_extent(in, "tensor dims");
  DenseTensor x((Shape(dims)));
  read_f64_span(in, x.data(), "tensor payload");
  return x;
}

void write_tensor_file(const std::filesystem::path& path, const DenseTensor& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open " + path.string() + " for writing");
  write_tensor(out, x);
  if (!out) fail("failed writing " + path.string());
}

DenseTensor read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path.string());
  return read_tensor(in);
}

void write_tree(std::ostream& out, const StreamSegmentTree& tree) {
  const TreeConfig& cfg = tree.config();
  write_bytes(out, kTreeMagic, 4);
  write_le<std::uint16_t>(out, kFormatVersion);
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(tree.timespan()));
  write_le<std::uint8_t>(out, static_cast<std::uint8_t>(cfg.nontemporal.size() + 1));
  for (Index d : cfg.nontemporal) write_le<std::uint64_t>(out, static_cast<std::uint64_t>(d));
  for (Index r : cfg.ranks) write_le<std::uint64_t>(out, static_cast<std::uint64_t>(r));
  write_f64(out, cfg.theta);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.als.max_iters));
  write_f64(out, cfg.als.tol);
  write_le<std::uint64_t>(out, cfg.als.seed);
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(tree.stitch_count()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(tree.root()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(tree.node_count()));
  for (const Node& v : tree.nodes()) {
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(v.id));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(v.begin));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(v.end));
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(v.kind));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(v.left));
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(v.right));
    write_le<std::uint8_t>(out, v.decomposition ? 1 : 0);
    if (v.decomposition) write_factors(out, *v.decomposition);
  }
  if (!out) fail("tree write failed");
}

StreamSegmentTree read_tree(std::istream& in) {
  expect_magic(in, kTreeMagic, "tree file");
  const auto timespan = read_le<std::uint64_t>(in, "timespan");
  const Index p = read_le<std::uint8_t>(in, "tree header");
  if (p < 2) fail("tree header: order must be >= 2");
  TreeConfig cfg;
  cfg.nontemporal.resize(static_cast<std::size_t>(p - 1));
  for (Index& d : cfg.nontemporal) d = read_extent(in, "tree shape");
  cfg.ranks.resize(static_cast<std::size_t>(p));
  for (Index& r : cfg.ranks) r = read_extent(in, "tree ranks");
  cfg.theta = read_f64(in, "tree theta");
  cfg.als.max_iters = static_cast<int>(read_le<std::uint32_t>(in, "als iters"));
  cfg.als.tol = read_f64(in, "als tol");
  cfg.als.seed = read_le<std::uint64_t>(in, "als seed");
  const auto stitches = read_le<std::uint64_t>(in, "stitch count");
  const auto root = read_le<std::uint64_t>(in, "root id");
  const auto count = read_le<std::uint64_t>(in, "node count");
  std::vector<Node> nodes;
  nodes.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Node v;
    v.id = static_cast<NodeId>(read_le<std::uint64_t>(in, "node id"));
    v.begin = static_cast<Index>(read_le<std::uint64_t>(in, "node range"));
    v.end = static_cast<Index>(read_le<std::uint64_t>(in, "node range"));
    const auto kind = read_le<std::uint8_t>(in, "node kind");
    if (kind > 2) fail("invalid node kind " + std::to_string(kind));
    v.kind = static_cast<NodeKind>(kind);
    v.left = static_cast<NodeId>(read_le<std::uint64_t>(in, "node children"));
    v.right = static_cast<NodeId>(read_le<std::uint64_t>(in, "node children"));
    if (read_le<std::uint8_t>(in, "node payload flag") != 0) {
      v.decomposition = read_factors(in);
    }
    nodes.push_back(std::move(v));
  }
  return StreamSegmentTree::from_parts(std::move(cfg), std::move(nodes),
                                       static_cast<NodeId>(root),
                                       static_cast<Index>(timespan),
                                       static_cast<Index>(stitches));
}

void write_tree_file(const std::filesystem::path& path, const StreamSegmentTree& tree) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open " + path.string() + " for writing");
  write_tree(out, tree);
  if (!out) fail("failed writing " + path.string());
}

StreamSegmentTree read_tree_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path.string());
  return read_tree(in);
}

DenseTensor read_csv_slice(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) fail(path.string() + ": missing dims header");
  std::vector<Index> dims;
  {
    std::stringstream ss(header);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        dims.push_back(static_cast<Index>(std::stoll(field)));
      } catch (const std::exception&) {
        fail(path.string() + ": bad extent '" + field + "'");
      }
    }
  }
  if (dims.empty()) fail(path.string() + ": empty dims header");
  DenseTensor x((Shape(dims)));
  Index have = 0;
  std::string token;
  while (in) {
    int c = in.peek();
    if (c == EOF) break;
    if (c == ',' || std::isspace(c)) {
      in.get();
      continue;
    }
    in >> token;
    // tokens may still carry trailing commas when fields are comma-packed
    std::stringstream ss(token);
    std::string field;
    while (std::getline(ss, field, ',')) {
      if (field.empty()) continue;
      char* end = nullptr;
      const double value = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0') {
        fail(path.string() + ": bad value '" + field + "'");
      }
      if (have >= x.size()) fail(path.string() + ": more values than the dims admit");
      x.data()[have++] = value;
    }
  }
  if (have != x.size()) {
    fail(path.string() + ": expected " + std::to_string(x.size()) + " values, got " +
         std::to_string(have));
  }
  return x;
}

}  // namespace tucktree
