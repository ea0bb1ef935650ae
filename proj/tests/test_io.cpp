#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "tucktree/io.hpp"

using namespace tucktree;
namespace oracle = tucktree::testing;

namespace {

std::string to_bytes(const StreamSegmentTree& tree) {
  std::ostringstream out(std::ios::binary);
  write_tree(out, tree);
  return out.str();
}

StreamSegmentTree tree_of(Index t, std::uint64_t seed = 11) {
  TreeConfig cfg;
  cfg.nontemporal = {3, 2};
  cfg.ranks = {2, 2, 2};
  cfg.als.max_iters = 6;
  cfg.als.seed = seed;
  StreamSegmentTree tree(cfg);
  std::mt19937_64 rng(500 + static_cast<std::uint64_t>(t));
  for (Index i = 0; i < t; ++i) {
    tree.append(oracle::random_tensor(Shape{3, 2}, rng));
  }
  return tree;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tucktree_io_test_" + name);
}

}  // namespace

TEST_CASE("tensor container round-trips bit-exactly") {
  std::mt19937_64 rng(400);
  DenseTensor x = oracle::random_tensor(Shape{4, 3, 2}, rng);
  x.data()[0] = -0.0;  // sign bit must survive
  x.data()[1] = 1e-308;

  std::ostringstream out(std::ios::binary);
  write_tensor(out, x);
  std::istringstream in(out.str(), std::ios::binary);
  const DenseTensor back = read_tensor(in);

  REQUIRE(back.shape() == x.shape());
  for (Index i = 0; i < x.size(); ++i) {
    CHECK(std::memcmp(&back.data()[i], &x.data()[i], sizeof(double)) == 0);
  }
}

TEST_CASE("order-1 tensors (slices of a matrix series) are supported") {
  const DenseTensor x(Shape{3}, {1.5, -2.5, 0.25});
  std::ostringstream out(std::ios::binary);
  write_tensor(out, x);
  std::istringstream in(out.str(), std::ios::binary);
  const DenseTensor back = read_tensor(in);
  CHECK(back.shape() == x.shape());
  CHECK(back.data()[1] == -2.5);
}

TEST_CASE("malformed tensor input is rejected") {
  std::mt19937_64 rng(401);
  const DenseTensor x = oracle::random_tensor(Shape{2, 2}, rng);
  std::ostringstream out(std::ios::binary);
  write_tensor(out, x);
  const std::string bytes = out.str();

  SUBCASE("truncated payload") {
    std::istringstream in(bytes.substr(0, bytes.size() - 5), std::ios::binary);
    CHECK_THROWS_AS(read_tensor(in), std::runtime_error);
  }
  SUBCASE("bad magic") {
    std::string mangled = bytes;
    mangled[0] = 'X';
    std::istringstream in(mangled, std::ios::binary);
    CHECK_THROWS_AS(read_tensor(in), std::runtime_error);
  }
  SUBCASE("unsupported version") {
    std::string mangled = bytes;
    mangled[4] = 9;
    std::istringstream in(mangled, std::ios::binary);
    CHECK_THROWS_AS(read_tensor(in), std::runtime_error);
  }
}

TEST_CASE("tree container round-trips bit-exactly") {
  const StreamSegmentTree tree = tree_of(9);
  const std::string bytes = to_bytes(tree);

  std::istringstream in(bytes, std::ios::binary);
  const StreamSegmentTree back = read_tree(in);

  CHECK(back.timespan() == tree.timespan());
  CHECK(back.stitch_count() == tree.stitch_count());
  CHECK(back.root() == tree.root());
  CHECK(back.config().nontemporal == tree.config().nontemporal);
  CHECK(back.config().ranks == tree.config().ranks);
  CHECK(back.config().theta == tree.config().theta);
  CHECK(back.config().als.seed == tree.config().als.seed);
  REQUIRE(back.node_count() == tree.node_count());
  for (Index id = 1; id <= tree.node_count(); ++id) {
    const Node& a = tree.node(id);
    const Node& b = back.node(id);
    CHECK(a.begin == b.begin);
    CHECK(a.end == b.end);
    CHECK(a.kind == b.kind);
    CHECK(a.left == b.left);
    CHECK(a.right == b.right);
    REQUIRE(a.decomposition.has_value() == b.decomposition.has_value());
    if (a.decomposition) {
      for (std::size_t n = 0; n < a.decomposition->factors.size(); ++n) {
        CHECK(a.decomposition->factors[n] == b.decomposition->factors[n]);
      }
      for (Index i = 0; i < a.decomposition->core.size(); ++i) {
        CHECK(a.decomposition->core.data()[i] == b.decomposition->core.data()[i]);
      }
    }
  }
  CHECK(back.validate().empty());

  // save -> load -> save is byte stable
  CHECK(to_bytes(back) == bytes);
}

TEST_CASE("tree files survive the filesystem and reject corruption") {
  const StreamSegmentTree tree = tree_of(5);
  const auto path = temp_file("tree.sst");
  write_tree_file(path, tree);
  const StreamSegmentTree back = read_tree_file(path);
  CHECK(back.timespan() == 5);
  CHECK(back.validate().empty());

  SUBCASE("truncated file") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    const auto broken = temp_file("tree_broken.sst");
    std::ofstream out(broken, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS(read_tree_file(broken), std::runtime_error);
    std::filesystem::remove(broken);
  }
  std::filesystem::remove(path);
}

TEST_CASE("csv slice import") {
  const auto path = temp_file("slice.csv");
  {
    std::ofstream out(path);
    out << "2,3\n";
    out << "1.5, 2, -3\n";
    out << "4 5.25 6e-2\n";
  }
  const DenseTensor x = read_csv_slice(path);
  CHECK(x.shape() == Shape{2, 3});
  CHECK(x.at({0, 0}) == 1.5);
  CHECK(x.at({0, 2}) == -3.0);
  CHECK(x.at({1, 2}) == 0.06);

  SUBCASE("value count mismatch") {
    std::ofstream out(path);
    out << "2,2\n1,2,3\n";
    out.close();
    CHECK_THROWS_AS(read_csv_slice(path), std::runtime_error);
  }
  SUBCASE("bad number") {
    std::ofstream out(path);
    out << "1,2\nfoo,1\n";
    out.close();
    CHECK_THROWS_AS(read_csv_slice(path), std::runtime_error);
  }
  std::filesystem::remove(path);
}
