#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tucktree/io.hpp"
#include "tucktree/tensor.hpp"

using namespace tucktree;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + TUCKTREE_CLI_PATH + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buf[4096];
  while (fgets(buf, sizeof buf, pipe) != nullptr) result.output += buf;
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "tucktree_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_of(const std::string& name) { return (workdir() / name).string(); }

DenseTensor make_series(Index t, Index d2, Index d3, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseTensor x(Shape{t, d2, d3});
  for (double& v : x.data()) v = normal(rng);
  return x;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

TEST_CASE("build prints the tree summary and height law") {
  write_tensor_file(path_of("nine.tts"), make_series(9, 4, 3, 1));
  const RunResult r = run("build --input " + path_of("nine.tts") + " --out " +
                          path_of("nine.sst") + " --ranks 3,3,3 --seed 7");
  CHECK(r.code == 0);
  CHECK(r.output.find("timespan: 9") != std::string::npos);
  CHECK(r.output.find("height: 5") != std::string::npos);

  write_tensor_file(path_of("one.tts"), make_series(1, 4, 3, 2));
  const RunResult r1 = run("build --input " + path_of("one.tts") + " --out " +
                           path_of("one.sst") + " --ranks 1,3,3 --seed 7");
  CHECK(r1.code == 0);
  CHECK(r1.output.find("height: 1") != std::string::npos);
}

TEST_CASE("build is deterministic for a fixed seed") {
  write_tensor_file(path_of("det.tts"), make_series(6, 4, 3, 3));
  CHECK(run("build --input " + path_of("det.tts") + " --out " + path_of("det_a.sst") +
            " --ranks 2,2,2 --seed 5")
            .code == 0);
  CHECK(run("build --input " + path_of("det.tts") + " --out " + path_of("det_b.sst") +
            " --ranks 2,2,2 --seed 5")
            .code == 0);
  CHECK(file_bytes(path_of("det_a.sst")) == file_bytes(path_of("det_b.sst")));
}

TEST_CASE("SST_SEED provides the default seed") {
  write_tensor_file(path_of("env.tts"), make_series(4, 4, 3, 4));
  CHECK(run("build --input " + path_of("env.tts") + " --out " + path_of("env_a.sst") +
            " --ranks 2,2,2",
            "SST_SEED=123")
            .code == 0);
  CHECK(run("build --input " + path_of("env.tts") + " --out " + path_of("env_b.sst") +
            " --ranks 2,2,2 --seed 123")
            .code == 0);
  CHECK(file_bytes(path_of("env_a.sst")) == file_bytes(path_of("env_b.sst")));
}

TEST_CASE("append matches building from the longer series bit-exactly") {
  const DenseTensor series = make_series(9, 4, 3, 5);
  write_tensor_file(path_of("full9.tts"), series);
  DenseTensor first8(Shape{8, 4, 3},
                     std::vector<double>(series.data().begin(),
                                         series.data().begin() + 8 * 12));
  write_tensor_file(path_of("first8.tts"), first8);
  write_tensor_file(path_of("slice8.tts"), temporal_slice(series, 8));

  CHECK(run("build --input " + path_of("full9.tts") + " --out " + path_of("whole.sst") +
            " --ranks 3,3,3 --seed 9")
            .code == 0);
  CHECK(run("build --input " + path_of("first8.tts") + " --out " + path_of("grown.sst") +
            " --ranks 3,3,3 --seed 9")
            .code == 0);
  const RunResult appended =
      run("append --tree " + path_of("grown.sst") + " --slice " + path_of("slice8.tts"));
  CHECK(appended.code == 0);
  CHECK(appended.output.find("timespan: 9") != std::string::npos);
  CHECK(file_bytes(path_of("grown.sst")) == file_bytes(path_of("whole.sst")));
}

TEST_CASE("append rejects mismatched slices and leaves the file untouched") {
  write_tensor_file(path_of("base.tts"), make_series(3, 4, 3, 6));
  CHECK(run("build --input " + path_of("base.tts") + " --out " + path_of("base.sst") +
            " --ranks 2,2,2 --seed 11")
            .code == 0);
  const std::string before = file_bytes(path_of("base.sst"));
  write_tensor_file(path_of("bad_slice.tts"), make_series(2, 5, 3, 7));  // wrong shape
  const RunResult r =
      run("append --tree " + path_of("base.sst") + " --slice " + path_of("bad_slice.tts"));
  CHECK(r.code != 0);
  CHECK(file_bytes(path_of("base.sst")) == before);
}

TEST_CASE("query prints the hit composition and writes a reloadable bundle") {
  write_tensor_file(path_of("q.tts"), make_series(9, 4, 3, 8));
  REQUIRE(run("build --input " + path_of("q.tts") + " --out " + path_of("q.sst") +
              " --ranks 3,3,3 --seed 13 --theta 0.7")
              .code == 0);

  const RunResult r = run("query --tree " + path_of("q.sst") + " --range 1:6 --out " +
                          path_of("q_result") + " --input " + path_of("q.tts"));
  CHECK(r.code == 0);
  CHECK(r.output.find("hits: 1 entire, 1 partial") != std::string::npos);
  CHECK(r.output.find("residual:") != std::string::npos);

  // factor files reload and re-query bit-identically
  const DenseTensor core = read_tensor_file(path_of("q_result.core.tts"));
  const DenseTensor u1 = read_tensor_file(path_of("q_result.u1.tts"));
  CHECK(u1.dim(0) == 5);  // Te - Ts
  CHECK(core.order() == 3);
  const RunResult again = run("query --tree " + path_of("q.sst") + " --range 1:6 --out " +
                              path_of("q_again"));
  CHECK(again.code == 0);
  CHECK(file_bytes(path_of("q_again.core.tts")) == file_bytes(path_of("q_result.core.tts")));
  CHECK(file_bytes(path_of("q_again.u1.tts")) == file_bytes(path_of("q_result.u1.tts")));

  // full range over a power-of-two timespan resolves to the root
  write_tensor_file(path_of("q8.tts"), make_series(8, 4, 3, 9));
  REQUIRE(run("build --input " + path_of("q8.tts") + " --out " + path_of("q8.sst") +
              " --ranks 3,3,3 --seed 13")
              .code == 0);
  const RunResult full =
      run("query --tree " + path_of("q8.sst") + " --range 0:8 --out " + path_of("q8_res"));
  CHECK(full.code == 0);
  CHECK(full.output.find("hits: 1 entire, 0 partial") != std::string::npos);

  const RunResult bad =
      run("query --tree " + path_of("q8.sst") + " --range 5:3 --out " + path_of("nope"));
  CHECK(bad.code != 0);
}

TEST_CASE("validate accepts fresh trees and flags corruption") {
  write_tensor_file(path_of("v.tts"), make_series(9, 4, 3, 10));
  REQUIRE(run("build --input " + path_of("v.tts") + " --out " + path_of("v.sst") +
              " --ranks 3,3,3 --seed 17")
              .code == 0);
  CHECK(run("validate --tree " + path_of("v.sst")).code == 0);

  SUBCASE("bit-flipped factor payload") {
    std::string bytes = file_bytes(path_of("v.sst"));
    bytes[bytes.size() - 1] ^= 0x40;  // exponent bit of the last factor entry
    std::ofstream out(path_of("v_flip.sst"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    const RunResult r = run("validate --tree " + path_of("v_flip.sst"));
    CHECK(r.code != 0);
    CHECK(r.output.find("orthonormality") != std::string::npos);
  }

  SUBCASE("truncated file") {
    const std::string bytes = file_bytes(path_of("v.sst"));
    std::ofstream out(path_of("v_trunc.sst"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 3));
    out.close();
    const RunResult r = run("validate --tree " + path_of("v_trunc.sst"));
    CHECK(r.code != 0);
    CHECK(r.output.find("truncated") != std::string::npos);
  }
}

TEST_CASE("build warns about and clamps oversized ranks") {
  write_tensor_file(path_of("clamp.tts"), make_series(4, 3, 2, 11));
  const RunResult r = run("build --input " + path_of("clamp.tts") + " --out " +
                          path_of("clamp.sst") + " --ranks 2,9,9 --seed 19");
  CHECK(r.code == 0);
  CHECK(r.output.find("warning") != std::string::npos);
  CHECK(run("validate --tree " + path_of("clamp.sst")).code == 0);
}

TEST_CASE("bench writes the report table") {
  const RunResult r = run(
      "bench --spec 32x4x3,rank=2,eps=0.05,seed=21 --lengths 4,16 --ranks 2,2,2 "
      "--offsets 2 --reps 1 --out " +
      path_of("bench.csv"));
  CHECK(r.code == 0);
  const auto rows = read_csv(path_of("bench.csv"));
  REQUIRE(rows.size() == 1 + 2 * 2 * 3);  // header + lengths x offsets x methods
  const std::vector<std::string> header = {"op",      "L",         "T",
                                           "method",  "seconds",   "rel_error",
                                           "hits_entire", "hits_partial", "stitches"};
  CHECK(rows[0] == header);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 9);
    CHECK(rows[i][0] == "query");
    CHECK(rows[i][2] == "32");
    const double seconds = std::stod(rows[i][4]);
    CHECK(seconds >= 0.0);
    if (rows[i][3] == "brute") CHECK(std::stod(rows[i][5]) == 0.0);
    if (rows[i][3] == "sst") {
      const long len = std::stol(rows[i][1]);
      const long entire = std::stol(rows[i][6]);
      const long partial = std::stol(rows[i][7]);
      long log2ceil = 0;
      for (long pow = 1; pow < len; pow *= 2) ++log2ceil;
      CHECK(entire + partial <= 2 * log2ceil + 2);
      CHECK(partial <= 2);
    }
  }
}

TEST_CASE("csv slices assemble into a series file") {
  {
    std::ofstream a(path_of("s0.csv"));
    a << "2,2\n1,2\n3,4\n";
    std::ofstream b(path_of("s1.csv"));
    b << "2,2\n5,6\n7,8\n";
  }
  const RunResult r = run("csv2tts --out " + path_of("fromcsv.tts") + " " +
                          path_of("s0.csv") + " " + path_of("s1.csv"));
  CHECK(r.code == 0);
  const DenseTensor series = read_tensor_file(path_of("fromcsv.tts"));
  CHECK(series.shape() == Shape{2, 2, 2});
  CHECK(series.at({0, 0, 1}) == 2.0);
  CHECK(series.at({1, 1, 0}) == 7.0);

  CHECK(run("build --input " + path_of("fromcsv.tts") + " --out " +
            path_of("fromcsv.sst") + " --ranks 2,2,2 --seed 23")
            .code == 0);
}

TEST_CASE("malformed input files yield a nonzero exit with a message") {
  {
    std::ofstream out(path_of("junk.tts"), std::ios::binary);
    out << "not a tensor";
  }
  const RunResult r = run("build --input " + path_of("junk.tts") + " --out " +
                          path_of("junk.sst"));
  CHECK(r.code != 0);
  CHECK(r.output.find("error") != std::string::npos);
}
