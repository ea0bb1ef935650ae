// Command-line front end: build and maintain stream segment trees over
// tensor time series files, answer range queries, validate stored trees,
// and produce benchmark CSV reports on synthetic data.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tucktree/baseline.hpp"
#include "tucktree/io.hpp"
#include "tucktree/linalg.hpp"
#include "tucktree/query.hpp"
#include "tucktree/sst.hpp"

namespace {

using namespace tucktree;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SST_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::runtime_error("SST_SEED is not an integer: " + std::string(env));
    }
  }
  return kDefaultSeed;
}

std::vector<Index> parse_index_list(const std::string& text, char sep) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, sep)) {
    if (field.empty()) continue;
    out.push_back(static_cast<Index>(std::stoll(field)));
  }
  if (out.empty()) throw std::runtime_error("empty list: " + text);
  return out;
}

// Target size 10 per mode, 5 for modes with extent below 10.
std::vector<Index> default_rank_policy(std::span<const Index> dims) {
  std::vector<Index> ranks;
  for (Index d : dims) ranks.push_back(d < 10 ? 5 : 10);
  return ranks;
}

std::pair<Index, Index> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::runtime_error("range must look like Ts:Te, got " + text);
  }
  return {static_cast<Index>(std::stoll(text.substr(0, colon))),
          static_cast<Index>(std::stoll(text.substr(colon + 1)))};
}

void append_series(StreamSegmentTree& tree, const DenseTensor& series) {
  for (Index t = 0; t < series.dim(0); ++t) {
    tree.append(temporal_slice(series, t));
  }
}

void print_tree_summary(const StreamSegmentTree& tree) {
  Index leaves = 0, intermediates = 0, placeholders = 0;
  for (const Node& v : tree.nodes()) {
    switch (v.kind) {
      case NodeKind::Leaf: ++leaves; break;
      case NodeKind::Intermediate: ++intermediates; break;
      case NodeKind::Placeholder: ++placeholders; break;
    }
  }
  std::cout << "timespan: " << tree.timespan() << "\n"
            << "height: " << tree.height() << "\n"
            << "nodes: " << tree.node_count() << " (" << leaves << " leaf, "
            << intermediates << " intermediate, " << placeholders << " placeholder)\n"
            << "stitches: " << tree.stitch_count() << "\n";
}

void write_tree_atomically(const std::filesystem::path& path,
                           const StreamSegmentTree& tree) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  write_tree_file(tmp, tree);
  std::filesystem::rename(tmp, path);
}

double residual_against(const DenseTensor& x, const TuckerFactors& f) {
  const DenseTensor rec = reconstruct(f);
  double sq = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double d = x.data()[i] - rec.data()[i];
    sq += d * d;
  }
  const double norm = frobenius_norm(x);
  return norm == 0.0 ? std::sqrt(sq) : std::sqrt(sq) / norm;
}

// ---------------------------------------------------------------- build ---

int run_build(const std::string& input, const std::string& out,
              std::optional<std::string> ranks_arg, double theta,
              std::optional<std::uint64_t> seed_arg, int max_iters, double tol) {
  const DenseTensor series = read_tensor_file(input);
  if (series.order() < 2) {
    throw std::runtime_error("input must have at least 2 modes (temporal first)");
  }
  std::vector<Index> ranks = ranks_arg ? parse_index_list(*ranks_arg, ',')
                                       : default_rank_policy(series.shape().dims());
  if (static_cast<Index>(ranks.size()) != series.order()) {
    throw std::runtime_error("need one rank per mode");
  }
  for (Index n = 0; n < series.order(); ++n) {
    auto& r = ranks[static_cast<std::size_t>(n)];
    if (r > series.dim(n)) {
      std::cerr << "warning: rank " << r << " exceeds extent " << series.dim(n)
                << " of mode " << n << (n == 0 ? " (clamped per node)" : " (clamped)")
                << "\n";
      if (n > 0) r = series.dim(n);
    }
  }

  TreeConfig cfg;
  cfg.nontemporal.assign(series.shape().dims().begin() + 1, series.shape().dims().end());
  cfg.ranks = ranks;
  cfg.theta = theta;
  cfg.als.max_iters = max_iters;
  cfg.als.tol = tol;
  cfg.als.seed = seed_arg.value_or(default_seed());

  StreamSegmentTree tree(cfg);
  append_series(tree, series);
  write_tree_atomically(out, tree);
  print_tree_summary(tree);
  return 0;
}

// --------------------------------------------------------------- append ---

int run_append(const std::string& tree_path, const std::string& slice_path) {
  StreamSegmentTree tree = read_tree_file(tree_path);
  const DenseTensor slice = read_tensor_file(slice_path);
  tree.append(slice);  // throws before any state is persisted
  write_tree_atomically(tree_path, tree);
  print_tree_summary(tree);
  return 0;
}

// ---------------------------------------------------------------- query ---

int run_query(const std::string& tree_path, const std::string& range_arg,
              const std::string& out, std::optional<double> theta,
              std::optional<std::string> input) {
  const StreamSegmentTree tree = read_tree_file(tree_path);
  const auto [ts, te] = parse_range(range_arg);
  const QueryResult result = range_query_detailed(tree, ts, te, theta);

  Index entire = 0, partial = 0;
  for (const HitEntry& h : result.hits) {
    (h.flag == HitFlag::Entire ? entire : partial) += 1;
  }
  std::cout << "hits: " << entire << " entire, " << partial << " partial\n";

  write_tensor_file(out + ".core.tts", result.factors.core);
  for (Index n = 0; n < result.factors.order(); ++n) {
    write_tensor_file(out + ".u" + std::to_string(n + 1) + ".tts",
                      tensor_from_matrix(result.factors.factors[static_cast<std::size_t>(n)]));
  }
  std::cout << "wrote " << out << ".core.tts and " << result.factors.order()
            << " factor files\n";

  if (input) {
    const DenseTensor series = read_tensor_file(*input);
    const DenseTensor x = slice_temporal(series, ts, te);
    std::cout << "residual: " << std::setprecision(6)
              << residual_against(x, result.factors) << "\n";
  }
  return 0;
}

// ------------------------------------------------------------- validate ---

int run_validate(const std::string& tree_path) {
  const StreamSegmentTree tree = read_tree_file(tree_path);
  std::vector<std::string> violations = tree.validate();
  for (const Node& v : tree.nodes()) {
    if (!v.decomposition) continue;
    for (Index n = 0; n < v.decomposition->order(); ++n) {
      const double defect =
          max_orthonormality_defect(v.decomposition->factors[static_cast<std::size_t>(n)]);
      if (defect > 1e-8) {
        violations.push_back("node " + std::to_string(v.id) + ": factor " +
                             std::to_string(n) + " orthonormality defect " +
                             std::to_string(defect));
      }
    }
  }
  if (violations.empty()) {
    std::cout << "ok: " << tree.node_count() << " nodes, timespan "
              << tree.timespan() << "\n";
    return 0;
  }
  for (const std::string& v : violations) std::cout << "violation: " << v << "\n";
  return 1;
}

// -------------------------------------------------------------- csv2tts ---

int run_csv2tts(const std::vector<std::string>& slices, const std::string& out) {
  std::vector<DenseTensor> tensors;
  for (const std::string& path : slices) {
    DenseTensor slice = read_csv_slice(path);
    std::vector<Index> dims = {1};
    dims.insert(dims.end(), slice.shape().dims().begin(), slice.shape().dims().end());
    tensors.push_back(DenseTensor(Shape(dims), vectorize(slice)));
  }
  const DenseTensor series = concat_temporal(tensors);
  write_tensor_file(out, series);
  std::cout << "wrote " << out << " with shape (";
  for (Index n = 0; n < series.order(); ++n) {
    std::cout << (n ? "," : "") << series.dim(n);
  }
  std::cout << ")\n";
  return 0;
}

// ---------------------------------------------------------------- bench ---

struct BenchSpec {
  std::vector<Index> shape;
  std::vector<Index> true_ranks;
  double eps = 0.05;
  std::uint64_t seed = kDefaultSeed;
};

BenchSpec parse_bench_spec(const std::string& text) {
  BenchSpec spec;
  std::stringstream ss(text);
  std::string field;
  bool first = true;
  while (std::getline(ss, field, ',')) {
    if (first) {
      spec.shape = parse_index_list(field, 'x');
      first = false;
      continue;
    }
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad spec field: " + field);
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "rank") {
      spec.true_ranks.assign(spec.shape.size(), static_cast<Index>(std::stoll(value)));
    } else if (key == "ranks") {
      spec.true_ranks = parse_index_list(value, 'x');
    } else if (key == "eps") {
      spec.eps = std::stod(value);
    } else if (key == "seed") {
      spec.seed = std::stoull(value);
    } else {
      throw std::runtime_error("unknown spec key: " + key);
    }
  }
  if (spec.shape.size() < 2) throw std::runtime_error("spec shape needs >= 2 modes");
  if (spec.true_ranks.empty()) spec.true_ranks.assign(spec.shape.size(), 5);
  for (std::size_t n = 0; n < spec.shape.size(); ++n) {
    spec.true_ranks[n] = std::min(spec.true_ranks[n], spec.shape[n]);
  }
  return spec;
}

template <typename Fn>
double median_seconds(int reps, Fn&& fn) {
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

int run_bench(const std::string& spec_arg, const std::string& lengths_arg,
              const std::string& methods_arg, std::optional<std::string> ranks_arg,
              double theta, int offsets, int reps, const std::string& out) {
  const BenchSpec spec = parse_bench_spec(spec_arg);
  const std::vector<Index> lengths = parse_index_list(lengths_arg, ',');

  std::vector<std::string> methods;
  {
    std::stringstream ss(methods_arg);
    std::string m;
    while (std::getline(ss, m, ',')) {
      if (m != "sst" && m != "block" && m != "brute") {
        throw std::runtime_error("unknown method: " + m);
      }
      methods.push_back(m);
    }
  }

  SynthSpec synth;
  synth.shape = spec.shape;
  synth.true_ranks = spec.true_ranks;
  synth.noise = spec.eps;
  synth.seed = spec.seed;
  std::cerr << "generating synthetic data...\n";
  const DenseTensor series = generate_synthetic(synth);
  const Index timespan = series.dim(0);

  const std::vector<Index> ranks = ranks_arg
                                       ? parse_index_list(*ranks_arg, ',')
                                       : default_rank_policy(series.shape().dims());
  AlsConfig als;
  als.seed = default_seed();
  als.ranks = ranks;

  std::optional<StreamSegmentTree> tree;
  if (std::find(methods.begin(), methods.end(), "sst") != methods.end()) {
    TreeConfig cfg;
    cfg.nontemporal.assign(spec.shape.begin() + 1, spec.shape.end());
    cfg.ranks = ranks;
    cfg.theta = theta;
    cfg.als = als;
    std::cerr << "building stream segment tree...\n";
    tree.emplace(cfg);
    append_series(*tree, series);
  }
  std::optional<BlockIndex> blocks;
  if (std::find(methods.begin(), methods.end(), "block") != methods.end()) {
    std::cerr << "building block index (b=" << default_block_size(timespan) << ")...\n";
    blocks = build_blocks(series, default_block_size(timespan), ranks, als);
  }

  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot open " + out);
  csv << "op,L,T,method,seconds,rel_error,hits_entire,hits_partial,stitches\n";

  for (Index len : lengths) {
    if (len < 1 || len > timespan) {
      throw std::runtime_error("query length " + std::to_string(len) +
                               " outside [1, T]");
    }
    for (int k = 0; k < offsets; ++k) {
      const Index max_start = timespan - len;
      const Index start =
          offsets == 1 ? max_start / 2
                       : (max_start * static_cast<Index>(k)) /
                             static_cast<Index>(offsets - 1);
      const Index stop = start + len;
      const DenseTensor x = slice_temporal(series, start, stop);
      const TuckerFactors reference = brute_force_range(series, start, stop, ranks, als);

      for (const std::string& method : methods) {
        TuckerFactors result;
        Index hits_entire = 0, hits_partial = 0, stitches = 0;
        double seconds = 0.0;
        if (method == "sst") {
          seconds = median_seconds(reps, [&] { result = range_query(*tree, start, stop); });
          for (const HitEntry& h : recall(*tree, start, stop)) {
            (h.flag == HitFlag::Entire ? hits_entire : hits_partial) += 1;
          }
          stitches = tree->stitch_count();
        } else if (method == "block") {
          seconds = median_seconds(reps, [&] { result = block_range_query(*blocks, start, stop); });
        } else {
          seconds = median_seconds(
              reps, [&] { result = brute_force_range(series, start, stop, ranks, als); });
        }
        const double err = method == "brute" ? 0.0 : relative_error(x, result, reference);
        csv << "query," << len << ',' << timespan << ',' << method << ','
            << std::setprecision(9) << seconds << ',' << std::setprecision(9) << err
            << ',' << hits_entire << ',' << hits_partial << ',' << stitches << "\n";
      }
    }
    std::cerr << "done L=" << len << "\n";
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tucker decompositions over appendable tensor time series"};
  app.require_subcommand(1);

  // build
  std::string build_input, build_out;
  std::optional<std::string> build_ranks;
  double build_theta = 0.7;
  std::optional<std::uint64_t> build_seed;
  int build_iters = 20;
  double build_tol = 0.01;
  CLI::App* build = app.add_subcommand("build", "Build a tree from a TTS1 tensor file");
  build->add_option("--input", build_input, "input TTS1 tensor (temporal mode first)")
      ->required();
  build->add_option("--out", build_out, "output SST1 tree file")->required();
  build->add_option("--ranks", build_ranks,
                    "comma-separated target ranks, one per mode "
                    "(default: 10, or 5 for modes with extent < 10)");
  build->add_option("--theta", build_theta, "pruning threshold in (0,1)");
  build->add_option("--seed", build_seed, "ALS seed (default: SST_SEED or builtin)");
  build->add_option("--max-iters", build_iters, "ALS iteration cap");
  build->add_option("--tol", build_tol, "ALS fit tolerance");

  // append
  std::string append_tree, append_slice;
  CLI::App* append = app.add_subcommand("append", "Append one slice to a tree file");
  append->add_option("--tree", append_tree, "SST1 tree file (rewritten in place)")
      ->required();
  append->add_option("--slice", append_slice, "TTS1 slice with the non-temporal shape")
      ->required();

  // query
  std::string query_tree, query_range, query_out;
  std::optional<double> query_theta;
  std::optional<std::string> query_input;
  CLI::App* query = app.add_subcommand("query", "Tucker decomposition of a time range");
  query->add_option("--tree", query_tree, "SST1 tree file")->required();
  query->add_option("--range", query_range, "half-open range Ts:Te")->required();
  query->add_option("--out", query_out, "output prefix for the factor bundle")->required();
  query->add_option("--theta", query_theta, "pruning threshold override");
  query->add_option("--input", query_input,
                    "original TTS1 series; prints the reconstruction residual");

  // bench
  std::string bench_spec, bench_lengths, bench_out;
  std::string bench_methods = "sst,block,brute";
  std::optional<std::string> bench_ranks;
  double bench_theta = 0.7;
  int bench_offsets = 3;
  int bench_reps = 5;
  CLI::App* bench = app.add_subcommand("bench", "Latency/accuracy table on synthetic data");
  bench->add_option("--spec", bench_spec,
                    "synthetic spec, e.g. 256x20x15,rank=5,eps=0.05,seed=7")
      ->required();
  bench->add_option("--lengths", bench_lengths, "comma-separated query lengths")
      ->required();
  bench->add_option("--out", bench_out, "output CSV path")->required();
  bench->add_option("--methods", bench_methods, "subset of sst,block,brute");
  bench->add_option("--ranks", bench_ranks, "target ranks (default rank policy)");
  bench->add_option("--theta", bench_theta, "pruning threshold");
  bench->add_option("--offsets", bench_offsets, "number of range offsets per length");
  bench->add_option("--reps", bench_reps, "timing repetitions (median reported)");

  // validate
  std::string validate_tree;
  CLI::App* validate = app.add_subcommand("validate", "Check a stored tree");
  validate->add_option("--tree", validate_tree, "SST1 tree file")->required();

  // csv2tts
  std::vector<std::string> csv_slices;
  std::string csv_out;
  CLI::App* csv2tts = app.add_subcommand(
      "csv2tts", "Convert CSV slices (dims header + row-major values) to TTS1");
  csv2tts->add_option("--out", csv_out, "output TTS1 file")->required();
  csv2tts->add_option("slices", csv_slices, "CSV slice files in temporal order")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      return run_build(build_input, build_out, build_ranks, build_theta, build_seed,
                       build_iters, build_tol);
    }
    if (append->parsed()) return run_append(append_tree, append_slice);
    if (query->parsed()) {
      return run_query(query_tree, query_range, query_out, query_theta, query_input);
    }
    if (bench->parsed()) {
      return run_bench(bench_spec, bench_lengths, bench_methods, bench_ranks,
                       bench_theta, bench_offsets, bench_reps, bench_out);
    }
    if (validate->parsed()) return run_validate(validate_tree);
    if (csv2tts->parsed()) return run_csv2tts(csv_slices, csv_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
