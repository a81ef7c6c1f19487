// Acceptance harness: runs every published acceptance check end to end and
// prints one [PASS]/[FAIL] line per criterion.  Exit code is the number of
// failed criteria, so ctest treats any red line as a test failure.
//
// Usage: acceptance_tests <path-to-mlgcn-cli-binary>

#include "mlgcn/config.hpp"
#include "mlgcn/embed_loss.hpp"
#include "mlgcn/eval.hpp"
#include "mlgcn/graph.hpp"
#include "mlgcn/model_io.hpp"
#include "mlgcn/rng.hpp"
#include "mlgcn/tensor.hpp"
#include "mlgcn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
  va_list args;
  va_start(args, pattern);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return std::string(buf);
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("mlgcn_accept_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& cli, const std::vector<std::string>& args,
            const fs::path& log) {
  std::string cmd = "\"" + cli + "\"";
  for (const std::string& a : args) cmd += " \"" + a + "\"";
  cmd += " > \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

// A small random multigraph-free valid Graph for oracle sweeps.  Mirrors the
// generator used by the unit suite but kept local so the acceptance binary
// stays self-contained.
mlgcn::Graph random_graph(mlgcn::SplitMix64& rng, std::size_t max_n,
                          std::size_t classes, double edge_prob) {
  mlgcn::Graph g;
  g.n = 2 + rng.next_below(max_n - 1);
  g.d = 1;
  g.c = classes;
  std::vector<mlgcn::Triplet> entries;
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = i + 1; j < g.n; ++j) {
      if (rng.next_unit() < edge_prob) {
        const double w = 0.25 + rng.next_unit();
        entries.push_back({i, j, w});
        entries.push_back({j, i, w});
      }
    }
  }
  g.adjacency = mlgcn::sparse_from_triplets(g.n, g.n, entries);
  g.features = mlgcn::DenseMatrix(g.n, g.d);
  g.labels = mlgcn::DenseMatrix(g.n, g.c);
  g.train_mask.assign(g.n, 0);
  g.test_mask.assign(g.n, 0);
  for (std::size_t i = 0; i < g.n; ++i) {
    g.features(i, 0) = rng.next_normal();
    g.labels(i, rng.next_below(g.c)) = 1.0;
    if (rng.next_unit() < 0.5) g.labels(i, rng.next_below(g.c)) = 1.0;
    const double role = rng.next_unit();
    if (i == 0 || role < 0.4) {
      g.train_mask[i] = 1;
    } else if (role < 0.7) {
      g.test_mask[i] = 1;
    }
  }
  g.validate();
  return g;
}

mlgcn::DenseMatrix dense_from_sparse(const mlgcn::SparseMatrix& a) {
  mlgcn::DenseMatrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      out(i, a.col_indices[k]) += a.values[k];
    }
  }
  return out;
}

mlgcn::DenseMatrix normalize_oracle(const mlgcn::Graph& g) {
  mlgcn::DenseMatrix a = dense_from_sparse(g.adjacency);
  for (std::size_t i = 0; i < g.n; ++i) a(i, i) += 1.0;
  std::vector<double> deg(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) deg[i] += a(i, j);
  }
  mlgcn::DenseMatrix out(g.n, g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) {
      out(i, j) = a(i, j) / std::sqrt(deg[i] * deg[j]);
    }
  }
  return out;
}

// Brute-force micro-F1: literal triple loop over mask/class, no shortcuts.
double brute_force_micro_f1(const mlgcn::DenseMatrix& pred,
                            const mlgcn::DenseMatrix& truth,
                            const std::vector<std::uint8_t>& mask,
                            std::size_t& tp, std::size_t& fp,
                            std::size_t& fn) {
  tp = fp = fn = 0;
  for (std::size_t i = 0; i < pred.rows; ++i) {
    if (!mask[i]) continue;
    for (std::size_t j = 0; j < pred.cols; ++j) {
      const bool p = pred(i, j) != 0.0;
      const bool t = truth(i, j) != 0.0;
      if (p && t) ++tp;
      if (p && !t) ++fp;
      if (!p && t) ++fn;
    }
  }
  if (2 * tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) /
         static_cast<double>(2 * tp + fp + fn);
}

// Shared fixture for the ablation-direction and loss-halving criteria: the
// correlated six-class benchmark with three overlapping label pairs.
mlgcn::SyntheticSpec benchmark_spec() {
  mlgcn::SyntheticSpec spec;
  spec.nodes = 600;
  spec.classes = 6;
  spec.corr_pairs = {{0, 1, 0.8}, {1, 2, 0.8}, {3, 4, 0.8}};
  spec.p_in = 0.05;
  spec.p_out = 0.005;
  spec.noise_dims = 16;
  spec.train_fraction = 0.15;
  spec.seed = 13;
  return spec;
}

mlgcn::TrainConfig benchmark_config(std::uint64_t seed, double lambda1,
                                    double lambda2) {
  mlgcn::TrainConfig cfg;
  cfg.epochs = 200;
  cfg.hidden_dim = 32;
  cfg.seed = seed;
  cfg.lambda1 = lambda1;
  cfg.lambda2 = lambda2;
  return cfg;
}

struct BenchmarkRuns {
  std::vector<double> gcn_f1;
  std::vector<double> partly_f1;
  std::vector<double> full_f1;
  std::vector<mlgcn::TrainResult> full_runs;
  double wall_seconds = 0.0;
};

BenchmarkRuns run_benchmark() {
  const double t0 = now_seconds();
  const mlgcn::Graph g = mlgcn::generate_synthetic(benchmark_spec());
  BenchmarkRuns out;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const mlgcn::TrainResult gcn =
        mlgcn::train(g, benchmark_config(seed, 0.0, 0.0));
    const mlgcn::TrainResult partly =
        mlgcn::train(g, benchmark_config(seed, 0.0, 0.25));
    mlgcn::TrainResult full =
        mlgcn::train(g, benchmark_config(seed, 0.25, 0.25));
    out.gcn_f1.push_back(gcn.report.test_micro_f1);
    out.partly_f1.push_back(partly.report.test_micro_f1);
    out.full_f1.push_back(full.report.test_micro_f1);
    out.full_runs.push_back(std::move(full));
  }
  out.wall_seconds = now_seconds() - t0;
  return out;
}

double mean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

CriterionResult check_gradient_fidelity() {
  CriterionResult r{1, "gradient fidelity", false, ""};
  const double t0 = now_seconds();
  mlgcn::SyntheticSpec spec;
  spec.nodes = 30;
  spec.classes = 4;
  spec.corr_pairs = {{0, 1, 0.5}, {2, 3, 0.5}};
  spec.p_in = 0.3;
  spec.p_out = 0.05;
  spec.noise_dims = 4;
  spec.train_fraction = 0.5;
  spec.seed = 7;
  const mlgcn::Graph g = mlgcn::generate_synthetic(spec);
  mlgcn::TrainConfig cfg;
  cfg.hidden_dim = 6;
  cfg.negatives = 2;
  cfg.seed = 7;
  const mlgcn::GradCheckResult gc = mlgcn::gradcheck(g, cfg, 1e-5);
  const double elapsed = now_seconds() - t0;
  r.pass = gc.max() < 1e-4 && elapsed < 10.0;
  r.detail = fmt("max rel err %.3e (tol 1e-4), %.2fs (limit 10s)", gc.max(),
                 elapsed);
  return r;
}

CriterionResult check_loss_decomposition(const BenchmarkRuns& bench) {
  CriterionResult r{2, "loss decomposition", false, ""};
  double worst = 0.0;
  std::size_t epochs_checked = 0;
  for (const mlgcn::TrainResult& run : bench.full_runs) {
    for (const mlgcn::EpochRecord& e : run.report.epochs) {
      const double recombined = 0.25 * e.l_ll + 0.25 * e.l_nl + e.l_sigmoid;
      worst = std::max(worst, std::abs(e.l_sum - recombined));
      ++epochs_checked;
    }
  }
  r.pass = epochs_checked == 2000 && worst < 1e-12;
  r.detail = fmt("max |l_sum - recombined| = %.3e over %zu epochs (tol 1e-12)",
                 worst, epochs_checked);
  return r;
}

CriterionResult check_ablation_direction(const BenchmarkRuns& bench) {
  CriterionResult r{3, "ablation direction", false, ""};
  const double m_gcn = mean(bench.gcn_f1);
  const double m_partly = mean(bench.partly_f1);
  const double m_full = mean(bench.full_f1);
  const bool order_ok = m_full > m_gcn && m_full >= m_partly;
  const bool time_ok = bench.wall_seconds < 300.0;
  r.pass = order_ok && time_ok;
  r.detail = fmt(
      "mean test micro-F1 over 10 seeds: gcn %.6f, partly %.6f, full %.6f "
      "(full-gcn %+.6f, full-partly %+.6f), %.1fs (limit 300s)",
      m_gcn, m_partly, m_full, m_full - m_gcn, m_full - m_partly,
      bench.wall_seconds);
  return r;
}

CriterionResult check_metric_oracle() {
  CriterionResult r{4, "micro-F1 oracle", false, ""};
  mlgcn::SplitMix64 rng(404);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng.next_below(20);
    const std::size_t c = 1 + rng.next_below(8);
    mlgcn::DenseMatrix pred(n, c);
    mlgcn::DenseMatrix truth(n, c);
    std::vector<std::uint8_t> mask(n, 0);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      mask[i] = rng.next_unit() < 0.7 ? 1 : 0;
      any = any || mask[i];
      for (std::size_t j = 0; j < c; ++j) {
        pred(i, j) = rng.next_unit() < 0.4 ? 1.0 : 0.0;
        truth(i, j) = rng.next_unit() < 0.4 ? 1.0 : 0.0;
      }
    }
    if (!any) mask[0] = 1;
    std::size_t tp = 0, fp = 0, fn = 0;
    const double expected = brute_force_micro_f1(pred, truth, mask, tp, fp, fn);
    const mlgcn::MetricReport got = mlgcn::micro_f1(pred, truth, mask);
    if (got.micro_f1 != expected || got.tp != tp || got.fp != fp ||
        got.fn != fn) {
      ++mismatches;
    }
  }
  r.pass = mismatches == 0;
  r.detail = fmt("%zu mismatches in 1000 random instances (exact compare)",
                 mismatches);
  return r;
}

CriterionResult check_sampler_fidelity() {
  CriterionResult r{5, "negative sampler fidelity", false, ""};

  // Exact smoothing anchor: counts [16, 81] must give probabilities 8/35 and
  // 27/35 with no rounding slack at all.
  mlgcn::Graph two;
  two.n = 97;
  two.d = 1;
  two.c = 2;
  two.adjacency = mlgcn::sparse_from_triplets(two.n, two.n, {});
  two.features = mlgcn::DenseMatrix(two.n, 1);
  two.labels = mlgcn::DenseMatrix(two.n, 2);
  two.train_mask.assign(two.n, 1);
  two.test_mask.assign(two.n, 0);
  for (std::size_t i = 0; i < two.n; ++i) {
    two.labels(i, i < 16 ? 0 : 1) = 1.0;
  }
  two.validate();
  const mlgcn::NoiseDistribution smooth = mlgcn::build_noise_distribution(two);
  const bool exact =
      smooth.probs.size() == 2 && smooth.probs[0] == 8.0 / 35.0 &&
      smooth.probs[1] == 27.0 / 35.0;

  // Conditional frequencies: three classes, forbid the middle one, and the
  // empirical distribution of 100k draws must match the renormalized
  // conditional within L-inf 0.01, with the forbidden class never drawn.
  mlgcn::Graph tri;
  tri.n = 75;
  tri.d = 1;
  tri.c = 3;
  tri.adjacency = mlgcn::sparse_from_triplets(tri.n, tri.n, {});
  tri.features = mlgcn::DenseMatrix(tri.n, 1);
  tri.labels = mlgcn::DenseMatrix(tri.n, 3);
  tri.train_mask.assign(tri.n, 1);
  tri.test_mask.assign(tri.n, 0);
  for (std::size_t i = 0; i < tri.n; ++i) {
    tri.labels(i, i < 10 ? 0 : (i < 50 ? 1 : 2)) = 1.0;
  }
  tri.validate();
  const mlgcn::NoiseDistribution dist = mlgcn::build_noise_distribution(tri);
  const std::size_t forbidden = 1;
  const std::size_t draws = 100000;
  std::vector<std::size_t> counts(3, 0);
  mlgcn::SplitMix64 rng(505);
  for (std::size_t i = 0; i < draws; ++i) {
    const std::vector<std::size_t> picks =
        mlgcn::sample_negatives(dist, forbidden, 1, rng);
    ++counts[picks[0]];
  }
  const double keep = 1.0 - dist.probs[forbidden];
  double linf = 0.0;
  for (std::size_t cls = 0; cls < 3; ++cls) {
    const double expected = cls == forbidden ? 0.0 : dist.probs[cls] / keep;
    const double observed =
        static_cast<double>(counts[cls]) / static_cast<double>(draws);
    linf = std::max(linf, std::abs(observed - expected));
  }
  const bool never_forbidden = counts[forbidden] == 0;
  r.pass = exact && never_forbidden && linf <= 0.01;
  r.detail = fmt(
      "counts [16,81] -> probs exact %s; 100k conditional draws L-inf %.4f "
      "(tol 0.01), forbidden drawn %zu times",
      exact ? "yes" : "NO", linf, counts[forbidden]);
  return r;
}

CriterionResult check_normalization_oracle() {
  CriterionResult r{6, "propagation normalization oracle", false, ""};
  mlgcn::SplitMix64 rng(606);
  double worst = 0.0;
  double worst_sym = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const mlgcn::Graph g = random_graph(rng, 50, 3, 0.3);
    const mlgcn::SparseMatrix a_hat = mlgcn::normalize_adjacency(g);
    const mlgcn::DenseMatrix got = dense_from_sparse(a_hat);
    const mlgcn::DenseMatrix want = normalize_oracle(g);
    for (std::size_t i = 0; i < got.values.size(); ++i) {
      worst = std::max(worst, std::abs(got.values[i] - want.values[i]));
    }
    for (std::size_t i = 0; i < g.n; ++i) {
      for (std::size_t j = 0; j < g.n; ++j) {
        worst_sym = std::max(worst_sym, std::abs(got(i, j) - got(j, i)));
      }
    }
  }

  // Two nodes joined by a unit edge: every entry of the normalized matrix is
  // exactly 0.5 (degrees are 2 and 2, so each entry is 1/sqrt(4)).
  mlgcn::Graph pair_graph;
  pair_graph.n = 2;
  pair_graph.d = 1;
  pair_graph.c = 2;
  pair_graph.adjacency =
      mlgcn::sparse_from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  pair_graph.features = mlgcn::DenseMatrix(2, 1);
  pair_graph.labels = mlgcn::DenseMatrix(2, 2);
  pair_graph.labels(0, 0) = 1.0;
  pair_graph.labels(1, 1) = 1.0;
  pair_graph.train_mask = {1, 0};
  pair_graph.test_mask = {0, 1};
  pair_graph.validate();
  const mlgcn::DenseMatrix two =
      dense_from_sparse(mlgcn::normalize_adjacency(pair_graph));
  const bool half = two(0, 0) == 0.5 && two(0, 1) == 0.5 &&
                    two(1, 0) == 0.5 && two(1, 1) == 0.5;

  r.pass = worst < 1e-12 && worst_sym < 1e-12 && half;
  r.detail = fmt(
      "max |A_hat - oracle| = %.3e over 100 graphs (tol 1e-12), max asymmetry "
      "%.3e, two-node entries exactly 0.5: %s",
      worst, worst_sym, half ? "yes" : "NO");
  return r;
}

CriterionResult check_cli_determinism(const std::string& cli) {
  CriterionResult r{7, "run determinism", false, ""};
  const fs::path dir = fresh_dir("determinism");
  const std::string gen_cfg =
      "n = 80\n"
      "classes = 3\n"
      "corr_pairs = 0:1:0.7\n"
      "p_in = 0.15\n"
      "p_out = 0.02\n"
      "noise_dims = 3\n"
      "train_fraction = 0.3\n"
      "seed = 21\n";
  write_text(dir / "gen.cfg", gen_cfg);
  if (run_cli(cli, {"gen", "--config", (dir / "gen.cfg").string(), "--out",
                    (dir / "gen").string()},
              dir / "gen.log") != 0) {
    r.detail = "gen subcommand failed, see " + (dir / "gen.log").string();
    return r;
  }
  const std::string train_cfg =
      "dataset = " + (dir / "gen" / "dataset").string() +
      "\n"
      "epochs = 30\n"
      "hidden_dim = 8\n"
      "seed = 5\n";
  write_text(dir / "train.cfg", train_cfg);
  for (const char* run : {"run1", "run2"}) {
    if (run_cli(cli, {"train", "--config", (dir / "train.cfg").string(),
                      "--out", (dir / run).string()},
                dir / (std::string(run) + ".log")) != 0) {
      r.detail = std::string("train subcommand failed for ") + run;
      return r;
    }
  }
  const bool metrics_same = read_bytes(dir / "run1" / "metrics.jsonl") ==
                            read_bytes(dir / "run2" / "metrics.jsonl");
  const bool model_same = read_bytes(dir / "run1" / "model.bin") ==
                          read_bytes(dir / "run2" / "model.bin");
  r.pass = metrics_same && model_same;
  r.detail = fmt("metrics.jsonl byte-identical: %s, model.bin byte-identical: %s",
                 metrics_same ? "yes" : "NO", model_same ? "yes" : "NO");
  return r;
}

CriterionResult check_default_config(const std::string& cli,
                                     const fs::path& data_dir) {
  CriterionResult r{8, "default configuration", false, ""};
  const fs::path dir = fresh_dir("defaults");
  write_text(dir / "min.cfg", "dataset = " + data_dir.string() + "\n");
  if (run_cli(cli, {"train", "--config", (dir / "min.cfg").string(), "--out",
                    (dir / "run").string()},
              dir / "train.log") != 0) {
    r.detail = "train subcommand failed, see " + (dir / "train.log").string();
    return r;
  }
  const mlgcn::ParsedConfig manifest =
      mlgcn::parse_config_file(dir / "run" / "manifest.cfg");
  const mlgcn::RunConfig& cfg = manifest.values;
  const bool ok = cfg.lambda1 == 0.25 && cfg.lambda2 == 0.25 &&
                  cfg.negatives == 5 && cfg.lr == 0.01 &&
                  cfg.threshold == 0.5 && cfg.layers == 2;
  r.pass = ok;
  r.detail = fmt(
      "manifest resolves lambda1=%g lambda2=%g negatives=%zu lr=%g "
      "threshold=%g layers=%zu",
      cfg.lambda1, cfg.lambda2, cfg.negatives, cfg.lr, cfg.threshold,
      cfg.layers);
  return r;
}

CriterionResult check_loss_halving(const BenchmarkRuns& bench) {
  CriterionResult r{9, "loss halving", false, ""};
  double worst_ratio = 0.0;
  bool all_halved = true;
  for (const mlgcn::TrainResult& run : bench.full_runs) {
    const double first = run.report.epochs.front().l_sum;
    const double last = run.report.epochs.back().l_sum;
    const double ratio = last / first;
    worst_ratio = std::max(worst_ratio, ratio);
    all_halved = all_halved && last < 0.5 * first;
  }
  r.pass = all_halved;
  r.detail = fmt("worst final/first combined-loss ratio %.4f over 10 seeds "
                 "(must be < 0.5)",
                 worst_ratio);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-mlgcn-cli>\n", argv[0]);
    return 64;
  }
  const std::string cli = argv[1];
#ifdef MLGCN_TEST_DATA_DIR
  const fs::path data_dir = fs::path(MLGCN_TEST_DATA_DIR) / "tiny";
#else
  const fs::path data_dir = "data/tiny";
#endif

  std::vector<CriterionResult> results;
  const auto guard = [&results](int id, const char* name, auto&& fn) {
    try {
      results.push_back(fn());
    } catch (const std::exception& e) {
      results.push_back({id, name, false, std::string("exception: ") + e.what()});
    }
  };

  guard(1, "gradient fidelity", [] { return check_gradient_fidelity(); });

  BenchmarkRuns bench;
  bool bench_ok = false;
  try {
    bench = run_benchmark();
    bench_ok = true;
  } catch (const std::exception& e) {
    const std::string why = std::string("benchmark exception: ") + e.what();
    results.push_back({2, "loss decomposition", false, why});
    results.push_back({3, "ablation direction", false, why});
    results.push_back({9, "loss halving", false, why});
  }
  if (bench_ok) {
    guard(2, "loss decomposition",
          [&bench] { return check_loss_decomposition(bench); });
    guard(3, "ablation direction",
          [&bench] { return check_ablation_direction(bench); });
  }

  guard(4, "micro-F1 oracle", [] { return check_metric_oracle(); });
  guard(5, "negative sampler fidelity", [] { return check_sampler_fidelity(); });
  guard(6, "propagation normalization oracle",
        [] { return check_normalization_oracle(); });
  guard(7, "run determinism", [&cli] { return check_cli_determinism(cli); });
  guard(8, "default configuration",
        [&cli, &data_dir] { return check_default_config(cli, data_dir); });
  if (bench_ok) {
    guard(9, "loss halving", [&bench] { return check_loss_halving(bench); });
  }

  std::sort(results.begin(), results.end(),
            [](const CriterionResult& a, const CriterionResult& b) {
              return a.id < b.id;
            });
  int failures = 0;
  for (const CriterionResult& res : results) {
    if (!res.pass) ++failures;
    std::printf("[%s] criterion %d (%s): %s\n", res.pass ? "PASS" : "FAIL",
                res.id, res.name.c_str(), res.detail.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failures, results.size());
  return failures;
}
