// Acceptance suite: one self-contained check per release criterion, each
// printing a PASS/FAIL line. Exits nonzero if any criterion fails.
//
// The CLI-facing criteria need the relclean binary; point RELCLEAN_BIN or
// --tool at it (ctest wires this up automatically).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "relclean/classifier.hpp"
#include "relclean/cleaners.hpp"
#include "relclean/eval.hpp"
#include "relclean/graph.hpp"
#include "relclean/io.hpp"
#include "relclean/pipeline.hpp"
#include "relclean/rng.hpp"
#include "relclean/synth.hpp"

using namespace relclean;
using numerics::DenseMatrix;
using numerics::Rng;
using numerics::SparseMatrix;

namespace {

// ---------------------------------------------------------------------------
// harness
// ---------------------------------------------------------------------------

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::string expr;
  bool pass;
};

class Criterion {
 public:
  Criterion(std::string label, double time_limit_s, std::function<Outcome()> body)
      : label_(std::move(label)), time_limit_s_(time_limit_s), body_(std::move(body)) {}

  bool run(int number) const {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = body_();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = outcome.pass;
    std::string note = outcome.detail;
    if (pass && time_limit_s_ > 0.0 && elapsed > time_limit_s_) {
      pass = false;
      note += (note.empty() ? "" : "; ") + std::string("exceeded time limit of ") +
              std::to_string(time_limit_s_) + " s";
    }
    std::printf("%s criterion %2d: %s (%.2fs)%s%s\n", pass ? "PASS" : "FAIL", number,
                label_.c_str(), elapsed, note.empty() ? "" : " -- ", note.c_str());
    std::fflush(stdout);
    return pass;
  }

 private:
  std::string label_;
  double time_limit_s_;
  std::function<Outcome()> body_;
};

bool close_rel(double a, double b, double tol, double floor = 1e-6) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), floor});
}

DenseMatrix random_dense(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                         double hi = 1.0) {
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

DenseMatrix random_unit_features(Rng& rng, std::size_t d, std::size_t n) {
  DenseMatrix m(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    double sq = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      m(r, j) = rng.normal();
      sq += m(r, j) * m(r, j);
    }
    const double norm = std::sqrt(sq);
    for (std::size_t r = 0; r < d; ++r) m(r, j) /= norm;
  }
  return m;
}

struct ProcessResult {
  int exit_code = -1;
  bool crashed = false;
  std::string out;
};

ProcessResult run_process(const std::string& command) {
  ProcessResult result;
  FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
  if (pipe == nullptr) return result;
  char buffer[4096];
  while (std::fgets(buffer, sizeof(buffer), pipe) != nullptr) result.out += buffer;
  const int status = pclose(pipe);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.crashed = true;
  }
  return result;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

// ---------------------------------------------------------------------------
// shared fixtures
// ---------------------------------------------------------------------------

// The standard desk-scale benchmark: 10 classes, 32 dims, 1 clean and 100
// noisy per class at noise ratio 0.5, 100 test points per class.
synth::SynthSpec benchmark_spec(std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.classes = 10;
  spec.dim = 32;
  spec.clean_per_class = 1;
  spec.noisy_per_class = 100;
  spec.test_per_class = 100;
  spec.noise_ratio = 0.5;
  spec.seed = seed;
  return spec;
}

std::vector<std::string> truth_of(const synth::SynthDataset& data) {
  std::vector<std::string> truth(data.test.size());
  for (const io::LabelRow& row : data.test_labels.rows) {
    truth[data.test.column_of(row.id)] = row.class_id;
  }
  return truth;
}

graph::NormalizedAffinity random_affinity(Rng& rng, std::size_t d, std::size_t n,
                                          std::size_t k_nn) {
  return graph::normalize_row_stochastic(
      graph::build_affinity(random_unit_features(rng, d, n), k_nn));
}

// ---------------------------------------------------------------------------
// criterion 1: analytic gradients vs central finite differences
// ---------------------------------------------------------------------------

Outcome check_gradients() {
  Rng rng(1001);
  const double h = 1e-5;
  std::size_t gcn_checked = 0;

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 4 + rng.below(7);   // <= 10
    const std::size_t d = 3 + rng.below(6);   // <= 8
    const std::size_t m = 1 + rng.below(4);   // <= 4
    const std::size_t k = 1 + rng.below(n - 1);
    const double lambda = rng.uniform(0.1, 2.0);
    const DenseMatrix v = random_dense(rng, d, n);
    const graph::NormalizedAffinity at = random_affinity(rng, d, n, 3);
    cleaners::GcnParams params;
    params.theta1 = random_dense(rng, d, m, -0.8, 0.8);
    params.theta2 = random_dense(rng, m, 1, -0.8, 0.8);

    const cleaners::GcnGradients grads = cleaners::gcn_grad(params, at, v, k, lambda);
    auto loss_at = [&] {
      return cleaners::gcn_loss(cleaners::gcn_forward(params, at, v), k, lambda);
    };
    auto check_block = [&](DenseMatrix& block, const DenseMatrix& grad) {
      for (std::size_t i = 0; i < block.size(); ++i) {
        const double saved = block.values()[i];
        block.values()[i] = saved + h;
        const double up = loss_at();
        block.values()[i] = saved - h;
        const double down = loss_at();
        block.values()[i] = saved;
        if (!close_rel(grad.values()[i], (up - down) / (2.0 * h), 1e-4)) return false;
        ++gcn_checked;
      }
      return true;
    };
    if (!check_block(params.theta1, grads.theta1) || !check_block(params.theta2, grads.theta2)) {
      return {false, "GCN gradient mismatch on trial " + std::to_string(trial)};
    }
  }

  std::size_t classifier_checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + rng.below(4);  // <= 5
    const std::size_t b = 3 + rng.below(8);
    const std::size_t d = 3 + rng.below(5);
    DenseMatrix w = random_dense(rng, d, k);
    const DenseMatrix batch = random_dense(rng, d, b);
    std::vector<std::size_t> labels(b);
    std::vector<double> relevance(b);
    for (std::size_t i = 0; i < b; ++i) {
      labels[i] = rng.below(k);
      relevance[i] = rng.uniform(0.1, 1.0);
    }
    const double s = rng.uniform(2.0, 12.0);
    const DenseMatrix grad = classifier::classifier_grad(w, batch, labels, relevance, s);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w.values()[i];
      w.values()[i] = saved + h;
      const double up = classifier::classifier_loss(w, batch, labels, relevance, s);
      w.values()[i] = saved - h;
      const double down = classifier::classifier_loss(w, batch, labels, relevance, s);
      w.values()[i] = saved;
      if (!close_rel(grad.values()[i], (up - down) / (2.0 * h), 1e-4)) {
        return {false, "classifier gradient mismatch on trial " + std::to_string(trial)};
      }
      ++classifier_checked;
    }
  }
  return {true, std::to_string(gcn_checked) + " GCN + " + std::to_string(classifier_checked) +
                    " classifier entries checked"};
}

// ---------------------------------------------------------------------------
// criterion 2: dense brute-force oracle equivalence
// ---------------------------------------------------------------------------

Outcome check_oracles() {
  Rng rng(1002);
  const double tol = 1e-12;

  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(49);  // <= 50
    const std::size_t d = 2 + rng.below(7);
    const std::size_t k_nn = 1 + rng.below(6);

    // spmm against a dense triple loop.
    {
      std::vector<SparseMatrix::Triplet> triplets;
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          if (rng.uniform() < 0.2) triplets.push_back({r, c, rng.uniform(-2, 2)});
        }
      }
      const SparseMatrix s = SparseMatrix::from_triplets(n, n, std::move(triplets));
      const DenseMatrix x = random_dense(rng, 3, n);
      const DenseMatrix got = numerics::spmm(s, x);
      const DenseMatrix sd = s.to_dense();
      for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
          double want = 0.0;
          for (std::size_t j = 0; j < n; ++j) want += x(r, j) * sd(j, i);
          if (std::abs(got(r, i) - want) > tol) return {false, "spmm oracle mismatch"};
        }
      }
    }

    // Affinity construction and both normalizations against dense oracles.
    const DenseMatrix v = random_unit_features(rng, d, n);
    const graph::AffinityGraph g = graph::build_affinity(v, k_nn);
    {
      const std::size_t k_eff = std::min(k_nn, n - 1);
      std::vector<std::vector<double>> sims(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t r = 0; r < d; ++r) acc += v(r, i) * v(r, j);
          sims[i][j] = acc;
        }
      }
      std::vector<std::vector<bool>> in_top(n, std::vector<bool>(n, false));
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) order.emplace_back(sims[i][j], j);
        }
        std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
          return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (std::size_t t = 0; t < k_eff; ++t) in_top[i][order[t].second] = true;
      }
      const DenseMatrix a = g.a.to_dense();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double want = (i != j && in_top[i][j] && in_top[j][i])
                                  ? std::max(sims[i][j], 0.0)
                                  : 0.0;
          // The graph renormalizes internally; unit inputs keep the
          // difference within 1e-12.
          if (std::abs(a(i, j) - want) > tol) return {false, "affinity oracle mismatch"};
        }
      }

      const DenseMatrix at = graph::normalize_row_stochastic(g).m.to_dense();
      const DenseMatrix sn = graph::normalize_symmetric(g).m.to_dense();
      for (std::size_t i = 0; i < n; ++i) {
        double degree = 1.0;
        for (std::size_t j = 0; j < n; ++j) degree += a(i, j);
        for (std::size_t j = 0; j < n; ++j) {
          const double want = (a(i, j) + (i == j ? 1.0 : 0.0)) / degree;
          if (std::abs(at(i, j) - want) > tol) return {false, "row-stochastic oracle mismatch"};
        }
      }
      std::vector<double> degree(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) degree[i] += a(i, j);
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double want = degree[i] > 0.0 && degree[j] > 0.0
                                  ? a(i, j) / std::sqrt(degree[i] * degree[j])
                                  : 0.0;
          if (std::abs(sn(i, j) - want) > tol) return {false, "symmetric oracle mismatch"};
        }
      }
    }

    // Prototypes against a direct weighted mean.
    {
      const std::size_t classes = 1 + rng.below(4);
      std::vector<std::vector<classifier::WeightedExample>> members(classes);
      std::vector<std::string> ids(classes);
      for (std::size_t c = 0; c < classes; ++c) {
        ids[c] = "c" + std::to_string(c);
        const std::size_t count = 1 + rng.below(5);
        for (std::size_t i = 0; i < count; ++i) {
          members[c].push_back({rng.below(n), rng.uniform(0.1, 1.0)});
        }
      }
      const classifier::ClassifierWeights w =
          classifier::compute_prototypes(v, ids, members, 10.0);
      for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t r = 0; r < d; ++r) {
          double numerator = 0.0, denominator = 0.0;
          for (const auto& e : members[c]) {
            numerator += e.relevance * v(r, e.column);
            denominator += e.relevance;
          }
          if (std::abs(w.w(r, c) - numerator / denominator) > tol) {
            return {false, "prototype oracle mismatch"};
          }
        }
      }
    }

    // Both loss functions against scalar formulas.
    {
      const std::size_t k_classes = 2 + rng.below(4);
      const std::size_t b = 2 + rng.below(6);
      const DenseMatrix w = random_dense(rng, d, k_classes);
      const DenseMatrix batch = random_dense(rng, d, b);
      std::vector<std::size_t> labels(b);
      std::vector<double> relevance(b);
      for (std::size_t i = 0; i < b; ++i) {
        labels[i] = rng.below(k_classes);
        relevance[i] = rng.uniform(0.05, 1.0);
      }
      const double s = 8.0;
      auto unit = [](const DenseMatrix& m, std::size_t col) {
        std::vector<double> out(m.rows());
        double sq = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) sq += m(r, col) * m(r, col);
        for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, col) / std::sqrt(sq);
        return out;
      };
      std::vector<double> totals(k_classes, 0.0);
      for (std::size_t i = 0; i < b; ++i) totals[labels[i]] += relevance[i];
      double want = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        const std::vector<double> x = unit(batch, i);
        double denom = 0.0;
        std::vector<double> exps(k_classes);
        for (std::size_t c = 0; c < k_classes; ++c) {
          const std::vector<double> wc = unit(w, c);
          double cosine = 0.0;
          for (std::size_t r = 0; r < d; ++r) cosine += wc[r] * x[r];
          exps[c] = std::exp(s * cosine);
          denom += exps[c];
        }
        want -= relevance[i] / totals[labels[i]] * std::log(exps[labels[i]] / denom);
      }
      const double got = classifier::classifier_loss(w, batch, labels, relevance, s);
      if (std::abs(got - want) > tol) return {false, "classifier_loss oracle mismatch"};

      const std::size_t k_clean = 1 + rng.below(b);
      const double lambda = rng.uniform(0.0, 2.0);
      std::vector<double> outputs(b);
      for (double& o : outputs) o = rng.uniform(0.01, 0.99);
      double clean = 0.0, noisy = 0.0;
      for (std::size_t i = 0; i < k_clean; ++i) clean += std::log(outputs[i]);
      for (std::size_t i = k_clean; i < b; ++i) noisy += std::log(1.0 - outputs[i]);
      double loss_want = -clean / static_cast<double>(k_clean);
      if (k_clean < b) loss_want -= lambda * noisy / static_cast<double>(b - k_clean);
      if (std::abs(cleaners::gcn_loss(outputs, k_clean, lambda) - loss_want) > tol) {
        return {false, "gcn_loss oracle mismatch"};
      }
    }
  }
  return {true, "50 instances x 7 operations"};
}

// ---------------------------------------------------------------------------
// criterion 3: label-propagation solves
// ---------------------------------------------------------------------------

std::vector<double> dense_lp_solve(const graph::AffinityGraph& g, std::vector<double> y,
                                   double alpha) {
  const std::size_t n = g.n;
  const DenseMatrix a = g.a.to_dense();
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) degree[i] += a(i, j);
  }
  std::vector<std::vector<double>> system(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double s = degree[i] > 0.0 && degree[j] > 0.0
                           ? a(i, j) / std::sqrt(degree[i] * degree[j])
                           : 0.0;
      system[i][j] = (i == j ? 1.0 : 0.0) - alpha * s;
    }
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(system[r][col]) > std::abs(system[pivot][col])) pivot = r;
    }
    std::swap(system[col], system[pivot]);
    std::swap(y[col], y[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = system[r][col] / system[col][col];
      for (std::size_t c = col; c < n; ++c) system[r][c] -= factor * system[col][c];
      y[r] -= factor * y[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / system[i][i];
  return x;
}

Outcome check_label_propagation() {
  Rng rng(1003);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 4 + rng.below(47);  // <= 50
    const graph::AffinityGraph g = graph::build_affinity(random_unit_features(rng, 6, n), 5);
    std::vector<double> y(n, 0.0);
    const std::size_t k = 1 + rng.below(n / 2 + 1);
    for (std::size_t i = 0; i < k; ++i) y[i] = 1.0;
    const std::vector<double> raw = cleaners::lp_solve_raw(g, y, cleaners::LpConfig{});
    const std::vector<double> direct = dense_lp_solve(g, y, 0.9);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(raw[i] - direct[i]) > 1e-8) {
        return {false, "iterative/direct mismatch on trial " + std::to_string(trial)};
      }
    }
  }

  graph::AffinityGraph pair;
  pair.n = 2;
  pair.k_nn = 1;
  pair.a = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const std::vector<double> raw =
      cleaners::lp_solve_raw(pair, std::vector<double>{1.0, 0.0}, cleaners::LpConfig{});
  if (std::abs(raw[0] - 5.2632) > 1e-3 || std::abs(raw[1] - 4.7368) > 1e-3) {
    return {false, "2-vertex raw solution off: " + std::to_string(raw[0]) + ", " +
                       std::to_string(raw[1])};
  }
  return {true, "20 random graphs + the 2-vertex instance"};
}

// ---------------------------------------------------------------------------
// criterion 4: MLP is the identity-propagation GCN, bit for bit
// ---------------------------------------------------------------------------

Outcome check_mlp_reduction() {
  Rng rng(1004);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 6 + rng.below(10);
    const DenseMatrix v = random_unit_features(rng, 8, n);
    graph::NormalizedAffinity identity;
    identity.n = n;
    identity.m = SparseMatrix::identity(n);
    cleaners::GcnTrainConfig cfg;
    cfg.seed = 500 + trial;
    cfg.iterations = 40;
    const cleaners::RelevanceMap via_gcn =
        cleaners::train_gcn(v, identity, 2, cfg).relevance;
    const cleaners::RelevanceMap via_mlp = cleaners::train_mlp(v, 2, cfg);
    if (via_gcn.entries.size() != via_mlp.entries.size()) {
      return {false, "entry count mismatch"};
    }
    for (std::size_t i = 0; i < via_gcn.entries.size(); ++i) {
      if (via_gcn.entries[i].relevance != via_mlp.entries[i].relevance) {
        return {false, "relevance differs at entry " + std::to_string(i)};
      }
    }
  }
  return {true, "5 seeds, bit-identical maps"};
}

// ---------------------------------------------------------------------------
// criterion 5: cleaning efficacy on the standard benchmark
// ---------------------------------------------------------------------------

struct BenchmarkContext {
  synth::SynthDataset data;
  std::vector<io::ClassExampleSet> classes;
  std::vector<std::string> truth;
};

BenchmarkContext make_benchmark(std::uint64_t seed) {
  BenchmarkContext ctx;
  ctx.data = synth::generate(benchmark_spec(seed));
  ctx.classes = io::partition_by_class(ctx.data.train, ctx.data.labels);
  ctx.truth = truth_of(ctx.data);
  return ctx;
}

eval::MethodSpec prototype_method(pipeline::CleanerKind kind, double beta = 1.0) {
  eval::MethodSpec method;
  method.cleaning.kind = kind;
  method.cleaning.beta = beta;
  method.top_k = 1;
  return method;
}

Outcome check_cleaning_efficacy() {
  const BenchmarkContext ctx = make_benchmark(2024);
  eval::EpisodeSpec spec;
  spec.k_shots = 1;
  spec.episodes = 5;
  spec.seed = 42;

  const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  const eval::EvalReport gcn = eval::evaluate(ctx.data.train, ctx.classes, ctx.data.test,
                                              ctx.truth, spec,
                                              prototype_method(pipeline::CleanerKind::Gcn), jobs);
  const eval::EvalReport beta1 = eval::evaluate(
      ctx.data.train, ctx.classes, ctx.data.test, ctx.truth, spec,
      prototype_method(pipeline::CleanerKind::Beta, 1.0), jobs);
  const eval::EvalReport clean_only = eval::evaluate(
      ctx.data.train, ctx.classes, ctx.data.test, ctx.truth, spec,
      prototype_method(pipeline::CleanerKind::Beta, 0.0), jobs);

  std::size_t holds = 0;
  std::ostringstream detail;
  for (std::size_t e = 0; e < 5; ++e) {
    const bool beat_beta = gcn.episode_accuracy[e] >= beta1.episode_accuracy[e] + 0.05;
    const bool beat_clean = gcn.episode_accuracy[e] >= clean_only.episode_accuracy[e] + 0.05;
    if (beat_beta && beat_clean) ++holds;
    detail << (e == 0 ? "" : " ") << "ep" << e << ":" << gcn.episode_accuracy[e] << "/"
           << beta1.episode_accuracy[e] << "/" << clean_only.episode_accuracy[e];
  }
  std::ostringstream summary;
  summary << "gcn=" << gcn.mean << " beta1=" << beta1.mean << " clean=" << clean_only.mean
          << " holds " << holds << "/5 (" << detail.str() << ")";
  return {holds >= 4, summary.str()};
}

// ---------------------------------------------------------------------------
// criterion 6: relevance separation of positives vs negatives
// ---------------------------------------------------------------------------

Outcome check_relevance_separation() {
  const BenchmarkContext ctx = make_benchmark(2024);
  pipeline::CleaningConfig cleaning;  // gcn defaults, lambda 1
  cleaning.seed = 42;
  const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::vector<cleaners::RelevanceMap> maps =
      pipeline::clean_all(ctx.data.train, ctx.classes, cleaning, jobs);
  const eval::RelevanceReport report = eval::relevance_report(maps, ctx.data.flags);
  if (!report.mean_positive || !report.mean_negative) {
    return {false, "report has undefined means"};
  }
  const double separation = *report.mean_positive - *report.mean_negative;
  std::ostringstream summary;
  summary << "mean_pos=" << *report.mean_positive << " mean_neg=" << *report.mean_negative
          << " separation=" << separation;
  return {separation >= 0.2, summary.str()};
}

// ---------------------------------------------------------------------------
// criterion 7: relevance is non-increasing in lambda
// ---------------------------------------------------------------------------

Outcome check_lambda_monotonicity() {
  const BenchmarkContext ctx = make_benchmark(99);
  const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  double previous = 2.0;
  std::ostringstream detail;
  for (double lambda : {0.01, 0.1, 1.0, 10.0}) {
    pipeline::CleaningConfig cleaning;
    cleaning.gcn.lambda = lambda;
    cleaning.seed = 7;
    const std::vector<cleaners::RelevanceMap> maps =
        pipeline::clean_all(ctx.data.train, ctx.classes, cleaning, jobs);
    double mean = 0.0;
    std::size_t count = 0;
    for (const auto& map : maps) {
      for (const auto& entry : map.entries) {
        if (entry.provenance == cleaners::Provenance::Noisy) {
          mean += entry.relevance;
          ++count;
        }
      }
    }
    mean /= static_cast<double>(count);
    detail << "lambda=" << lambda << ":" << mean << " ";
    if (mean > previous + 0.02) {
      return {false, detail.str() + "(increase beyond slack)"};
    }
    previous = mean;
  }
  return {true, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 8: cosine-classifier pipeline on separable data
// ---------------------------------------------------------------------------

Outcome check_classifier_pipeline() {
  Rng rng(1008);
  const std::size_t d = 16, per_class = 20, classes = 3;
  DenseMatrix features(d, classes * per_class);
  std::vector<std::size_t> labels(classes * per_class);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t col = c * per_class + i;
      labels[col] = c;
      double sq = 0.0;
      std::vector<double> x(d);
      for (std::size_t r = 0; r < d; ++r) {
        x[r] = (r == c ? 1.0 : 0.0) + 0.12 * rng.normal();
        sq += x[r] * x[r];
      }
      for (std::size_t r = 0; r < d; ++r) features(r, col) = x[r] / std::sqrt(sq);
    }
  }
  const std::vector<double> relevance(classes * per_class, 1.0);
  std::vector<std::vector<classifier::WeightedExample>> members(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back({i, 1.0});
  const std::vector<std::string> ids{"c0", "c1", "c2"};
  const classifier::ClassifierWeights init =
      classifier::compute_prototypes(features, ids, members, 10.0);

  classifier::TrainConfig zero;
  zero.epochs = 0;
  const classifier::ClassifierWeights untouched =
      classifier::train_cosine(features, labels, relevance, zero, init);
  for (std::size_t i = 0; i < init.w.size(); ++i) {
    if (untouched.w.values()[i] != init.w.values()[i]) {
      return {false, "zero-epoch training changed the weights"};
    }
  }

  classifier::TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 16;
  cfg.seed = 12;
  const classifier::ClassifierWeights trained =
      classifier::train_cosine(features, labels, relevance, cfg, init);
  const double initial_loss =
      classifier::classifier_loss(init.w, features, labels, relevance, init.scale);
  const double final_loss =
      classifier::classifier_loss(trained.w, features, labels, relevance, trained.scale);
  if (!(final_loss < initial_loss)) {
    return {false, "loss did not decrease: " + std::to_string(initial_loss) + " -> " +
                       std::to_string(final_loss)};
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (classifier::cosine_predict(trained, features.column(i), 1)[0].class_index == labels[i]) {
      ++correct;
    }
  }
  std::ostringstream summary;
  summary << "train accuracy " << correct << "/" << labels.size() << ", loss " << initial_loss
          << " -> " << final_loss;
  return {correct == labels.size(), summary.str()};
}

// ---------------------------------------------------------------------------
// criterion 9: CLI determinism
// ---------------------------------------------------------------------------

Outcome check_cli_determinism(const std::string& tool, const std::filesystem::path& scratch) {
  const auto dir = scratch / "determinism";
  std::filesystem::create_directories(dir);
  synth::SynthSpec spec;
  spec.classes = 4;
  spec.dim = 16;
  spec.clean_per_class = 2;
  spec.noisy_per_class = 20;
  spec.test_per_class = 10;
  spec.seed = 77;
  const synth::SynthDataset data = synth::generate(spec);
  io::write_feature_store(dir / "features.fsto", data.train);
  io::write_labels(dir / "labels.csv", data.labels);
  io::write_feature_store(dir / "test_features.fsto", data.test);
  io::write_labels(dir / "test_labels.csv", data.test_labels);

  const std::string features = (dir / "features.fsto").string();
  const std::string labels = (dir / "labels.csv").string();

  auto run_twice = [&](const std::string& name, const std::string& command,
                       const std::vector<std::string>& outputs) -> Outcome {
    std::vector<std::string> first;
    const ProcessResult a = run_process(command);
    if (a.exit_code != 0) return {false, name + " exited " + std::to_string(a.exit_code)};
    for (const std::string& out : outputs) first.push_back(slurp(out));
    const ProcessResult b = run_process(command);
    if (b.exit_code != 0) return {false, name + " second run exited"};
    if (a.out != b.out) return {false, name + " stdout differs between runs"};
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (slurp(outputs[i]) != first[i]) {
        return {false, name + " output file differs: " + outputs[i]};
      }
    }
    return {true, ""};
  };

  Outcome outcome = run_twice(
      "clean",
      tool + " clean --method gcn --knn 10 --features " + features + " --labels " + labels +
          " --out " + (dir / "r.csv").string() + " --seed 5 --jobs 4 --json",
      {(dir / "r.csv").string()});
  if (!outcome.pass) return outcome;

  outcome = run_twice(
      "train",
      tool + " train --features " + features + " --labels " + labels + " --relevance " +
          (dir / "r.csv").string() + " --out " + (dir / "w.wcls").string() +
          " --epochs 4 --batch-size 16 --seed 5 --json",
      {(dir / "w.wcls").string()});
  if (!outcome.pass) return outcome;

  outcome = run_twice(
      "eval",
      tool + " eval --method gcn --knn 10 --k-shots 2 --episodes 3 --top-k 1 --features " +
          features + " --labels " + labels + " --test-features " +
          (dir / "test_features.fsto").string() + " --test-labels " +
          (dir / "test_labels.csv").string() + " --report-out " + (dir / "rep.csv").string() +
          " --summary-out " + (dir / "sum.csv").string() + " --seed 5 --jobs 4 --json",
      {(dir / "rep.csv").string(), (dir / "sum.csv").string()});
  if (!outcome.pass) return outcome;

  return {true, "clean/train/eval byte-identical across reruns"};
}

// ---------------------------------------------------------------------------
// criterion 10: robustness against corrupted inputs
// ---------------------------------------------------------------------------

Outcome check_format_robustness(const std::string& tool, const std::filesystem::path& scratch) {
  const auto dir = scratch / "fuzz";
  std::filesystem::create_directories(dir);

  synth::SynthSpec spec;
  spec.classes = 3;
  spec.dim = 8;
  spec.clean_per_class = 1;
  spec.noisy_per_class = 8;
  spec.test_per_class = 0;
  spec.seed = 31;
  const synth::SynthDataset data = synth::generate(spec);
  io::write_feature_store(dir / "base.fsto", data.train);
  io::write_labels(dir / "base_labels.csv", data.labels);
  const std::string fsto = slurp(dir / "base.fsto");
  const std::string labels_csv = slurp(dir / "base_labels.csv");

  cleaners::RelevanceMap map;
  map.class_id = "c";
  map.entries.push_back({"a", 1.0, cleaners::Provenance::Clean});
  map.entries.push_back({"b", 0.25, cleaners::Provenance::Noisy});
  io::write_relevance(dir / "base_rel.csv", {map});
  const std::string rel_csv = slurp(dir / "base_rel.csv");

  std::size_t fixtures = 0;
  std::size_t typed_errors = 0;
  std::size_t clean_loads = 0;
  Rng rng(1010);

  auto try_fsto = [&](const std::string& bytes) -> bool {
    const auto path = dir / "mut.fsto";
    write_bytes(path, bytes);
    ++fixtures;
    try {
      (void)io::read_feature_store(path);
      ++clean_loads;
      return true;
    } catch (const Error&) {
      ++typed_errors;
      return true;
    } catch (...) {
      return false;  // alien exception: a robustness failure
    }
  };
  auto try_labels = [&](const std::string& text) -> bool {
    const auto path = dir / "mut_labels.csv";
    write_bytes(path, text);
    ++fixtures;
    try {
      (void)io::read_labels(path);
      ++clean_loads;
      return true;
    } catch (const Error&) {
      ++typed_errors;
      return true;
    } catch (...) {
      return false;
    }
  };
  auto try_relevance = [&](const std::string& text) -> bool {
    const auto path = dir / "mut_rel.csv";
    write_bytes(path, text);
    ++fixtures;
    try {
      (void)io::read_relevance(path);
      ++clean_loads;
      return true;
    } catch (const Error&) {
      ++typed_errors;
      return true;
    } catch (...) {
      return false;
    }
  };

  // Truncations at every boundary flavor.
  for (std::size_t len = 0; len < fsto.size(); len += std::max<std::size_t>(1, fsto.size() / 40)) {
    if (!try_fsto(fsto.substr(0, len))) return {false, "fsto truncation crashed"};
  }
  // Random byte flips.
  for (int i = 0; i < 40; ++i) {
    std::string mutated = fsto;
    const std::size_t pos = rng.below(mutated.size());
    mutated[pos] = static_cast<char>(rng.below(256));
    if (!try_fsto(mutated)) return {false, "fsto byte flip crashed"};
  }
  // Structural corruption: magic, version, absurd counts, trailing junk.
  {
    std::string m = fsto;
    m[0] = 'Z';
    if (!try_fsto(m)) return {false, "magic corruption crashed"};
    m = fsto;
    m[4] = '\x07';
    if (!try_fsto(m)) return {false, "version corruption crashed"};
    m = fsto;
    m[8] = '\xff';
    m[9] = '\xff';
    m[10] = '\xff';
    if (!try_fsto(m)) return {false, "count corruption crashed"};
    if (!try_fsto(fsto + "extra")) return {false, "trailing junk crashed"};
    if (!try_fsto("")) return {false, "empty file crashed"};
  }

  // Label CSV mutations: bad tokens, missing fields, duplicate rows,
  // binary noise.
  const std::vector<std::string> label_variants{
      "id,class,source\nx,c,dirty\n",
      "id,class,source\nx,c\n",
      "id,class,source\nx,c,clean\nx,c,noisy\n",
      "id,klass,source\nx,c,clean\n",
      "",
      "id,class,source\n,c,clean\n",
      std::string("id,class,source\nx,c,clean\n") + '\0' + ",d,noisy\n",
  };
  for (const std::string& variant : label_variants) {
    if (!try_labels(variant)) return {false, "label mutation crashed"};
  }
  for (int i = 0; i < 20; ++i) {
    std::string mutated = labels_csv;
    const std::size_t pos = rng.below(mutated.size());
    mutated[pos] = static_cast<char>(rng.below(256));
    if (!try_labels(mutated)) return {false, "label byte flip crashed"};
  }

  // Relevance CSV mutations.
  const std::vector<std::string> rel_variants{
      "id,class,relevance,provenance\na,c,-0.1,noisy\n",
      "id,class,relevance,provenance\na,c,1.5,noisy\n",
      "id,class,relevance,provenance\na,c,0.9,clean\n",
      "id,class,relevance,provenance\na,c,abc,noisy\n",
      "id,class,relevance,provenance\na,c,0.5,maybe\n",
      "id,class,relevance,provenance\na,c,0.5\n",
  };
  for (const std::string& variant : rel_variants) {
    if (!try_relevance(variant)) return {false, "relevance mutation crashed"};
  }
  for (int i = 0; i < 15; ++i) {
    std::string mutated = rel_csv;
    const std::size_t pos = rng.below(mutated.size());
    mutated[pos] = static_cast<char>(rng.below(256));
    if (!try_relevance(mutated)) return {false, "relevance byte flip crashed"};
  }

  if (fixtures < 100) {
    return {false, "only " + std::to_string(fixtures) + " fixtures exercised"};
  }

  // The CLI must map these failures to exit 2 without crashing.
  std::string truncated = fsto.substr(0, fsto.size() / 2);
  write_bytes(dir / "cli_bad.fsto", truncated);
  write_bytes(dir / "cli_bad_labels.csv", "id,class,source\nx,c,dirty\n");
  const std::vector<std::string> commands{
      tool + " inspect --features " + (dir / "cli_bad.fsto").string(),
      tool + " inspect --labels " + (dir / "cli_bad_labels.csv").string(),
      tool + " clean --method beta --features " + (dir / "cli_bad.fsto").string() +
          " --labels " + (dir / "base_labels.csv").string() + " --out " +
          (dir / "out.csv").string(),
      tool + " clean --method beta --features " + (dir / "base.fsto").string() + " --labels " +
          (dir / "cli_bad_labels.csv").string() + " --out " + (dir / "out.csv").string(),
      tool + " predict --weights " + (dir / "cli_bad.fsto").string() + " --features " +
          (dir / "base.fsto").string() + " --out " + (dir / "out.csv").string(),
      tool + " inspect --relevance " + (dir / "base_labels.csv").string(),
  };
  for (const std::string& command : commands) {
    const ProcessResult result = run_process(command);
    if (result.crashed) return {false, "CLI crashed on: " + command};
    if (result.exit_code != 2) {
      return {false, "CLI exited " + std::to_string(result.exit_code) + " (want 2) on: " +
                         command};
    }
  }

  std::ostringstream summary;
  summary << fixtures << " fixtures (" << typed_errors << " typed errors, " << clean_loads
          << " benign), 6 CLI probes all exit 2";
  return {true, summary.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::string tool;
  if (const char* env = std::getenv("RELCLEAN_BIN")) tool = env;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--tool") tool = argv[i + 1];
  }
  if (tool.empty()) {
    std::fprintf(stderr, "acceptance: set RELCLEAN_BIN or pass --tool <path-to-relclean>\n");
    return 2;
  }

  std::filesystem::path scratch =
      std::filesystem::temp_directory_path() / ("relclean-acceptance-" + std::to_string(getpid()));
  std::filesystem::create_directories(scratch);

  const std::vector<std::pair<int, Criterion>> criteria = {
      {1, Criterion("gradient checks vs central finite differences", 5.0, check_gradients)},
      {2, Criterion("dense brute-force oracle equivalence", 10.0, check_oracles)},
      {3, Criterion("label propagation matches the direct solve", 2.0, check_label_propagation)},
      {4, Criterion("MLP equals the identity-propagation GCN", 0.0, check_mlp_reduction)},
      {5, Criterion("GCN cleaning beats beta=1 and clean-only prototypes", 60.0,
                    check_cleaning_efficacy)},
      {6, Criterion("relevance separates positives from negatives", 0.0,
                    check_relevance_separation)},
      {7, Criterion("mean noisy relevance is non-increasing in lambda", 0.0,
                    check_lambda_monotonicity)},
      {8, Criterion("cosine classifier trains to perfection on separable data", 0.0,
                    check_classifier_pipeline)},
      {9, Criterion("clean/train/eval are byte-deterministic", 0.0,
                    [&] { return check_cli_determinism(tool, scratch); })},
      {10, Criterion("corrupted inputs give typed errors, never crashes", 0.0,
                     [&] { return check_format_robustness(tool, scratch); })},
  };

  int failures = 0;
  for (const auto& [number, criterion] : criteria) {
    if (!criterion.run(number)) ++failures;
  }

  std::error_code ec;
  std::filesystem::remove_all(scratch, ec);

  if (failures == 0) {
    std::printf("acceptance: all %zu criteria passed\n", criteria.size());
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", failures);
  return 1;
}
