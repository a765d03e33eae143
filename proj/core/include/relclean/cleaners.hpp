#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relclean/graph.hpp"
#include "relclean/matrix.hpp"
#include "relclean/rng.hpp"

namespace relclean::cleaners {

using numerics::DenseMatrix;
using numerics::DropoutMask;
using numerics::Rng;

// Two-layer GCN weights: theta1 mixes input features into the hidden
// representation, theta2 maps the hidden representation to the scalar
// "clean" logit.
struct GcnParams {
  DenseMatrix theta1;  // d x m
  DenseMatrix theta2;  // m x 1
};

struct GcnTrainConfig {
  double lambda = 1.0;        // importance weight on the noisy term
  std::size_t iterations = 100;
  double lr = 0.1;
  double dropout_p = 0.5;
  std::size_t hidden_m = 16;
  std::uint64_t seed = 0;
};

enum class Provenance { Clean, Noisy };

struct RelevanceEntry {
  std::string id;
  double relevance = 0.0;
  Provenance provenance = Provenance::Noisy;
};

// Per-class relevance scores. Clean entries are pinned to exactly 1,
// everything is in [0,1].
struct RelevanceMap {
  std::string class_id;
  std::vector<RelevanceEntry> entries;

  double mean_noisy() const;
};

struct LpConfig {
  double alpha = 0.9;
  double tolerance = 1e-10;       // absolute residual norm
  std::size_t max_iterations = 1000;
};

struct LinearConfig {
  double lr = 1.0;
  std::size_t max_iterations = 500;
  double tolerance = 1e-9;  // sup-norm of the mean gradient
};

// Builds a RelevanceMap for a clean-first slice: ids[0..k) are clean and
// pinned to 1, ids[k..) are noisy and take `noisy_scores` (clamped checks,
// must already be in [0,1]). When ids is empty, indices are used as names.
RelevanceMap make_relevance_map(std::string class_id, std::span<const std::string> ids,
                                std::size_t k, std::span<const double> noisy_scores);

// Symmetric uniform initialization with scale 1/sqrt(fan_in); theta1 is
// filled first, row-major, then theta2.
GcnParams init_gcn_params(std::size_t d, std::size_t m, Rng& rng);

// sigma(theta2^T [theta1^T V A]_+ A) per column. `mask` (flat m*N, row-major
// over the hidden matrix) enables train-time inverted dropout on the ReLU
// activations; pass nullptr for inference.
std::vector<double> gcn_forward(const GcnParams& params, const graph::NormalizedAffinity& at,
                                const DenseMatrix& v, const DropoutMask* mask = nullptr);

// Weighted binary cross-entropy: clean targets 1 with weight 1/k, noisy
// targets 0 with weight lambda/(N-k). Outputs are clamped to
// [1e-12, 1-1e-12] before the logs. k == N drops the noisy term.
double gcn_loss(std::span<const double> outputs, std::size_t k, double lambda);

struct GcnGradients {
  DenseMatrix theta1;  // d x m
  DenseMatrix theta2;  // m x 1
};

// Analytic gradient of gcn_loss(gcn_forward(...)) under a fixed dropout
// mask.
GcnGradients gcn_grad(const GcnParams& params, const graph::NormalizedAffinity& at,
                      const DenseMatrix& v, std::size_t k, double lambda,
                      const DropoutMask* mask = nullptr);

struct GcnTrainResult {
  GcnParams params;
  RelevanceMap relevance;
  double final_loss = 0.0;
};

// Full-batch Adam training of the GCN cleaner; the final relevance is an
// inference-mode forward pass with clean entries pinned to 1. Columns
// 0..k-1 of `v` must be the clean examples.
GcnTrainResult train_gcn(const DenseMatrix& v, const graph::NormalizedAffinity& at, std::size_t k,
                         const GcnTrainConfig& cfg, std::string class_id = {},
                         std::span<const std::string> ids = {});

// The disconnected-graph reduction: identical to train_gcn with the
// identity propagation matrix.
RelevanceMap train_mlp(const DenseMatrix& v, std::size_t k, const GcnTrainConfig& cfg,
                       std::string class_id = {}, std::span<const std::string> ids = {});

// Solves (I - alpha * D^{-1/2} A D^{-1/2}) r = y by conjugate gradients.
std::vector<double> lp_solve_raw(const graph::AffinityGraph& g, std::span<const double> y,
                                 const LpConfig& cfg);

// Label-propagation cleaner: y is 1-hot on the first k (clean) vertices,
// the raw solution is rescaled by its maximum into [0,1] and clean entries
// are pinned to 1.
RelevanceMap label_propagation(const graph::AffinityGraph& g, std::size_t k, const LpConfig& cfg,
                               std::string class_id = {},
                               std::span<const std::string> ids = {});

// Scaled cosine to the clean prototype: r = (1 + v_i . x) / 2 on unit
// vectors, x the normalized mean of the normalized clean features.
RelevanceMap similarity_relevance(const DenseMatrix& v, std::size_t k, std::string class_id = {},
                                  std::span<const std::string> ids = {});

// Constant relevance beta for every noisy example.
RelevanceMap beta_relevance(std::size_t n, std::size_t k, double beta, std::string class_id = {},
                            std::span<const std::string> ids = {});

// Logistic regression scored on the noisy examples: positives are the k
// clean columns of `v`, negatives come from other classes. Weights start at
// zero and train by full-batch gradient descent.
RelevanceMap linear_relevance(const DenseMatrix& v, std::size_t k, const DenseMatrix& negatives,
                              const LinearConfig& cfg, std::string class_id = {},
                              std::span<const std::string> ids = {});

}  // namespace relclean::cleaners
