#include "relclean/cleaners.hpp"

#include <algorithm>
#include <cmath>

#include "relclean/adam.hpp"

namespace relclean::cleaners {

namespace {

constexpr double kLogClamp = 1e-12;

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

std::string name_of(std::span<const std::string> ids, std::size_t i) {
  return i < ids.size() ? ids[i] : std::to_string(i);
}

struct ForwardCache {
  DenseMatrix propagated_input;   // V*A, d x N
  DenseMatrix pre_activation;     // theta1^T (V*A), m x N
  DenseMatrix hidden;             // dropout(relu(pre_activation)), m x N
  DenseMatrix hidden_propagated;  // hidden * A, m x N
  std::vector<double> output;     // sigmoid logits, N
};

ForwardCache gcn_forward_cache(const GcnParams& params, const graph::NormalizedAffinity& at,
                               const DenseMatrix& v, const DropoutMask* mask) {
  const std::size_t n = v.cols();
  const std::size_t m = params.theta1.cols();
  if (params.theta1.rows() != v.rows() || params.theta2.rows() != m ||
      params.theta2.cols() != 1 || at.n != n) {
    throw ContractViolation("gcn_forward: parameter/feature/affinity shapes disagree");
  }
  if (mask != nullptr && mask->keep.size() != m * n) {
    throw ContractViolation("gcn_forward: dropout mask length must be m*N");
  }

  ForwardCache cache;
  cache.propagated_input = numerics::spmm(at.m, v);
  cache.pre_activation = numerics::matmul_transposed_a(params.theta1, cache.propagated_input);
  cache.hidden = cache.pre_activation;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t j = 0; j < n; ++j) {
      double h = std::max(cache.hidden(a, j), 0.0);
      if (mask != nullptr) {
        h = mask->keep[a * n + j] != 0 ? h * mask->scale : 0.0;
      }
      cache.hidden(a, j) = h;
    }
  }
  cache.hidden_propagated = numerics::spmm(at.m, cache.hidden);
  cache.output.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double logit = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      logit += params.theta2(a, 0) * cache.hidden_propagated(a, j);
    }
    cache.output[j] = sigmoid(logit);
  }
  return cache;
}

// dL/dlogit per example: -(1-F)/k on clean, lambda*F/(N-k) on noisy.
std::vector<double> loss_logit_grad(std::span<const double> outputs, std::size_t k,
                                    double lambda) {
  const std::size_t n = outputs.size();
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    g[i] = -(1.0 - outputs[i]) / static_cast<double>(k);
  }
  if (k < n) {
    const double w = lambda / static_cast<double>(n - k);
    for (std::size_t i = k; i < n; ++i) {
      g[i] = w * outputs[i];
    }
  }
  return g;
}

GcnGradients gcn_grad_from_cache(const GcnParams& params, const graph::NormalizedAffinity& at,
                                 const ForwardCache& cache, std::size_t k, double lambda,
                                 const DropoutMask* mask) {
  const std::size_t n = cache.output.size();
  const std::size_t m = params.theta1.cols();
  const std::vector<double> g = loss_logit_grad(cache.output, k, lambda);

  GcnGradients grads;
  grads.theta2 = DenseMatrix(m, 1);
  for (std::size_t a = 0; a < m; ++a) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += cache.hidden_propagated(a, j) * g[j];
    grads.theta2(a, 0) = acc;
  }

  // Backprop through the second propagation: q = A g.
  const std::vector<double> q = at.m.multiply(g);
  DenseMatrix pre_grad(m, n);
  for (std::size_t a = 0; a < m; ++a) {
    const double t2 = params.theta2(a, 0);
    for (std::size_t j = 0; j < n; ++j) {
      double d = t2 * q[j];
      if (mask != nullptr) {
        d = mask->keep[a * n + j] != 0 ? d * mask->scale : 0.0;
      }
      pre_grad(a, j) = cache.pre_activation(a, j) > 0.0 ? d : 0.0;
    }
  }
  grads.theta1 = numerics::matmul_transposed_b(cache.propagated_input, pre_grad);
  return grads;
}

void validate_clean_count(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) {
    throw ContractViolation("cleaner: clean count k=" + std::to_string(k) +
                            " outside [1," + std::to_string(n) + "]");
  }
}

}  // namespace

double RelevanceMap::mean_noisy() const {
  double acc = 0.0;
  std::size_t count = 0;
  for (const RelevanceEntry& e : entries) {
    if (e.provenance == Provenance::Noisy) {
      acc += e.relevance;
      ++count;
    }
  }
  return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

RelevanceMap make_relevance_map(std::string class_id, std::span<const std::string> ids,
                                std::size_t k, std::span<const double> noisy_scores) {
  RelevanceMap map;
  map.class_id = std::move(class_id);
  const std::size_t n = k + noisy_scores.size();
  map.entries.reserve(n);
  for (std::size_t i = 0; i < k; ++i) {
    map.entries.push_back({name_of(ids, i), 1.0, Provenance::Clean});
  }
  for (std::size_t i = 0; i < noisy_scores.size(); ++i) {
    const double r = noisy_scores[i];
    if (!std::isfinite(r)) {
      throw NumericalFailure("relevance: non-finite score for '" + name_of(ids, k + i) + "'");
    }
    if (r < 0.0 || r > 1.0) {
      throw ContractViolation("relevance: score " + std::to_string(r) + " outside [0,1] for '" +
                              name_of(ids, k + i) + "'");
    }
    map.entries.push_back({name_of(ids, k + i), r, Provenance::Noisy});
  }
  return map;
}

GcnParams init_gcn_params(std::size_t d, std::size_t m, Rng& rng) {
  GcnParams params;
  params.theta1 = DenseMatrix(d, m);
  params.theta2 = DenseMatrix(m, 1);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& w : params.theta1.values()) w = rng.uniform(-s1, s1);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(m));
  for (double& w : params.theta2.values()) w = rng.uniform(-s2, s2);
  return params;
}

std::vector<double> gcn_forward(const GcnParams& params, const graph::NormalizedAffinity& at,
                                const DenseMatrix& v, const DropoutMask* mask) {
  return gcn_forward_cache(params, at, v, mask).output;
}

double gcn_loss(std::span<const double> outputs, std::size_t k, double lambda) {
  validate_clean_count(k, outputs.size());
  const std::size_t n = outputs.size();
  double clean_term = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double f = std::clamp(outputs[i], kLogClamp, 1.0 - kLogClamp);
    clean_term += std::log(f);
  }
  double loss = -clean_term / static_cast<double>(k);
  if (k < n) {
    double noisy_term = 0.0;
    for (std::size_t i = k; i < n; ++i) {
      const double f = std::clamp(outputs[i], kLogClamp, 1.0 - kLogClamp);
      noisy_term += std::log(1.0 - f);
    }
    loss -= lambda * noisy_term / static_cast<double>(n - k);
  }
  return loss;
}

GcnGradients gcn_grad(const GcnParams& params, const graph::NormalizedAffinity& at,
                      const DenseMatrix& v, std::size_t k, double lambda,
                      const DropoutMask* mask) {
  validate_clean_count(k, v.cols());
  const ForwardCache cache = gcn_forward_cache(params, at, v, mask);
  return gcn_grad_from_cache(params, at, cache, k, lambda, mask);
}

GcnTrainResult train_gcn(const DenseMatrix& v, const graph::NormalizedAffinity& at, std::size_t k,
                         const GcnTrainConfig& cfg, std::string class_id,
                         std::span<const std::string> ids) {
  validate_clean_count(k, v.cols());
  const std::size_t n = v.cols();
  const std::size_t d = v.rows();
  const std::size_t m = cfg.hidden_m;
  if (m < 1) throw ContractViolation("train_gcn: hidden_m must be >= 1");

  Rng rng(cfg.seed);
  GcnTrainResult result;
  result.params = init_gcn_params(d, m, rng);
  numerics::AdamState state1(d * m);
  numerics::AdamState state2(m);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const DropoutMask mask = numerics::dropout_mask(rng, m * n, cfg.dropout_p);
    const ForwardCache cache = gcn_forward_cache(result.params, at, v, &mask);
    const double loss = gcn_loss(cache.output, k, cfg.lambda);
    if (!std::isfinite(loss)) {
      throw NumericalFailure("train_gcn: non-finite loss at iteration " + std::to_string(it));
    }
    result.final_loss = loss;
    const GcnGradients grads = gcn_grad_from_cache(result.params, at, cache, k, cfg.lambda, &mask);
    numerics::adam_step(result.params.theta1.values(), grads.theta1.values(), state1, cfg.lr);
    numerics::adam_step(result.params.theta2.values(), grads.theta2.values(), state2, cfg.lr);
  }

  const std::vector<double> scores = gcn_forward(result.params, at, v, nullptr);
  result.relevance = make_relevance_map(std::move(class_id), ids, k,
                                        std::span<const double>(scores).subspan(k));
  return result;
}

RelevanceMap train_mlp(const DenseMatrix& v, std::size_t k, const GcnTrainConfig& cfg,
                       std::string class_id, std::span<const std::string> ids) {
  graph::NormalizedAffinity identity;
  identity.n = v.cols();
  identity.m = numerics::SparseMatrix::identity(v.cols());
  return train_gcn(v, identity, k, cfg, std::move(class_id), ids).relevance;
}

std::vector<double> lp_solve_raw(const graph::AffinityGraph& g, std::span<const double> y,
                                 const LpConfig& cfg) {
  if (y.size() != g.n) {
    throw ContractViolation("lp_solve_raw: rhs length != graph size");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ContractViolation("lp_solve_raw: alpha must be in (0,1)");
  }
  const graph::SymNormalizedAffinity s = graph::normalize_symmetric(g);
  const std::size_t n = g.n;

  auto apply = [&](std::span<const double> x, std::vector<double>& out) {
    out = s.m.multiply(x);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - cfg.alpha * out[i];
  };

  // Conjugate gradients; I - alpha*S is positive definite for alpha < 1.
  std::vector<double> x(n, 0.0);
  std::vector<double> residual(y.begin(), y.end());
  std::vector<double> direction = residual;
  std::vector<double> ad(n, 0.0);
  double rr = numerics::dot(residual, residual);
  if (std::sqrt(rr) <= cfg.tolerance) return x;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    apply(direction, ad);
    const double da = numerics::dot(direction, ad);
    if (!(da > 0.0) || !std::isfinite(da)) {
      throw NumericalFailure("lp_solve_raw: curvature breakdown in conjugate gradients");
    }
    const double step = rr / da;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * direction[i];
      residual[i] -= step * ad[i];
    }
    const double rr_next = numerics::dot(residual, residual);
    if (std::sqrt(rr_next) <= cfg.tolerance) return x;
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < n; ++i) direction[i] = residual[i] + beta * direction[i];
    rr = rr_next;
  }
  throw NumericalFailure("lp_solve_raw: no convergence within " +
                         std::to_string(cfg.max_iterations) + " iterations");
}

RelevanceMap label_propagation(const graph::AffinityGraph& g, std::size_t k, const LpConfig& cfg,
                               std::string class_id, std::span<const std::string> ids) {
  validate_clean_count(k, g.n);
  std::vector<double> y(g.n, 0.0);
  for (std::size_t i = 0; i < k; ++i) y[i] = 1.0;
  const std::vector<double> raw = lp_solve_raw(g, y, cfg);
  // Nonnegative matrix and nonnegative rhs keep the solution >= y, so the
  // maximum is >= 1 whenever k >= 1.
  const double top = *std::max_element(raw.begin(), raw.end());
  std::vector<double> noisy(g.n - k);
  for (std::size_t i = k; i < g.n; ++i) {
    noisy[i - k] = std::clamp(raw[i] / top, 0.0, 1.0);
  }
  return make_relevance_map(std::move(class_id), ids, k, noisy);
}

RelevanceMap similarity_relevance(const DenseMatrix& v, std::size_t k, std::string class_id,
                                  std::span<const std::string> ids) {
  validate_clean_count(k, v.cols());
  const std::size_t d = v.rows();
  const std::size_t n = v.cols();

  DenseMatrix unit(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = numerics::l2_norm(v.column(j));
    if (!(norm > 0.0)) {
      throw ContractViolation("similarity_relevance: zero-norm feature for '" + name_of(ids, j) +
                              "'");
    }
    for (std::size_t r = 0; r < d; ++r) unit(r, j) = v(r, j) / norm;
  }

  std::vector<double> proto(d, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t r = 0; r < d; ++r) proto[r] += unit(r, i);
  }
  const double proto_norm = numerics::l2_norm(proto);
  if (!(proto_norm > 0.0)) {
    throw ContractViolation("similarity_relevance: clean features cancel, prototype has zero norm");
  }
  for (double& p : proto) p /= proto_norm;

  std::vector<double> noisy(n - k);
  for (std::size_t i = k; i < n; ++i) {
    double cosine = 0.0;
    for (std::size_t r = 0; r < d; ++r) cosine += unit(r, i) * proto[r];
    noisy[i - k] = std::clamp((1.0 + cosine) / 2.0, 0.0, 1.0);
  }
  return make_relevance_map(std::move(class_id), ids, k, noisy);
}

RelevanceMap beta_relevance(std::size_t n, std::size_t k, double beta, std::string class_id,
                            std::span<const std::string> ids) {
  validate_clean_count(k, n);
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ContractViolation("beta_relevance: beta must be in [0,1], got " + std::to_string(beta));
  }
  const std::vector<double> noisy(n - k, beta);
  return make_relevance_map(std::move(class_id), ids, k, noisy);
}

RelevanceMap linear_relevance(const DenseMatrix& v, std::size_t k, const DenseMatrix& negatives,
                              const LinearConfig& cfg, std::string class_id,
                              std::span<const std::string> ids) {
  validate_clean_count(k, v.cols());
  if (negatives.cols() < 1) {
    throw ContractViolation("linear_relevance: at least one negative required");
  }
  if (negatives.rows() != v.rows()) {
    throw ContractViolation("linear_relevance: negative feature dimension disagrees");
  }
  const std::size_t d = v.rows();
  const std::size_t pos = k;
  const std::size_t neg = negatives.cols();
  const double count = static_cast<double>(pos + neg);

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> grad_w(d, 0.0);

  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    auto accumulate = [&](const DenseMatrix& src, std::size_t col, double target) {
      double logit = b;
      for (std::size_t r = 0; r < d; ++r) logit += w[r] * src(r, col);
      const double err = sigmoid(logit) - target;
      for (std::size_t r = 0; r < d; ++r) grad_w[r] += err * src(r, col);
      grad_b += err;
    };
    for (std::size_t i = 0; i < pos; ++i) accumulate(v, i, 1.0);
    for (std::size_t i = 0; i < neg; ++i) accumulate(negatives, i, 0.0);

    double sup = std::abs(grad_b) / count;
    for (std::size_t r = 0; r < d; ++r) {
      grad_w[r] /= count;
      sup = std::max(sup, std::abs(grad_w[r]));
      if (!std::isfinite(grad_w[r])) {
        throw NumericalFailure("linear_relevance: non-finite gradient at iteration " +
                               std::to_string(it));
      }
    }
    if (sup <= cfg.tolerance) break;
    for (std::size_t r = 0; r < d; ++r) w[r] -= cfg.lr * grad_w[r];
    b -= cfg.lr * grad_b / count;
  }

  std::vector<double> noisy(v.cols() - k);
  for (std::size_t i = k; i < v.cols(); ++i) {
    double logit = b;
    for (std::size_t r = 0; r < d; ++r) logit += w[r] * v(r, i);
    noisy[i - k] = sigmoid(logit);
  }
  return make_relevance_map(std::move(class_id), ids, k, noisy);
}

}  // namespace relclean::cleaners
