#include "relclean/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "relclean/rng.hpp"

namespace relclean::classifier {

namespace {

// Unit columns of `m`; zero-norm columns raise ContractViolation with
// `what` as context.
DenseMatrix normalized_columns(const DenseMatrix& m, const char* what) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sq = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) sq += m(r, j) * m(r, j);
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ContractViolation(std::string(what) + ": zero-norm column " + std::to_string(j));
    }
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, j) = m(r, j) / norm;
  }
  return out;
}

std::vector<double> column_norms(const DenseMatrix& m) {
  std::vector<double> norms(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sq = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) sq += m(r, j) * m(r, j);
    norms[j] = std::sqrt(sq);
  }
  return norms;
}

// log-softmax of s * w_hat^T x_hat for one example.
std::vector<double> log_softmax_logits(const DenseMatrix& w_hat, std::span<const double> x_hat,
                                       double s) {
  const std::size_t k = w_hat.cols();
  std::vector<double> logits(k);
  for (std::size_t c = 0; c < k; ++c) {
    double cosine = 0.0;
    for (std::size_t r = 0; r < w_hat.rows(); ++r) cosine += w_hat(r, c) * x_hat[r];
    logits[c] = s * cosine;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - top);
  const double lse = top + std::log(sum);
  for (double& l : logits) l -= lse;
  return logits;  // now log-probabilities
}

void validate_batch(const DenseMatrix& w, const DenseMatrix& batch,
                    std::span<const std::size_t> labels, std::span<const double> relevance) {
  if (batch.rows() != w.rows()) {
    throw ContractViolation("classifier: feature dimension disagrees with weights");
  }
  if (labels.size() != batch.cols() || relevance.size() != batch.cols()) {
    throw ContractViolation("classifier: labels/relevance not aligned with batch");
  }
  for (std::size_t lbl : labels) {
    if (lbl >= w.cols()) {
      throw ContractViolation("classifier: label " + std::to_string(lbl) + " references class >= " +
                              std::to_string(w.cols()));
    }
  }
}

// Total batch relevance per class.
std::vector<double> class_totals(std::size_t k, std::span<const std::size_t> labels,
                                 std::span<const double> relevance) {
  std::vector<double> totals(k, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) totals[labels[i]] += relevance[i];
  return totals;
}

}  // namespace

ClassifierWeights ClassifierWeights::empty(std::size_t dim, double scale) {
  ClassifierWeights weights;
  weights.w = DenseMatrix(dim, 0);
  weights.scale = scale;
  return weights;
}

void ClassifierWeights::validate() const {
  if (w.cols() != class_ids.size()) {
    throw ContractViolation("ClassifierWeights: column/id count mismatch");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ContractViolation("ClassifierWeights: scale must be finite and positive");
  }
  w.require_finite("ClassifierWeights");
}

ClassifierWeights compute_prototypes(const DenseMatrix& features,
                                     std::span<const std::string> class_ids,
                                     const std::vector<std::vector<WeightedExample>>& members,
                                     double scale) {
  if (class_ids.size() != members.size() || class_ids.empty()) {
    throw ContractViolation("compute_prototypes: class list and member lists disagree");
  }
  ClassifierWeights weights;
  weights.w = DenseMatrix(features.rows(), class_ids.size());
  weights.class_ids.assign(class_ids.begin(), class_ids.end());
  weights.scale = scale;
  for (std::size_t c = 0; c < members.size(); ++c) {
    double total = 0.0;
    for (const WeightedExample& e : members[c]) {
      total += e.relevance;
      for (std::size_t r = 0; r < features.rows(); ++r) {
        weights.w(r, c) += e.relevance * features(r, e.column);
      }
    }
    if (!(total > 0.0)) {
      throw ContractViolation("compute_prototypes: class '" + weights.class_ids[c] +
                              "' has zero total relevance");
    }
    for (std::size_t r = 0; r < features.rows(); ++r) weights.w(r, c) /= total;
  }
  weights.validate();
  return weights;
}

std::vector<Prediction> cosine_predict(const ClassifierWeights& weights,
                                       std::span<const double> x, std::size_t top_k) {
  weights.validate();
  const std::size_t k = weights.num_classes();
  if (top_k > k) {
    throw ContractViolation("cosine_predict: top_k exceeds class count");
  }
  if (x.size() != weights.dim()) {
    throw ContractViolation("cosine_predict: feature dimension disagrees with weights");
  }
  const double x_norm = numerics::l2_norm(x);
  if (!(x_norm > 0.0)) {
    throw ContractViolation("cosine_predict: zero-norm input feature");
  }
  const std::vector<double> w_norms = column_norms(weights.w);
  std::vector<Prediction> ranked(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (!(w_norms[c] > 0.0)) {
      throw ContractViolation("cosine_predict: zero-norm weight column for class '" +
                              weights.class_ids[c] + "'");
    }
    double cosine = 0.0;
    for (std::size_t r = 0; r < weights.dim(); ++r) cosine += weights.w(r, c) * x[r];
    ranked[c] = {c, weights.class_ids[c], cosine / (w_norms[c] * x_norm)};
  }
  std::sort(ranked.begin(), ranked.end(), [](const Prediction& a, const Prediction& b) {
    return a.score != b.score ? a.score > b.score : a.class_index < b.class_index;
  });
  ranked.resize(top_k);
  return ranked;
}

double classifier_loss(const DenseMatrix& w, const DenseMatrix& batch,
                       std::span<const std::size_t> labels, std::span<const double> relevance,
                       double s) {
  validate_batch(w, batch, labels, relevance);
  const DenseMatrix w_hat = normalized_columns(w, "classifier_loss weights");
  const DenseMatrix x_hat = normalized_columns(batch, "classifier_loss batch");
  const std::vector<double> totals = class_totals(w.cols(), labels, relevance);

  double loss = 0.0;
  for (std::size_t i = 0; i < batch.cols(); ++i) {
    if (!(totals[labels[i]] > 0.0)) continue;
    const std::vector<double> log_probs = log_softmax_logits(w_hat, x_hat.column(i), s);
    loss -= relevance[i] / totals[labels[i]] * log_probs[labels[i]];
  }
  if (!std::isfinite(loss)) {
    throw NumericalFailure("classifier_loss: non-finite loss");
  }
  return loss;
}

DenseMatrix classifier_grad(const DenseMatrix& w, const DenseMatrix& batch,
                            std::span<const std::size_t> labels,
                            std::span<const double> relevance, double s) {
  validate_batch(w, batch, labels, relevance);
  const std::size_t k = w.cols();
  const std::size_t d = w.rows();
  const DenseMatrix w_hat = normalized_columns(w, "classifier_grad weights");
  const DenseMatrix x_hat = normalized_columns(batch, "classifier_grad batch");
  const std::vector<double> w_norms = column_norms(w);
  const std::vector<double> totals = class_totals(k, labels, relevance);

  // Gradient w.r.t. the normalized columns first.
  DenseMatrix grad_hat(d, k);
  for (std::size_t i = 0; i < batch.cols(); ++i) {
    if (!(totals[labels[i]] > 0.0)) continue;
    const std::vector<double> x = x_hat.column(i);
    const std::vector<double> log_probs = log_softmax_logits(w_hat, x, s);
    const double weight = relevance[i] / totals[labels[i]];
    for (std::size_t c = 0; c < k; ++c) {
      const double coeff = s * weight * (std::exp(log_probs[c]) - (c == labels[i] ? 1.0 : 0.0));
      for (std::size_t r = 0; r < d; ++r) grad_hat(r, c) += coeff * x[r];
    }
  }

  // Pull back through w_hat = w / |w|: (I - w_hat w_hat^T) / |w|.
  DenseMatrix grad(d, k);
  for (std::size_t c = 0; c < k; ++c) {
    double projection = 0.0;
    for (std::size_t r = 0; r < d; ++r) projection += w_hat(r, c) * grad_hat(r, c);
    for (std::size_t r = 0; r < d; ++r) {
      grad(r, c) = (grad_hat(r, c) - projection * w_hat(r, c)) / w_norms[c];
    }
  }
  grad.require_finite("classifier_grad");
  return grad;
}

ClassifierWeights train_cosine(const DenseMatrix& features, std::span<const std::size_t> labels,
                               std::span<const double> relevance, const TrainConfig& cfg,
                               const ClassifierWeights& init) {
  init.validate();
  if (labels.size() != features.cols() || relevance.size() != features.cols()) {
    throw ContractViolation("train_cosine: labels/relevance not aligned with features");
  }
  ClassifierWeights weights = init;

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < features.cols(); ++i) {
    if (relevance[i] >= cfg.relevance_floor) kept.push_back(i);
  }
  if (cfg.epochs == 0 || kept.empty()) return weights;
  if (cfg.batch_size == 0) throw ContractViolation("train_cosine: batch size must be >= 1");

  const std::size_t batches_per_epoch = (kept.size() + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(cfg.epochs * batches_per_epoch);
  numerics::Rng rng(cfg.seed);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(kept);
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(begin + cfg.batch_size, kept.size());
      const std::span<const std::size_t> batch_idx(kept.data() + begin, end - begin);

      const DenseMatrix batch = numerics::gather_columns(features, batch_idx);
      std::vector<std::size_t> batch_labels(batch_idx.size());
      std::vector<double> batch_relevance(batch_idx.size());
      for (std::size_t i = 0; i < batch_idx.size(); ++i) {
        batch_labels[i] = labels[batch_idx[i]];
        batch_relevance[i] = relevance[batch_idx[i]];
      }

      const double lr = cfg.lr_end + 0.5 * (cfg.lr_start - cfg.lr_end) *
                                         (1.0 + std::cos(std::numbers::pi *
                                                         static_cast<double>(step) / total_steps));
      DenseMatrix grad;
      try {
        grad = classifier_grad(weights.w, batch, batch_labels, batch_relevance, weights.scale);
      } catch (const NumericalFailure& failure) {
        throw NumericalFailure("train_cosine: epoch " + std::to_string(epoch) + " batch " +
                               std::to_string(b) + ": " + failure.what());
      }
      auto w_values = weights.w.values();
      auto g_values = grad.values();
      for (std::size_t i = 0; i < w_values.size(); ++i) w_values[i] -= lr * g_values[i];
      ++step;
    }
  }
  weights.validate();
  return weights;
}

ClassifierWeights concat_all_classes(const ClassifierWeights& base,
                                     const ClassifierWeights& novel) {
  base.validate();
  novel.validate();
  if (base.dim() != novel.dim()) {
    throw ContractViolation("concat_all_classes: feature dimensions disagree");
  }
  if (base.scale != novel.scale) {
    throw ContractViolation("concat_all_classes: scale parameters disagree");
  }
  std::unordered_set<std::string> seen;
  for (const std::string& id : base.class_ids) seen.insert(id);
  for (const std::string& id : novel.class_ids) {
    if (!seen.insert(id).second) {
      throw ContractViolation("concat_all_classes: duplicate class id '" + id + "'");
    }
  }
  ClassifierWeights all;
  all.scale = base.scale;
  all.class_ids = base.class_ids;
  all.class_ids.insert(all.class_ids.end(), novel.class_ids.begin(), novel.class_ids.end());
  all.w = DenseMatrix(base.dim(), base.num_classes() + novel.num_classes());
  for (std::size_t c = 0; c < base.num_classes(); ++c) {
    for (std::size_t r = 0; r < base.dim(); ++r) all.w(r, c) = base.w(r, c);
  }
  for (std::size_t c = 0; c < novel.num_classes(); ++c) {
    for (std::size_t r = 0; r < novel.dim(); ++r) {
      all.w(r, base.num_classes() + c) = novel.w(r, c);
    }
  }
  all.validate();
  return all;
}

}  // namespace relclean::classifier
