#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relclean/matrix.hpp"

namespace relclean::classifier {

using numerics::DenseMatrix;

// Cosine-classifier parameters: one weight column per class plus the logit
// scale. Columns are stored raw; normalization happens at prediction and
// loss time.
struct ClassifierWeights {
  DenseMatrix w;                      // d x K
  std::vector<std::string> class_ids;  // K entries
  double scale = 10.0;

  std::size_t dim() const noexcept { return w.rows(); }
  std::size_t num_classes() const noexcept { return class_ids.size(); }

  static ClassifierWeights empty(std::size_t dim, double scale);

  void validate() const;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double lr_start = 0.1;
  double lr_end = 0.001;
  double relevance_floor = 0.1;
  std::uint64_t seed = 0;
};

// One class member for prototype building: a column of the feature matrix
// and its relevance weight.
struct WeightedExample {
  std::size_t column = 0;
  double relevance = 0.0;
};

// Relevance-weighted mean of the raw feature vectors, one column per class.
// Raises ContractViolation naming the class when its total relevance is 0.
ClassifierWeights compute_prototypes(const DenseMatrix& features,
                                     std::span<const std::string> class_ids,
                                     const std::vector<std::vector<WeightedExample>>& members,
                                     double scale);

struct Prediction {
  std::size_t class_index = 0;
  std::string class_id;
  double score = 0.0;  // cosine similarity
};

// Classes ranked by descending cosine between normalized weight columns and
// the normalized input; ties break by ascending class index.
std::vector<Prediction> cosine_predict(const ClassifierWeights& weights,
                                       std::span<const double> x, std::size_t top_k);

// Relevance-weighted softmax cross-entropy over s-scaled cosine logits.
// Each class's terms are normalized by that class's total batch relevance.
double classifier_loss(const DenseMatrix& w, const DenseMatrix& batch,
                       std::span<const std::size_t> labels, std::span<const double> relevance,
                       double s);

// Analytic gradient of classifier_loss w.r.t. the raw weight columns
// (through the column-wise L2 normalization).
DenseMatrix classifier_grad(const DenseMatrix& w, const DenseMatrix& batch,
                            std::span<const std::size_t> labels,
                            std::span<const double> relevance, double s);

// Mini-batch gradient descent from `init` (normally the prototypes) with a
// cosine-annealed learning rate. Examples under cfg.relevance_floor are
// dropped before training. Zero epochs returns `init` unchanged.
ClassifierWeights train_cosine(const DenseMatrix& features, std::span<const std::size_t> labels,
                               std::span<const double> relevance, const TrainConfig& cfg,
                               const ClassifierWeights& init);

// Columns of `base` followed by columns of `novel`; dimensions and scales
// must agree and class ids must stay unique.
ClassifierWeights concat_all_classes(const ClassifierWeights& base,
                                     const ClassifierWeights& novel);

}  // namespace relclean::classifier
