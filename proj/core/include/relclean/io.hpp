#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "relclean/classifier.hpp"
#include "relclean/cleaners.hpp"
#include "relclean/matrix.hpp"

namespace relclean::io {

using numerics::DenseMatrix;

// Feature vectors keyed by unique string ids; one column per example.
// Stored as f32 on disk, promoted to f64 in memory.
class FeatureStore {
 public:
  static FeatureStore create(std::vector<std::string> ids, DenseMatrix features);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return features_.rows(); }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const DenseMatrix& features() const noexcept { return features_; }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::size_t column_of(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  DenseMatrix features_;  // d x N
  std::unordered_map<std::string, std::size_t> index_;
};

// Binary store layout: magic "FSTO", version u32 LE, N u64 LE, d u32 LE,
// N*d f32 LE (one example per row), then N length-prefixed (u32 LE) UTF-8
// ids. Bad magic/version, truncation, trailing bytes, non-finite values and
// duplicate ids each raise a distinct ParseError.
inline constexpr std::uint32_t kFeatureStoreVersion = 1;

FeatureStore read_feature_store(const std::filesystem::path& path);
void write_feature_store(const std::filesystem::path& path, const FeatureStore& store);

// One (id, class, source) labeling row. Ids may appear under several
// classes, but (id, class) pairs are unique.
struct LabelRow {
  std::string id;
  std::string class_id;
  cleaners::Provenance source = cleaners::Provenance::Noisy;
};

struct LabelTable {
  std::vector<LabelRow> rows;
};

// CSV with header `id,class,source`, source in {clean,noisy}. Lines
// starting with '#' are comments.
LabelTable read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const LabelTable& table,
                  std::optional<std::uint64_t> seed = std::nullopt);

// Per-class partition of store columns, clean members first.
struct ClassExampleSet {
  std::string class_id;
  std::vector<std::size_t> clean;
  std::vector<std::size_t> noisy;

  std::size_t total() const noexcept { return clean.size() + noisy.size(); }
  // Clean columns followed by noisy columns.
  std::vector<std::size_t> members() const;
};

// Groups label rows by class (classes sorted by id, file order within a
// class) and resolves every id against the store.
std::vector<ClassExampleSet> partition_by_class(const FeatureStore& store,
                                                const LabelTable& labels);

// Relevance CSV: header `id,class,relevance,provenance`, 6-decimal scores.
// Values are clamped to [0,1] before formatting, so float overshoot like
// 1.0000005 lands as 1.000000. Reads reject scores outside [0,1] and clean
// rows that are not exactly 1.
void write_relevance(const std::filesystem::path& path,
                     const std::vector<cleaners::RelevanceMap>& maps,
                     std::optional<std::uint64_t> seed = std::nullopt);
std::vector<cleaners::RelevanceMap> read_relevance(const std::filesystem::path& path);

// Classifier weight file: magic "WCLS", version u32 LE, K u32 LE, d u32 LE,
// s f32 LE, K length-prefixed UTF-8 class ids, then K*d f32 LE
// column-major weights.
inline constexpr std::uint32_t kClassifierWeightsVersion = 1;

classifier::ClassifierWeights read_classifier(const std::filesystem::path& path);
void write_classifier(const std::filesystem::path& path,
                      const classifier::ClassifierWeights& weights);

}  // namespace relclean::io
