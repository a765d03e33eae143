#include "relclean/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace relclean::io {

namespace {

// ---- little-endian byte cursor over an in-memory file image ----

class ByteReader {
 public:
  ByteReader(std::string path, std::vector<std::uint8_t> bytes)
      : path_(std::move(path)), bytes_(std::move(bytes)) {}

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw ParseError(path_, std::string("truncated file while reading ") + what);
    }
  }

  std::uint32_t read_u32(const char* what) {
    require(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t read_u64(const char* what) {
    require(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }

  float read_f32(const char* what) { return std::bit_cast<float>(read_u32(what)); }

  std::string read_string(std::size_t len, const char* what) {
    require(len, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }

  void expect_magic(const char* magic) {
    const std::string got = read_string(4, "magic");
    if (got != magic) {
      throw ParseError(path_, "bad magic, expected '" + std::string(magic) + "' got '" + got + "'");
    }
  }

  void expect_exhausted() const {
    if (remaining() != 0) {
      throw ParseError(path_, std::to_string(remaining()) + " trailing bytes after payload");
    }
  }

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

ByteReader load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path.string(), "cannot open file");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return ByteReader(path.string(), std::move(bytes));
}

class ByteWriter {
 public:
  explicit ByteWriter(const std::filesystem::path& path) : path_(path.string()), out_(path, std::ios::binary) {
    if (!out_) {
      throw ParseError(path_, "cannot open file for writing");
    }
  }

  void write_bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }

  void write_u32(std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    write_bytes(b, 4);
  }

  void write_u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    write_bytes(b, 8);
  }

  void write_f32(float v) { write_u32(std::bit_cast<std::uint32_t>(v)); }

  void write_string(const std::string& s) { write_bytes(s.data(), s.size()); }

  void finish() {
    out_.flush();
    if (!out_) {
      throw ParseError(path_, "write failed");
    }
  }

 private:
  std::string path_;
  std::ofstream out_;
};

// ---- tiny CSV support (no quoting; fields must not contain ',') ----

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void require_plain_field(const std::string& field, const char* what) {
  if (field.find(',') != std::string::npos || field.find('\n') != std::string::npos) {
    throw ContractViolation(std::string(what) + " '" + field + "' must not contain ',' or newline");
  }
}

struct CsvFile {
  std::string path;
  std::vector<std::pair<std::size_t, std::string>> lines;  // (line number, content)
};

// Reads a CSV file, dropping '#' comments and blank lines, and checks the
// header. Line numbers are 1-based and refer to the raw file.
CsvFile read_csv(const std::filesystem::path& path, const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path.string(), "cannot open file");
  }
  CsvFile csv;
  csv.path = path.string();
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != expected_header) {
        throw ParseError(csv.path + ":" + std::to_string(line_no),
                         "expected header '" + expected_header + "', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    csv.lines.emplace_back(line_no, line);
  }
  if (!header_seen) {
    throw ParseError(csv.path, "missing header '" + expected_header + "'");
  }
  return csv;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", std::clamp(v, 0.0, 1.0));
  return buf;
}

}  // namespace

FeatureStore FeatureStore::create(std::vector<std::string> ids, DenseMatrix features) {
  if (ids.empty() || features.rows() == 0) {
    throw ContractViolation("FeatureStore: need N >= 1 and d >= 1");
  }
  if (ids.size() != features.cols()) {
    throw ContractViolation("FeatureStore: id count " + std::to_string(ids.size()) +
                            " != column count " + std::to_string(features.cols()));
  }
  features.require_finite("FeatureStore");
  FeatureStore store;
  store.index_.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].empty()) {
      throw ContractViolation("FeatureStore: empty id at position " + std::to_string(i));
    }
    if (!store.index_.emplace(ids[i], i).second) {
      throw ContractViolation("FeatureStore: duplicate id '" + ids[i] + "'");
    }
  }
  store.ids_ = std::move(ids);
  store.features_ = std::move(features);
  return store;
}

std::size_t FeatureStore::column_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw ContractViolation("FeatureStore: unknown id '" + id + "'");
  }
  return it->second;
}

FeatureStore read_feature_store(const std::filesystem::path& path) {
  ByteReader in = load_file(path);
  in.expect_magic("FSTO");
  const std::uint32_t version = in.read_u32("version");
  if (version != kFeatureStoreVersion) {
    throw ParseError(in.path(), "unsupported feature-store version " + std::to_string(version));
  }
  const std::uint64_t n = in.read_u64("example count");
  const std::uint32_t d = in.read_u32("dimension");
  if (n == 0 || d == 0) {
    throw ParseError(in.path(), "empty store (N and d must be >= 1)");
  }
  if (n > in.remaining() / (4ULL * d)) {
    throw ParseError(in.path(), "truncated file while reading feature payload");
  }

  DenseMatrix features(d, static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint32_t r = 0; r < d; ++r) {
      const float v = in.read_f32("feature value");
      if (!std::isfinite(v)) {
        throw ParseError(in.path(), "non-finite feature value for example " + std::to_string(i));
      }
      features(r, static_cast<std::size_t>(i)) = static_cast<double>(v);
    }
  }
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  std::set<std::string> seen;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint32_t len = in.read_u32("id length");
    if (len == 0) {
      throw ParseError(in.path(), "empty id for example " + std::to_string(i));
    }
    std::string id = in.read_string(len, "id bytes");
    if (!seen.insert(id).second) {
      throw ParseError(in.path(), "duplicate id '" + id + "'");
    }
    ids.push_back(std::move(id));
  }
  in.expect_exhausted();
  return FeatureStore::create(std::move(ids), std::move(features));
}

void write_feature_store(const std::filesystem::path& path, const FeatureStore& store) {
  ByteWriter out(path);
  out.write_string("FSTO");
  out.write_u32(kFeatureStoreVersion);
  out.write_u64(store.size());
  out.write_u32(static_cast<std::uint32_t>(store.dim()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (std::size_t r = 0; r < store.dim(); ++r) {
      out.write_f32(static_cast<float>(store.features()(r, i)));
    }
  }
  for (const std::string& id : store.ids()) {
    out.write_u32(static_cast<std::uint32_t>(id.size()));
    out.write_string(id);
  }
  out.finish();
}

LabelTable read_labels(const std::filesystem::path& path) {
  const CsvFile csv = read_csv(path, "id,class,source");
  LabelTable table;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [line_no, line] : csv.lines) {
    const std::string where = csv.path + ":" + std::to_string(line_no);
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw ParseError(where, "expected 3 columns, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(where, "empty id or class");
    }
    cleaners::Provenance source;
    if (fields[2] == "clean") {
      source = cleaners::Provenance::Clean;
    } else if (fields[2] == "noisy") {
      source = cleaners::Provenance::Noisy;
    } else {
      throw ParseError(where, "unknown source token '" + fields[2] + "'");
    }
    if (!seen.emplace(fields[0], fields[1]).second) {
      throw ParseError(where, "duplicate (id,class) pair (" + fields[0] + "," + fields[1] + ")");
    }
    table.rows.push_back({fields[0], fields[1], source});
  }
  return table;
}

void write_labels(const std::filesystem::path& path, const LabelTable& table,
                  std::optional<std::uint64_t> seed) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError(path.string(), "cannot open file for writing");
  }
  if (seed.has_value()) out << "# seed=" << *seed << "\n";
  out << "id,class,source\n";
  for (const LabelRow& row : table.rows) {
    require_plain_field(row.id, "label id");
    require_plain_field(row.class_id, "label class");
    out << row.id << ',' << row.class_id << ','
        << (row.source == cleaners::Provenance::Clean ? "clean" : "noisy") << '\n';
  }
  if (!out) {
    throw ParseError(path.string(), "write failed");
  }
}

std::vector<std::size_t> ClassExampleSet::members() const {
  std::vector<std::size_t> all = clean;
  all.insert(all.end(), noisy.begin(), noisy.end());
  return all;
}

std::vector<ClassExampleSet> partition_by_class(const FeatureStore& store,
                                                const LabelTable& labels) {
  std::map<std::string, ClassExampleSet> by_class;
  for (const LabelRow& row : labels.rows) {
    ClassExampleSet& set = by_class[row.class_id];
    set.class_id = row.class_id;
    const std::size_t column = store.column_of(row.id);
    if (row.source == cleaners::Provenance::Clean) {
      set.clean.push_back(column);
    } else {
      set.noisy.push_back(column);
    }
  }
  std::vector<ClassExampleSet> out;
  out.reserve(by_class.size());
  for (auto& [_, set] : by_class) out.push_back(std::move(set));
  return out;
}

void write_relevance(const std::filesystem::path& path,
                     const std::vector<cleaners::RelevanceMap>& maps,
                     std::optional<std::uint64_t> seed) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError(path.string(), "cannot open file for writing");
  }
  if (seed.has_value()) out << "# seed=" << *seed << "\n";
  out << "id,class,relevance,provenance\n";
  for (const cleaners::RelevanceMap& map : maps) {
    require_plain_field(map.class_id, "relevance class");
    for (const cleaners::RelevanceEntry& entry : map.entries) {
      require_plain_field(entry.id, "relevance id");
      const bool clean = entry.provenance == cleaners::Provenance::Clean;
      out << entry.id << ',' << map.class_id << ','
          << (clean ? "1.000000" : format_score(entry.relevance)) << ','
          << (clean ? "clean" : "noisy") << '\n';
    }
  }
  if (!out) {
    throw ParseError(path.string(), "write failed");
  }
}

std::vector<cleaners::RelevanceMap> read_relevance(const std::filesystem::path& path) {
  const CsvFile csv = read_csv(path, "id,class,relevance,provenance");
  std::vector<cleaners::RelevanceMap> maps;
  std::map<std::string, std::size_t> map_index;
  for (const auto& [line_no, line] : csv.lines) {
    const std::string where = csv.path + ":" + std::to_string(line_no);
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw ParseError(where, "expected 4 columns, got " + std::to_string(fields.size()));
    }
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(fields[2], &used);
      if (used != fields[2].size()) {
        throw std::invalid_argument("trailing characters");
      }
    } catch (const std::exception&) {
      throw ParseError(where, "bad relevance value '" + fields[2] + "'");
    }
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ParseError(where, "relevance " + fields[2] + " outside [0,1]");
    }
    cleaners::Provenance provenance;
    if (fields[3] == "clean") {
      provenance = cleaners::Provenance::Clean;
    } else if (fields[3] == "noisy") {
      provenance = cleaners::Provenance::Noisy;
    } else {
      throw ParseError(where, "unknown provenance token '" + fields[3] + "'");
    }
    if (provenance == cleaners::Provenance::Clean && value != 1.0) {
      throw ParseError(where, "clean example with relevance != 1");
    }
    auto [it, inserted] = map_index.emplace(fields[1], maps.size());
    if (inserted) {
      maps.push_back({fields[1], {}});
    }
    maps[it->second].entries.push_back({fields[0], value, provenance});
  }
  return maps;
}

classifier::ClassifierWeights read_classifier(const std::filesystem::path& path) {
  ByteReader in = load_file(path);
  in.expect_magic("WCLS");
  const std::uint32_t version = in.read_u32("version");
  if (version != kClassifierWeightsVersion) {
    throw ParseError(in.path(), "unsupported weight-file version " + std::to_string(version));
  }
  const std::uint32_t k = in.read_u32("class count");
  const std::uint32_t d = in.read_u32("dimension");
  const float scale = in.read_f32("scale");
  if (!(scale > 0.0f) || !std::isfinite(scale)) {
    throw ParseError(in.path(), "scale must be finite and positive");
  }
  classifier::ClassifierWeights weights;
  weights.scale = static_cast<double>(scale);
  std::set<std::string> seen;
  for (std::uint32_t c = 0; c < k; ++c) {
    const std::uint32_t len = in.read_u32("class id length");
    std::string id = in.read_string(len, "class id bytes");
    if (id.empty()) {
      throw ParseError(in.path(), "empty class id");
    }
    if (!seen.insert(id).second) {
      throw ParseError(in.path(), "duplicate class id '" + id + "'");
    }
    weights.class_ids.push_back(std::move(id));
  }
  weights.w = DenseMatrix(d, k);
  for (std::uint32_t c = 0; c < k; ++c) {
    for (std::uint32_t r = 0; r < d; ++r) {
      const float v = in.read_f32("weight value");
      if (!std::isfinite(v)) {
        throw ParseError(in.path(), "non-finite weight for class " + std::to_string(c));
      }
      weights.w(r, c) = static_cast<double>(v);
    }
  }
  in.expect_exhausted();
  weights.validate();
  return weights;
}

void write_classifier(const std::filesystem::path& path,
                      const classifier::ClassifierWeights& weights) {
  weights.validate();
  ByteWriter out(path);
  out.write_string("WCLS");
  out.write_u32(kClassifierWeightsVersion);
  out.write_u32(static_cast<std::uint32_t>(weights.num_classes()));
  out.write_u32(static_cast<std::uint32_t>(weights.dim()));
  out.write_f32(static_cast<float>(weights.scale));
  for (const std::string& id : weights.class_ids) {
    out.write_u32(static_cast<std::uint32_t>(id.size()));
    out.write_string(id);
  }
  for (std::size_t c = 0; c < weights.num_classes(); ++c) {
    for (std::size_t r = 0; r < weights.dim(); ++r) {
      out.write_f32(static_cast<float>(weights.w(r, c)));
    }
  }
  out.finish();
}

}  // namespace relclean::io
