#include "relclean/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "relclean/rng.hpp"

namespace relclean::synth {

namespace {

using numerics::DenseMatrix;
using numerics::Rng;

std::vector<double> random_unit_vector(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      v[r] = rng.normal();
      sq += v[r] * v[r];
    }
  } while (!(sq > 0.0));
  const double norm = std::sqrt(sq);
  for (double& x : v) x /= norm;
  return v;
}

// Positive sample of a class: center plus scaled Gaussian perturbation,
// renormalized. scale == 0 copies the center verbatim.
std::vector<double> perturbed(Rng& rng, const std::vector<double>& center, double scale) {
  const std::size_t d = center.size();
  std::vector<double> v(d);
  double sq = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    v[r] = center[r] + scale * rng.normal();
    sq += v[r] * v[r];
  }
  if (scale == 0.0) return center;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) return center;
  for (double& x : v) x /= norm;
  return v;
}

std::string class_name(std::size_t c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%03zu", c);
  return buf;
}

}  // namespace

SynthDataset generate(const SynthSpec& spec) {
  if (spec.dim < 2) {
    throw ContractViolation("synth: dim must be >= 2 for sphere sampling");
  }
  if (spec.classes < 1) {
    throw ContractViolation("synth: need at least one class");
  }
  if (!(spec.kappa > 0.0)) {
    throw ContractViolation("synth: kappa must be > 0");
  }
  if (!(spec.noise_ratio >= 0.0 && spec.noise_ratio <= 1.0)) {
    throw ContractViolation("synth: noise_ratio must be in [0,1]");
  }
  if (spec.classes == 1 && !spec.negatives_from_noise && spec.noise_ratio > 0.0 &&
      spec.noisy_per_class > 0) {
    throw ContractViolation("synth: negatives need a second class or negatives_from_noise");
  }

  const double scale = std::isfinite(spec.kappa) ? 1.0 / std::sqrt(spec.kappa) : 0.0;
  Rng rng(spec.seed);

  std::vector<std::vector<double>> centers(spec.classes);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    centers[c] = random_unit_vector(rng, spec.dim);
  }

  // Per-class confuser pools for negative sampling.
  std::vector<std::vector<std::size_t>> confusers(spec.classes);
  if (!spec.negatives_from_noise && spec.classes > 1) {
    for (std::size_t c = 0; c < spec.classes; ++c) {
      std::vector<std::size_t> others;
      others.reserve(spec.classes - 1);
      for (std::size_t o = 0; o < spec.classes; ++o) {
        if (o != c) others.push_back(o);
      }
      if (spec.confuser_classes == 0 || spec.confuser_classes >= others.size()) {
        confusers[c] = others;
      } else {
        const std::vector<std::size_t> picks =
            rng.sample_without_replacement(others.size(), spec.confuser_classes);
        for (std::size_t p : picks) confusers[c].push_back(others[p]);
        std::sort(confusers[c].begin(), confusers[c].end());
      }
    }
  }

  const std::size_t negatives =
      static_cast<std::size_t>(std::llround(spec.noise_ratio *
                                            static_cast<double>(spec.noisy_per_class)));
  const std::size_t positives = spec.noisy_per_class - negatives;

  SynthDataset data;
  std::vector<std::string> train_ids;
  std::vector<double> train_values;  // column-appended d-vectors
  auto push_example = [&](std::string id, const std::vector<double>& v) {
    train_ids.push_back(std::move(id));
    train_values.insert(train_values.end(), v.begin(), v.end());
  };

  for (std::size_t c = 0; c < spec.classes; ++c) {
    const std::string cls = class_name(c);
    for (std::size_t i = 0; i < spec.clean_per_class; ++i) {
      std::string id = cls + "_k" + std::to_string(i);
      data.labels.rows.push_back({id, cls, cleaners::Provenance::Clean});
      push_example(std::move(id), perturbed(rng, centers[c], scale));
    }
    for (std::size_t i = 0; i < positives; ++i) {
      std::string id = cls + "_n" + std::to_string(i);
      data.labels.rows.push_back({id, cls, cleaners::Provenance::Noisy});
      data.flags.push_back({id, cls, true});
      push_example(std::move(id), perturbed(rng, centers[c], scale));
    }
    for (std::size_t i = 0; i < negatives; ++i) {
      std::string id = cls + "_n" + std::to_string(positives + i);
      data.labels.rows.push_back({id, cls, cleaners::Provenance::Noisy});
      data.flags.push_back({id, cls, false});
      if (spec.negatives_from_noise) {
        push_example(std::move(id), random_unit_vector(rng, spec.dim));
      } else {
        const std::vector<std::size_t>& pool = confusers[c];
        const std::size_t other = pool[rng.below(pool.size())];
        push_example(std::move(id), perturbed(rng, centers[other], scale));
      }
    }
  }

  // Transpose the appended rows into a d x N column layout.
  const std::size_t n_train = train_ids.size();
  DenseMatrix train(spec.dim, n_train);
  for (std::size_t j = 0; j < n_train; ++j) {
    for (std::size_t r = 0; r < spec.dim; ++r) {
      train(r, j) = train_values[j * spec.dim + r];
    }
  }
  data.train = io::FeatureStore::create(std::move(train_ids), std::move(train));

  std::vector<std::string> test_ids;
  DenseMatrix test(spec.dim, spec.classes * spec.test_per_class);
  std::size_t column = 0;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const std::string cls = class_name(c);
    for (std::size_t i = 0; i < spec.test_per_class; ++i) {
      std::string id = cls + "_t" + std::to_string(i);
      data.test_labels.rows.push_back({id, cls, cleaners::Provenance::Clean});
      const std::vector<double> v = perturbed(rng, centers[c], scale);
      for (std::size_t r = 0; r < spec.dim; ++r) test(r, column) = v[r];
      test_ids.push_back(std::move(id));
      ++column;
    }
  }
  if (!test_ids.empty()) {
    data.test = io::FeatureStore::create(std::move(test_ids), std::move(test));
  }
  return data;
}

void write_flags(const std::filesystem::path& path, const std::vector<TruthFlag>& flags,
                 std::optional<std::uint64_t> seed) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError(path.string(), "cannot open file for writing");
  }
  if (seed.has_value()) out << "# seed=" << *seed << "\n";
  out << "id,class,truth\n";
  for (const TruthFlag& flag : flags) {
    out << flag.id << ',' << flag.class_id << ',' << (flag.positive ? "positive" : "negative")
        << '\n';
  }
  if (!out) {
    throw ParseError(path.string(), "write failed");
  }
}

std::vector<TruthFlag> read_flags(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path.string(), "cannot open file");
  }
  std::vector<TruthFlag> flags;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!header_seen) {
      if (line != "id,class,truth") {
        throw ParseError(where, "expected header 'id,class,truth'");
      }
      header_seen = true;
      continue;
    }
    const std::size_t first = line.find(',');
    const std::size_t second = first == std::string::npos ? std::string::npos
                                                          : line.find(',', first + 1);
    if (second == std::string::npos || line.find(',', second + 1) != std::string::npos) {
      throw ParseError(where, "expected 3 columns");
    }
    TruthFlag flag;
    flag.id = line.substr(0, first);
    flag.class_id = line.substr(first + 1, second - first - 1);
    const std::string truth = line.substr(second + 1);
    if (truth == "positive") {
      flag.positive = true;
    } else if (truth == "negative") {
      flag.positive = false;
    } else {
      throw ParseError(where, "unknown truth token '" + truth + "'");
    }
    if (!seen.emplace(flag.id, flag.class_id).second) {
      throw ParseError(where, "duplicate (id,class) flag");
    }
    flags.push_back(std::move(flag));
  }
  if (!header_seen) {
    throw ParseError(path.string(), "missing header 'id,class,truth'");
  }
  return flags;
}

}  // namespace relclean::synth
