#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "relclean/matrix.hpp"
#include "relclean/rng.hpp"

namespace test_support {

using relclean::numerics::DenseMatrix;
using relclean::numerics::Rng;
using relclean::numerics::SparseMatrix;

inline DenseMatrix random_dense(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                                double hi = 1.0) {
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

inline SparseMatrix random_sparse(Rng& rng, std::size_t n, double density) {
  std::vector<SparseMatrix::Triplet> triplets;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (rng.uniform() < density) {
        triplets.push_back({r, c, rng.uniform(-2.0, 2.0)});
      }
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(triplets));
}

// Unit columns for graph/cleaner inputs.
inline DenseMatrix random_unit_features(Rng& rng, std::size_t d, std::size_t n) {
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

// |a-b| <= tol * max(|a|, |b|, floor): relative comparison with an absolute
// floor for near-zero values.
inline bool close_rel(double a, double b, double tol, double floor = 1e-6) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), floor});
}

struct ProcessResult {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command, capturing stdout (stderr goes to /dev/null unless
// the command redirects it).
inline ProcessResult run_process(const std::string& command) {
  ProcessResult result;
  FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
  if (pipe == nullptr) return result;
  char buffer[4096];
  while (std::fgets(buffer, sizeof(buffer), pipe) != nullptr) {
    result.out += buffer;
  }
  const int status = pclose(pipe);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -1;  // killed by signal: callers treat this as a crash
  }
  return result;
}

inline std::string relclean_bin() {
  const char* env = std::getenv("RELCLEAN_BIN");
  return env != nullptr ? env : "./tools/relclean";
}

// Unique scratch directory, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(i));
      if (!std::filesystem::exists(path_)) break;
    }
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace test_support
