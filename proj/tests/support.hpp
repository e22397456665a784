#pragma once

// Shared fixtures for the unit and acceptance binaries.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "clir/clwe.hpp"
#include "clir/error.hpp"
#include "clir/interact.hpp"
#include "clir/neural/model.hpp"

namespace clir::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "clir-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw Error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// n terms "w0".."w{n-1}" with Gaussian vectors of per-coordinate stddev `sd`.
inline std::shared_ptr<EmbeddingTable> random_table(std::size_t n, std::size_t dim, std::uint64_t seed,
                                                    const std::string& prefix = "w", float sd = 1.0f) {
  auto t = std::make_shared<EmbeddingTable>(dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, sd);
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : v) x = g(rng);
    t->add(prefix + std::to_string(i), v);
  }
  return t;
}

/// Embedded positions drawing rows uniformly from the table.
inline EmbeddedTerms random_terms(const EmbeddingTable& table, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, table.size() - 1);
  EmbeddedTerms e;
  e.table = &table;
  for (std::size_t i = 0; i < n; ++i) e.rows.emplace_back(pick(rng));
  return e;
}

struct Pair {
  EmbeddedTerms query, doc;
  std::vector<double> idf;
};

inline Pair random_pair(const EmbeddingTable& t, std::size_t q, std::size_t d, std::mt19937_64& rng) {
  Pair p{random_terms(t, q, rng), random_terms(t, d, rng), {}};
  std::uniform_real_distribution<double> u(0.5, 4.0);
  for (std::size_t i = 0; i < q; ++i) p.idf.push_back(u(rng));
  return p;
}

inline nn::PairFeatures features(const nn::ModelConfig& c, const Pair& p) {
  return nn::featurize(c, p.query, p.doc, p.idf);
}

// Biases get small random values so the check also covers paths that the
// zero-bias initialization leaves flat.
inline void perturb_biases(nn::RankingModel& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto& [name, t] : m.params()) {
    if (name.ends_with("bias") || name == "gate.weight") {
      for (auto& v : t.value) v = u(rng);
    }
  }
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t checked = 0;
};

/// |a - n| / max(|a|, |n|, floor): the floor keeps gradients that are zero up
/// to rounding from producing meaningless ratios.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central differences over every trainable element against backward().
inline GradCheckResult check_gradients(nn::RankingModel& model, const nn::PairFeatures& f, double h = 1e-4) {
  model.params().zero_grad();
  nn::Trace trace;
  model.forward(f, trace);
  model.backward(f, trace, 1.0);
  GradCheckResult r;
  for (auto& [name, tensor] : model.params()) {
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor.value[i];
      tensor.value[i] = saved + h;
      const double up = model.score(f);
      tensor.value[i] = saved - h;
      const double down = model.score(f);
      tensor.value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(tensor.grad[i], numeric);
      ++r.checked;
      if (err > r.max_rel_error) {
        r.max_rel_error = err;
        r.worst_param = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

}  // namespace clir::testing
