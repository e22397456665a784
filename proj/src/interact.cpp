#include "clir/interact.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "clir/error.hpp"

namespace clir {

std::string_view to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::kCosine:
      return "cosine";
    case InteractionKind::kGaussian:
      return "gaussian";
    case InteractionKind::kIndicator:
      return "indicator";
  }
  return "unknown";
}

InteractionKind parse_interaction_kind(std::string_view name) {
  if (name == "cosine") return InteractionKind::kCosine;
  if (name == "gaussian") return InteractionKind::kGaussian;
  if (name == "indicator" || name == "exact") return InteractionKind::kIndicator;
  throw Error("unknown interaction kind: " + std::string(name));
}

std::size_t EmbeddedTerms::embedded_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.has_value(); }));
}

EmbeddedTerms embed_terms(std::span<const TermId> tokens, const RowMap& row_map, const EmbeddingTable& table) {
  EmbeddedTerms out{&table, {}};
  out.rows.reserve(tokens.size());
  for (TermId t : tokens) out.rows.push_back(t < row_map.size() ? row_map[t] : std::nullopt);
  return out;
}

EmbeddedTerms embed_terms(std::span<const std::string> terms, const EmbeddingTable& table) {
  EmbeddedTerms out{&table, {}};
  out.rows.reserve(terms.size());
  for (const auto& t : terms) out.rows.push_back(table.row(t));
  return out;
}

std::size_t InteractionMatrix::valid_row_count() const {
  return static_cast<std::size_t>(std::count(valid_rows.begin(), valid_rows.end(), true));
}

std::size_t InteractionMatrix::valid_col_count() const {
  return static_cast<std::size_t>(std::count(valid_cols.begin(), valid_cols.end(), true));
}

namespace {

template <typename T>
double gaussian_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw Error("gaussian_interaction: dimension mismatch");
  double dist_sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = static_cast<double>(u[i]) - static_cast<double>(v[i]);
    dist_sq += diff * diff;
  }
  return std::exp(-dist_sq);
}

double unit_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return std::clamp(s, -1.0, 1.0);
}

}  // namespace

double gaussian_interaction(std::span<const float> u, std::span<const float> v) { return gaussian_impl(u, v); }
double gaussian_interaction(std::span<const double> u, std::span<const double> v) { return gaussian_impl(u, v); }

InteractionMatrix build_matrix(const EmbeddedTerms& query, const EmbeddedTerms& doc, InteractionKind kind,
                               double eta) {
  if (kind == InteractionKind::kIndicator && (eta < -1.0 || eta > 1.0)) {
    throw Error("build_matrix: eta must lie in [-1, 1]");
  }
  if (query.size() > 0 && doc.size() > 0 && query.table->dimension() != doc.table->dimension()) {
    throw Error("build_matrix: query and document embeddings differ in dimension");
  }
  InteractionMatrix m;
  m.kind = kind;
  m.eta = eta;
  m.values = Matrix(query.size(), doc.size());
  m.valid_rows.resize(query.size());
  m.valid_cols.resize(doc.size());
  for (std::size_t j = 0; j < doc.size(); ++j) m.valid_cols[j] = doc.rows[j].has_value();
  for (std::size_t i = 0; i < query.size(); ++i) {
    m.valid_rows[i] = query.rows[i].has_value();
    if (!m.valid_rows[i]) continue;
    const std::size_t qr = *query.rows[i];
    for (std::size_t j = 0; j < doc.size(); ++j) {
      if (!m.valid_cols[j]) continue;
      const std::size_t dr = *doc.rows[j];
      double value = 0.0;
      switch (kind) {
        case InteractionKind::kCosine:
          value = unit_dot(query.table->unit(qr), doc.table->unit(dr));
          break;
        case InteractionKind::kGaussian:
          value = gaussian_impl(query.table->raw(qr), doc.table->raw(dr));
          break;
        case InteractionKind::kIndicator:
          value = indicator(unit_dot(query.table->unit(qr), doc.table->unit(dr)), eta);
          break;
      }
      m.values(i, j) = value;
    }
  }
  return m;
}

double histogram_edge(std::size_t k, std::size_t bins) {
  return (2.0 * static_cast<double>(k) - static_cast<double>(bins)) / static_cast<double>(bins);
}

std::size_t histogram_bin(double similarity, std::size_t bins) {
  if (bins < 2) throw Error("histogram_bin: need at least 2 bins");
  const double s = std::clamp(similarity, -1.0, 1.0);
  auto k = static_cast<std::ptrdiff_t>(std::floor((s + 1.0) * static_cast<double>(bins) / 2.0));
  k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(bins) - 1);
  // The floor estimate can be off by one at an edge; settle against the exact edges.
  while (k > 0 && s < histogram_edge(static_cast<std::size_t>(k), bins)) --k;
  while (k + 1 < static_cast<std::ptrdiff_t>(bins) && s >= histogram_edge(static_cast<std::size_t>(k + 1), bins)) ++k;
  return static_cast<std::size_t>(k);
}

HistogramFeatures build_histogram(const InteractionMatrix& matrix, std::size_t bins) {
  if (bins < 2) throw Error("build_histogram: need at least 2 bins");
  if (matrix.kind != InteractionKind::kCosine) throw Error("build_histogram: needs a cosine matrix");
  HistogramFeatures h{Matrix(matrix.values.rows, bins), Matrix(matrix.values.rows, bins)};
  if (matrix.degenerate()) return h;
  for (std::size_t i = 0; i < matrix.values.rows; ++i) {
    if (!matrix.valid_rows[i]) continue;
    for (std::size_t j = 0; j < matrix.values.cols; ++j) {
      if (!matrix.valid_cols[j]) continue;
      h.counts(i, histogram_bin(matrix.values(i, j), bins)) += 1.0;
    }
    for (std::size_t b = 0; b < bins; ++b) h.log_counts(i, b) = std::log1p(h.counts(i, b));
  }
  return h;
}

std::vector<double> default_kernel_mus(std::size_t count) {
  if (count == 0) throw Error("default_kernel_mus: need at least one kernel");
  std::vector<double> mus(count);
  const double k_total = static_cast<double>(count);
  for (std::size_t k = 1; k <= count; ++k) mus[k - 1] = -1.0 + (2.0 * static_cast<double>(k) - 1.0) / k_total;
  return mus;
}

KernelFeatures kernel_pool(const InteractionMatrix& matrix, std::span<const double> mus, double sigma) {
  if (!(sigma > 0.0)) throw Error("kernel_pool: sigma must be positive");
  KernelFeatures f{Matrix(matrix.values.rows, mus.size()), std::vector<double>(mus.begin(), mus.end()), sigma};
  if (matrix.degenerate()) return f;
  const double denom = 2.0 * sigma * sigma;
  std::vector<double> row_values;
  for (std::size_t i = 0; i < matrix.values.rows; ++i) {
    if (!matrix.valid_rows[i]) continue;
    // Summing over the sorted multiset makes the result independent of
    // document term order down to the last bit.
    row_values.clear();
    for (std::size_t j = 0; j < matrix.values.cols; ++j) {
      if (matrix.valid_cols[j]) row_values.push_back(matrix.values(i, j));
    }
    std::sort(row_values.begin(), row_values.end());
    for (std::size_t k = 0; k < mus.size(); ++k) {
      double sum = 0.0;
      for (double v : row_values) {
        const double d = v - mus[k];
        sum += std::exp(-d * d / denom);
      }
      f.values(i, k) = sum;
    }
  }
  return f;
}

void dump_matrix(std::ostream& out, const InteractionMatrix& matrix) {
  out << matrix.query_id << ' ' << matrix.doc_id << ' ' << matrix.values.rows << ' ' << matrix.values.cols << ' '
      << to_string(matrix.kind) << '\n';
  for (std::size_t i = 0; i < matrix.values.rows; ++i) {
    for (std::size_t j = 0; j < matrix.values.cols; ++j) {
      if (j > 0) out << ' ';
      out << matrix.values(i, j);
    }
    out << '\n';
  }
}

}  // namespace clir
