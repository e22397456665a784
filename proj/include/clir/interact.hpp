#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clir/clwe.hpp"
#include "clir/corpus.hpp"
#include "clir/matrix.hpp"

namespace clir {

enum class InteractionKind { kCosine, kGaussian, kIndicator };

std::string_view to_string(InteractionKind kind);
InteractionKind parse_interaction_kind(std::string_view name);

/// Token positions of one side of a pair, resolved to embedding rows.
struct EmbeddedTerms {
  const EmbeddingTable* table = nullptr;
  std::vector<std::optional<std::size_t>> rows;  // nullopt = OOV position

  std::size_t size() const noexcept { return rows.size(); }
  std::size_t embedded_count() const;
};

EmbeddedTerms embed_terms(std::span<const TermId> tokens, const RowMap& row_map, const EmbeddingTable& table);
EmbeddedTerms embed_terms(std::span<const std::string> terms, const EmbeddingTable& table);

/// |q| x |d| interaction values. Rows/columns of OOV terms hold 0 and are
/// flagged invalid so feature builders skip them.
struct InteractionMatrix {
  std::string query_id;
  std::string doc_id;
  InteractionKind kind = InteractionKind::kCosine;
  double eta = 0.3;
  Matrix values;
  std::vector<bool> valid_rows;
  std::vector<bool> valid_cols;

  std::size_t valid_row_count() const;
  std::size_t valid_col_count() const;
  /// No valid query row or no valid document column.
  bool degenerate() const { return valid_row_count() == 0 || valid_col_count() == 0; }
};

/// 1 when cos >= eta (inclusive), else 0.
inline double indicator(double cos, double eta) { return cos >= eta ? 1.0 : 0.0; }

/// exp(-||u - v||^2)
double gaussian_interaction(std::span<const float> u, std::span<const float> v);
double gaussian_interaction(std::span<const double> u, std::span<const double> v);

InteractionMatrix build_matrix(const EmbeddedTerms& query, const EmbeddedTerms& doc, InteractionKind kind,
                               double eta = 0.3);

/// Bin of a similarity among `bins` equal-width bins over [-1, 1]: right-open,
/// except the last bin which also holds 1. Values are clamped first.
std::size_t histogram_bin(double similarity, std::size_t bins);

/// Lower edge of bin k (k == bins gives 1.0), evaluated as (2k - bins) / bins.
double histogram_edge(std::size_t k, std::size_t bins);

struct HistogramFeatures {
  Matrix counts;      // raw per-row counts, |q| x B
  Matrix log_counts;  // ln(1 + count)
};

HistogramFeatures build_histogram(const InteractionMatrix& matrix, std::size_t bins = 30);

/// mu_k = -1 + (2k - 1) / K for k = 1..K.
std::vector<double> default_kernel_mus(std::size_t count = 20);

struct KernelFeatures {
  Matrix values;  // |q| x K
  std::vector<double> mus;
  double sigma = 0.1;
};

KernelFeatures kernel_pool(const InteractionMatrix& matrix, std::span<const double> mus, double sigma = 0.1);

/// Plain-text grid: header `queryId docId rows cols kind`, then one row per line.
void dump_matrix(std::ostream& out, const InteractionMatrix& matrix);

}  // namespace clir
