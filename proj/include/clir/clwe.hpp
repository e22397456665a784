#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clir/corpus.hpp"

namespace clir {

/// Term vectors of one language in a shared cross-lingual space.
///
/// Raw vectors are kept at 32-bit; the unit-normalized view is 64-bit so that
/// dot products of normalized rows reproduce raw-vector cosines to ~1e-15.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension, std::string lang = {});

  /// Returns false (and counts a duplicate) if the term already exists.
  /// Throws on dimension mismatch or an all-zero vector.
  bool add(std::string_view term, std::span<const float> vector);

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::string& lang() const noexcept { return lang_; }

  std::optional<std::size_t> row(std::string_view term) const;
  bool contains(std::string_view term) const { return row(term).has_value(); }
  const std::string& term(std::size_t row) const { return terms_.at(row); }
  std::span<const float> raw(std::size_t row) const { return {raw_.data() + row * dim_, dim_}; }
  std::span<const double> unit(std::size_t row) const { return {unit_.data() + row * dim_, dim_}; }

  std::size_t duplicate_count() const noexcept { return duplicates_; }
  std::size_t zero_vector_count() const noexcept { return zero_vectors_; }
  void note_zero_vector() noexcept { ++zero_vectors_; }

 private:
  std::size_t dim_;
  std::string lang_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> raw_;
  std::vector<double> unit_;
  std::size_t duplicates_ = 0;
  std::size_t zero_vectors_ = 0;
};

using TermSet = std::unordered_set<std::string>;

/// word2vec text format: `count dim` header, then `term v1 ... vd` rows.
/// Terms outside `vocab_filter` (when given) are skipped; duplicates keep the
/// first occurrence; all-zero rows are skipped and counted.
EmbeddingTable load_embeddings(const std::filesystem::path& path, const TermSet* vocab_filter = nullptr,
                               std::string lang = {});

/// Query-side and document-side tables. Mono-lingual use shares one table.
struct ClweSpace {
  std::shared_ptr<const EmbeddingTable> query_side;
  std::shared_ptr<const EmbeddingTable> doc_side;

  static ClweSpace mono(std::shared_ptr<const EmbeddingTable> table) { return {table, table}; }
};

double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

/// Rows of a table restricted to a candidate vocabulary, sorted by term.
class CandidateSet {
 public:
  CandidateSet() = default;
  CandidateSet(const EmbeddingTable& table, const TermSet& terms);
  CandidateSet(const EmbeddingTable& table, std::span<const std::string> terms);
  /// Every row of the table.
  static CandidateSet all(const EmbeddingTable& table);

  std::span<const std::size_t> rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::vector<std::size_t> rows_;
};

struct Neighbor {
  std::string term;
  double similarity = 0.0;
  bool operator==(const Neighbor&) const = default;
};

struct NeighborResult {
  bool oov = false;  // the probe term has no vector
  std::vector<Neighbor> neighbors;
};

/// Exact top-k scan by cosine, sorted by similarity descending and term
/// ascending on ties. `exclude_row` skips one candidate row (the probe itself).
std::vector<Neighbor> nearest_neighbors(std::span<const double> unit_probe, std::size_t k,
                                        const EmbeddingTable& candidate_table, const CandidateSet& candidates,
                                        std::optional<std::size_t> exclude_row = std::nullopt);

NeighborResult nearest_neighbors(std::string_view term, std::size_t k, const ClweSpace& space,
                                 const CandidateSet& candidates);

NeighborResult nearest_neighbors(std::string_view term, std::size_t k, const EmbeddingTable& table,
                                 const TermSet& candidate_vocab);

struct Coverage {
  std::size_t covered = 0;
  std::size_t oov = 0;
  double oov_rate = 0.0;
};

/// TermId -> embedding row; nullopt marks an OOV term.
using RowMap = std::vector<std::optional<std::size_t>>;

RowMap map_rows(const EmbeddingTable& table, const Vocabulary& vocabulary);

Coverage coverage_report(const EmbeddingTable& table, std::span<const std::string> vocabulary);
Coverage coverage_report(const EmbeddingTable& table, const Vocabulary& vocabulary);

}  // namespace clir
