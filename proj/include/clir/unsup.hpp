#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clir/clwe.hpp"
#include "clir/corpus.hpp"

namespace clir {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
  bool operator==(const ScoredDoc&) const = default;
};

/// Sorted by score descending, docId ascending on ties.
struct ScoredList {
  std::string query_id;
  std::vector<ScoredDoc> entries;
};

ScoredList make_scored_list(std::string query_id, std::vector<ScoredDoc> entries);

enum class AggWeighting { kUniform, kIdf };

/// Mean (uniform) or IDF-weighted mean of the raw term vectors; OOV tokens are
/// skipped. nullopt when no token has a vector.
std::optional<std::vector<double>> bwe_agg_embed(std::span<const TermId> tokens, const RowMap& rows,
                                                 const EmbeddingTable& table, AggWeighting weighting,
                                                 const CollectionStats* stats);

/// Document embeddings for BWE-Agg, computed once per collection.
class BweAggIndex {
 public:
  BweAggIndex(const Collection& collection, const RowMap& doc_rows, const EmbeddingTable& doc_table,
              AggWeighting weighting, const CollectionStats& stats);

  /// Cosine between the query embedding and each pooled document; documents
  /// without any embedded token score -infinity.
  ScoredList rank(const std::string& query_id, std::span<const double> query_embedding,
                  std::span<const std::size_t> pool) const;
  ScoredList rank(const std::string& query_id, std::span<const double> query_embedding) const;

 private:
  const Collection* collection_;
  std::vector<std::optional<std::vector<double>>> doc_vectors_;
};

/// Query is embedded uniformly; documents use `weighting`. Full-collection ranking.
ScoredList bwe_agg_rank(const Query& query, const RowMap& query_rows, const Collection& collection,
                        const RowMap& doc_rows, const ClweSpace& space, AggWeighting weighting,
                        const CollectionStats& stats);

struct TranslatedQuery {
  std::string query_id;
  std::vector<std::string> original;
  std::vector<std::string> translated;  // one per original term
  std::vector<double> similarity;       // 0 for OOV terms
  std::vector<bool> oov;                // source term had no vector; carried through verbatim
};

TranslatedQuery tbtqt_translate(const std::string& query_id, std::span<const std::string> terms,
                                const ClweSpace& space, const CandidateSet& target_vocab);

/// Translated tokens resolved against the collection vocabulary.
std::vector<std::optional<TermId>> resolve_terms(std::span<const std::string> terms, const Vocabulary& vocab);

/// Dirichlet-smoothed query likelihood. Terms absent from the collection are skipped.
double ql_score(std::span<const std::optional<TermId>> query_terms, const Document& doc,
                const CollectionStats& stats, double mu = 1000.0);

double bm25_score(std::span<const std::optional<TermId>> query_terms, const Document& doc,
                  const CollectionStats& stats, double k1 = 1.2, double b = 0.75);

ScoredList rank_ql(const std::string& query_id, std::span<const std::optional<TermId>> query_terms,
                   const Collection& collection, std::span<const std::size_t> pool, const CollectionStats& stats,
                   double mu = 1000.0);

ScoredList rank_bm25(const std::string& query_id, std::span<const std::optional<TermId>> query_terms,
                     const Collection& collection, std::span<const std::size_t> pool,
                     const CollectionStats& stats, double k1 = 1.2, double b = 0.75);

/// Every document index of the collection, in order.
std::vector<std::size_t> full_pool(const Collection& collection);

}  // namespace clir
