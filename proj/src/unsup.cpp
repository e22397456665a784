#include "clir/unsup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string_view>
#include <unordered_set>

#include "clir/error.hpp"

namespace clir {

ScoredList make_scored_list(std::string query_id, std::vector<ScoredDoc> entries) {
  std::sort(entries.begin(), entries.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  std::unordered_set<std::string_view> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.doc_id).second) throw Error("duplicate docId in ranking: " + e.doc_id);
  }
  return {std::move(query_id), std::move(entries)};
}

std::optional<std::vector<double>> bwe_agg_embed(std::span<const TermId> tokens, const RowMap& rows,
                                                 const EmbeddingTable& table, AggWeighting weighting,
                                                 const CollectionStats* stats) {
  if (weighting == AggWeighting::kIdf && stats == nullptr) throw Error("bwe_agg_embed: idf weighting needs stats");
  std::vector<double> sum(table.dimension(), 0.0);
  double total_weight = 0.0;
  for (TermId t : tokens) {
    if (t >= rows.size() || !rows[t]) continue;
    const double w = weighting == AggWeighting::kIdf ? stats->idf_of(t) : 1.0;
    const auto v = table.raw(*rows[t]);
    for (std::size_t i = 0; i < v.size(); ++i) sum[i] += w * static_cast<double>(v[i]);
    total_weight += w;
  }
  if (total_weight <= 0.0) return std::nullopt;
  for (auto& x : sum) x /= total_weight;
  return sum;
}

BweAggIndex::BweAggIndex(const Collection& collection, const RowMap& doc_rows, const EmbeddingTable& doc_table,
                         AggWeighting weighting, const CollectionStats& stats)
    : collection_(&collection) {
  doc_vectors_.reserve(collection.size());
  for (const auto& doc : collection.docs()) {
    auto v = bwe_agg_embed(doc.tokens, doc_rows, doc_table, weighting, &stats);
    // An aggregate can cancel to exactly zero; treat it like an all-OOV document.
    if (v && std::all_of(v->begin(), v->end(), [](double x) { return x == 0.0; })) v.reset();
    doc_vectors_.push_back(std::move(v));
  }
}

ScoredList BweAggIndex::rank(const std::string& query_id, std::span<const double> query_embedding,
                             std::span<const std::size_t> pool) const {
  std::vector<ScoredDoc> out;
  out.reserve(pool.size());
  for (std::size_t d : pool) {
    const auto& v = doc_vectors_.at(d);
    const double s = v ? cosine(query_embedding, *v) : -std::numeric_limits<double>::infinity();
    out.push_back({collection_->doc(d).id, s});
  }
  return make_scored_list(query_id, std::move(out));
}

ScoredList BweAggIndex::rank(const std::string& query_id, std::span<const double> query_embedding) const {
  return rank(query_id, query_embedding, full_pool(*collection_));
}

ScoredList bwe_agg_rank(const Query& query, const RowMap& query_rows, const Collection& collection,
                        const RowMap& doc_rows, const ClweSpace& space, AggWeighting weighting,
                        const CollectionStats& stats) {
  auto q = bwe_agg_embed(query.tokens, query_rows, *space.query_side, AggWeighting::kUniform, nullptr);
  if (!q) throw Error("bwe_agg_rank: query " + query.id + " has no embedded term");
  BweAggIndex index(collection, doc_rows, *space.doc_side, weighting, stats);
  return index.rank(query.id, *q);
}

TranslatedQuery tbtqt_translate(const std::string& query_id, std::span<const std::string> terms,
                                const ClweSpace& space, const CandidateSet& target_vocab) {
  TranslatedQuery out;
  out.query_id = query_id;
  for (const auto& term : terms) {
    out.original.push_back(term);
    NeighborResult nn;
    if (target_vocab.size() > 0) nn = nearest_neighbors(term, 1, space, target_vocab);
    if (nn.oov || nn.neighbors.empty()) {
      out.translated.push_back(term);
      out.similarity.push_back(0.0);
      out.oov.push_back(true);
    } else {
      out.translated.push_back(nn.neighbors.front().term);
      out.similarity.push_back(nn.neighbors.front().similarity);
      out.oov.push_back(false);
    }
  }
  return out;
}

std::vector<std::optional<TermId>> resolve_terms(std::span<const std::string> terms, const Vocabulary& vocab) {
  std::vector<std::optional<TermId>> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(vocab.find(t));
  return out;
}

namespace {

std::size_t term_frequency(TermId term, const Document& doc) {
  return static_cast<std::size_t>(std::count(doc.tokens.begin(), doc.tokens.end(), term));
}

}  // namespace

double ql_score(std::span<const std::optional<TermId>> query_terms, const Document& doc,
                const CollectionStats& stats, double mu) {
  if (!(mu > 0.0)) throw Error("ql_score: mu must be positive");
  const double doc_len = static_cast<double>(doc.tokens.size());
  const double total = static_cast<double>(stats.total_tokens);
  double score = 0.0;
  for (const auto& t : query_terms) {
    if (!t || *t >= stats.collection_freq.size() || stats.collection_freq[*t] == 0) continue;
    const double p_c = static_cast<double>(stats.collection_freq[*t]) / total;
    const double tf = static_cast<double>(term_frequency(*t, doc));
    score += std::log((tf + mu * p_c) / (doc_len + mu));
  }
  return score;
}

double bm25_score(std::span<const std::optional<TermId>> query_terms, const Document& doc,
                  const CollectionStats& stats, double k1, double b) {
  if (!(k1 > 0.0)) throw Error("bm25_score: k1 must be positive");
  if (b < 0.0 || b > 1.0) throw Error("bm25_score: b must lie in [0, 1]");
  const double norm = k1 * (1.0 - b + b * static_cast<double>(doc.tokens.size()) / stats.avg_doc_len);
  double score = 0.0;
  for (const auto& t : query_terms) {
    if (!t) continue;
    const double tf = static_cast<double>(term_frequency(*t, doc));
    if (tf == 0.0) continue;
    score += stats.idf_of(*t) * tf * (k1 + 1.0) / (tf + norm);
  }
  return score;
}

ScoredList rank_ql(const std::string& query_id, std::span<const std::optional<TermId>> query_terms,
                   const Collection& collection, std::span<const std::size_t> pool, const CollectionStats& stats,
                   double mu) {
  std::vector<ScoredDoc> out;
  out.reserve(pool.size());
  for (std::size_t d : pool) out.push_back({collection.doc(d).id, ql_score(query_terms, collection.doc(d), stats, mu)});
  return make_scored_list(query_id, std::move(out));
}

ScoredList rank_bm25(const std::string& query_id, std::span<const std::optional<TermId>> query_terms,
                     const Collection& collection, std::span<const std::size_t> pool,
                     const CollectionStats& stats, double k1, double b) {
  std::vector<ScoredDoc> out;
  out.reserve(pool.size());
  for (std::size_t d : pool) {
    out.push_back({collection.doc(d).id, bm25_score(query_terms, collection.doc(d), stats, k1, b)});
  }
  return make_scored_list(query_id, std::move(out));
}

std::vector<std::size_t> full_pool(const Collection& collection) {
  std::vector<std::size_t> pool(collection.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  return pool;
}

}  // namespace clir
