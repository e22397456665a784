#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace clir {

using TermId = std::uint32_t;

/// Bijective term <-> id mapping with ids dense in [0, size()).
class Vocabulary {
 public:
  TermId intern(std::string_view term);
  std::optional<TermId> find(std::string_view term) const;
  const std::string& term(TermId id) const { return terms_.at(id); }
  std::size_t size() const noexcept { return terms_.size(); }
  std::span<const std::string> terms() const noexcept { return terms_; }

 private:
  std::unordered_map<std::string, TermId> ids_;
  std::vector<std::string> terms_;
};

struct Document {
  std::string id;
  std::vector<TermId> tokens;
};

struct Query {
  std::string id;
  std::vector<TermId> tokens;
};

/// Documents in file order, plus a docId lookup.
class Collection {
 public:
  void add(Document doc);  // throws on duplicate id
  std::span<const Document> docs() const noexcept { return docs_; }
  const Document& doc(std::size_t index) const { return docs_.at(index); }
  std::optional<std::size_t> find(std::string_view doc_id) const;
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
};

using StopwordSet = std::unordered_set<std::string>;

/// One token per line; entries are lowercased on load. Blank lines ignored.
StopwordSet load_stopwords(const std::filesystem::path& path);

/// Lowercase, split on Unicode whitespace, strip punctuation at token
/// boundaries (interior hyphens and apostrophes survive), then drop
/// stopwords and tokens shorter than two code points. Order is preserved.
std::vector<std::string> preprocess_text(std::string_view raw, const StopwordSet& stopwords);

enum class TruncationOrder {
  kAfterPreprocessing,   // limit applies to content tokens (default)
  kBeforePreprocessing,  // limit applies to raw whitespace tokens
};

struct LoadOptions {
  std::size_t truncation_limit = 500;
  TruncationOrder order = TruncationOrder::kAfterPreprocessing;
};

struct LoadedCollection {
  Collection collection;
  Vocabulary vocabulary;
};

/// `docId<TAB>raw text` per line.
LoadedCollection load_collection(const std::filesystem::path& path, const StopwordSet& stopwords,
                                 const LoadOptions& options = {});

struct LoadedQueries {
  std::vector<Query> queries;
  Vocabulary vocabulary;
  std::vector<std::string> empty_query_ids;  // flagged: nothing left after preprocessing
};

/// `queryId<TAB>title` per line. Queries are never truncated.
LoadedQueries load_queries(const std::filesystem::path& path, const StopwordSet& stopwords);

struct CollectionStats {
  std::size_t doc_count = 0;
  std::vector<std::uint32_t> doc_freq;         // by TermId
  std::vector<double> idf;                     // by TermId
  std::vector<std::uint64_t> collection_freq;  // total occurrences, by TermId
  std::uint64_t total_tokens = 0;
  double avg_doc_len = 0.0;
  std::vector<std::size_t> doc_len;  // by document index

  double idf_of(TermId term) const { return term < idf.size() ? idf[term] : 0.0; }
};

/// ln((N - df + 0.5) / (df + 0.5) + 1)
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);

CollectionStats compute_stats(const Collection& collection, std::size_t vocabulary_size);

/// Binary judgments. Grade 1 = relevant, 0 = judged non-relevant.
class Qrels {
 public:
  void add(const std::string& query_id, const std::string& doc_id, int grade);  // throws on duplicate
  std::optional<int> grade(std::string_view query_id, std::string_view doc_id) const;

  /// Judged documents of a query in docId order.
  const std::map<std::string, int, std::less<>>& judged(std::string_view query_id) const;
  std::vector<std::string> relevant(std::string_view query_id) const;
  std::vector<std::string> nonrelevant(std::string_view query_id) const;
  std::vector<std::string> query_ids() const;
  std::size_t size() const noexcept { return count_; }

 private:
  std::map<std::string, std::map<std::string, int, std::less<>>, std::less<>> table_;
  std::size_t count_ = 0;
};

/// TREC format: `queryId iter docId grade`. Grades <= 0 map to 0, >= 1 map to 1.
Qrels load_qrels(const std::filesystem::path& path);

/// Throws if any judged docId is missing from the collection.
void check_qrels(const Qrels& qrels, const Collection& collection);

}  // namespace clir
