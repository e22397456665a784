#include "clir/corpus.hpp"

#include <cmath>
#include <fstream>

#include "clir/error.hpp"
#include "text_util.hpp"

namespace clir {

TermId Vocabulary::intern(std::string_view term) {
  auto it = ids_.find(std::string(term));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<TermId>(terms_.size());
  terms_.emplace_back(term);
  ids_.emplace(terms_.back(), id);
  return id;
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
  auto it = ids_.find(std::string(term));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void Collection::add(Document doc) {
  if (index_.contains(doc.id)) throw Error("duplicate docId: " + doc.id);
  index_.emplace(doc.id, docs_.size());
  docs_.push_back(std::move(doc));
}

std::optional<std::size_t> Collection::find(std::string_view doc_id) const {
  auto it = index_.find(std::string(doc_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::string lowercase(std::string_view text) {
  std::u32string cps = detail::decode_utf8(text);
  for (auto& c : cps) c = detail::to_lower(c);
  return detail::encode_utf8(cps);
}

// Shared by documents and queries: `id<TAB>text`.
template <typename Fn>
void read_tsv(const std::filesystem::path& path, Fn&& on_record) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim_line_end(line);
    if (view.empty()) continue;
    const auto tab = view.find('\t');
    if (tab == std::string_view::npos) throw ParseError(path.string(), line_no, "missing TAB separator");
    std::string_view id = view.substr(0, tab);
    if (id.empty()) throw ParseError(path.string(), line_no, "empty id");
    if (id.find(' ') != std::string_view::npos) throw ParseError(path.string(), line_no, "id contains a space");
    on_record(line_no, id, view.substr(tab + 1));
  }
}

}  // namespace

StopwordSet load_stopwords(const std::filesystem::path& path) {
  auto in = open_input(path);
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = detail::trim_line_end(line);
    for (auto field : detail::split_fields(view)) out.insert(lowercase(field));
  }
  return out;
}

std::vector<std::string> preprocess_text(std::string_view raw, const StopwordSet& stopwords) {
  std::vector<std::string> tokens;
  const std::u32string text = detail::decode_utf8(raw);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !detail::is_space(text[i])) ++i;
    std::size_t end = i;
    while (start < end && detail::is_punct(text[start])) ++start;
    while (end > start && detail::is_punct(text[end - 1])) --end;
    if (end - start < 2) continue;
    std::u32string token(text.substr(start, end - start));
    for (auto& c : token) c = detail::to_lower(c);
    std::string utf8 = detail::encode_utf8(token);
    if (stopwords.contains(utf8)) continue;
    tokens.push_back(std::move(utf8));
  }
  return tokens;
}

LoadedCollection load_collection(const std::filesystem::path& path, const StopwordSet& stopwords,
                                 const LoadOptions& options) {
  LoadedCollection out;
  read_tsv(path, [&](std::size_t line_no, std::string_view id, std::string_view text) {
    std::vector<std::string> tokens;
    if (options.order == TruncationOrder::kBeforePreprocessing) {
      auto raw = detail::split_fields(text);
      if (raw.size() > options.truncation_limit) raw.resize(options.truncation_limit);
      std::string joined;
      for (auto r : raw) {
        joined.append(r);
        joined.push_back(' ');
      }
      tokens = preprocess_text(joined, stopwords);
    } else {
      tokens = preprocess_text(text, stopwords);
      if (tokens.size() > options.truncation_limit) tokens.resize(options.truncation_limit);
    }
    Document doc{std::string(id), {}};
    doc.tokens.reserve(tokens.size());
    for (const auto& t : tokens) doc.tokens.push_back(out.vocabulary.intern(t));
    if (out.collection.find(doc.id)) {
      throw ParseError(path.string(), line_no, "duplicate docId " + doc.id);
    }
    out.collection.add(std::move(doc));
  });
  return out;
}

LoadedQueries load_queries(const std::filesystem::path& path, const StopwordSet& stopwords) {
  LoadedQueries out;
  std::unordered_set<std::string> seen;
  read_tsv(path, [&](std::size_t line_no, std::string_view id, std::string_view text) {
    if (!seen.emplace(id).second) throw ParseError(path.string(), line_no, "duplicate queryId " + std::string(id));
    Query q{std::string(id), {}};
    for (const auto& t : preprocess_text(text, stopwords)) q.tokens.push_back(out.vocabulary.intern(t));
    if (q.tokens.empty()) out.empty_query_ids.push_back(q.id);
    out.queries.push_back(std::move(q));
  });
  return out;
}

double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
  const double n = static_cast<double>(doc_count);
  const double df = static_cast<double>(doc_freq);
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

CollectionStats compute_stats(const Collection& collection, std::size_t vocabulary_size) {
  if (collection.empty()) throw Error("compute_stats: empty collection");
  CollectionStats stats;
  stats.doc_count = collection.size();
  stats.doc_freq.assign(vocabulary_size, 0);
  stats.collection_freq.assign(vocabulary_size, 0);
  stats.doc_len.reserve(collection.size());
  std::vector<std::size_t> last_seen(vocabulary_size, static_cast<std::size_t>(-1));
  for (std::size_t d = 0; d < collection.size(); ++d) {
    const auto& tokens = collection.doc(d).tokens;
    stats.doc_len.push_back(tokens.size());
    stats.total_tokens += tokens.size();
    for (TermId t : tokens) {
      if (t >= vocabulary_size) throw Error("compute_stats: term id outside vocabulary");
      ++stats.collection_freq[t];
      if (last_seen[t] != d) {
        last_seen[t] = d;
        ++stats.doc_freq[t];
      }
    }
  }
  stats.avg_doc_len = static_cast<double>(stats.total_tokens) / static_cast<double>(stats.doc_count);
  stats.idf.resize(vocabulary_size);
  for (std::size_t t = 0; t < vocabulary_size; ++t) {
    stats.idf[t] = stats.doc_freq[t] == 0 ? 0.0 : bm25_idf(stats.doc_count, stats.doc_freq[t]);
  }
  return stats;
}

void Qrels::add(const std::string& query_id, const std::string& doc_id, int grade) {
  auto& row = table_[query_id];
  if (!row.emplace(doc_id, grade >= 1 ? 1 : 0).second) {
    throw Error("duplicate judgment for (" + query_id + ", " + doc_id + ")");
  }
  ++count_;
}

std::optional<int> Qrels::grade(std::string_view query_id, std::string_view doc_id) const {
  auto q = table_.find(query_id);
  if (q == table_.end()) return std::nullopt;
  auto d = q->second.find(doc_id);
  if (d == q->second.end()) return std::nullopt;
  return d->second;
}

const std::map<std::string, int, std::less<>>& Qrels::judged(std::string_view query_id) const {
  static const std::map<std::string, int, std::less<>> kEmpty;
  auto q = table_.find(query_id);
  return q == table_.end() ? kEmpty : q->second;
}

std::vector<std::string> Qrels::relevant(std::string_view query_id) const {
  std::vector<std::string> out;
  for (const auto& [doc, grade] : judged(query_id)) {
    if (grade == 1) out.push_back(doc);
  }
  return out;
}

std::vector<std::string> Qrels::nonrelevant(std::string_view query_id) const {
  std::vector<std::string> out;
  for (const auto& [doc, grade] : judged(query_id)) {
    if (grade == 0) out.push_back(doc);
  }
  return out;
}

std::vector<std::string> Qrels::query_ids() const {
  std::vector<std::string> out;
  out.reserve(table_.size());
  for (const auto& [q, _] : table_) out.push_back(q);
  return out;
}

Qrels load_qrels(const std::filesystem::path& path) {
  auto in = open_input(path);
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = detail::split_fields(detail::trim_line_end(line));
    if (fields.empty()) continue;
    if (fields.size() != 4) throw ParseError(path.string(), line_no, "expected 4 fields");
    int grade = 0;
    try {
      std::size_t used = 0;
      const std::string g(fields[3]);
      grade = std::stoi(g, &used);
      if (used != g.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(path.string(), line_no, "grade is not an integer");
    }
    try {
      qrels.add(std::string(fields[0]), std::string(fields[2]), grade);
    } catch (const Error& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return qrels;
}

void check_qrels(const Qrels& qrels, const Collection& collection) {
  for (const auto& q : qrels.query_ids()) {
    for (const auto& [doc, _] : qrels.judged(q)) {
      if (!collection.find(doc)) throw Error("qrels reference unknown docId " + doc + " (query " + q + ")");
    }
  }
}

}  // namespace clir
