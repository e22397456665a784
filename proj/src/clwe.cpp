#include "clir/clwe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "clir/error.hpp"
#include "text_util.hpp"

namespace clir {

EmbeddingTable::EmbeddingTable(std::size_t dimension, std::string lang) : dim_(dimension), lang_(std::move(lang)) {
  if (dim_ == 0) throw Error("embedding dimension must be positive");
}

bool EmbeddingTable::add(std::string_view term, std::span<const float> vector) {
  if (vector.size() != dim_) {
    throw Error("embedding for '" + std::string(term) + "' has " + std::to_string(vector.size()) +
                " values, expected " + std::to_string(dim_));
  }
  if (index_.contains(std::string(term))) {
    ++duplicates_;
    return false;
  }
  double norm_sq = 0.0;
  for (float x : vector) norm_sq += static_cast<double>(x) * static_cast<double>(x);
  if (norm_sq == 0.0) throw Error("zero embedding vector for '" + std::string(term) + "'");
  const double norm = std::sqrt(norm_sq);
  index_.emplace(std::string(term), terms_.size());
  terms_.emplace_back(term);
  raw_.insert(raw_.end(), vector.begin(), vector.end());
  for (float x : vector) unit_.push_back(static_cast<double>(x) / norm);
  return true;
}

std::optional<std::size_t> EmbeddingTable::row(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const TermSet* vocab_filter, std::string lang) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "missing header");
  auto header = detail::split_fields(detail::trim_line_end(line));
  std::size_t count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 ||
      std::from_chars(header[0].data(), header[0].data() + header[0].size(), count).ec != std::errc{} ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec != std::errc{} || dim == 0) {
    throw ParseError(path.string(), 1, "header must be `count dimension`");
  }
  EmbeddingTable table(dim, std::move(lang));
  std::vector<float> values(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim_line_end(line);
    // fastText rows end with a trailing space; terms never contain spaces.
    const auto sp = view.find(' ');
    if (view.empty()) continue;
    if (sp == std::string_view::npos || sp == 0) throw ParseError(path.string(), line_no, "malformed row");
    std::string_view term = view.substr(0, sp);
    if (vocab_filter != nullptr && !vocab_filter->contains(std::string(term))) continue;
    auto fields = detail::split_fields(view.substr(sp + 1));
    if (fields.size() != dim) {
      throw ParseError(path.string(), line_no,
                       "term '" + std::string(term) + "' has " + std::to_string(fields.size()) +
                           " values, expected " + std::to_string(dim));
    }
    bool all_zero = true;
    for (std::size_t i = 0; i < dim; ++i) {
      const auto f = fields[i];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), values[i]);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw ParseError(path.string(), line_no, "bad number in row for '" + std::string(term) + "'");
      }
      all_zero = all_zero && values[i] == 0.0F;
    }
    if (all_zero) {
      table.note_zero_vector();
      continue;
    }
    table.add(term, values);
  }
  return table;
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw Error("cosine: dimension mismatch");
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) throw Error("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }
double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

CandidateSet::CandidateSet(const EmbeddingTable& table, const TermSet& terms) {
  for (const auto& t : terms) {
    if (auto r = table.row(t)) rows_.push_back(*r);
  }
  std::sort(rows_.begin(), rows_.end(),
            [&](std::size_t a, std::size_t b) { return table.term(a) < table.term(b); });
}

CandidateSet::CandidateSet(const EmbeddingTable& table, std::span<const std::string> terms)
    : CandidateSet(table, TermSet(terms.begin(), terms.end())) {}

CandidateSet CandidateSet::all(const EmbeddingTable& table) {
  CandidateSet out;
  out.rows_.resize(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) out.rows_[r] = r;
  std::sort(out.rows_.begin(), out.rows_.end(),
            [&](std::size_t a, std::size_t b) { return table.term(a) < table.term(b); });
  return out;
}

std::vector<Neighbor> nearest_neighbors(std::span<const double> unit_probe, std::size_t k,
                                        const EmbeddingTable& candidate_table, const CandidateSet& candidates,
                                        std::optional<std::size_t> exclude_row) {
  if (k == 0) throw Error("nearest_neighbors: k must be >= 1");
  if (unit_probe.size() != candidate_table.dimension()) throw Error("nearest_neighbors: dimension mismatch");
  // Candidates are visited in term order, so a later candidate displaces a
  // kept one only when strictly more similar; equal similarity keeps the
  // lexicographically smaller term.
  struct Hit {
    double sim;
    std::size_t order;  // position in term-sorted candidate list
    std::size_t row;
  };
  auto better = [](const Hit& a, const Hit& b) { return a.sim > b.sim || (a.sim == b.sim && a.order < b.order); };
  std::vector<Hit> heap;  // worst at front
  heap.reserve(k + 1);
  const auto rows = candidates.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t row = rows[i];
    if (exclude_row && *exclude_row == row) continue;
    const double sim = std::clamp(dot(unit_probe, candidate_table.unit(row)), -1.0, 1.0);
    Hit h{sim, i, row};
    if (heap.size() < k) {
      heap.push_back(h);
      std::push_heap(heap.begin(), heap.end(), better);
    } else if (better(h, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), better);
      heap.back() = h;
      std::push_heap(heap.begin(), heap.end(), better);
    }
  }
  std::sort(heap.begin(), heap.end(), better);
  std::vector<Neighbor> out;
  out.reserve(heap.size());
  for (const auto& h : heap) out.push_back({candidate_table.term(h.row), h.sim});
  return out;
}

NeighborResult nearest_neighbors(std::string_view term, std::size_t k, const ClweSpace& space,
                                 const CandidateSet& candidates) {
  NeighborResult result;
  auto row = space.query_side->row(term);
  if (!row) {
    result.oov = true;
    return result;
  }
  result.neighbors = nearest_neighbors(space.query_side->unit(*row), k, *space.doc_side, candidates);
  return result;
}

NeighborResult nearest_neighbors(std::string_view term, std::size_t k, const EmbeddingTable& table,
                                 const TermSet& candidate_vocab) {
  NeighborResult result;
  auto row = table.row(term);
  if (!row) {
    result.oov = true;
    return result;
  }
  result.neighbors = nearest_neighbors(table.unit(*row), k, table, CandidateSet(table, candidate_vocab));
  return result;
}

Coverage coverage_report(const EmbeddingTable& table, std::span<const std::string> vocabulary) {
  Coverage c;
  for (const auto& t : vocabulary) {
    if (table.contains(t)) {
      ++c.covered;
    } else {
      ++c.oov;
    }
  }
  const std::size_t total = c.covered + c.oov;
  c.oov_rate = total == 0 ? 0.0 : static_cast<double>(c.oov) / static_cast<double>(total);
  return c;
}

RowMap map_rows(const EmbeddingTable& table, const Vocabulary& vocabulary) {
  RowMap rows(vocabulary.size());
  for (std::size_t t = 0; t < vocabulary.size(); ++t) rows[t] = table.row(vocabulary.term(static_cast<TermId>(t)));
  return rows;
}

Coverage coverage_report(const EmbeddingTable& table, const Vocabulary& vocabulary) {
  return coverage_report(table, vocabulary.terms());
}

}  // namespace clir
