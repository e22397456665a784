#include "clir/eval.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "clir/error.hpp"
#include "text_util.hpp"

namespace clir {

std::optional<double> average_precision(std::span<const std::string> ranked,
                                        const std::unordered_set<std::string>& relevant) {
  if (relevant.empty()) return std::nullopt;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (relevant.contains(ranked[k])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

std::optional<double> average_precision(const ScoredList& list, const Qrels& qrels) {
  const auto rel = qrels.relevant(list.query_id);
  std::unordered_set<std::string> relevant(rel.begin(), rel.end());
  std::vector<std::string> ranked;
  ranked.reserve(list.entries.size());
  for (const auto& e : list.entries) ranked.push_back(e.doc_id);
  return average_precision(ranked, relevant);
}

MapResult mean_average_precision(std::span<const ScoredList> runs, const Qrels& qrels) {
  MapResult r;
  for (const auto& list : runs) {
    if (auto ap = average_precision(list, qrels)) {
      r.per_query[list.query_id] = *ap;
    } else {
      r.excluded.push_back(list.query_id);
    }
  }
  double sum = 0.0;
  // std::map iteration order makes the sum independent of run order.
  for (const auto& [_, ap] : r.per_query) sum += ap;
  r.map = r.per_query.empty() ? 0.0 : sum / static_cast<double>(r.per_query.size());
  return r;
}

std::vector<RunEntry> to_run(std::span<const ScoredList> lists, const std::string& tag) {
  std::vector<RunEntry> out;
  for (const auto& list : lists) {
    std::size_t rank = 1;
    for (const auto& e : list.entries) out.push_back({list.query_id, e.doc_id, rank++, e.score, tag});
  }
  return out;
}

std::vector<ScoredList> from_run(std::span<const RunEntry> entries) {
  std::vector<ScoredList> out;
  for (const auto& e : entries) {
    if (out.empty() || out.back().query_id != e.query_id) out.push_back({e.query_id, {}});
    out.back().entries.push_back({e.doc_id, e.score});
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, ptr);
}

}  // namespace

void write_run(std::ostream& out, std::span<const RunEntry> entries) {
  for (const auto& e : entries) {
    out << e.query_id << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << format_double(e.score) << ' '
        << (e.tag.empty() ? "clir" : e.tag) << '\n';
  }
}

void write_run(const std::filesystem::path& path, std::span<const RunEntry> entries) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_run(out, entries);
}

std::vector<RunEntry> read_run(std::istream& in, const std::string& source) {
  std::vector<RunEntry> out;
  std::map<std::string, std::pair<std::size_t, double>> last;  // query -> (rank, score)
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = detail::split_fields(detail::trim_line_end(line));
    if (fields.empty()) continue;
    if (fields.size() != 6) throw ParseError(source, line_no, "expected 6 fields");
    RunEntry e;
    e.query_id = std::string(fields[0]);
    e.doc_id = std::string(fields[2]);
    e.tag = std::string(fields[5]);
    auto [rp, rec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), e.rank);
    if (rec != std::errc{} || rp != fields[3].data() + fields[3].size()) {
      throw ParseError(source, line_no, "rank is not an integer");
    }
    auto [sp, sec] = std::from_chars(fields[4].data(), fields[4].data() + fields[4].size(), e.score);
    if (sec != std::errc{} || sp != fields[4].data() + fields[4].size()) {
      // from_chars rejects "inf"/"-inf" spellings produced by some tools
      const std::string s(fields[4]);
      if (s == "-inf" || s == "-Infinity") {
        e.score = -std::numeric_limits<double>::infinity();
      } else if (s == "inf" || s == "Infinity") {
        e.score = std::numeric_limits<double>::infinity();
      } else {
        throw ParseError(source, line_no, "score is not a number");
      }
    }
    auto it = last.find(e.query_id);
    const std::size_t expected_rank = it == last.end() ? 1 : it->second.first + 1;
    if (e.rank != expected_rank) {
      throw ParseError(source, line_no, "rank " + std::to_string(e.rank) + " where " +
                                            std::to_string(expected_rank) + " was expected");
    }
    if (it != last.end() && e.score > it->second.second) {
      throw ParseError(source, line_no, "score increases with rank");
    }
    last[e.query_id] = {e.rank, e.score};
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<RunEntry> read_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_run(in, path.string());
}

FoldRound FoldPlan::round(std::size_t r) const {
  const std::size_t k = folds.size();
  if (r >= k) throw Error("FoldPlan::round: round index out of range");
  FoldRound out;
  out.test = folds[r];
  out.validation = folds[(r + 1) % k];
  for (std::size_t f = 0; f < k; ++f) {
    if (f == r || f == (r + 1) % k) continue;
    out.train.insert(out.train.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.train.begin(), out.train.end());
  return out;
}

FoldPlan kfold_split(std::span<const std::string> query_ids, std::size_t k, std::uint64_t seed) {
  if (k < 3) throw Error("kfold_split: need at least 3 folds for train/validation/test roles");
  if (query_ids.size() < k) throw Error("kfold_split: fewer queries than folds");
  std::vector<std::string> ids(query_ids.begin(), query_ids.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw Error("kfold_split: duplicate query id");
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  FoldPlan plan;
  plan.folds.resize(k);
  for (std::size_t i = 0; i < ids.size(); ++i) plan.folds[i % k].push_back(ids[i]);
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() != b.size()) throw Error("paired_t_test: samples differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw Error("paired_t_test: need at least 2 pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  TTestResult r;
  if (sd == 0.0) {
    // Constant differences: zero mean is no evidence; nonzero mean is treated as infinitely significant.
    if (mean == 0.0) return r;
    r.t = mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    r.significant = true;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const double df = static_cast<double>(n - 1);
  // Two-tailed: P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)
  r.p = boost::math::ibeta(df / 2.0, 0.5, df / (df + r.t * r.t));
  r.p = std::clamp(r.p, 0.0, 1.0);
  r.significant = r.p < alpha;
  return r;
}

const SystemResult* EvalReport::find(const std::string& name) const {
  for (const auto& s : systems) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

Comparison EvalReport::compare(const std::string& a, const std::string& b, double alpha) const {
  const SystemResult* sa = find(a);
  const SystemResult* sb = find(b);
  if (sa == nullptr || sb == nullptr) throw Error("compare: unknown system " + (sa == nullptr ? a : b));
  std::vector<double> va;
  std::vector<double> vb;
  for (const auto& [q, ap] : sa->map.per_query) {
    auto it = sb->map.per_query.find(q);
    if (it == sb->map.per_query.end()) continue;
    va.push_back(ap);
    vb.push_back(it->second);
  }
  Comparison c{a, b, va.size(), {}};
  if (va.size() >= 2) c.test = paired_t_test(va, vb, alpha);
  return c;
}

void EvalReport::write_csv(std::ostream& out) const {
  out << "system,query,ap\n";
  for (const auto& s : systems) {
    for (const auto& [q, ap] : s.map.per_query) out << s.name << ',' << q << ',' << format_double(ap) << '\n';
  }
  for (const auto& s : systems) {
    out << s.name << ",MAP," << format_double(s.map.map) << '\n';
    out << s.name << ",excluded," << s.map.excluded.size() << '\n';
  }
  for (const auto& c : comparisons) {
    const std::string key = "compare:" + c.system_a + ":" + c.system_b;
    out << key << ",t," << format_double(c.test.t) << '\n';
    out << key << ",p," << format_double(c.test.p) << '\n';
    out << key << ",significant," << (c.test.significant ? 1 : 0) << '\n';
  }
}

void EvalReport::write_table(std::ostream& out) const {
  std::size_t width = 6;
  for (const auto& s : systems) width = std::max(width, s.name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "system" << "  " << std::right << std::setw(6) << "MAP"
      << "  " << std::setw(7) << "queries" << '\n';
  for (const auto& s : systems) {
    out << std::left << std::setw(static_cast<int>(width)) << s.name << "  " << std::right << std::fixed
        << std::setprecision(3) << std::setw(6) << s.map.map << "  " << std::setw(7) << s.map.per_query.size()
        << '\n';
  }
  out.unsetf(std::ios::fixed);
  if (comparisons.empty()) return;
  out << '\n';
  for (const auto& c : comparisons) {
    std::ostringstream t;
    t << std::setprecision(4) << c.test.t;
    std::ostringstream p;
    p << std::setprecision(4) << c.test.p;
    out << c.system_a << " vs " << c.system_b << ": t=" << t.str() << " p=" << p.str()
        << (c.test.significant ? " (significant)" : "") << '\n';
  }
}

}  // namespace clir
