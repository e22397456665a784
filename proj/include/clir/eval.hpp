#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/unsup.hpp"

namespace clir {

/// (1/|rel|) * sum over relevant hits of precision at that rank. Relevant
/// documents missing from the ranking count as misses. nullopt when the
/// relevant set is empty (query excluded from MAP).
std::optional<double> average_precision(std::span<const std::string> ranked,
                                        const std::unordered_set<std::string>& relevant);

std::optional<double> average_precision(const ScoredList& list, const Qrels& qrels);

struct MapResult {
  std::map<std::string, double> per_query;  // excluded queries absent
  std::vector<std::string> excluded;        // no relevant document judged
  double map = 0.0;
};

MapResult mean_average_precision(std::span<const ScoredList> runs, const Qrels& qrels);

struct RunEntry {
  std::string query_id;
  std::string doc_id;
  std::size_t rank = 0;
  double score = 0.0;
  std::string tag;
  bool operator==(const RunEntry&) const = default;
};

/// ScoredLists -> run entries with ranks from 1 per query.
std::vector<RunEntry> to_run(std::span<const ScoredList> lists, const std::string& tag);
/// Groups run entries back into per-query lists, preserving file order of queries.
std::vector<ScoredList> from_run(std::span<const RunEntry> entries);

/// `queryId Q0 docId rank score tag`; scores printed with round-trip precision.
void write_run(std::ostream& out, std::span<const RunEntry> entries);
void write_run(const std::filesystem::path& path, std::span<const RunEntry> entries);
/// Validates ranks dense from 1 per query and scores nonincreasing with rank.
std::vector<RunEntry> read_run(std::istream& in, const std::string& source = "<stream>");
std::vector<RunEntry> read_run(const std::filesystem::path& path);

struct FoldRound {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

struct FoldPlan {
  std::vector<std::vector<std::string>> folds;
  /// Round r tests fold r, validates fold (r + 1) mod k, trains on the rest.
  FoldRound round(std::size_t r) const;
  std::size_t size() const noexcept { return folds.size(); }
};

/// Seeded shuffle then round-robin assignment into k folds.
FoldPlan kfold_split(std::span<const std::string> query_ids, std::size_t k = 5, std::uint64_t seed = 42);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool significant = false;
};

/// Two-tailed paired t-test on a - b at level alpha.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

struct Comparison {
  std::string system_a;
  std::string system_b;
  std::size_t queries = 0;
  TTestResult test;
};

struct SystemResult {
  std::string name;
  MapResult map;
};

struct EvalReport {
  std::vector<SystemResult> systems;
  std::vector<Comparison> comparisons;

  const SystemResult* find(const std::string& name) const;
  /// Paired on queries both systems scored.
  Comparison compare(const std::string& a, const std::string& b, double alpha = 0.05) const;

  /// `system,query,ap` rows, then `system,MAP,<value>` and `system,excluded,<n>` summaries,
  /// then `compare:<a>:<b>,t|p|significant,<value>` rows.
  void write_csv(std::ostream& out) const;
  void write_table(std::ostream& out) const;
};

}  // namespace clir
