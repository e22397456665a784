#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clir/clwe.hpp"
#include "clir/corpus.hpp"
#include "clir/eval.hpp"
#include "clir/interact.hpp"
#include "clir/neural/model.hpp"
#include "clir/neural/train.hpp"
#include "clir/unsup.hpp"

namespace clir {

struct ExperimentPaths {
  std::filesystem::path docs;
  std::filesystem::path queries;
  std::filesystem::path qrels;
  std::filesystem::path query_vectors;  // source language
  std::filesystem::path doc_vectors;    // target language
  std::optional<std::filesystem::path> stopwords;
};

/// Which documents are ranked for each query.
struct PoolSpec {
  enum class Kind { kJudged, kFull, kBm25 } kind = Kind::kJudged;
  std::size_t depth = 1000;  // kBm25 only

  /// "judged", "full" or "bm25:<N>".
  static PoolSpec parse(std::string_view text);
  std::string str() const;
};

struct ExperimentOptions {
  LoadOptions load;
  PoolSpec pool;
  double mu = 1000.0;
  double k1 = 1.2;
  double b = 0.75;
};

/// Everything the retrievers and models read, loaded once.
struct ExperimentData {
  LoadedCollection corpus;
  LoadedQueries queries;
  CollectionStats stats;
  Qrels qrels;
  ClweSpace space;
  RowMap query_rows;
  RowMap doc_rows;
  CandidateSet target_vocab;  // collection terms with a target vector
  ExperimentOptions options;

  std::vector<std::string> query_ids;  // queries present in both the query file and the qrels, sorted
  std::map<std::string, std::size_t> query_index;
  std::map<std::string, TranslatedQuery> translations;
  std::map<std::string, std::vector<std::string>> pools;

  const Query& query(const std::string& query_id) const;
  std::vector<std::string> query_terms(const std::string& query_id) const;
  /// Collection IDF of each query term's top-1 translation (df = 0 when the
  /// translation never occurs in the collection).
  std::vector<double> translated_idf(const std::string& query_id) const;
};

ExperimentData load_experiment(const ExperimentPaths& paths, const ExperimentOptions& options = {});

/// Builds query/pool state from already-loaded parts (used by tests and the synthetic harness).
ExperimentData assemble_experiment(LoadedCollection corpus, LoadedQueries queries, Qrels qrels, ClweSpace space,
                                   const ExperimentOptions& options = {});

/// Lazily computed, memoized pair features for one model configuration.
class FeatureCache : public nn::PairProvider {
 public:
  FeatureCache(const ExperimentData& data, nn::ModelConfig config);

  const nn::PairFeatures& features(const std::string& query_id, const std::string& doc_id) override;
  std::vector<std::string> candidates(const std::string& query_id) override;

  std::size_t cached() const noexcept { return cache_.size(); }

 private:
  struct QuerySide {
    EmbeddedTerms terms;
    std::vector<double> idf;
  };
  const QuerySide& query_side(const std::string& query_id);

  const ExperimentData* data_;
  nn::ModelConfig config_;
  std::unordered_map<std::string, QuerySide> queries_;
  std::unordered_map<std::string, nn::PairFeatures> cache_;
};

enum class UnsupSystem { kBweAggAdd, kBweAggIdf, kTbtQtQl, kTbtQtBm25 };

std::string_view to_string(UnsupSystem system);
UnsupSystem parse_unsup_system(std::string_view name);
std::vector<UnsupSystem> all_unsup_systems();

/// Ranks each query's pool with an unsupervised retriever.
std::vector<ScoredList> run_unsupervised(const ExperimentData& data, UnsupSystem system,
                                         std::span<const std::string> query_ids);

/// Test-fold scorer produced by a trainer for one round.
using QueryScorer = std::function<ScoredList(const std::string& query_id)>;

struct CvRound {
  std::size_t round = 0;
  FoldRound split;
  std::vector<nn::EpochLog> log;
  std::size_t best_epoch = 0;
};

using FoldTrainer = std::function<QueryScorer(const FoldRound& split, CvRound& round)>;

struct CvResult {
  std::string system;
  std::vector<ScoredList> test_runs;  // every query exactly once, from the round that tested it
  MapResult map;
  std::vector<CvRound> rounds;
};

/// Train on the training folds, let the trainer pick its epoch on the
/// validation fold, score the test fold; per-query test APs are pooled
/// across rounds.
CvResult cross_validate(const std::string& system, const FoldPlan& plan, const Qrels& qrels,
                        const FoldTrainer& trainer);

CvResult cross_validate(const nn::ModelConfig& model_config, const nn::TrainConfig& train_config,
                        const ExperimentData& data, const FoldPlan& plan);

/// Unsupervised systems need no training; their runs are scored on the same queries.
CvResult evaluate_unsupervised(const ExperimentData& data, UnsupSystem system, const FoldPlan& plan);

/// One SystemResult per run plus paired tests of every system against each named baseline.
EvalReport build_report(std::span<const CvResult> results, std::span<const std::string> baselines,
                        double alpha = 0.05);

}  // namespace clir
