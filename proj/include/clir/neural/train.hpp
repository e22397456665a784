#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clir/corpus.hpp"
#include "clir/neural/model.hpp"
#include "clir/unsup.hpp"

namespace clir::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t neg_per_pos = 5;
  std::size_t max_epochs = 20;
  double margin = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 42;
  bool track_train_map = true;  // score training queries after every epoch
};

/// max(0, margin - s_pos + s_neg)
double hinge_loss(double s_pos, double s_neg, double margin = 1.0);

struct HingeGrad {
  double loss = 0.0;
  double d_pos = 0.0;
  double d_neg = 0.0;
};

/// Subgradient is zero whenever the loss is zero, including the kink.
HingeGrad hinge_loss_grad(double s_pos, double s_neg, double margin = 1.0);

/// First and second moment estimates for every parameter element.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update at step t >= 1 on flat buffers.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                 std::size_t t, const TrainConfig& config);

/// Increments state.step and applies adam_update to every tensor using its grad.
void adam_step(ParamSet& params, AdamState& state, const TrainConfig& config);

struct Triple {
  std::string query_id;
  std::string pos_doc;
  std::string neg_doc;
  bool operator==(const Triple&) const = default;
};

struct TripleSample {
  std::vector<Triple> triples;
  std::vector<std::string> skipped_queries;  // no relevant or no judged non-relevant document
};

/// For every relevant document, neg_per_pos negatives drawn uniformly from the
/// query's judged non-relevant documents: without replacement when enough
/// exist, with replacement otherwise.
TripleSample sample_triples(const Qrels& qrels, std::span<const std::string> train_queries, std::size_t neg_per_pos,
                            std::uint64_t seed);

/// Source of frozen pair features and candidate pools for one model config.
class PairProvider {
 public:
  virtual ~PairProvider() = default;
  virtual const PairFeatures& features(const std::string& query_id, const std::string& doc_id) = 0;
  virtual std::vector<std::string> candidates(const std::string& query_id) = 0;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::size_t triples = 0;
  std::optional<double> train_map;
  std::optional<double> val_map;
};

struct TrainResult {
  RankingModel model;  // parameters of the selected epoch
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  std::vector<std::string> skipped_queries;
};

/// 1-based index of the first maximum; 0 for an empty log.
std::size_t select_best_epoch(std::span<const double> validation_maps);

/// Mini-batch hinge-loss training with Adam. After each epoch the validation
/// queries are reranked and the parameters of the best-MAP epoch are kept
/// (the last epoch when there are no validation queries).
TrainResult train(const ModelConfig& model_config, std::span<const std::string> train_queries,
                  std::span<const std::string> val_queries, PairProvider& provider, const Qrels& qrels,
                  const TrainConfig& config);

ScoredList rerank(const RankingModel& model, const std::string& query_id, std::span<const std::string> candidates,
                  PairProvider& provider);

/// MAP of the model over the given queries' candidate pools.
double evaluate_map(const RankingModel& model, std::span<const std::string> queries, PairProvider& provider,
                    const Qrels& qrels);

}  // namespace clir::nn
