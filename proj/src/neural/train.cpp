#include "clir/neural/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "clir/error.hpp"
#include "clir/eval.hpp"

namespace clir::nn {

double hinge_loss(double s_pos, double s_neg, double margin) { return std::max(0.0, margin - s_pos + s_neg); }

HingeGrad hinge_loss_grad(double s_pos, double s_neg, double margin) {
  HingeGrad g;
  g.loss = hinge_loss(s_pos, s_neg, margin);
  if (g.loss > 0.0) {
    g.d_pos = -1.0;
    g.d_neg = 1.0;
  }
  return g;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                 std::size_t t, const TrainConfig& config) {
  if (t < 1) throw Error("adam_update: step must be >= 1");
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw Error("adam_update: buffer size mismatch");
  }
  const double td = static_cast<double>(t);
  const double c1 = 1.0 - std::pow(config.beta1, td);
  const double c2 = 1.0 - std::pow(config.beta2, td);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void adam_step(ParamSet& params, AdamState& state, const TrainConfig& config) {
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto& [_, t] : params) {
      state.m.emplace_back(t.size(), 0.0);
      state.v.emplace_back(t.size(), 0.0);
    }
  }
  ++state.step;
  std::size_t i = 0;
  for (auto& [_, t] : params) {
    adam_update(t.value, t.grad, state.m[i], state.v[i], state.step, config);
    ++i;
  }
}

TripleSample sample_triples(const Qrels& qrels, std::span<const std::string> train_queries, std::size_t neg_per_pos,
                            std::uint64_t seed) {
  if (neg_per_pos == 0) throw Error("sample_triples: neg_per_pos must be positive");
  TripleSample out;
  std::mt19937_64 rng(seed);
  for (const auto& q : train_queries) {
    const auto pos = qrels.relevant(q);
    const auto neg = qrels.nonrelevant(q);
    if (pos.empty() || neg.empty()) {
      out.skipped_queries.push_back(q);
      continue;
    }
    std::vector<std::size_t> order(neg.size());
    for (const auto& p : pos) {
      if (neg.size() >= neg_per_pos) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = 0; i < neg_per_pos; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
          std::swap(order[i], order[pick(rng)]);
          out.triples.push_back({q, p, neg[order[i]]});
        }
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, neg.size() - 1);
        for (std::size_t i = 0; i < neg_per_pos; ++i) out.triples.push_back({q, p, neg[pick(rng)]});
      }
    }
  }
  return out;
}

std::size_t select_best_epoch(std::span<const double> validation_maps) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < validation_maps.size(); ++i) {
    if (best == 0 || validation_maps[i] > validation_maps[best - 1]) best = i + 1;
  }
  return best;
}

ScoredList rerank(const RankingModel& model, const std::string& query_id, std::span<const std::string> candidates,
                  PairProvider& provider) {
  std::vector<ScoredDoc> scored;
  scored.reserve(candidates.size());
  for (const auto& d : candidates) scored.push_back({d, model.score(provider.features(query_id, d))});
  return make_scored_list(query_id, std::move(scored));
}

double evaluate_map(const RankingModel& model, std::span<const std::string> queries, PairProvider& provider,
                    const Qrels& qrels) {
  std::vector<ScoredList> runs;
  runs.reserve(queries.size());
  for (const auto& q : queries) runs.push_back(rerank(model, q, provider.candidates(q), provider));
  return mean_average_precision(runs, qrels).map;
}

namespace {

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch)};
  std::uint64_t out = 0;
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  out = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out;
}

}  // namespace

TrainResult train(const ModelConfig& model_config, std::span<const std::string> train_queries,
                  std::span<const std::string> val_queries, PairProvider& provider, const Qrels& qrels,
                  const TrainConfig& config) {
  for (const auto& v : val_queries) {
    if (std::find(train_queries.begin(), train_queries.end(), v) != train_queries.end()) {
      throw Error("train: query " + v + " is in both the training and validation sets");
    }
  }
  if (config.batch_size == 0 || config.max_epochs == 0) throw Error("train: batch size and epochs must be positive");
  RankingModel model(model_config);
  TrainResult result{model, {}, 0, {}};
  AdamState adam;
  std::vector<double> val_maps;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const std::uint64_t seed = epoch_seed(config.seed, epoch);
    TripleSample sample = sample_triples(qrels, train_queries, config.neg_per_pos, seed);
    if (sample.triples.empty()) throw Error("train: no valid training triples");
    if (epoch == 1) result.skipped_queries = sample.skipped_queries;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(sample.triples.begin(), sample.triples.end(), rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < sample.triples.size(); start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, sample.triples.size());
      const double scale = 1.0 / static_cast<double>(end - start);
      model.params().zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const Triple& tr = sample.triples[i];
        const PairFeatures& fp = provider.features(tr.query_id, tr.pos_doc);
        const PairFeatures& fn = provider.features(tr.query_id, tr.neg_doc);
        Trace tp;
        Trace tn;
        const double sp = model.forward(fp, tp);
        const double sn = model.forward(fn, tn);
        const HingeGrad hg = hinge_loss_grad(sp, sn, config.margin);
        loss_sum += hg.loss;
        if (hg.loss > 0.0) {
          model.backward(fp, tp, hg.d_pos * scale);
          model.backward(fn, tn, hg.d_neg * scale);
        }
      }
      adam_step(model.params(), adam, config);
    }

    EpochLog log;
    log.epoch = epoch;
    log.triples = sample.triples.size();
    log.mean_loss = loss_sum / static_cast<double>(sample.triples.size());
    if (config.track_train_map) log.train_map = evaluate_map(model, train_queries, provider, qrels);
    if (!val_queries.empty()) {
      log.val_map = evaluate_map(model, val_queries, provider, qrels);
      val_maps.push_back(*log.val_map);
      if (select_best_epoch(val_maps) == epoch) {
        result.model = model;
        result.best_epoch = epoch;
      }
    } else {
      result.model = model;
      result.best_epoch = epoch;
    }
    result.log.push_back(log);
  }
  result.model.params().zero_grad();
  return result;
}

}  // namespace clir::nn
