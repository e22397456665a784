#include "clir/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <memory>

#include "clir/error.hpp"

namespace clir {

PoolSpec PoolSpec::parse(std::string_view text) {
  PoolSpec p;
  if (text == "judged") return p;
  if (text == "full") {
    p.kind = Kind::kFull;
    return p;
  }
  if (text.starts_with("bm25:")) {
    const auto digits = text.substr(5);
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || n == 0) {
      throw Error("bad pool depth in '" + std::string(text) + "'");
    }
    p.kind = Kind::kBm25;
    p.depth = n;
    return p;
  }
  throw Error("unknown pool '" + std::string(text) + "' (judged, full or bm25:N)");
}

std::string PoolSpec::str() const {
  switch (kind) {
    case Kind::kJudged:
      return "judged";
    case Kind::kFull:
      return "full";
    case Kind::kBm25:
      return "bm25:" + std::to_string(depth);
  }
  return {};
}

const Query& ExperimentData::query(const std::string& query_id) const {
  auto it = query_index.find(query_id);
  if (it == query_index.end()) throw Error("unknown query " + query_id);
  return queries.queries[it->second];
}

std::vector<std::string> ExperimentData::query_terms(const std::string& query_id) const {
  std::vector<std::string> out;
  for (TermId t : query(query_id).tokens) out.push_back(queries.vocabulary.term(t));
  return out;
}

std::vector<double> ExperimentData::translated_idf(const std::string& query_id) const {
  const auto& tq = translations.at(query_id);
  std::vector<double> out;
  out.reserve(tq.translated.size());
  for (const auto& t : tq.translated) {
    auto id = corpus.vocabulary.find(t);
    out.push_back(id ? stats.idf_of(*id) : bm25_idf(stats.doc_count, 0));
  }
  return out;
}

namespace {

std::vector<std::string> doc_ids(const ScoredList& list, std::size_t depth) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < list.entries.size() && i < depth; ++i) out.push_back(list.entries[i].doc_id);
  return out;
}

}  // namespace

ExperimentData assemble_experiment(LoadedCollection corpus, LoadedQueries queries, Qrels qrels, ClweSpace space,
                                   const ExperimentOptions& options) {
  if (!space.query_side || !space.doc_side) throw Error("experiment: embedding space is incomplete");
  check_qrels(qrels, corpus.collection);
  ExperimentData data;
  data.corpus = std::move(corpus);
  data.queries = std::move(queries);
  data.qrels = std::move(qrels);
  data.space = std::move(space);
  data.options = options;
  data.stats = compute_stats(data.corpus.collection, data.corpus.vocabulary.size());
  data.query_rows = map_rows(*data.space.query_side, data.queries.vocabulary);
  data.doc_rows = map_rows(*data.space.doc_side, data.corpus.vocabulary);
  data.target_vocab = CandidateSet(*data.space.doc_side, data.corpus.vocabulary.terms());

  const auto judged = data.qrels.query_ids();
  for (std::size_t i = 0; i < data.queries.queries.size(); ++i) {
    const auto& q = data.queries.queries[i];
    data.query_index[q.id] = i;
    if (std::binary_search(judged.begin(), judged.end(), q.id)) data.query_ids.push_back(q.id);
  }
  std::sort(data.query_ids.begin(), data.query_ids.end());

  const auto all = full_pool(data.corpus.collection);
  for (const auto& qid : data.query_ids) {
    const auto terms = data.query_terms(qid);
    data.translations.emplace(qid, tbtqt_translate(qid, terms, data.space, data.target_vocab));
    std::vector<std::string> pool;
    switch (options.pool.kind) {
      case PoolSpec::Kind::kJudged:
        for (const auto& [doc, _] : data.qrels.judged(qid)) pool.push_back(doc);
        break;
      case PoolSpec::Kind::kFull:
        for (const auto& d : data.corpus.collection.docs()) pool.push_back(d.id);
        std::sort(pool.begin(), pool.end());
        break;
      case PoolSpec::Kind::kBm25: {
        const auto resolved = resolve_terms(data.translations.at(qid).translated, data.corpus.vocabulary);
        const auto ranked =
            rank_bm25(qid, resolved, data.corpus.collection, all, data.stats, options.k1, options.b);
        pool = doc_ids(ranked, options.pool.depth);
        std::sort(pool.begin(), pool.end());
        break;
      }
    }
    data.pools.emplace(qid, std::move(pool));
  }
  return data;
}

ExperimentData load_experiment(const ExperimentPaths& paths, const ExperimentOptions& options) {
  StopwordSet stop;
  if (paths.stopwords) stop = load_stopwords(*paths.stopwords);
  auto corpus = load_collection(paths.docs, stop, options.load);
  auto queries = load_queries(paths.queries, stop);
  auto qrels = load_qrels(paths.qrels);

  const TermSet query_terms(queries.vocabulary.terms().begin(), queries.vocabulary.terms().end());
  const TermSet doc_terms(corpus.vocabulary.terms().begin(), corpus.vocabulary.terms().end());
  if (paths.doc_vectors == paths.query_vectors) {
    // One file for both sides: load it unfiltered by side so both vocabularies resolve.
    TermSet both = query_terms;
    both.insert(doc_terms.begin(), doc_terms.end());
    auto mono = std::make_shared<EmbeddingTable>(load_embeddings(paths.query_vectors, &both, "mono"));
    return assemble_experiment(std::move(corpus), std::move(queries), std::move(qrels), ClweSpace::mono(mono),
                               options);
  }
  auto src = std::make_shared<EmbeddingTable>(load_embeddings(paths.query_vectors, &query_terms, "src"));
  auto tgt = std::make_shared<EmbeddingTable>(load_embeddings(paths.doc_vectors, &doc_terms, "tgt"));
  return assemble_experiment(std::move(corpus), std::move(queries), std::move(qrels), ClweSpace{src, tgt}, options);
}

FeatureCache::FeatureCache(const ExperimentData& data, nn::ModelConfig config)
    : data_(&data), config_(std::move(config)) {}

const FeatureCache::QuerySide& FeatureCache::query_side(const std::string& query_id) {
  auto it = queries_.find(query_id);
  if (it != queries_.end()) return it->second;
  QuerySide side;
  if (config_.translate_query) {
    // Score in the target space with the translated query.
    side.terms = embed_terms(data_->translations.at(query_id).translated, *data_->space.doc_side);
  } else {
    side.terms = embed_terms(data_->query(query_id).tokens, data_->query_rows, *data_->space.query_side);
  }
  side.idf = data_->translated_idf(query_id);
  return queries_.emplace(query_id, std::move(side)).first->second;
}

const nn::PairFeatures& FeatureCache::features(const std::string& query_id, const std::string& doc_id) {
  std::string key = query_id;
  key += '\t';
  key += doc_id;
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const auto& q = query_side(query_id);
  const auto index = data_->corpus.collection.find(doc_id);
  if (!index) throw Error("unknown document " + doc_id);
  const auto& doc = data_->corpus.collection.doc(*index);
  const auto d = embed_terms(doc.tokens, data_->doc_rows, *data_->space.doc_side);
  return cache_.emplace(std::move(key), nn::featurize(config_, q.terms, d, q.idf)).first->second;
}

std::vector<std::string> FeatureCache::candidates(const std::string& query_id) {
  auto it = data_->pools.find(query_id);
  if (it == data_->pools.end()) throw Error("no candidate pool for query " + query_id);
  return it->second;
}

std::string_view to_string(UnsupSystem system) {
  switch (system) {
    case UnsupSystem::kBweAggAdd:
      return "BWE-Agg-Add";
    case UnsupSystem::kBweAggIdf:
      return "BWE-Agg-IDF";
    case UnsupSystem::kTbtQtQl:
      return "TbT-QT-QL";
    case UnsupSystem::kTbtQtBm25:
      return "TbT-QT-BM25";
  }
  return "?";
}

UnsupSystem parse_unsup_system(std::string_view name) {
  for (auto s : all_unsup_systems()) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown unsupervised system '" + std::string(name) + "'");
}

std::vector<UnsupSystem> all_unsup_systems() {
  return {UnsupSystem::kBweAggAdd, UnsupSystem::kBweAggIdf, UnsupSystem::kTbtQtQl, UnsupSystem::kTbtQtBm25};
}

std::vector<ScoredList> run_unsupervised(const ExperimentData& data, UnsupSystem system,
                                         std::span<const std::string> query_ids) {
  const auto& collection = data.corpus.collection;
  std::optional<BweAggIndex> index;
  if (system == UnsupSystem::kBweAggAdd || system == UnsupSystem::kBweAggIdf) {
    index.emplace(collection, data.doc_rows, *data.space.doc_side,
                  system == UnsupSystem::kBweAggAdd ? AggWeighting::kUniform : AggWeighting::kIdf, data.stats);
  }
  std::vector<ScoredList> out;
  out.reserve(query_ids.size());
  for (const auto& qid : query_ids) {
    std::vector<std::size_t> pool;
    for (const auto& d : data.pools.at(qid)) pool.push_back(*collection.find(d));
    switch (system) {
      case UnsupSystem::kBweAggAdd:
      case UnsupSystem::kBweAggIdf: {
        auto q = bwe_agg_embed(data.query(qid).tokens, data.query_rows, *data.space.query_side,
                               AggWeighting::kUniform, nullptr);
        if (q) {
          out.push_back(index->rank(qid, *q, pool));
        } else {
          // Nothing to embed: every document ties at -inf and falls back to docId order.
          std::vector<ScoredDoc> flat;
          for (std::size_t d : pool) flat.push_back({collection.doc(d).id, -std::numeric_limits<double>::infinity()});
          out.push_back(make_scored_list(qid, std::move(flat)));
        }
        break;
      }
      case UnsupSystem::kTbtQtQl: {
        const auto resolved = resolve_terms(data.translations.at(qid).translated, data.corpus.vocabulary);
        out.push_back(rank_ql(qid, resolved, collection, pool, data.stats, data.options.mu));
        break;
      }
      case UnsupSystem::kTbtQtBm25: {
        const auto resolved = resolve_terms(data.translations.at(qid).translated, data.corpus.vocabulary);
        out.push_back(rank_bm25(qid, resolved, collection, pool, data.stats, data.options.k1, data.options.b));
        break;
      }
    }
  }
  return out;
}

CvResult cross_validate(const std::string& system, const FoldPlan& plan, const Qrels& qrels,
                        const FoldTrainer& trainer) {
  CvResult result;
  result.system = system;
  for (std::size_t r = 0; r < plan.size(); ++r) {
    CvRound round;
    round.round = r;
    round.split = plan.round(r);
    QueryScorer scorer = trainer(round.split, round);
    for (const auto& q : round.split.test) result.test_runs.push_back(scorer(q));
    result.rounds.push_back(std::move(round));
  }
  std::sort(result.test_runs.begin(), result.test_runs.end(),
            [](const ScoredList& a, const ScoredList& b) { return a.query_id < b.query_id; });
  result.map = mean_average_precision(result.test_runs, qrels);
  return result;
}

CvResult cross_validate(const nn::ModelConfig& model_config, const nn::TrainConfig& train_config,
                        const ExperimentData& data, const FoldPlan& plan) {
  auto cache = std::make_shared<FeatureCache>(data, model_config);
  return cross_validate(model_config.name, plan, data.qrels, [&](const FoldRound& split, CvRound& round) {
    nn::ModelConfig mc = model_config;
    mc.seed = model_config.seed + round.round;
    nn::TrainConfig tc = train_config;
    tc.seed = train_config.seed + round.round;
    auto trained = nn::train(mc, split.train, split.validation, *cache, data.qrels, tc);
    round.log = trained.log;
    round.best_epoch = trained.best_epoch;
    auto model = std::make_shared<nn::RankingModel>(std::move(trained.model));
    return QueryScorer([model, cache](const std::string& qid) {
      return nn::rerank(*model, qid, cache->candidates(qid), *cache);
    });
  });
}

CvResult evaluate_unsupervised(const ExperimentData& data, UnsupSystem system, const FoldPlan& plan) {
  std::vector<std::string> ids;
  for (const auto& f : plan.folds) ids.insert(ids.end(), f.begin(), f.end());
  std::sort(ids.begin(), ids.end());
  CvResult result;
  result.system = std::string(to_string(system));
  result.test_runs = run_unsupervised(data, system, ids);
  result.map = mean_average_precision(result.test_runs, data.qrels);
  return result;
}

EvalReport build_report(std::span<const CvResult> results, std::span<const std::string> baselines, double alpha) {
  EvalReport report;
  for (const auto& r : results) report.systems.push_back({r.system, r.map});
  for (const auto& r : results) {
    if (std::find(baselines.begin(), baselines.end(), r.system) != baselines.end()) continue;
    for (const auto& b : baselines) {
      if (report.find(b) != nullptr) report.comparisons.push_back(report.compare(r.system, b, alpha));
    }
  }
  return report;
}

}  // namespace clir
