#include "clir/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "clir/analysis.hpp"
#include "clir/corpus.hpp"
#include "clir/error.hpp"
#include "clir/eval.hpp"
#include "clir/experiment.hpp"
#include "clir/manifest.hpp"
#include "clir/neural/checkpoint.hpp"
#include "clir/synth.hpp"

namespace clir {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string data_dir;
};

fs::path resolve(const Globals& g, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  if (path.is_absolute() || g.data_dir.empty()) return path;
  return fs::path(g.data_dir) / path;
}

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, ptr);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

std::vector<std::string> read_id_list(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string w;
    while (words >> w) ids.push_back(w);
  }
  return ids;
}

struct DataFlags {
  std::string docs, queries, qrels, src_vec, tgt_vec, stopwords;
  std::string pool = "judged";
  std::size_t truncate = 500;
  bool truncate_before = false;
  double mu = 1000.0, k1 = 1.2, b = 0.75;

  void add_to(CLI::App* app) {
    app->add_option("--docs", docs, "documents, docId<TAB>text")->required();
    app->add_option("--queries", queries, "queries, queryId<TAB>title")->required();
    app->add_option("--qrels", qrels, "TREC qrels")->required();
    app->add_option("--src-vec", src_vec, "query-language vectors (word2vec text)")->required();
    app->add_option("--tgt-vec", tgt_vec, "document-language vectors (word2vec text)")->required();
    app->add_option("--stopwords", stopwords, "stopword list, one per line");
    app->add_option("--pool", pool, "candidate pool: judged, full or bm25:N")->capture_default_str();
    app->add_option("--truncate", truncate, "document length limit in tokens")->capture_default_str();
    app->add_flag("--truncate-before", truncate_before, "apply the length limit before stopword removal");
    app->add_option("--mu", mu, "Dirichlet smoothing for QL")->capture_default_str();
    app->add_option("--k1", k1, "BM25 k1")->capture_default_str();
    app->add_option("--b", b, "BM25 b")->capture_default_str();
  }

  ExperimentOptions options() const {
    ExperimentOptions o;
    o.load.truncation_limit = truncate;
    o.load.order = truncate_before ? TruncationOrder::kBeforePreprocessing : TruncationOrder::kAfterPreprocessing;
    o.pool = PoolSpec::parse(pool);
    o.mu = mu;
    o.k1 = k1;
    o.b = b;
    return o;
  }

  ExperimentPaths paths(const Globals& g) const {
    ExperimentPaths p;
    p.docs = resolve(g, docs);
    p.queries = resolve(g, queries);
    p.qrels = resolve(g, qrels);
    p.query_vectors = resolve(g, src_vec);
    p.doc_vectors = resolve(g, tgt_vec);
    if (!stopwords.empty()) p.stopwords = resolve(g, stopwords);
    return p;
  }

  void record(const Globals& g, Manifest& m) const {
    const auto p = paths(g);
    m.inputs.emplace_back("docs", p.docs);
    m.inputs.emplace_back("queries", p.queries);
    m.inputs.emplace_back("qrels", p.qrels);
    m.inputs.emplace_back("src_vec", p.query_vectors);
    m.inputs.emplace_back("tgt_vec", p.doc_vectors);
    if (p.stopwords) m.inputs.emplace_back("stopwords", *p.stopwords);
  }
};

struct TrainFlags {
  std::size_t epochs = 20;
  double lr = 1e-3;
  std::size_t batch_size = 64;
  std::size_t neg_per_pos = 5;
  double margin = 1.0;
  std::uint64_t seed = 42;
  double eta = 0.3;
  bool no_train_map = false;

  void add_to(CLI::App* app) {
    app->add_option("--epochs", epochs, "training epochs")->capture_default_str();
    app->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    app->add_option("--batch-size", batch_size, "triples per batch")->capture_default_str();
    app->add_option("--neg-per-pos", neg_per_pos, "negatives per relevant document")->capture_default_str();
    app->add_option("--margin", margin, "hinge margin")->capture_default_str();
    app->add_option("--seed", seed, "model and sampling seed")->capture_default_str();
    app->add_option("--eta", eta, "exact-match threshold for indicator interactions")->capture_default_str();
    app->add_flag("--no-train-map", no_train_map, "skip per-epoch training MAP");
  }

  nn::TrainConfig train_config() const {
    nn::TrainConfig c;
    c.max_epochs = epochs;
    c.learning_rate = lr;
    c.batch_size = batch_size;
    c.neg_per_pos = neg_per_pos;
    c.margin = margin;
    c.seed = seed;
    c.track_train_map = !no_train_map;
    return c;
  }

  nn::ModelConfig model_config(const std::string& name) const {
    auto c = nn::ModelConfig::named(name);
    c.seed = seed;
    c.eta = eta;
    return c;
  }
};

std::string config_text(const CLI::App* sub) {
  return "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false);
}

Manifest start_manifest(const CLI::App* sub, std::span<const std::string> args) {
  Manifest m;
  m.command = sub->get_name();
  m.arguments.assign(args.begin() + 1, args.end());
  m.config = config_text(sub);
  return m;
}

void finish(const fs::path& out_dir, Manifest& m, std::ostream& out) {
  const auto cfg = out_dir / "config.toml";
  {
    auto f = open_out(cfg);
    f << m.config;
  }
  m.outputs.push_back(cfg);
  const auto path = write_manifest(out_dir, m);
  out << "wrote " << path.string() << '\n';
}

void write_runs(const fs::path& path, std::span<const ScoredList> lists, const std::string& tag) {
  write_run(path, to_run(lists, tag));
}

void write_train_log(std::ostream& out, const std::string& system, std::size_t round,
                     std::span<const nn::EpochLog> log, std::size_t best) {
  for (const auto& e : log) {
    out << system << ',' << round << ',' << e.epoch << ',' << number(e.mean_loss) << ','
        << (e.train_map ? number(*e.train_map) : "") << ',' << (e.val_map ? number(*e.val_map) : "") << ','
        << (e.epoch == best ? 1 : 0) << '\n';
  }
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::string cur;
    for (char ch : item) {
      if (ch == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// ---- subcommands -----------------------------------------------------------

struct IndexCmd {
  std::string docs, queries, stopwords, out;
  std::size_t truncate = 500;
  bool truncate_before = false;
};

void run_index(const Globals& g, const IndexCmd& c, Manifest& m, std::ostream& os) {
  const fs::path out_dir(c.out);
  fs::create_directories(out_dir);
  StopwordSet stop;
  if (!c.stopwords.empty()) {
    stop = load_stopwords(resolve(g, c.stopwords));
    m.inputs.emplace_back("stopwords", resolve(g, c.stopwords));
  }
  LoadOptions lo;
  lo.truncation_limit = c.truncate;
  lo.order = c.truncate_before ? TruncationOrder::kBeforePreprocessing : TruncationOrder::kAfterPreprocessing;
  const auto docs = load_collection(resolve(g, c.docs), stop, lo);
  m.inputs.emplace_back("docs", resolve(g, c.docs));
  const auto stats = compute_stats(docs.collection, docs.vocabulary.size());

  const auto stats_path = out_dir / "stats.tsv";
  {
    auto f = open_out(stats_path);
    f << "# documents\t" << stats.doc_count << '\n'
      << "# tokens\t" << stats.total_tokens << '\n'
      << "# avg_doc_len\t" << number(stats.avg_doc_len) << '\n'
      << "# vocabulary\t" << docs.vocabulary.size() << '\n'
      << "term\tdf\tcf\tidf\n";
    std::vector<TermId> order(docs.vocabulary.size());
    for (TermId t = 0; t < order.size(); ++t) order[t] = t;
    std::sort(order.begin(), order.end(),
              [&](TermId a, TermId b) { return docs.vocabulary.term(a) < docs.vocabulary.term(b); });
    for (TermId t : order) {
      f << docs.vocabulary.term(t) << '\t' << stats.doc_freq[t] << '\t' << stats.collection_freq[t] << '\t'
        << number(stats.idf[t]) << '\n';
    }
  }
  m.outputs.push_back(stats_path);
  const auto lengths_path = out_dir / "doclen.tsv";
  {
    auto f = open_out(lengths_path);
    for (std::size_t d = 0; d < docs.collection.size(); ++d) {
      f << docs.collection.doc(d).id << '\t' << stats.doc_len[d] << '\n';
    }
  }
  m.outputs.push_back(lengths_path);
  if (!c.queries.empty()) {
    const auto qs = load_queries(resolve(g, c.queries), stop);
    m.inputs.emplace_back("queries", resolve(g, c.queries));
    const auto qpath = out_dir / "queries.tsv";
    auto f = open_out(qpath);
    for (const auto& q : qs.queries) {
      f << q.id << '\t';
      for (std::size_t i = 0; i < q.tokens.size(); ++i) f << (i ? " " : "") << qs.vocabulary.term(q.tokens[i]);
      f << '\n';
    }
    for (const auto& id : qs.empty_query_ids) os << "warning: query " << id << " is empty after preprocessing\n";
    m.outputs.push_back(qpath);
  }
  os << docs.collection.size() << " documents, " << docs.vocabulary.size() << " terms, avg length "
     << number(stats.avg_doc_len) << '\n';
}

struct RankUnsupCmd {
  DataFlags data;
  std::vector<std::string> systems;
  std::string out;
};

void run_rank_unsup(const Globals& g, const RankUnsupCmd& c, Manifest& m, std::ostream& os) {
  const fs::path out_dir(c.out);
  fs::create_directories(out_dir);
  c.data.record(g, m);
  const auto data = load_experiment(c.data.paths(g), c.data.options());
  std::vector<UnsupSystem> systems;
  const auto names = split_list(c.systems);
  if (names.empty() || (names.size() == 1 && names[0] == "all")) {
    systems = all_unsup_systems();
  } else {
    for (const auto& n : names) systems.push_back(parse_unsup_system(n));
  }
  for (auto s : systems) {
    const auto runs = run_unsupervised(data, s, data.query_ids);
    const auto path = out_dir / (std::string(to_string(s)) + ".run");
    write_runs(path, runs, std::string(to_string(s)));
    m.outputs.push_back(path);
    os << to_string(s) << " MAP " << number(mean_average_precision(runs, data.qrels).map) << '\n';
  }
  const auto tpath = out_dir / "translations.tsv";
  {
    auto f = open_out(tpath);
    for (const auto& [qid, tq] : data.translations) {
      for (std::size_t i = 0; i < tq.original.size(); ++i) {
        f << qid << '\t' << tq.original[i] << '\t' << tq.translated[i] << '\t' << number(tq.similarity[i]) << '\t'
          << (tq.oov[i] ? "oov" : "ok") << '\n';
      }
    }
  }
  m.outputs.push_back(tpath);
}

struct TrainCmd {
  DataFlags data;
  TrainFlags train;
  std::string model = "MP-Cosine";
  std::string train_queries, val_queries, out;
  std::size_t folds = 5;
  std::uint64_t fold_seed = 42;
};

void run_train(const Globals& g, const TrainCmd& c, Manifest& m, std::ostream& os) {
  const fs::path out_dir(c.out);
  fs::create_directories(out_dir);
  c.data.record(g, m);
  const auto data = load_experiment(c.data.paths(g), c.data.options());
  std::vector<std::string> train_q;
  std::vector<std::string> val_q;
  if (!c.train_queries.empty()) {
    train_q = read_id_list(resolve(g, c.train_queries));
    m.inputs.emplace_back("train_queries", resolve(g, c.train_queries));
    if (!c.val_queries.empty()) {
      val_q = read_id_list(resolve(g, c.val_queries));
      m.inputs.emplace_back("val_queries", resolve(g, c.val_queries));
    }
  } else {
    // Default split: training and validation folds of round 0.
    const auto round = kfold_split(data.query_ids, c.folds, c.fold_seed).round(0);
    train_q = round.train;
    val_q = round.validation;
  }
  const auto mc = c.train.model_config(c.model);
  const auto tc = c.train.train_config();
  m.seeds = {{"model", mc.seed}, {"train", tc.seed}, {"folds", c.fold_seed}};
  FeatureCache cache(data, mc);
  auto result = nn::train(mc, train_q, val_q, cache, data.qrels, tc);
  const auto ckpt = out_dir / "model.json";
  nn::save_checkpoint(ckpt, result.model, tc);
  m.outputs.push_back(ckpt);
  const auto log_path = out_dir / "train_log.csv";
  {
    auto f = open_out(log_path);
    f << "system,round,epoch,loss,train_map,val_map,selected\n";
    write_train_log(f, mc.name, 0, result.log, result.best_epoch);
  }
  m.outputs.push_back(log_path);
  os << mc.name << ": selected epoch " << result.best_epoch << " of " << result.log.size() << '\n';
}

struct RerankCmd {
  DataFlags data;
  std::string checkpoint, query_list, out;
};

void run_rerank(const Globals& g, const RerankCmd& c, Manifest& m, std::ostream& os) {
  const fs::path out_dir(c.out);
  fs::create_directories(out_dir);
  c.data.record(g, m);
  m.inputs.emplace_back("checkpoint", resolve(g, c.checkpoint));
  const auto data = load_experiment(c.data.paths(g), c.data.options());
  auto cp = nn::load_checkpoint(resolve(g, c.checkpoint));
  std::vector<std::string> ids = data.query_ids;
  if (!c.query_list.empty()) {
    ids = read_id_list(resolve(g, c.query_list));
    m.inputs.emplace_back("query_list", resolve(g, c.query_list));
  }
  FeatureCache cache(data, cp.model.config());
  std::vector<ScoredList> runs;
  for (const auto& q : ids) runs.push_back(nn::rerank(cp.model, q, cache.candidates(q), cache));
  const auto path = out_dir / (cp.model.config().name + ".run");
  write_runs(path, runs, cp.model.config().name);
  m.outputs.push_back(path);
  os << cp.model.config().name << " MAP " << number(mean_average_precision(runs, data.qrels).map) << '\n';
}

struct EvaluateCmd {
  std::string qrels, out;
  std::vector<std::string> runs, baselines;
  double alpha = 0.05;
};

void run_evaluate(const Globals& g, const EvaluateCmd& c, Manifest& m, std::ostream& os) {
  const fs::path out_dir(c.out);
  fs::create_directories(out_dir);
  const auto qrels = load_qrels(resolve(g, c.qrels));
  m.inputs.emplace_back("qrels", resolve(g, c.qrels));
  std::vector<CvResult> results;
  for (const auto& r : c.runs) {
    const auto path = resolve(g, r);
    m.inputs.emplace_back("run", path);
    auto entries = read_run(path);
    CvResult res;
    res.system = path.stem().string();
    res.test_runs = from_run(entries);
    res.map = mean_average_precision(res.test_runs, qrels);
    results.push_back(std::move(res));
  }
  const auto report = build_report(results, split_list(c.baselines), c.alpha);
  const auto csv = out_dir / "report.csv";
  {
    auto f = open_out(csv);
    report.write_csv(f);
  }
  const auto table = out_dir / "report.txt";
  {
    auto f = open_out(table);
    report.write_table(f);
  }
  report.write_table(os);
  m.outputs.push_back(csv);
  m.outputs.push_back(table);
}

struct CvCmd {
  DataFlags data;
  TrainFlags train;
  std::vector<std::string> models, baselines;
  std::size_t folds = 5;
  std::uint64_t fold_seed = 42;
  double alpha = 0.05;
  std::string out;
};

void run_cv(const Globals& g, const CvCmd& c, Manifest& m, std::ostream& os) {
  const fs::path out_dir(c.out);
  fs::create_directories(out_dir / "runs");
  c.data.record(g, m);
  const auto data = load_experiment(c.data.paths(g), c.data.options());
  const auto plan = kfold_split(data.query_ids, c.folds, c.fold_seed);
  m.seeds = {{"model", c.train.seed}, {"train", c.train.seed}, {"folds", c.fold_seed},
             {"note", "round r uses model and train seed + r"}};

  auto models = split_list(c.models);
  if (models.empty() || (models.size() == 1 && models[0] == "all")) models = nn::ModelConfig::known_names();
  auto baselines = split_list(c.baselines);
  if (baselines.size() == 1 && baselines[0] == "all") {
    baselines.clear();
    for (auto s : all_unsup_systems()) baselines.emplace_back(to_string(s));
  }

  const auto folds_path = out_dir / "folds.tsv";
  {
    auto f = open_out(folds_path);
    for (std::size_t i = 0; i < plan.size(); ++i) {
      for (const auto& q : plan.folds[i]) f << q << '\t' << i << '\n';
    }
  }
  m.outputs.push_back(folds_path);

  std::vector<CvResult> results;
  for (const auto& b : baselines) results.push_back(evaluate_unsupervised(data, parse_unsup_system(b), plan));
  const auto log_path = out_dir / "train_log.csv";
  auto log = open_out(log_path);
  log << "system,round,epoch,loss,train_map,val_map,selected\n";
  for (const auto& name : models) {
    auto res = cross_validate(c.train.model_config(name), c.train.train_config(), data, plan);
    for (const auto& r : res.rounds) write_train_log(log, res.system, r.round, r.log, r.best_epoch);
    os << res.system << " MAP " << number(res.map.map) << '\n';
    results.push_back(std::move(res));
  }
  log.close();
  m.outputs.push_back(log_path);
  for (const auto& r : results) {
    const auto path = out_dir / "runs" / (r.system + ".run");
    write_runs(path, r.test_runs, r.system);
    m.outputs.push_back(path);
  }
  const auto report = build_report(results, baselines, c.alpha);
  const auto csv = out_dir / "report.csv";
  {
    auto f = open_out(csv);
    report.write_csv(f);
  }
  const auto table = out_dir / "report.txt";
  {
    auto f = open_out(table);
    report.write_table(f);
  }
  m.outputs.push_back(csv);
  m.outputs.push_back(table);
  report.write_table(os);
}

struct AnalyzeCmd {
  std::string queries, docs, src_vec, tgt_vec, stopwords, out;
  std::size_t bins = 100;
  std::uint64_t cap = kDefaultPairCap;
  std::uint64_t seed = 42;
  std::size_t eta_points = 100;
};

void run_analyze(const Globals& g, const AnalyzeCmd& c, Manifest& m, std::ostream& os) {
  const fs::path out_dir(c.out);
  fs::create_directories(out_dir);
  StopwordSet stop;
  if (!c.stopwords.empty()) {
    stop = load_stopwords(resolve(g, c.stopwords));
    m.inputs.emplace_back("stopwords", resolve(g, c.stopwords));
  }
  const auto qs = load_queries(resolve(g, c.queries), stop);
  const auto docs = load_collection(resolve(g, c.docs), stop);
  m.inputs.emplace_back("queries", resolve(g, c.queries));
  m.inputs.emplace_back("docs", resolve(g, c.docs));
  m.inputs.emplace_back("src_vec", resolve(g, c.src_vec));
  m.inputs.emplace_back("tgt_vec", resolve(g, c.tgt_vec));
  const TermSet qterms(qs.vocabulary.terms().begin(), qs.vocabulary.terms().end());
  const TermSet dterms(docs.vocabulary.terms().begin(), docs.vocabulary.terms().end());
  auto src = std::make_shared<EmbeddingTable>(load_embeddings(resolve(g, c.src_vec), &qterms, "src"));
  auto tgt = std::make_shared<EmbeddingTable>(load_embeddings(resolve(g, c.tgt_vec), &dterms, "tgt"));
  const ClweSpace space{src, tgt};
  m.seeds = {{"sampling", c.seed}};
  const auto dist =
      pair_similarity_distribution(qs.vocabulary.terms(), docs.vocabulary.terms(), space, c.bins, c.cap, c.seed);
  const auto etas = linear_grid(-1.0, 1.0, c.eta_points);
  const auto sweep = threshold_sweep(dist, etas);
  const auto dpath = out_dir / "distribution.csv";
  {
    auto f = open_out(dpath);
    write_distribution_csv(f, dist);
  }
  const auto spath = out_dir / "sweep.csv";
  {
    auto f = open_out(spath);
    write_sweep_csv(f, sweep);
  }
  m.outputs.push_back(dpath);
  m.outputs.push_back(spath);
  os << dist.total_pairs << " pairs measured of " << dist.population << (dist.sampled ? " (sampled)" : "") << '\n';
}

struct NeighborsCmd {
  std::string vec, src_vec, tgt_vec, candidates, out;
  std::vector<std::string> terms;
  std::size_t k = 5;
  bool keep_self = false;
};

void run_neighbors(const Globals& g, const NeighborsCmd& c, Manifest& m, std::ostream& os) {
  const fs::path out_dir(c.out);
  fs::create_directories(out_dir);
  ClweSpace space;
  if (!c.vec.empty()) {
    if (!c.src_vec.empty() || !c.tgt_vec.empty()) throw Error("neighbors: give --vec or --src-vec/--tgt-vec, not both");
    space = ClweSpace::mono(std::make_shared<EmbeddingTable>(load_embeddings(resolve(g, c.vec))));
    m.inputs.emplace_back("vec", resolve(g, c.vec));
  } else {
    if (c.src_vec.empty() || c.tgt_vec.empty()) throw Error("neighbors: need --vec or both --src-vec and --tgt-vec");
    const auto terms = split_list(c.terms);
    const TermSet probe(terms.begin(), terms.end());
    space.query_side = std::make_shared<EmbeddingTable>(load_embeddings(resolve(g, c.src_vec), &probe, "src"));
    space.doc_side = std::make_shared<EmbeddingTable>(load_embeddings(resolve(g, c.tgt_vec), nullptr, "tgt"));
    m.inputs.emplace_back("src_vec", resolve(g, c.src_vec));
    m.inputs.emplace_back("tgt_vec", resolve(g, c.tgt_vec));
  }
  CandidateSet candidates = CandidateSet::all(*space.doc_side);
  if (!c.candidates.empty()) {
    candidates = CandidateSet(*space.doc_side, read_id_list(resolve(g, c.candidates)));
    m.inputs.emplace_back("candidates", resolve(g, c.candidates));
  }
  const auto terms = split_list(c.terms);
  const auto rows = neighbor_table(terms, c.k, space, candidates, !c.keep_self);
  const auto path = out_dir / "neighbors.tsv";
  {
    auto f = open_out(path);
    write_neighbor_table(f, rows);
  }
  m.outputs.push_back(path);
  write_neighbor_table(os, rows);
}

struct SynthCmd {
  SynthConfig config;
  std::string out;
};

void run_synth(const SynthCmd& c, Manifest& m, std::ostream& os) {
  const auto collection = generate_synthetic(c.config);
  const auto files = write_synthetic(c.out, collection);
  m.seeds = {{"synth", c.config.seed}};
  for (const auto& p : {files.docs, files.queries, files.qrels, files.source_vectors, files.target_vectors,
                        files.stopwords}) {
    m.outputs.push_back(p);
  }
  os << collection.docs.size() << " documents, " << collection.queries.size()
     << " queries; rotation recovery error " << number(collection.rotation_recovery_error) << '\n';
}

}  // namespace

int cli_dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-lingual retrieval experiments"};
  app.name(args.empty() ? "clir" : fs::path(args[0]).filename().string());
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "read options from a config file (sections name subcommands)");
  Globals g;
  app.add_option("--data-dir", g.data_dir, "root for relative input paths")->envname("CLIR_DATA_DIR");

  IndexCmd index;
  auto* s_index = app.add_subcommand("index", "preprocess a collection and write term statistics");
  s_index->add_option("--docs", index.docs, "documents, docId<TAB>text")->required();
  s_index->add_option("--queries", index.queries, "queries to preprocess alongside");
  s_index->add_option("--stopwords", index.stopwords, "stopword list");
  s_index->add_option("--truncate", index.truncate, "document length limit")->capture_default_str();
  s_index->add_flag("--truncate-before", index.truncate_before, "apply the limit before stopword removal");
  s_index->add_option("--out", index.out, "output directory")->required();

  RankUnsupCmd rank;
  auto* s_rank = app.add_subcommand("rank-unsup", "rank with BWE-Agg-Add/IDF and TbT-QT-QL/BM25");
  rank.data.add_to(s_rank);
  s_rank->add_option("--systems", rank.systems, "comma-separated systems or 'all'");
  s_rank->add_option("--out", rank.out, "output directory")->required();

  TrainCmd train;
  auto* s_train = app.add_subcommand("train", "train one neural model and save a checkpoint");
  train.data.add_to(s_train);
  train.train.add_to(s_train);
  s_train->add_option("--model", train.model, "model name")
      ->capture_default_str()
      ->check(CLI::IsMember(nn::ModelConfig::known_names()));
  s_train->add_option("--train-queries", train.train_queries, "training query ids");
  s_train->add_option("--val-queries", train.val_queries, "validation query ids")->needs("--train-queries");
  s_train->add_option("--folds", train.folds, "folds for the default split")->capture_default_str();
  s_train->add_option("--fold-seed", train.fold_seed, "seed for the default split")->capture_default_str();
  s_train->add_option("--out", train.out, "output directory")->required();

  RerankCmd rerank_cmd;
  auto* s_rerank = app.add_subcommand("rerank", "score candidate pools with a saved model");
  rerank_cmd.data.add_to(s_rerank);
  s_rerank->add_option("--checkpoint", rerank_cmd.checkpoint, "model.json from train")->required();
  s_rerank->add_option("--query-list", rerank_cmd.query_list, "restrict to these query ids");
  s_rerank->add_option("--out", rerank_cmd.out, "output directory")->required();

  EvaluateCmd eval;
  auto* s_eval = app.add_subcommand("evaluate", "MAP and paired t-tests over run files");
  s_eval->add_option("--qrels", eval.qrels, "TREC qrels")->required();
  s_eval->add_option("--run", eval.runs, "run file (repeatable); system name is the file stem")->required();
  s_eval->add_option("--baseline", eval.baselines, "system(s) to test against");
  s_eval->add_option("--alpha", eval.alpha, "significance level")->capture_default_str();
  s_eval->add_option("--out", eval.out, "output directory")->required();

  CvCmd cv;
  auto* s_cv = app.add_subcommand("cv", "k-fold cross-validation of neural models against baselines");
  cv.data.add_to(s_cv);
  cv.train.add_to(s_cv);
  cv.baselines = {"all"};
  s_cv->add_option("--models", cv.models, "comma-separated model names or 'all'");
  s_cv->add_option("--baselines", cv.baselines, "comma-separated unsupervised systems or 'all'")
      ->capture_default_str();
  s_cv->add_option("--folds", cv.folds, "number of folds")->capture_default_str();
  s_cv->add_option("--fold-seed", cv.fold_seed, "fold assignment seed")->capture_default_str();
  s_cv->add_option("--alpha", cv.alpha, "significance level")->capture_default_str();
  s_cv->add_option("--out", cv.out, "output directory")->required();

  AnalyzeCmd an;
  auto* s_an = app.add_subcommand("analyze-dist", "cross-lingual term-pair similarity distribution");
  s_an->add_option("--queries", an.queries, "queries")->required();
  s_an->add_option("--docs", an.docs, "documents")->required();
  s_an->add_option("--src-vec", an.src_vec, "query-language vectors")->required();
  s_an->add_option("--tgt-vec", an.tgt_vec, "document-language vectors")->required();
  s_an->add_option("--stopwords", an.stopwords, "stopword list");
  s_an->add_option("--bins", an.bins, "histogram bins")->capture_default_str();
  s_an->add_option("--cap", an.cap, "maximum pairs before sampling")->capture_default_str();
  s_an->add_option("--seed", an.seed, "sampling seed")->capture_default_str();
  s_an->add_option("--eta-points", an.eta_points, "threshold grid size over [-1, 1]")->capture_default_str();
  s_an->add_option("--out", an.out, "output directory")->required();

  NeighborsCmd nb;
  auto* s_nb = app.add_subcommand("neighbors", "top-k nearest neighbors per term");
  s_nb->add_option("--terms", nb.terms, "comma-separated probe terms")->required();
  s_nb->add_option("--k", nb.k, "neighbors per term")->capture_default_str();
  s_nb->add_option("--vec", nb.vec, "one table for both sides");
  s_nb->add_option("--src-vec", nb.src_vec, "probe-language vectors");
  s_nb->add_option("--tgt-vec", nb.tgt_vec, "candidate-language vectors");
  s_nb->add_option("--candidates", nb.candidates, "candidate terms, whitespace separated");
  s_nb->add_flag("--keep-self", nb.keep_self, "allow the probe itself as a neighbor");
  s_nb->add_option("--out", nb.out, "output directory")->required();

  SynthCmd sy;
  auto* s_sy = app.add_subcommand("synth", "generate the synthetic two-language collection");
  s_sy->add_option("--seed", sy.config.seed, "generator seed")->capture_default_str();
  s_sy->add_option("--dimension", sy.config.dimension, "vector dimension")->capture_default_str();
  s_sy->add_option("--queries", sy.config.queries, "number of queries")->capture_default_str();
  s_sy->add_option("--noise", sy.config.noise, "source-side noise sigma")->capture_default_str();
  s_sy->add_option("--synonym-spread", sy.config.synonym_spread, "target synonym spread")->capture_default_str();
  s_sy->add_option("--background-concepts", sy.config.background_concepts, "filler concepts")
      ->capture_default_str();
  s_sy->add_option("--pool-size", sy.config.pool_size, "judged documents per query")->capture_default_str();
  s_sy->add_option("--out", sy.out, "output directory")->required();

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << app.get_name() << ": " << e.what() << "\n\n" << app.help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    Manifest m = start_manifest(sub, args);
    fs::path out_dir;
    if (sub == s_index) {
      run_index(g, index, m, out);
      out_dir = index.out;
    } else if (sub == s_rank) {
      run_rank_unsup(g, rank, m, out);
      out_dir = rank.out;
    } else if (sub == s_train) {
      run_train(g, train, m, out);
      out_dir = train.out;
    } else if (sub == s_rerank) {
      run_rerank(g, rerank_cmd, m, out);
      out_dir = rerank_cmd.out;
    } else if (sub == s_eval) {
      run_evaluate(g, eval, m, out);
      out_dir = eval.out;
    } else if (sub == s_cv) {
      run_cv(g, cv, m, out);
      out_dir = cv.out;
    } else if (sub == s_an) {
      run_analyze(g, an, m, out);
      out_dir = an.out;
    } else if (sub == s_nb) {
      run_neighbors(g, nb, m, out);
      out_dir = nb.out;
    } else if (sub == s_sy) {
      run_synth(sy, m, out);
      out_dir = sy.out;
    }
    finish(out_dir, m, out);
  } catch (const std::exception& e) {
    err << app.get_name() << ": error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace clir
