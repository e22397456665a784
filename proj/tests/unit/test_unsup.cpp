#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "clir/unsup.hpp"
#include "support.hpp"

using namespace clir;
using clir::testing::random_table;

namespace {

struct Toy {
  Collection collection;
  Vocabulary vocab;
  CollectionStats stats;
};

Toy make_toy(const std::vector<std::pair<std::string, std::string>>& docs) {
  Toy t;
  for (const auto& [id, text] : docs) {
    Document d{id, {}};
    std::istringstream in(text);
    std::string w;
    while (in >> w) d.tokens.push_back(t.vocab.intern(w));
    t.collection.add(std::move(d));
  }
  t.stats = compute_stats(t.collection, t.vocab.size());
  return t;
}

// Three-document corpus with frozen scores from an independent script.
Toy fruit() {
  return make_toy({{"d1", "apple banana apple"}, {"d2", "banana cherry"}, {"d3", "apple cherry cherry date"}});
}

}  // namespace

TEST(BweAggEmbed, SingleTokenIsItsVector) {
  EmbeddingTable t(2);
  const std::vector<float> v{0.25f, -4.0f};
  t.add("x", v);
  Vocabulary vocab;
  const TermId x = vocab.intern("x");
  const auto rows = map_rows(t, vocab);
  const std::vector<TermId> tokens{x};
  auto e = bwe_agg_embed(tokens, rows, t, AggWeighting::kUniform, nullptr);
  ASSERT_TRUE(e);
  EXPECT_DOUBLE_EQ((*e)[0], 0.25);
  EXPECT_DOUBLE_EQ((*e)[1], -4.0);
}

TEST(BweAggEmbed, UniformAndIdfMeans) {
  EmbeddingTable t(2);
  const std::vector<float> e1{1, 0}, e2{0, 1};
  t.add("a", e1);
  t.add("b", e2);
  Vocabulary vocab;
  const TermId a = vocab.intern("a"), b = vocab.intern("b"), oov = vocab.intern("zzz");
  const auto rows = map_rows(t, vocab);
  const std::vector<TermId> tokens{a, b, oov};
  auto u = bwe_agg_embed(tokens, rows, t, AggWeighting::kUniform, nullptr);
  ASSERT_TRUE(u);
  EXPECT_DOUBLE_EQ((*u)[0], 0.5);
  EXPECT_DOUBLE_EQ((*u)[1], 0.5);
  CollectionStats stats;
  stats.idf = {3.0, 1.0, 7.0};
  auto w = bwe_agg_embed(tokens, rows, t, AggWeighting::kIdf, &stats);
  ASSERT_TRUE(w);
  EXPECT_DOUBLE_EQ((*w)[0], 0.75);
  EXPECT_DOUBLE_EQ((*w)[1], 0.25);
  const std::vector<TermId> only_oov{oov};
  EXPECT_FALSE(bwe_agg_embed(only_oov, rows, t, AggWeighting::kUniform, nullptr));
}

TEST(BweAggRank, HandBuiltOracleAndOovLast) {
  auto toy = make_toy({{"d1", "a a"}, {"d2", "b"}, {"d3", "a b b"}, {"d4", "zz"}, {"d5", "c"}});
  auto table = std::make_shared<EmbeddingTable>(2);
  const std::vector<float> va{1, 0}, vb{0, 1}, vc{-1, 0.2f};
  table->add("a", va);
  table->add("b", vb);
  table->add("c", vc);
  const auto rows = map_rows(*table, toy.vocab);
  Query q{"q", {*toy.vocab.find("a")}};
  auto ranked = bwe_agg_rank(q, rows, toy.collection, rows, ClweSpace::mono(table), AggWeighting::kUniform, toy.stats);
  ASSERT_EQ(ranked.entries.size(), 5u);
  // doc embeddings: d1 (1,0) d2 (0,1) d3 (1/3,2/3) d5 (-1,0.2); query (1,0)
  EXPECT_EQ(ranked.entries[0].doc_id, "d1");
  EXPECT_DOUBLE_EQ(ranked.entries[0].score, 1.0);
  EXPECT_EQ(ranked.entries[1].doc_id, "d3");
  EXPECT_NEAR(ranked.entries[1].score, 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_EQ(ranked.entries[2].doc_id, "d2");
  EXPECT_EQ(ranked.entries[3].doc_id, "d5");
  EXPECT_NEAR(ranked.entries[3].score, -1.0 / std::sqrt(1.04), 1e-6);
  EXPECT_EQ(ranked.entries[4].doc_id, "d4");
  EXPECT_EQ(ranked.entries[4].score, -std::numeric_limits<double>::infinity());
}

TEST(BweAggRank, ScoresBoundedAndScaleInvariant) {
  std::mt19937_64 rng(4);
  auto table = random_table(40, 5, 8);
  std::vector<std::pair<std::string, std::string>> docs;
  std::uniform_int_distribution<int> pick(0, 39), len(1, 8);
  for (int d = 0; d < 25; ++d) {
    std::string text;
    for (int i = len(rng); i > 0; --i) text += "w" + std::to_string(pick(rng)) + " ";
    docs.emplace_back("d" + std::to_string(d), text);
  }
  auto toy = make_toy(docs);
  auto scaled = std::make_shared<EmbeddingTable>(5);
  for (std::size_t r = 0; r < table->size(); ++r) {
    std::vector<float> v(table->raw(r).begin(), table->raw(r).end());
    for (auto& x : v) x *= 3.5f;
    scaled->add(table->term(r), v);
  }
  const auto rows = map_rows(*table, toy.vocab);
  for (int qn = 0; qn < 10; ++qn) {
    Query q{"q", {toy.collection.doc(qn).tokens.front()}};
    for (auto w : {AggWeighting::kUniform, AggWeighting::kIdf}) {
      auto base = bwe_agg_rank(q, rows, toy.collection, rows, ClweSpace::mono(table), w, toy.stats);
      auto other = bwe_agg_rank(q, rows, toy.collection, rows, ClweSpace{table, scaled}, w, toy.stats);
      for (std::size_t i = 0; i < base.entries.size(); ++i) {
        EXPECT_GE(base.entries[i].score, -1.0);
        EXPECT_LE(base.entries[i].score, 1.0);
        EXPECT_EQ(base.entries[i].doc_id, other.entries[i].doc_id);
      }
    }
  }
}

TEST(Translate, MonoLingualMapsToSelfAndOovCarried) {
  auto table = random_table(30, 7, 3);
  const auto space = ClweSpace::mono(table);
  const std::vector<std::string> terms{"w3", "w17", "zzzqqq"};
  auto tq = tbtqt_translate("q1", terms, space, CandidateSet::all(*table));
  ASSERT_EQ(tq.translated.size(), 3u);
  EXPECT_EQ(tq.translated[0], "w3");
  EXPECT_EQ(tq.translated[1], "w17");
  EXPECT_EQ(tq.translated[2], "zzzqqq");
  EXPECT_FALSE(tq.oov[0]);
  EXPECT_TRUE(tq.oov[2]);
  EXPECT_NEAR(tq.similarity[0], 1.0, 1e-12);
}

TEST(Translate, ReturnsArgmaxCandidate) {
  auto src = random_table(40, 6, 31, "s");
  auto tgt = random_table(120, 6, 32, "t");
  const ClweSpace space{src, tgt};
  std::vector<std::string> terms;
  for (std::size_t r = 0; r < src->size(); ++r) terms.push_back(src->term(r));
  auto tq = tbtqt_translate("q", terms, space, CandidateSet::all(*tgt));
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double best = cosine(src->raw(i), tgt->raw(*tgt->row(tq.translated[i])));
    for (std::size_t c = 0; c < tgt->size(); ++c) EXPECT_GE(best + 1e-12, cosine(src->raw(i), tgt->raw(c)));
  }
}

TEST(Bm25, FrozenToyScores) {
  auto toy = fruit();
  const std::vector<std::string> q{"apple", "cherry", "zzz"};
  const auto terms = resolve_terms(q, toy.vocab);
  EXPECT_NEAR(bm25_score(terms, toy.collection.doc(0), toy.stats), 0.6462549902128865, 1e-9);
  EXPECT_NEAR(bm25_score(terms, toy.collection.doc(1), toy.stats), 0.5442147286003255, 1e-9);
  EXPECT_NEAR(bm25_score(terms, toy.collection.doc(2), toy.stats), 1.0044648990737437, 1e-9);
}

TEST(Bm25, ClosedFormAndZero) {
  auto toy = fruit();
  const std::vector<std::string> banana{"banana"};
  const auto t = resolve_terms(banana, toy.vocab);
  // d1 has tf(banana)=1 and length 3 = avgdl
  EXPECT_NEAR(bm25_score(t, toy.collection.doc(0), toy.stats), 0.47000362924573563, 1e-12);
  EXPECT_NEAR(toy.stats.idf_of(*t[0]), 0.47000362924573563, 1e-12);
  const std::vector<std::string> none{"date"};
  EXPECT_DOUBLE_EQ(bm25_score(resolve_terms(none, toy.vocab), toy.collection.doc(0), toy.stats), 0.0);
}

TEST(QueryLikelihood, FrozenToyScores) {
  auto toy = fruit();
  const std::vector<std::string> q{"apple", "cherry", "zzz"};
  const auto terms = resolve_terms(q, toy.vocab);
  EXPECT_NEAR(ql_score(terms, toy.collection.doc(0), toy.stats, 1000.0), -2.197233523618269, 1e-9);
  EXPECT_NEAR(ql_score(terms, toy.collection.doc(1), toy.stats, 1000.0), -2.1982250736817672, 1e-9);
  EXPECT_NEAR(ql_score(terms, toy.collection.doc(2), toy.stats, 1000.0), -2.196231039217948, 1e-9);
}

TEST(QueryLikelihood, AbsentTermContributesNothing) {
  auto toy = fruit();
  const std::vector<std::string> with{"apple", "zzz"}, without{"apple"};
  for (std::size_t d = 0; d < 3; ++d) {
    EXPECT_DOUBLE_EQ(ql_score(resolve_terms(with, toy.vocab), toy.collection.doc(d), toy.stats),
                     ql_score(resolve_terms(without, toy.vocab), toy.collection.doc(d), toy.stats));
  }
}

TEST(Scoring, MonotoneInTermFrequency) {
  // Documents of equal length with increasing tf of "x"; filler keeps length fixed.
  std::vector<std::pair<std::string, std::string>> docs;
  for (int tf = 0; tf <= 6; ++tf) {
    std::string text;
    for (int i = 0; i < 6; ++i) text += (i < tf ? "x " : "f" + std::to_string(tf) + std::to_string(i) + " ");
    docs.emplace_back("d" + std::to_string(tf), text);
  }
  auto toy = make_toy(docs);
  const std::vector<std::string> q{"x"};
  const auto terms = resolve_terms(q, toy.vocab);
  for (std::size_t d = 0; d + 1 < docs.size(); ++d) {
    EXPECT_LE(bm25_score(terms, toy.collection.doc(d), toy.stats),
              bm25_score(terms, toy.collection.doc(d + 1), toy.stats));
    EXPECT_LT(ql_score(terms, toy.collection.doc(d), toy.stats), ql_score(terms, toy.collection.doc(d + 1), toy.stats));
  }
}

TEST(ScoredListOrder, TiesByDocIdAndDeterministic) {
  auto toy = make_toy({{"c", "p q"}, {"a", "p q"}, {"b", "q q"}});
  const std::vector<std::string> q{"p"};
  const auto terms = resolve_terms(q, toy.vocab);
  const auto pool = full_pool(toy.collection);
  auto r1 = rank_bm25("q", terms, toy.collection, pool, toy.stats);
  auto r2 = rank_bm25("q", terms, toy.collection, pool, toy.stats);
  ASSERT_EQ(r1.entries, r2.entries);
  EXPECT_EQ(r1.entries[0].doc_id, "a");
  EXPECT_EQ(r1.entries[1].doc_id, "c");
  EXPECT_EQ(r1.entries[2].doc_id, "b");
}
