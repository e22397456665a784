#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "clir/analysis.hpp"
#include "support.hpp"

using namespace clir;
using clir::testing::random_table;

namespace {

std::vector<std::string> names(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

double integral(const SimilarityDistribution& d) {
  double s = 0.0;
  for (double v : d.density) s += v * d.bin_width();
  return s;
}

}  // namespace

TEST(Distribution, MonoLingualSingleTermAllMassInLastBin) {
  auto t = random_table(3, 5, 1);
  const std::vector<std::string> one{"w1"};
  auto d = pair_similarity_distribution(one, one, ClweSpace::mono(t));
  ASSERT_EQ(d.density.size(), 100u);
  ASSERT_EQ(d.bin_edges.size(), 101u);
  EXPECT_EQ(d.total_pairs, 1u);
  EXPECT_GT(d.density[99], 0.0);
  for (std::size_t k = 0; k < 99; ++k) EXPECT_EQ(d.density[k], 0.0);
  EXPECT_NEAR(integral(d), 1.0, 1e-9);
}

TEST(Distribution, TwoByTwoMatchesPairEnumeration) {
  auto src = std::make_shared<EmbeddingTable>(2);
  auto tgt = std::make_shared<EmbeddingTable>(2);
  const std::vector<float> a{1, 0}, b{0, 1}, c{1, 1}, d{-1, 0};
  src->add("a", a);
  src->add("b", b);
  tgt->add("c", c);
  tgt->add("d", d);
  // cosines: a.c = 0.7071, a.d = -1, b.c = 0.7071, b.d = 0
  const std::vector<std::string> q{"b", "a", "zz"}, docs{"d", "c", "c"};
  auto dist = pair_similarity_distribution(q, docs, ClweSpace{src, tgt}, 4);
  EXPECT_EQ(dist.total_pairs, 4u);
  EXPECT_EQ(dist.population, 4u);
  // bins [-1,-.5) [-.5,0) [0,.5) [.5,1]; width 0.5, so density = count / 2
  EXPECT_EQ(dist.density, (std::vector<double>{0.5, 0.0, 0.5, 1.0}));
  EXPECT_NEAR(dist.similarities[0], -1.0, 1e-12);
  EXPECT_NEAR(dist.similarities[3], 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Distribution, NoEmbeddablePairsIsError) {
  auto t = random_table(3, 5, 1);
  const std::vector<std::string> none{"zz"}, some{"w0"};
  EXPECT_THROW(pair_similarity_distribution(none, some, ClweSpace::mono(t)), Error);
}

TEST(Distribution, IntegratesToOneAndOrderIndependent) {
  auto src = random_table(50, 8, 3, "s");
  auto tgt = random_table(50, 8, 4, "t");
  auto q = names("s", 50), d = names("t", 50);
  auto a = pair_similarity_distribution(q, d, ClweSpace{src, tgt});
  std::mt19937_64 rng(1);
  std::shuffle(q.begin(), q.end(), rng);
  std::shuffle(d.begin(), d.end(), rng);
  auto b = pair_similarity_distribution(q, d, ClweSpace{src, tgt});
  EXPECT_EQ(a.density, b.density);
  EXPECT_EQ(a.similarities, b.similarities);
  EXPECT_NEAR(integral(a), 1.0, 1e-9);
  for (double v : a.density) EXPECT_GE(v, 0.0);
}

TEST(Distribution, CappedSamplingDeterministic) {
  auto src = random_table(40, 6, 5, "s");
  auto tgt = random_table(40, 6, 6, "t");
  const auto q = names("s", 40), d = names("t", 40);
  auto a = pair_similarity_distribution(q, d, ClweSpace{src, tgt}, 100, 500, 9);
  auto b = pair_similarity_distribution(q, d, ClweSpace{src, tgt}, 100, 500, 9);
  auto c = pair_similarity_distribution(q, d, ClweSpace{src, tgt}, 100, 500, 10);
  EXPECT_TRUE(a.sampled);
  EXPECT_EQ(a.total_pairs, 500u);
  EXPECT_EQ(a.population, 1600u);
  EXPECT_EQ(a.similarities, b.similarities);
  EXPECT_NE(a.similarities, c.similarities);
  EXPECT_NEAR(integral(a), 1.0, 1e-9);
}

TEST(Sweep, BruteForceComplementaryCdf) {
  auto src = random_table(50, 8, 7, "s");
  auto tgt = random_table(50, 8, 8, "t");
  const auto q = names("s", 50), d = names("t", 50);
  auto dist = pair_similarity_distribution(q, d, ClweSpace{src, tgt});
  const auto etas = linear_grid(-1.0, 1.0, 100);
  auto sweep = threshold_sweep(dist, etas);
  ASSERT_EQ(sweep.fraction_above.size(), 100u);
  EXPECT_EQ(sweep.fraction_above.front(), 1.0);
  for (std::size_t i = 0; i < etas.size(); ++i) {
    std::size_t count = 0;
    for (const auto& qt : q) {
      for (const auto& dt : d) {
        double dot = 0.0;
        const auto u = src->unit(*src->row(qt));
        const auto v = tgt->unit(*tgt->row(dt));
        for (std::size_t k = 0; k < 8; ++k) dot += u[k] * v[k];
        count += std::clamp(dot, -1.0, 1.0) >= etas[i];
      }
    }
    EXPECT_EQ(sweep.fraction_above[i], static_cast<double>(count) / 2500.0) << etas[i];
    if (i > 0) EXPECT_LE(sweep.fraction_above[i], sweep.fraction_above[i - 1]);
  }
}

TEST(Sweep, AboveMaximumIsZeroAndUnsortedIsError) {
  auto t = random_table(10, 4, 2);
  const auto terms = names("w", 10);
  auto dist = pair_similarity_distribution(terms, terms, ClweSpace::mono(t));
  const std::vector<double> high{1.0 + 1e-9};
  EXPECT_EQ(threshold_sweep(dist, high).fraction_above[0], 0.0);
  const std::vector<double> unsorted{0.5, 0.1};
  EXPECT_THROW(threshold_sweep(dist, unsorted), Error);
}

TEST(LinearGrid, EndpointsAndCount) {
  auto g = linear_grid(-1.0, 1.0, 100);
  ASSERT_EQ(g.size(), 100u);
  EXPECT_EQ(g.front(), -1.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

TEST(NeighborTable, MonoExcludesSelfAndReturnsAllWhenKLarge) {
  auto t = random_table(6, 4, 3);
  const std::vector<std::string> probes{"w0", "missing"};
  auto rows = neighbor_table(probes, 50, ClweSpace::mono(t), CandidateSet::all(*t));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].neighbors.size(), 5u);
  for (const auto& n : rows[0].neighbors) EXPECT_NE(n.term, "w0");
  EXPECT_TRUE(rows[1].oov);
  auto with_self = neighbor_table(probes, 50, ClweSpace::mono(t), CandidateSet::all(*t), false);
  EXPECT_EQ(with_self[0].neighbors.size(), 6u);
  EXPECT_EQ(with_self[0].neighbors[0].term, "w0");
}

TEST(NeighborTable, WriterFormatsThreeDecimals) {
  std::vector<NeighborRow> rows{{"telephone", false, {{"phone", 0.81849}, {"telephones", 0.76051}}},
                                {"zzz", true, {}}};
  std::ostringstream out;
  write_neighbor_table(out, rows);
  EXPECT_EQ(out.str(), "telephone\t1\tphone\t0.818\ntelephone\t2\ttelephones\t0.761\nzzz\t-\tOOV\t-\n");
}

TEST(CsvWriters, Headers) {
  auto t = random_table(4, 3, 2);
  const auto terms = names("w", 4);
  auto dist = pair_similarity_distribution(terms, terms, ClweSpace::mono(t), 4);
  std::ostringstream d;
  write_distribution_csv(d, dist);
  EXPECT_EQ(d.str().substr(0, 21), "bin_lo,bin_hi,density");
  ThresholdSweep s{{0.0, 0.5}, {1.0, 0.25}, std::vector<double>{0.4, 0.3}};
  std::ostringstream o;
  write_sweep_csv(o, s);
  EXPECT_EQ(o.str(), "eta,fraction_above,map\n0,1,0.4\n0.5,0.25,0.3\n");
}
