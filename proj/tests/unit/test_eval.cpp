#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "clir/eval.hpp"
#include "support.hpp"

using namespace clir;
using clir::testing::TempDir;

namespace {

// Position-based formulation: for each relevant document, precision at its
// position, then the mean over the whole relevant set.
double ap_oracle(const std::vector<std::string>& ranked, const std::unordered_set<std::string>& rel) {
  double total = 0.0;
  for (const auto& r : rel) {
    auto it = std::find(ranked.begin(), ranked.end(), r);
    if (it == ranked.end()) continue;
    const auto pos = static_cast<std::size_t>(it - ranked.begin()) + 1;
    std::size_t above = 0;
    for (std::size_t i = 0; i < pos; ++i) above += rel.count(ranked[i]);
    total += static_cast<double>(above) / static_cast<double>(pos);
  }
  return total / static_cast<double>(rel.size());
}

// Two-tailed Student-t p value by Simpson integration of the density.
double t_p_value_by_quadrature(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int n = 200000;
  const double h = std::abs(t) / n;
  double s = pdf(0) + pdf(std::abs(t));
  for (int i = 1; i < n; ++i) s += pdf(i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3.0;
}

}  // namespace

TEST(AveragePrecision, ClosedForms) {
  const std::vector<std::string> r{"R"};
  EXPECT_EQ(average_precision(r, {"R"}), 1.0);
  const std::vector<std::string> rnr{"R1", "N", "R2"};
  EXPECT_DOUBLE_EQ(*average_precision(rnr, {"R1", "R2"}), (1.0 + 2.0 / 3.0) / 2.0);
  EXPECT_FALSE(average_precision(rnr, {}).has_value());
  // a relevant document missing from the ranking is a miss
  EXPECT_DOUBLE_EQ(*average_precision(r, {"R", "gone"}), 0.5);
}

TEST(AveragePrecision, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<std::string> ranked;
    for (std::size_t i = 0; i < n; ++i) ranked.push_back("d" + std::to_string(i));
    std::shuffle(ranked.begin(), ranked.end(), rng);
    const std::size_t k = 1 + rng() % std::min<std::size_t>(8, n);
    std::unordered_set<std::string> rel;
    while (rel.size() < k) rel.insert("d" + std::to_string(rng() % (n + 2)));  // may include unranked docs
    const auto ap = average_precision(ranked, rel);
    ASSERT_TRUE(ap);
    EXPECT_NEAR(*ap, ap_oracle(ranked, rel), 1e-12);
    EXPECT_GE(*ap, 0.0);
    EXPECT_LE(*ap, 1.0);
  }
}

TEST(AveragePrecision, OneIffRelevantFirst) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> ranked;
    for (int i = 0; i < 8; ++i) ranked.push_back("d" + std::to_string(i));
    std::shuffle(ranked.begin(), ranked.end(), rng);
    std::unordered_set<std::string> rel{ranked[rng() % 8], ranked[rng() % 8]};
    std::size_t last_rel = 0, first_non = ranked.size();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (rel.count(ranked[i])) last_rel = i;
      else first_non = std::min(first_non, i);
    }
    EXPECT_EQ(*average_precision(ranked, rel) == 1.0, last_rel < first_non);
  }
}

TEST(MeanAveragePrecision, ExclusionAndOrderInvariance) {
  Qrels q;
  q.add("a", "d1", 1);
  q.add("a", "d2", 0);
  q.add("b", "d1", 0);
  q.add("c", "d2", 1);
  std::vector<ScoredList> runs{make_scored_list("a", {{"d1", 2.0}, {"d2", 1.0}}),
                               make_scored_list("b", {{"d1", 1.0}}),
                               make_scored_list("c", {{"d1", 2.0}, {"d2", 1.0}})};
  auto m = mean_average_precision(runs, q);
  EXPECT_EQ(m.excluded, std::vector<std::string>{"b"});
  EXPECT_DOUBLE_EQ(m.map, 0.75);
  std::reverse(runs.begin(), runs.end());
  EXPECT_DOUBLE_EQ(mean_average_precision(runs, q).map, 0.75);
}

TEST(RunFile, RoundTripAndEmpty) {
  std::vector<ScoredList> lists{make_scored_list("q1", {{"a", 0.1 + 0.2}, {"b", -1e-300}, {"c", -7.25}}),
                                make_scored_list("q2", {{"z", 3.0}})};
  auto entries = to_run(lists, "tag");
  std::stringstream s;
  write_run(s, entries);
  EXPECT_EQ(read_run(s), entries);
  std::stringstream empty;
  EXPECT_TRUE(read_run(empty).empty());
  auto back = from_run(entries);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].entries, lists[0].entries);
}

TEST(RunFile, FileRoundTrip) {
  TempDir dir;
  auto entries = to_run(std::vector<ScoredList>{make_scored_list("q", {{"x", 1.5}, {"y", 1.5}})}, "t");
  write_run(dir / "r.run", entries);
  EXPECT_EQ(read_run(dir / "r.run"), entries);
}

TEST(RunFile, ValidationErrors) {
  std::stringstream inverted("q Q0 a 1 1.0 t\nq Q0 b 2 2.0 t\n");
  EXPECT_THROW(read_run(inverted), ParseError);
  std::stringstream gap("q Q0 a 1 1.0 t\nq Q0 b 3 0.5 t\n");
  EXPECT_THROW(read_run(gap), ParseError);
  std::stringstream malformed("q Q0 a 1 1.0 t\nq Q0 b 2\n");
  try {
    read_run(malformed);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Folds, PartitionAndRotation) {
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("q" + std::to_string(i));
  auto plan = kfold_split(ids, 5, 7);
  ASSERT_EQ(plan.size(), 5u);
  std::multiset<std::string> all, tests, vals;
  for (const auto& f : plan.folds) {
    EXPECT_EQ(f.size(), 2u);
    all.insert(f.begin(), f.end());
  }
  EXPECT_EQ(all, std::multiset<std::string>(ids.begin(), ids.end()));
  for (std::size_t r = 0; r < 5; ++r) {
    auto round = plan.round(r);
    EXPECT_EQ(round.test, plan.folds[r]);
    EXPECT_EQ(round.validation, plan.folds[(r + 1) % 5]);
    EXPECT_EQ(round.train.size(), 6u);
    tests.insert(round.test.begin(), round.test.end());
    vals.insert(round.validation.begin(), round.validation.end());
    for (const auto& t : round.train) {
      EXPECT_EQ(std::count(round.test.begin(), round.test.end(), t), 0);
      EXPECT_EQ(std::count(round.validation.begin(), round.validation.end(), t), 0);
    }
  }
  EXPECT_EQ(tests, all);
  EXPECT_EQ(vals, all);
}

TEST(Folds, DeterministicAndErrors) {
  std::vector<std::string> ids;
  for (int i = 0; i < 23; ++i) ids.push_back("q" + std::to_string(i));
  EXPECT_EQ(kfold_split(ids, 5, 1).folds, kfold_split(ids, 5, 1).folds);
  EXPECT_NE(kfold_split(ids, 5, 1).folds, kfold_split(ids, 5, 2).folds);
  const std::vector<std::string> few{"a", "b", "c"};
  EXPECT_THROW(kfold_split(few, 5, 1), Error);
}

TEST(TTest, FrozenReferenceValues) {
  const std::vector<double> a{0.412, 0.355, 0.601, 0.228, 0.517, 0.734, 0.298, 0.450, 0.389, 0.662};
  const std::vector<double> b{0.380, 0.301, 0.555, 0.260, 0.470, 0.690, 0.240, 0.452, 0.330, 0.600};
  auto r = paired_t_test(a, b);
  EXPECT_NEAR(r.t, 3.814706323617926, 1e-6);
  EXPECT_NEAR(r.p, 0.004123249084632657, 1e-6);
  EXPECT_TRUE(r.significant);
  const std::vector<double> a2{0.1, 0.9, 0.3, 0.5, 0.7, 0.2, 0.8, 0.4, 0.6, 0.0};
  const std::vector<double> b2{0.15, 0.7, 0.35, 0.2, 0.75, 0.25, 0.5, 0.45, 0.3, 0.05};
  auto r2 = paired_t_test(a2, b2);
  EXPECT_NEAR(r2.t, 1.4855627054164147, 1e-6);
  EXPECT_NEAR(r2.p, 0.17155759269801515, 1e-6);
  EXPECT_FALSE(r2.significant);
}

TEST(TTest, PValueAgreesWithQuadrature) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + trial;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = g(rng) + 0.3 * trial;
      b[i] = g(rng);
    }
    auto r = paired_t_test(a, b);
    EXPECT_NEAR(r.p, t_p_value_by_quadrature(r.t, static_cast<double>(n - 1)), 1e-6);
  }
}

TEST(TTest, DegenerateConventionsAndAntisymmetry) {
  const std::vector<double> a{0.2, 0.4, 0.6};
  auto same = paired_t_test(a, a);
  EXPECT_EQ(same.p, 1.0);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_FALSE(same.significant);
  const std::vector<double> shifted{0.3, 0.5, 0.7};
  auto constant = paired_t_test(shifted, a);
  EXPECT_TRUE(std::isinf(constant.t));
  EXPECT_EQ(constant.p, 0.0);
  EXPECT_TRUE(constant.significant);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(6), y(6);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    auto xy = paired_t_test(x, y), yx = paired_t_test(y, x);
    EXPECT_NEAR(xy.t, -yx.t, 1e-12);
    EXPECT_NEAR(xy.p, yx.p, 1e-12);
    EXPECT_GE(xy.p, 0.0);
    EXPECT_LE(xy.p, 1.0);
  }
  EXPECT_THROW(paired_t_test(std::vector<double>{1.0}, std::vector<double>{0.0}), Error);
}

TEST(Report, CompareAndCsv) {
  EvalReport report;
  SystemResult a{"A", {}}, b{"B", {}};
  a.map.per_query = {{"q1", 0.9}, {"q2", 0.8}, {"q3", 0.7}};
  b.map.per_query = {{"q1", 0.5}, {"q2", 0.6}, {"q4", 0.1}};
  a.map.map = 0.8;
  b.map.map = 0.4;
  report.systems = {a, b};
  auto c = report.compare("A", "B");
  EXPECT_EQ(c.queries, 2u);
  EXPECT_THROW(report.compare("A", "nope"), Error);
  report.comparisons.push_back(c);
  std::ostringstream csv;
  report.write_csv(csv);
  EXPECT_NE(csv.str().find("A,q1,0.9"), std::string::npos);
  EXPECT_NE(csv.str().find("A,MAP,0.8"), std::string::npos);
  EXPECT_NE(csv.str().find("compare:A:B,t,"), std::string::npos);
}
