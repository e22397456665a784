#include "clir/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <ostream>
#include <random>
#include <set>

#include "clir/error.hpp"
#include "clir/interact.hpp"

namespace clir {

namespace {

std::vector<std::size_t> embedded_rows(std::span<const std::string> terms, const EmbeddingTable& table) {
  std::set<std::string> unique(terms.begin(), terms.end());
  std::vector<std::size_t> rows;
  for (const auto& t : unique) {
    if (auto r = table.row(t)) rows.push_back(*r);
  }
  return rows;
}

double unit_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return std::clamp(s, -1.0, 1.0);
}

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, ptr);
}

}  // namespace

SimilarityDistribution pair_similarity_distribution(std::span<const std::string> query_terms,
                                                    std::span<const std::string> doc_terms, const ClweSpace& space,
                                                    std::size_t bins, std::optional<std::uint64_t> cap,
                                                    std::uint64_t seed) {
  if (bins < 2) throw Error("pair_similarity_distribution: need at least 2 bins");
  if (cap && *cap == 0) throw Error("pair_similarity_distribution: cap must be positive");
  const auto& qt = *space.query_side;
  const auto& dt = *space.doc_side;
  if (qt.dimension() != dt.dimension()) throw Error("pair_similarity_distribution: dimension mismatch");
  const auto qrows = embedded_rows(query_terms, qt);
  const auto drows = embedded_rows(doc_terms, dt);
  if (qrows.empty() || drows.empty()) throw Error("pair_similarity_distribution: no embeddable pairs");

  SimilarityDistribution out;
  out.population = static_cast<std::uint64_t>(qrows.size()) * drows.size();
  if (cap && out.population > *cap) {
    out.sampled = true;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_q(0, qrows.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_d(0, drows.size() - 1);
    out.similarities.reserve(*cap);
    for (std::uint64_t n = 0; n < *cap; ++n) {
      const std::size_t i = pick_q(rng);
      const std::size_t j = pick_d(rng);
      out.similarities.push_back(unit_dot(qt.unit(qrows[i]), dt.unit(drows[j])));
    }
  } else {
    out.similarities.reserve(out.population);
    for (std::size_t qr : qrows) {
      for (std::size_t dr : drows) out.similarities.push_back(unit_dot(qt.unit(qr), dt.unit(dr)));
    }
  }
  std::sort(out.similarities.begin(), out.similarities.end());
  out.total_pairs = out.similarities.size();

  out.bin_edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) out.bin_edges[k] = histogram_edge(k, bins);
  std::vector<std::uint64_t> counts(bins, 0);
  for (double s : out.similarities) ++counts[histogram_bin(s, bins)];
  out.density.resize(bins);
  const double width = 2.0 / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    out.density[k] = static_cast<double>(counts[k]) / (static_cast<double>(out.total_pairs) * width);
  }
  return out;
}

ThresholdSweep threshold_sweep(const SimilarityDistribution& distribution, std::span<const double> etas) {
  if (!std::is_sorted(etas.begin(), etas.end())) throw Error("threshold_sweep: etas must be ascending");
  ThresholdSweep out;
  out.etas.assign(etas.begin(), etas.end());
  const auto& s = distribution.similarities;
  const double n = static_cast<double>(s.size());
  for (double eta : etas) {
    const auto first = std::lower_bound(s.begin(), s.end(), eta);
    const auto above = static_cast<double>(std::distance(first, s.end()));
    out.fraction_above.push_back(s.empty() ? 0.0 : above / n);
  }
  return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

std::vector<NeighborRow> neighbor_table(std::span<const std::string> terms, std::size_t k, const ClweSpace& space,
                                        const CandidateSet& candidates, bool exclude_self) {
  std::vector<NeighborRow> out;
  const bool shared = space.query_side == space.doc_side;
  for (const auto& term : terms) {
    NeighborRow row{term, false, {}};
    auto r = space.query_side->row(term);
    if (!r) {
      row.oov = true;
    } else {
      std::optional<std::size_t> skip;
      if (exclude_self && shared) skip = *r;
      row.neighbors = nearest_neighbors(space.query_side->unit(*r), k, *space.doc_side, candidates, skip);
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_neighbor_table(std::ostream& out, std::span<const NeighborRow> rows) {
  for (const auto& row : rows) {
    if (row.oov) {
      out << row.term << "\t-\tOOV\t-\n";
      continue;
    }
    std::size_t rank = 1;
    for (const auto& n : row.neighbors) {
      char sim[32];
      std::snprintf(sim, sizeof(sim), "%.3f", n.similarity);
      out << row.term << '\t' << rank++ << '\t' << n.term << '\t' << sim << '\n';
    }
  }
}

void write_distribution_csv(std::ostream& out, const SimilarityDistribution& distribution) {
  out << "bin_lo,bin_hi,density\n";
  for (std::size_t k = 0; k < distribution.density.size(); ++k) {
    out << number(distribution.bin_edges[k]) << ',' << number(distribution.bin_edges[k + 1]) << ','
        << number(distribution.density[k]) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const ThresholdSweep& sweep) {
  const bool with_map = sweep.map_at_eta.has_value();
  out << (with_map ? "eta,fraction_above,map\n" : "eta,fraction_above\n");
  for (std::size_t i = 0; i < sweep.etas.size(); ++i) {
    out << number(sweep.etas[i]) << ',' << number(sweep.fraction_above[i]);
    if (with_map) out << ',' << number(sweep.map_at_eta->at(i));
    out << '\n';
  }
}

}  // namespace clir
