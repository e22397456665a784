#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clir/clwe.hpp"

namespace clir {

struct SimilarityDistribution {
  std::vector<double> bin_edges;  // bins + 1 edges over [-1, 1]
  std::vector<double> density;    // count / (total * width)
  std::uint64_t total_pairs = 0;  // pairs actually measured
  std::uint64_t population = 0;   // embeddable query terms x document terms
  bool sampled = false;
  std::vector<double> similarities;  // every measured cosine, ascending

  double bin_width() const { return bin_edges.size() < 2 ? 0.0 : bin_edges[1] - bin_edges[0]; }
};

inline constexpr std::uint64_t kDefaultPairCap = 10'000'000;

/// Cosines between unique embeddable query terms (query side of the space)
/// and unique embeddable document terms (document side). When the cross
/// product exceeds `cap`, `cap` pairs are drawn uniformly with replacement
/// from a generator seeded with `seed`.
SimilarityDistribution pair_similarity_distribution(std::span<const std::string> query_terms,
                                                    std::span<const std::string> doc_terms, const ClweSpace& space,
                                                    std::size_t bins = 100,
                                                    std::optional<std::uint64_t> cap = kDefaultPairCap,
                                                    std::uint64_t seed = 42);

struct ThresholdSweep {
  std::vector<double> etas;
  std::vector<double> fraction_above;
  std::optional<std::vector<double>> map_at_eta;
};

/// Share of measured pairs with similarity >= eta, read from the unbinned values.
ThresholdSweep threshold_sweep(const SimilarityDistribution& distribution, std::span<const double> etas);

/// `count` evenly spaced values from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, std::size_t count);

struct NeighborRow {
  std::string term;
  bool oov = false;
  std::vector<Neighbor> neighbors;
};

/// Top-k neighbors of each term among `candidates` (rows of space.doc_side).
/// With exclude_self, a candidate row holding the probe's own vector in a
/// shared table is skipped.
std::vector<NeighborRow> neighbor_table(std::span<const std::string> terms, std::size_t k, const ClweSpace& space,
                                        const CandidateSet& candidates, bool exclude_self = true);

/// `term<TAB>rank<TAB>neighbor<TAB>similarity` with similarities at 3 decimals; OOV rows print `OOV`.
void write_neighbor_table(std::ostream& out, std::span<const NeighborRow> rows);
/// `bin_lo,bin_hi,density`
void write_distribution_csv(std::ostream& out, const SimilarityDistribution& distribution);
/// `eta,fraction_above[,map]`
void write_sweep_csv(std::ostream& out, const ThresholdSweep& sweep);

}  // namespace clir
