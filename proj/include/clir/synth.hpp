#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace clir {

/// Two pseudo-languages over shared latent concept vectors. Every concept has
/// one source term and `synonyms` target terms. A document is relevant to the
/// query whose concepts it mentions; consecutive queries share one concept, so
/// the relevant documents of a query's neighbors act as hard negatives.
struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t dimension = 64;
  std::size_t queries = 40;
  std::size_t terms_per_query = 3;
  std::size_t background_concepts = 180;
  std::size_t synonyms = 3;
  double synonym_spread = 1.0;  // target synonym = latent + spread * own noise direction
  double noise = 0.05;          // per-coordinate Gaussian noise on the rotated source side
  std::size_t relevant_per_query = 5;
  std::size_t pool_size = 20;  // judged documents per query
  std::size_t background_length = 20;        // filler tokens per document
  std::size_t stopwords_per_doc = 3;
};

struct SynthCollection {
  std::vector<std::pair<std::string, std::string>> docs;     // id, text
  std::vector<std::pair<std::string, std::string>> queries;  // id, text
  std::vector<std::tuple<std::string, std::string, int>> qrels;
  std::vector<std::pair<std::string, std::vector<float>>> source_vectors;  // after alignment
  std::vector<std::pair<std::string, std::vector<float>>> target_vectors;
  std::vector<std::string> stopwords;
  double rotation_recovery_error = 0.0;  // Frobenius norm of (W R - I)
};

/// The source side is rotated by a random orthogonal R and perturbed, then
/// mapped back with the orthogonal Procrustes solution W fitted on the
/// concept dictionary, so the written vectors are pre-aligned.
SynthCollection generate_synthetic(const SynthConfig& config);

struct SynthFiles {
  std::filesystem::path docs, queries, qrels, source_vectors, target_vectors, stopwords;
};

SynthFiles synth_file_names(const std::filesystem::path& dir);
/// docs.tsv, queries.tsv, qrels.txt, src.vec, tgt.vec, stopwords.txt
SynthFiles write_synthetic(const std::filesystem::path& dir, const SynthCollection& collection);

}  // namespace clir
