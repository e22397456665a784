#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clir/interact.hpp"
#include "clir/matrix.hpp"
#include "clir/neural/layers.hpp"
#include "clir/neural/tensor.hpp"

namespace clir::nn {

enum class ModelFamily { kMatchPyramid, kDrmm, kKnrm };

std::string_view to_string(ModelFamily family);

struct ModelConfig {
  std::string name = "MP-Cosine";
  ModelFamily family = ModelFamily::kMatchPyramid;
  InteractionKind interaction = InteractionKind::kCosine;  // MatchPyramid only
  bool hybrid = false;                                     // MatchPyramid: cosine + indicator towers
  bool translate_query = false;                            // *-TbT-QT variants
  double eta = 0.3;
  std::size_t conv_kernel_size = 3;
  std::size_t conv_channels = 64;
  std::size_t pool_rows = 5;
  std::size_t pool_cols = 1;
  std::size_t histogram_bins = 30;
  std::size_t kernel_count = 20;
  double kernel_sigma = 0.1;
  std::vector<std::size_t> mlp_widths = {32};  // MatchPyramid head hidden layers
  std::size_t drmm_hidden = 5;
  std::size_t query_max_len = 8;
  std::uint64_t seed = 42;

  /// MP-Cosine, MP-Gaussian, MP-Exact, MP-Hybrid, MP-TbT-QT, DRMM-Cosine,
  /// DRMM-TbT-QT, KNRM-Cosine, KNRM-TbT-QT.
  static ModelConfig named(std::string_view name);
  static std::vector<std::string> known_names();
};

/// Frozen inputs for one (query, document) pair, shaped for a model family.
/// Query rows beyond query_max_len are dropped.
struct PairFeatures {
  std::vector<Matrix> channels;  // MatchPyramid towers, |q| x |d| each
  Matrix histogram;              // DRMM log-count histograms, |q| x bins
  Matrix kernels;                // KNRM kernel features, |q| x K
  std::vector<double> gate_input;  // DRMM: IDF per query row
  std::vector<bool> valid_rows;
  bool degenerate = false;
};

/// Builds features from embedded terms. `query_idf` holds one IDF per query
/// position (only DRMM reads it).
PairFeatures featurize(const ModelConfig& config, const EmbeddedTerms& query, const EmbeddedTerms& doc,
                       std::span<const double> query_idf);

/// Intermediate values kept by a forward pass for the matching backward pass.
struct Trace {
  // MatchPyramid
  std::vector<FeatureMap> conv;  // post-relu, per tower
  std::vector<PoolResult> pooled;
  std::vector<std::vector<double>> head_inputs;  // input to each head layer
  // DRMM
  std::vector<std::vector<double>> drmm_hidden;  // tanh outputs per row
  std::vector<double> drmm_z;
  std::vector<double> gates;
  // KNRM
  std::vector<double> phi;
  double pre_activation = 0.0;
  double score = 0.0;
};

class RankingModel {
 public:
  explicit RankingModel(ModelConfig config);

  const ModelConfig& config() const noexcept { return config_; }
  ParamSet& params() noexcept { return params_; }
  const ParamSet& params() const noexcept { return params_; }

  double score(const PairFeatures& features) const;
  double forward(const PairFeatures& features, Trace& trace) const;
  /// Accumulates d(score)/d(params) * grad_score into the parameter gradients.
  void backward(const PairFeatures& features, const Trace& trace, double grad_score);

  /// Re-draws every weight from the seeded fan-in uniform and zeros biases.
  void initialize(std::uint64_t seed);

 private:
  double forward_mp(const PairFeatures& f, Trace& t) const;
  double forward_drmm(const PairFeatures& f, Trace& t) const;
  double forward_knrm(const PairFeatures& f, Trace& t) const;
  void backward_mp(const PairFeatures& f, const Trace& t, double g);
  void backward_drmm(const PairFeatures& f, const Trace& t, double g);
  void backward_knrm(const PairFeatures& f, const Trace& t, double g);

  std::size_t tower_count() const { return config_.hybrid ? 2 : 1; }

  ModelConfig config_;
  ParamSet params_;
};

double score_mp(const PairFeatures& features, const RankingModel& model);
double score_mp_hybrid(const PairFeatures& features, const RankingModel& model);
double score_drmm(const PairFeatures& features, const RankingModel& model);
double score_knrm(const PairFeatures& features, const RankingModel& model);

/// Floor applied before the KNRM log so empty kernel mass stays finite.
inline constexpr double kKnrmLogFloor = 1e-10;

}  // namespace clir::nn
