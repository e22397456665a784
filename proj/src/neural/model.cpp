#include "clir/neural/model.hpp"

#include <cmath>
#include <random>

#include "clir/error.hpp"

namespace clir::nn {

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::kMatchPyramid:
      return "MP";
    case ModelFamily::kDrmm:
      return "DRMM";
    case ModelFamily::kKnrm:
      return "KNRM";
  }
  return "unknown";
}

ModelConfig ModelConfig::named(std::string_view name) {
  ModelConfig c;
  c.name = std::string(name);
  if (name == "MP-Cosine") {
    c.interaction = InteractionKind::kCosine;
  } else if (name == "MP-Gaussian") {
    c.interaction = InteractionKind::kGaussian;
  } else if (name == "MP-Exact") {
    c.interaction = InteractionKind::kIndicator;
  } else if (name == "MP-Hybrid") {
    c.hybrid = true;
  } else if (name == "MP-TbT-QT") {
    c.translate_query = true;
  } else if (name == "DRMM-Cosine" || name == "DRMM-TbT-QT") {
    c.family = ModelFamily::kDrmm;
    c.translate_query = name == "DRMM-TbT-QT";
  } else if (name == "KNRM-Cosine" || name == "KNRM-TbT-QT") {
    c.family = ModelFamily::kKnrm;
    c.translate_query = name == "KNRM-TbT-QT";
  } else {
    throw Error("unknown model name: " + std::string(name));
  }
  return c;
}

std::vector<std::string> ModelConfig::known_names() {
  return {"MP-Cosine",   "MP-Gaussian", "MP-Exact",    "MP-Hybrid",  "MP-TbT-QT",
          "DRMM-Cosine", "DRMM-TbT-QT", "KNRM-Cosine", "KNRM-TbT-QT"};
}

PairFeatures featurize(const ModelConfig& config, const EmbeddedTerms& query, const EmbeddedTerms& doc,
                       std::span<const double> query_idf) {
  EmbeddedTerms q = query;
  if (q.rows.size() > config.query_max_len) q.rows.resize(config.query_max_len);
  PairFeatures f;
  auto cosine = build_matrix(q, doc, InteractionKind::kCosine);
  f.valid_rows = cosine.valid_rows;
  f.degenerate = cosine.degenerate();
  switch (config.family) {
    case ModelFamily::kMatchPyramid:
      if (config.hybrid) {
        f.channels.push_back(std::move(cosine.values));
        f.channels.push_back(build_matrix(q, doc, InteractionKind::kIndicator, config.eta).values);
      } else if (config.interaction == InteractionKind::kCosine) {
        f.channels.push_back(std::move(cosine.values));
      } else {
        f.channels.push_back(build_matrix(q, doc, config.interaction, config.eta).values);
      }
      break;
    case ModelFamily::kDrmm: {
      f.histogram = build_histogram(cosine, config.histogram_bins).log_counts;
      if (query_idf.size() < q.rows.size()) throw Error("featurize: missing query IDF values");
      f.gate_input.assign(query_idf.begin(), query_idf.begin() + static_cast<std::ptrdiff_t>(q.rows.size()));
      break;
    }
    case ModelFamily::kKnrm: {
      const auto mus = default_kernel_mus(config.kernel_count);
      f.kernels = kernel_pool(cosine, mus, config.kernel_sigma).values;
      break;
    }
  }
  return f;
}

RankingModel::RankingModel(ModelConfig config) : config_(std::move(config)) {
  switch (config_.family) {
    case ModelFamily::kMatchPyramid: {
      const std::size_t k = config_.conv_kernel_size;
      for (std::size_t t = 0; t < tower_count(); ++t) {
        const std::string p = "tower" + std::to_string(t) + ".conv.";
        params_.add(p + "weight", {config_.conv_channels, k, k});
        params_.add(p + "bias", {config_.conv_channels});
      }
      std::size_t in = tower_count() * config_.conv_channels * config_.pool_rows * config_.pool_cols;
      std::vector<std::size_t> widths = config_.mlp_widths;
      widths.push_back(1);
      for (std::size_t l = 0; l < widths.size(); ++l) {
        const std::string p = "head." + std::to_string(l) + ".";
        params_.add(p + "weight", {widths[l], in});
        params_.add(p + "bias", {widths[l]});
        in = widths[l];
      }
      break;
    }
    case ModelFamily::kDrmm:
      params_.add("ffn.0.weight", {config_.drmm_hidden, config_.histogram_bins});
      params_.add("ffn.0.bias", {config_.drmm_hidden});
      params_.add("ffn.1.weight", {1, config_.drmm_hidden});
      params_.add("ffn.1.bias", {1});
      params_.add("gate.weight", {1});
      break;
    case ModelFamily::kKnrm:
      params_.add("dense.weight", {1, config_.kernel_count});
      params_.add("dense.bias", {1});
      break;
  }
  initialize(config_.seed);
}

void RankingModel::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& [name, tensor] : params_) {
    if (name.ends_with("bias")) {
      std::fill(tensor.value.begin(), tensor.value.end(), 0.0);
      continue;
    }
    // fan-in: every dimension after the first (conv: k*k, dense: in, gate: 1)
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < tensor.shape.size(); ++d) fan_in *= tensor.shape[d];
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    // KNRM inputs are sums of logs reaching ln(1e-10) per row; shrink so tanh starts unsaturated.
    if (config_.family == ModelFamily::kKnrm) bound /= -std::log(kKnrmLogFloor);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : tensor.value) v = dist(rng);
  }
  params_.zero_grad();
}

double RankingModel::score(const PairFeatures& features) const {
  Trace t;
  return forward(features, t);
}

double RankingModel::forward(const PairFeatures& features, Trace& trace) const {
  trace = Trace{};
  switch (config_.family) {
    case ModelFamily::kMatchPyramid:
      trace.score = forward_mp(features, trace);
      break;
    case ModelFamily::kDrmm:
      trace.score = forward_drmm(features, trace);
      break;
    case ModelFamily::kKnrm:
      trace.score = forward_knrm(features, trace);
      break;
  }
  return trace.score;
}

void RankingModel::backward(const PairFeatures& features, const Trace& trace, double grad_score) {
  switch (config_.family) {
    case ModelFamily::kMatchPyramid:
      backward_mp(features, trace, grad_score);
      break;
    case ModelFamily::kDrmm:
      backward_drmm(features, trace, grad_score);
      break;
    case ModelFamily::kKnrm:
      backward_knrm(features, trace, grad_score);
      break;
  }
}

double RankingModel::forward_mp(const PairFeatures& f, Trace& t) const {
  if (f.degenerate) return 0.0;
  if (f.channels.size() != tower_count()) throw Error("score_mp: feature channel count does not match the model");
  std::vector<double> flat;
  for (std::size_t tower = 0; tower < tower_count(); ++tower) {
    const std::string p = "tower" + std::to_string(tower) + ".conv.";
    const Matrix& input = f.channels[tower];
    FeatureMap conv = conv2d_forward(input, params_.get(p + "weight"), params_.get(p + "bias"));
    relu_inplace(conv.data);
    PoolResult pooled = dynamic_pool_forward(conv, config_.pool_rows, config_.pool_cols, input.rows);
    flat.insert(flat.end(), pooled.output.data.begin(), pooled.output.data.end());
    t.conv.push_back(std::move(conv));
    t.pooled.push_back(std::move(pooled));
  }
  const std::size_t layers = config_.mlp_widths.size() + 1;
  std::vector<double> x = std::move(flat);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string p = "head." + std::to_string(l) + ".";
    std::vector<double> y = dense_forward(x, params_.get(p + "weight"), params_.get(p + "bias"));
    t.head_inputs.push_back(std::move(x));
    if (l + 1 < layers) relu_inplace(y);
    x = std::move(y);
  }
  return x.at(0);
}

void RankingModel::backward_mp(const PairFeatures& f, const Trace& t, double g) {
  if (f.degenerate) return;
  const std::size_t layers = config_.mlp_widths.size() + 1;
  std::vector<double> grad{g};
  for (std::size_t l = layers; l-- > 0;) {
    const std::string p = "head." + std::to_string(l) + ".";
    if (l + 1 < layers) relu_backward(t.head_inputs[l + 1], grad);
    std::vector<double> grad_x(t.head_inputs[l].size());
    dense_backward(t.head_inputs[l], params_.get(p + "weight"), params_.get(p + "bias"), grad, grad_x);
    grad = std::move(grad_x);
  }
  std::size_t offset = 0;
  for (std::size_t tower = 0; tower < tower_count(); ++tower) {
    const std::string p = "tower" + std::to_string(tower) + ".conv.";
    const PoolResult& pooled = t.pooled[tower];
    const FeatureMap& conv = t.conv[tower];
    FeatureMap grad_pool(pooled.output.channels, pooled.output.height, pooled.output.width);
    std::copy(grad.begin() + static_cast<std::ptrdiff_t>(offset),
              grad.begin() + static_cast<std::ptrdiff_t>(offset + grad_pool.data.size()), grad_pool.data.begin());
    offset += grad_pool.data.size();
    FeatureMap grad_conv(conv.channels, conv.height, conv.width);
    dynamic_pool_backward(pooled, grad_pool, grad_conv);
    relu_backward(conv.data, grad_conv.data);
    conv2d_backward(f.channels[tower], params_.get(p + "weight"), params_.get(p + "bias"), grad_conv);
  }
}

double RankingModel::forward_drmm(const PairFeatures& f, Trace& t) const {
  if (f.degenerate) return 0.0;
  const std::size_t rows = f.histogram.rows;
  if (f.gate_input.size() != rows || f.valid_rows.size() != rows) throw Error("score_drmm: feature shape mismatch");
  const Tensor& w_gate = params_.get("gate.weight");
  std::vector<double> logits(rows, 0.0);
  t.drmm_hidden.assign(rows, {});
  t.drmm_z.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!f.valid_rows[i]) continue;
    std::vector<double> h = dense_forward(f.histogram.row(i), params_.get("ffn.0.weight"), params_.get("ffn.0.bias"));
    tanh_inplace(h);
    t.drmm_z[i] = dense_forward(h, params_.get("ffn.1.weight"), params_.get("ffn.1.bias"))[0];
    t.drmm_hidden[i] = std::move(h);
    logits[i] = w_gate.value[0] * f.gate_input[i];
  }
  t.gates = softmax(logits, f.valid_rows);
  double s = 0.0;
  for (std::size_t i = 0; i < rows; ++i) s += t.gates[i] * t.drmm_z[i];
  return s;
}

void RankingModel::backward_drmm(const PairFeatures& f, const Trace& t, double g) {
  if (f.degenerate) return;
  const std::size_t rows = f.histogram.rows;
  std::vector<double> grad_gates(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) grad_gates[i] = g * t.drmm_z[i];
  const std::vector<double> grad_logits = softmax_backward(t.gates, grad_gates);
  Tensor& w_gate = params_.get("gate.weight");
  for (std::size_t i = 0; i < rows; ++i) {
    if (!f.valid_rows[i]) continue;
    w_gate.grad[0] += grad_logits[i] * f.gate_input[i];
    const std::vector<double> grad_z{g * t.gates[i]};
    std::vector<double> grad_h(t.drmm_hidden[i].size());
    dense_backward(t.drmm_hidden[i], params_.get("ffn.1.weight"), params_.get("ffn.1.bias"), grad_z, grad_h);
    tanh_backward(t.drmm_hidden[i], grad_h);
    dense_backward(f.histogram.row(i), params_.get("ffn.0.weight"), params_.get("ffn.0.bias"), grad_h);
  }
}

double RankingModel::forward_knrm(const PairFeatures& f, Trace& t) const {
  const Tensor& w = params_.get("dense.weight");
  const Tensor& b = params_.get("dense.bias");
  t.phi.assign(config_.kernel_count, 0.0);
  if (!f.degenerate) {
    if (f.kernels.cols != config_.kernel_count) throw Error("score_knrm: kernel count mismatch");
    for (std::size_t i = 0; i < f.kernels.rows; ++i) {
      if (!f.valid_rows[i]) continue;
      for (std::size_t k = 0; k < config_.kernel_count; ++k) {
        t.phi[k] += std::log(std::max(f.kernels(i, k), kKnrmLogFloor));
      }
    }
  }
  double pre = b.value[0];
  for (std::size_t k = 0; k < config_.kernel_count; ++k) pre += w.value[k] * t.phi[k];
  t.pre_activation = pre;
  return std::tanh(pre);
}

void RankingModel::backward_knrm(const PairFeatures& /*f*/, const Trace& t, double g) {
  const double grad_pre = g * (1.0 - t.score * t.score);
  Tensor& w = params_.get("dense.weight");
  Tensor& b = params_.get("dense.bias");
  for (std::size_t k = 0; k < config_.kernel_count; ++k) w.grad[k] += grad_pre * t.phi[k];
  b.grad[0] += grad_pre;
}

double score_mp(const PairFeatures& features, const RankingModel& model) {
  if (model.config().family != ModelFamily::kMatchPyramid || model.config().hybrid) {
    throw Error("score_mp: model is not a single-tower MatchPyramid");
  }
  return model.score(features);
}

double score_mp_hybrid(const PairFeatures& features, const RankingModel& model) {
  if (model.config().family != ModelFamily::kMatchPyramid || !model.config().hybrid) {
    throw Error("score_mp_hybrid: model is not MP-Hybrid");
  }
  return model.score(features);
}

double score_drmm(const PairFeatures& features, const RankingModel& model) {
  if (model.config().family != ModelFamily::kDrmm) throw Error("score_drmm: model is not DRMM");
  return model.score(features);
}

double score_knrm(const PairFeatures& features, const RankingModel& model) {
  if (model.config().family != ModelFamily::kKnrm) throw Error("score_knrm: model is not KNRM");
  return model.score(features);
}

}  // namespace clir::nn
