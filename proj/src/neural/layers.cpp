#include "clir/neural/layers.hpp"

#include <algorithm>
#include <cmath>

#include "clir/error.hpp"

namespace clir::nn {

namespace {

struct ConvShape {
  std::size_t channels;
  std::size_t size;
  std::size_t pad;
};

ConvShape check_conv(const Matrix& input, const Tensor& kernels, const Tensor& bias) {
  if (input.rows < 1 || input.cols < 1) throw Error("conv2d: input smaller than 1x1");
  if (kernels.shape.size() != 3 || kernels.shape[1] != kernels.shape[2] || kernels.shape[1] % 2 == 0) {
    throw Error("conv2d: kernels must be [C, k, k] with odd k");
  }
  if (bias.size() != kernels.shape[0]) throw Error("conv2d: bias size does not match channel count");
  return {kernels.shape[0], kernels.shape[1], kernels.shape[1] / 2};
}

Matrix zero_padded(const Matrix& input, std::size_t pad) {
  Matrix p(input.rows + 2 * pad, input.cols + 2 * pad);
  for (std::size_t i = 0; i < input.rows; ++i) {
    std::copy(input.row(i).begin(), input.row(i).end(), p.row(i + pad).begin() + static_cast<std::ptrdiff_t>(pad));
  }
  return p;
}

}  // namespace

FeatureMap conv2d_forward(const Matrix& input, const Tensor& kernels, const Tensor& bias) {
  const auto [channels, k, pad] = check_conv(input, kernels, bias);
  const Matrix padded = zero_padded(input, pad);
  const std::size_t h = input.rows;
  const std::size_t w = input.cols;
  FeatureMap out(channels, h, w);
  for (std::size_t c = 0; c < channels; ++c) {
    double* plane = out.data.data() + c * h * w;
    std::fill(plane, plane + h * w, bias.value[c]);
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        const double wt = kernels.value[(c * k + ki) * k + kj];
        for (std::size_t i = 0; i < h; ++i) {
          const double* src = padded.data.data() + (i + ki) * padded.cols + kj;
          double* dst = plane + i * w;
          for (std::size_t j = 0; j < w; ++j) dst[j] += wt * src[j];
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Matrix& input, Tensor& kernels, Tensor& bias, const FeatureMap& grad_output,
                     Matrix* grad_input) {
  const auto [channels, k, pad] = check_conv(input, kernels, bias);
  const std::size_t h = input.rows;
  const std::size_t w = input.cols;
  if (grad_output.channels != channels || grad_output.height != h || grad_output.width != w) {
    throw Error("conv2d_backward: gradient shape mismatch");
  }
  const Matrix padded = zero_padded(input, pad);
  Matrix grad_padded;
  if (grad_input != nullptr) grad_padded = Matrix(padded.rows, padded.cols);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* g = grad_output.data.data() + c * h * w;
    double bias_acc = 0.0;
    for (std::size_t idx = 0; idx < h * w; ++idx) bias_acc += g[idx];
    bias.grad[c] += bias_acc;
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        const std::size_t widx = (c * k + ki) * k + kj;
        double acc = 0.0;
        for (std::size_t i = 0; i < h; ++i) {
          const double* src = padded.data.data() + (i + ki) * padded.cols + kj;
          const double* gi = g + i * w;
          for (std::size_t j = 0; j < w; ++j) acc += gi[j] * src[j];
        }
        kernels.grad[widx] += acc;
        if (grad_input != nullptr) {
          const double wt = kernels.value[widx];
          for (std::size_t i = 0; i < h; ++i) {
            double* dst = grad_padded.data.data() + (i + ki) * grad_padded.cols + kj;
            const double* gi = g + i * w;
            for (std::size_t j = 0; j < w; ++j) dst[j] += wt * gi[j];
          }
        }
      }
    }
  }
  if (grad_input != nullptr) {
    *grad_input = Matrix(h, w);
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) (*grad_input)(i, j) = grad_padded(i + pad, j + pad);
    }
  }
}

std::vector<std::pair<std::size_t, std::size_t>> pool_ranges(std::size_t extent, std::size_t groups) {
  if (extent == 0 || groups == 0) throw Error("pool_ranges: extent and groups must be positive");
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  ranges.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = std::min(g * extent / groups, extent - 1);
    const std::size_t end = std::max(begin + 1, (g + 1) * extent / groups);
    ranges.emplace_back(begin, end);
  }
  return ranges;
}

PoolResult dynamic_pool_forward(const FeatureMap& input, std::size_t out_rows, std::size_t out_cols,
                                std::size_t valid_rows) {
  if (valid_rows < 1 || valid_rows > input.height) throw Error("dynamic_pool: valid_rows out of range");
  const auto row_ranges = pool_ranges(valid_rows, out_rows);
  const auto col_ranges = pool_ranges(input.width, out_cols);
  PoolResult r{FeatureMap(input.channels, out_rows, out_cols), {}};
  r.argmax.resize(r.output.data.size());
  for (std::size_t c = 0; c < input.channels; ++c) {
    for (std::size_t gr = 0; gr < out_rows; ++gr) {
      for (std::size_t gc = 0; gc < out_cols; ++gc) {
        std::size_t best_idx = 0;
        double best = 0.0;
        bool first = true;
        for (std::size_t i = row_ranges[gr].first; i < row_ranges[gr].second; ++i) {
          for (std::size_t j = col_ranges[gc].first; j < col_ranges[gc].second; ++j) {
            const double v = input.at(c, i, j);
            if (first || v > best) {
              best = v;
              best_idx = (c * input.height + i) * input.width + j;
              first = false;
            }
          }
        }
        const std::size_t o = (c * out_rows + gr) * out_cols + gc;
        r.output.data[o] = best;
        r.argmax[o] = best_idx;
      }
    }
  }
  return r;
}

void dynamic_pool_backward(const PoolResult& pooled, const FeatureMap& grad_output, FeatureMap& grad_input) {
  if (grad_output.data.size() != pooled.argmax.size()) throw Error("dynamic_pool_backward: shape mismatch");
  for (std::size_t o = 0; o < pooled.argmax.size(); ++o) grad_input.data.at(pooled.argmax[o]) += grad_output.data[o];
}

std::vector<double> dense_forward(std::span<const double> x, const Tensor& weight, const Tensor& bias) {
  if (weight.shape.size() != 2 || weight.shape[1] != x.size() || bias.size() != weight.shape[0]) {
    throw Error("dense: dimension mismatch");
  }
  const std::size_t out = weight.shape[0];
  const std::size_t in = weight.shape[1];
  std::vector<double> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double* wr = weight.value.data() + o * in;
    double acc = bias.value[o];
    for (std::size_t i = 0; i < in; ++i) acc += wr[i] * x[i];
    y[o] = acc;
  }
  return y;
}

void dense_backward(std::span<const double> x, Tensor& weight, Tensor& bias, std::span<const double> grad_y,
                    std::span<double> grad_x) {
  if (weight.shape.size() != 2 || weight.shape[1] != x.size() || grad_y.size() != weight.shape[0] ||
      bias.size() != weight.shape[0]) {
    throw Error("dense_backward: dimension mismatch");
  }
  const std::size_t out = weight.shape[0];
  const std::size_t in = weight.shape[1];
  if (!grad_x.empty()) {
    if (grad_x.size() != in) throw Error("dense_backward: grad_x size mismatch");
    std::fill(grad_x.begin(), grad_x.end(), 0.0);
  }
  for (std::size_t o = 0; o < out; ++o) {
    const double g = grad_y[o];
    bias.grad[o] += g;
    double* gw = weight.grad.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) gw[i] += g * x[i];
    if (!grad_x.empty()) {
      const double* wr = weight.value.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) grad_x[i] += wr[i] * g;
    }
  }
}

void relu_inplace(std::span<double> x) {
  for (auto& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward(std::span<const double> y, std::span<double> grad) {
  if (y.size() != grad.size()) throw Error("relu_backward: dimension mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) grad[i] = 0.0;
  }
}

void tanh_inplace(std::span<double> x) {
  for (auto& v : x) v = std::tanh(v);
}

void tanh_backward(std::span<const double> y, std::span<double> grad) {
  if (y.size() != grad.size()) throw Error("tanh_backward: dimension mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) grad[i] *= 1.0 - y[i] * y[i];
}

std::vector<double> softmax(std::span<const double> logits, const std::vector<bool>& mask) {
  if (!mask.empty() && mask.size() != logits.size()) throw Error("softmax: mask size mismatch");
  auto active = [&](std::size_t i) { return mask.empty() || mask[i]; };
  std::vector<double> p(logits.size(), 0.0);
  double max_logit = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!active(i)) continue;
    max_logit = any ? std::max(max_logit, logits[i]) : logits[i];
    any = true;
  }
  if (!any) return p;
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!active(i)) continue;
    p[i] = std::exp(logits[i] - max_logit);
    z += p[i];
  }
  for (auto& v : p) v /= z;
  return p;
}

std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> grad) {
  if (probs.size() != grad.size()) throw Error("softmax_backward: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * grad[i];
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] * (grad[i] - dot);
  return out;
}

}  // namespace clir::nn
