#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "clir/matrix.hpp"
#include "clir/neural/tensor.hpp"

namespace clir::nn {

/// C x H x W activations, row-major per channel.
struct FeatureMap {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w), data(c * h * w, 0.0) {}

  double& at(std::size_t c, std::size_t i, std::size_t j) { return data[(c * height + i) * width + j]; }
  double at(std::size_t c, std::size_t i, std::size_t j) const { return data[(c * height + i) * width + j]; }
};

/// Single-input-channel cross-correlation with zero padding that keeps the
/// output H x W. kernels: [C, k, k] with odd k; bias: [C].
FeatureMap conv2d_forward(const Matrix& input, const Tensor& kernels, const Tensor& bias);

/// Accumulates into kernels.grad and bias.grad; into *grad_input when given.
void conv2d_backward(const Matrix& input, Tensor& kernels, Tensor& bias, const FeatureMap& grad_output,
                     Matrix* grad_input = nullptr);

struct PoolResult {
  FeatureMap output;                // C x out_rows x out_cols
  std::vector<std::size_t> argmax;  // flat input index per output cell
};

/// Half-open [begin, end) ranges splitting `extent` into `groups` contiguous,
/// near-equal, non-empty parts; parts repeat rows when extent < groups.
std::vector<std::pair<std::size_t, std::size_t>> pool_ranges(std::size_t extent, std::size_t groups);

/// Dynamic max pooling: the first `valid_rows` rows are split into out_rows
/// groups and all columns into out_cols groups. Ties go to the first maximum.
PoolResult dynamic_pool_forward(const FeatureMap& input, std::size_t out_rows, std::size_t out_cols,
                                std::size_t valid_rows);

/// Routes each output gradient to its argmax cell (accumulating).
void dynamic_pool_backward(const PoolResult& pooled, const FeatureMap& grad_output, FeatureMap& grad_input);

/// y = W x + b with W: [out, in], b: [out].
std::vector<double> dense_forward(std::span<const double> x, const Tensor& weight, const Tensor& bias);

/// Accumulates dW, db; writes dx when non-empty (overwrites).
void dense_backward(std::span<const double> x, Tensor& weight, Tensor& bias, std::span<const double> grad_y,
                    std::span<double> grad_x = {});

void relu_inplace(std::span<double> x);
/// grad *= (y > 0), with y the relu output.
void relu_backward(std::span<const double> y, std::span<double> grad);

void tanh_inplace(std::span<double> x);
/// grad *= 1 - y^2, with y the tanh output.
void tanh_backward(std::span<const double> y, std::span<double> grad);

/// Softmax over the entries where mask is true; masked entries get 0.
/// An empty mask means every entry participates.
std::vector<double> softmax(std::span<const double> logits, const std::vector<bool>& mask = {});

/// d logits given softmax output p and upstream grad g: p_i (g_i - sum_j p_j g_j).
std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> grad);

}  // namespace clir::nn
