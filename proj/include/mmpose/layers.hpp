// Copyright 2026, mmpose authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * \file layers.hpp
 * \brief Stateless layer primitives and their reverse-mode counterparts.
 *
 * Image tensors are channels-last: H x W x C, or B x H x W x C for a batch.
 * Convolutions are stride-1 cross-correlations with zero "same" padding.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "mmpose/rng.hpp"
#include "mmpose/tensor.hpp"

namespace mmpose::nn {

enum class Mode { Train, Infer };

/// kernels: k x k x C x D with odd k; bias: D.
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias);

struct ConvGrads {
  Tensor kernels;
  Tensor bias;
  Tensor input;  ///< empty unless requested
};
ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out,
                          bool need_input_grad = true);

/// k^2 * c_in * d weights, plus d biases when with_bias.
std::size_t conv2d_param_count(std::size_t k, std::size_t c_in, std::size_t d, bool with_bias);

Tensor relu(const Tensor& t);

/// Inverted-dropout multipliers: 0 with probability rate, else 1 / (1 - rate).
Tensor dropout_mask(const Shape& dims, double rate, Rng& rng);

/// Inverted dropout in Train mode; identity in Infer mode.
Tensor dropout(const Tensor& t, double rate, Mode mode, std::uint64_t seed);

/// x: B x in (or in), weights: in x out, bias: out.
Tensor dense_forward(const Tensor& x, const Tensor& weights, const Tensor& bias);

struct DenseGrads {
  Tensor weights;
  Tensor bias;
  Tensor input;
};
DenseGrads dense_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out);

/// Row-major flatten to rank 1.
Tensor flatten(const Tensor& t);
/// Keeps the leading (batch) axis: B x (product of the rest).
Tensor flatten_batch(const Tensor& t);

/// Channel concatenation of tensors that agree on all but the last axis.
Tensor concat_depth(const Tensor& a, const Tensor& b);
/// Inverse of concat_depth: the first `depth_a` channels, then the rest.
std::pair<Tensor, Tensor> split_depth(const Tensor& t, std::size_t depth_a);

/// Mean of squared differences over every element.
double mse_loss(const Tensor& pred, const Tensor& truth);
/// d(mse_loss)/d(pred).
Tensor mse_grad(const Tensor& pred, const Tensor& truth);

}  // namespace mmpose::nn
