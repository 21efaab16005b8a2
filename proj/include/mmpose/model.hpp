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
 * \file model.hpp
 * \brief Forked CNN pose regressor.
 *
 * Two identical convolutional branches (one per radar image plane) with
 * ReLU and dropout after every layer and no pooling; their N x N outputs are
 * stacked along depth, flattened, and fed to a ReLU/dropout MLP head that
 * ends in a linear layer with one unit per joint coordinate.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mmpose/encoder.hpp"
#include "mmpose/layers.hpp"
#include "mmpose/tensor.hpp"

namespace mmpose::nn {

struct ModelConfig {
  std::size_t side = 16;
  std::size_t channels = 3;
  std::size_t kernel = 3;
  std::vector<std::size_t> conv_depths{16, 32, 64};
  std::vector<std::size_t> head{512, 256, 128};
  std::size_t outputs = encoder::kSkeletonValues;
  double conv_dropout = 0.2;
  double dense_dropout = 0.3;

  /// 16x16x3 inputs, depths 16/32/64, head 512/256/128, 75 outputs.
  static ModelConfig standard();
  /// 4x4x3 inputs, depths 2/2/2, head 8/8/8; for gradient checks.
  static ModelConfig miniature();

  void validate() const;
  /// Compact `key=value;...` form stored in checkpoints.
  std::string describe() const;
  static ModelConfig parse(const std::string& text);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::size_t branch_parameter_count(const ModelConfig& cfg);
/// Hidden dense layers only.
std::size_t head_parameter_count(const ModelConfig& cfg);
std::size_t output_parameter_count(const ModelConfig& cfg);
std::size_t total_parameter_count(const ModelConfig& cfg);

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Images stacked as B x N x N x C plus their B x outputs targets.
struct Batch {
  Tensor xy;
  Tensor xz;
  Tensor truth;
  std::size_t size() const { return xy.rank() ? xy.dim(0) : 0; }
};

struct GradientResult {
  double loss = 0.0;          ///< mean batch MSE
  std::vector<Tensor> grads;  ///< aligned with ForkedModel::parameters()
  Tensor prediction;          ///< B x outputs
};

class ForkedModel {
 public:
  /// Fan-in scaled uniform init: variance 2/fan_in for ReLU layers and
  /// 1/fan_in for the linear output; zero biases.
  ForkedModel(ModelConfig cfg, std::uint64_t seed);
  static ForkedModel zeros(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  std::vector<NamedTensor>& parameters() { return params_; }
  const std::vector<NamedTensor>& parameters() const { return params_; }
  std::size_t parameter_count() const;

  /// Batched forward pass; xy and xz are B x N x N x C. Dropout masks are
  /// drawn from `seed` in Train mode.
  Tensor forward(const Tensor& xy, const Tensor& xz, Mode mode, std::uint64_t seed = 0) const;

  /// Single-frame forward pass.
  encoder::JointVector forward(const encoder::EncodedImage& xy, const encoder::EncodedImage& xz,
                               Mode mode, std::uint64_t seed = 0) const;

  /// Exact reverse-mode gradients of the mean batch MSE. The dropout masks
  /// of the forward pass (drawn from `seed`) are reused in the backward pass.
  GradientResult backward(const Batch& batch, Mode mode, std::uint64_t seed = 0) const;

 private:
  explicit ForkedModel(ModelConfig cfg);
  struct Tape;
  Tensor run(const Tensor& xy, const Tensor& xz, Mode mode, std::uint64_t seed, Tape* tape) const;
  void check_inputs(const Tensor& xy, const Tensor& xz) const;

  ModelConfig cfg_;
  std::vector<NamedTensor> params_;
};

using FloatBuffer = std::vector<float, AlignedAllocator<float>>;

/// Inference-only copy of a model held in single precision. Checkpoints
/// store float32 values, so a model loaded from one converts exactly; only
/// the accumulation order and precision differ from ForkedModel::forward.
/// The first dense layer dominates single-frame latency and is bound by
/// memory bandwidth, which halving the weight size roughly halves.
class FrozenModel {
 public:
  explicit FrozenModel(const ForkedModel& model);
  const ModelConfig& config() const { return cfg_; }
  encoder::JointVector forward(const encoder::EncodedImage& xy,
                               const encoder::EncodedImage& xz) const;

 private:
  ModelConfig cfg_;
  std::vector<FloatBuffer> params_;  // same order as ForkedModel
};

/// H x W x C tensor view of an encoded image.
Tensor image_tensor(const encoder::EncodedImage& img);

}  // namespace mmpose::nn
