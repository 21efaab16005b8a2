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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mmpose/checkpoint.hpp"
#include "mmpose/encoder.hpp"
#include "mmpose/model.hpp"
#include "mmpose/optim.hpp"

namespace mmpose::nn {

/// Image pairs and normalized targets stored contiguously.
class TrainingSet {
 public:
  explicit TrainingSet(std::size_t side = 16) : side_(side) {}

  void add(const encoder::EncodedImage& xy, const encoder::EncodedImage& xz,
           const encoder::JointVector& target);

  std::size_t size() const { return targets_.size() / encoder::kSkeletonValues; }
  bool empty() const { return size() == 0; }
  std::size_t side() const { return side_; }

  Batch gather(const std::vector<std::size_t>& indices) const;
  Batch range(std::size_t begin, std::size_t end) const;
  encoder::JointVector target(std::size_t i) const;

 private:
  std::size_t pixels() const { return side_ * side_ * 3; }
  std::size_t side_;
  std::vector<double> xy_, xz_, targets_;
};

struct TrainConfig {
  AdamConfig adam{};
  std::size_t batch_size = 64;
  std::size_t max_epochs = 200;
  std::uint64_t seed = 0;
  /// Stop early once the validation loss falls below this; 0 disables.
  double stop_below = 0.0;

  void validate() const;
};

struct EpochLoss {
  std::size_t epoch = 0;   ///< 1-based
  double train = 0.0;      ///< mean minibatch loss, dropout active
  double val = 0.0;        ///< inference-mode loss on the validation set
  bool improved = false;   ///< a checkpoint was taken after this epoch
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochLoss> history;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

/// Shuffled minibatch Adam training on mean MSE. After each epoch the
/// validation loss is measured and the model is checkpointed whenever it
/// beats the best so far; the best checkpoint is returned, not the last.
/// Throws DomainError for an empty training or validation set.
TrainResult train(ForkedModel& model, const TrainingSet& train_set, const TrainingSet& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Inference-mode mean MSE.
double evaluate_loss(const ForkedModel& model, const TrainingSet& set,
                     std::size_t batch_size = 64);

/// Inference-mode predictions, one per sample.
std::vector<encoder::JointVector> predict(const ForkedModel& model, const TrainingSet& set,
                                          std::size_t batch_size = 64);

}  // namespace mmpose::nn
