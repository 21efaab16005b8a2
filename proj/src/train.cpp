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

#include "mmpose/train.hpp"

#include <algorithm>
#include <numeric>

#include "mmpose/errors.hpp"
#include "mmpose/rng.hpp"
#include "mmpose/scene.hpp"

namespace mmpose::nn {

void TrainingSet::add(const encoder::EncodedImage& xy, const encoder::EncodedImage& xz,
                      const encoder::JointVector& target) {
  if (xy.side != side_ || xz.side != side_) {
    throw StructuralError("training images must be " + std::to_string(side_) + "x" +
                          std::to_string(side_));
  }
  xy_.insert(xy_.end(), xy.pixels.begin(), xy.pixels.end());
  xz_.insert(xz_.end(), xz.pixels.begin(), xz.pixels.end());
  targets_.insert(targets_.end(), target.begin(), target.end());
}

Batch TrainingSet::gather(const std::vector<std::size_t>& indices) const {
  const std::size_t n = indices.size(), px = pixels(), tv = encoder::kSkeletonValues;
  Batch b{Tensor({n, side_, side_, 3}), Tensor({n, side_, side_, 3}), Tensor({n, tv})};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = indices[i];
    if (s >= size()) throw StructuralError("sample index out of range");
    std::copy_n(xy_.data() + s * px, px, b.xy.data() + i * px);
    std::copy_n(xz_.data() + s * px, px, b.xz.data() + i * px);
    std::copy_n(targets_.data() + s * tv, tv, b.truth.data() + i * tv);
  }
  return b;
}

Batch TrainingSet::range(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return gather(idx);
}

encoder::JointVector TrainingSet::target(std::size_t i) const {
  encoder::JointVector v{};
  std::copy_n(targets_.data() + i * v.size(), v.size(), v.begin());
  return v;
}

void TrainConfig::validate() const {
  adam.validate();
  if (batch_size == 0) throw DomainError("batch size must be positive");
  if (max_epochs == 0) throw DomainError("max epochs must be positive");
  if (!(stop_below >= 0.0)) throw DomainError("early-stop loss must be non-negative");
}

double evaluate_loss(const ForkedModel& model, const TrainingSet& set, std::size_t batch_size) {
  if (set.empty()) throw DomainError("cannot evaluate on an empty set");
  double sum = 0.0;
  for (std::size_t b = 0; b < set.size(); b += batch_size) {
    const std::size_t e = std::min(set.size(), b + batch_size);
    const Batch batch = set.range(b, e);
    const Tensor out = model.forward(batch.xy, batch.xz, Mode::Infer);
    sum += mse_loss(out, batch.truth) * static_cast<double>(e - b);
  }
  return sum / static_cast<double>(set.size());
}

std::vector<encoder::JointVector> predict(const ForkedModel& model, const TrainingSet& set,
                                          std::size_t batch_size) {
  std::vector<encoder::JointVector> out;
  out.reserve(set.size());
  for (std::size_t b = 0; b < set.size(); b += batch_size) {
    const std::size_t e = std::min(set.size(), b + batch_size);
    const Batch batch = set.range(b, e);
    const Tensor y = model.forward(batch.xy, batch.xz, Mode::Infer);
    for (std::size_t i = 0; i < e - b; ++i) {
      encoder::JointVector v{};
      std::copy_n(y.data() + i * v.size(), v.size(), v.begin());
      out.push_back(v);
    }
  }
  return out;
}

TrainResult train(ForkedModel& model, const TrainingSet& train_set, const TrainingSet& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw DomainError("training set is empty");
  if (val_set.empty()) throw DomainError("validation set is empty");

  AdamState adam = AdamState::zeros_like(model.parameters());
  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(train_set.size());

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(scene::mix_seed(cfg.seed, 2 * epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }

    double sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size, ++batch_index) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      const Batch batch = train_set.gather({order.begin() + static_cast<std::ptrdiff_t>(b),
                                            order.begin() + static_cast<std::ptrdiff_t>(e)});
      const std::uint64_t mask_seed =
          scene::mix_seed(scene::mix_seed(cfg.seed, 2 * epoch + 1), batch_index);
      GradientResult g = model.backward(batch, Mode::Train, mask_seed);
      adam_step(model.parameters(), g.grads, adam, cfg.adam);
      sum += g.loss * static_cast<double>(e - b);
    }

    EpochLoss rec;
    rec.epoch = epoch;
    rec.train = sum / static_cast<double>(order.size());
    rec.val = evaluate_loss(model, val_set, cfg.batch_size);
    if (rec.val < best) {
      best = rec.val;
      rec.improved = true;
      result.best = make_checkpoint(model, adam, epoch, rec.val);
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val < cfg.stop_below) break;
  }
  return result;
}

}  // namespace mmpose::nn
