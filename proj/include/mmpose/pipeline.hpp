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
 * \file pipeline.hpp
 * \brief Four-stage streaming pipeline: radar source -> encoder ->
 *        inference -> denormalization, one worker thread per stage,
 *        connected by bounded blocking queues.
 */
#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "mmpose/encoder.hpp"
#include "mmpose/model.hpp"
#include "mmpose/scene.hpp"

namespace mmpose::pipeline {

struct RawPointCloud {
  std::size_t seq = 0;
  std::int64_t timestamp_us = 0;
  scene::RadarFrame xy;
  scene::RadarFrame xz;
};

struct ImagePair {
  std::size_t seq = 0;
  std::int64_t timestamp_us = 0;
  encoder::EncodedImage xy;
  encoder::EncodedImage xz;
};

struct NormalizedJoints {
  std::size_t seq = 0;
  std::int64_t timestamp_us = 0;
  encoder::JointVector joints{};
};

struct WorldJoints {
  std::size_t seq = 0;
  std::int64_t timestamp_us = 0;
  scene::SkeletonFrame skeleton;
};

using PipelineMessage = std::variant<RawPointCloud, ImagePair, NormalizedJoints, WorldJoints>;

/// FIFO with a fixed capacity. push() blocks while full, pop() blocks
/// while empty and returns nullopt once the queue is closed and drained.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  void push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(item));
    high_water_ = std::max(high_water_, items_.size());
    not_empty_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t high_water() const {
    std::lock_guard lock(mu_);
    return high_water_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> items_;
  std::size_t high_water_ = 0;
  bool closed_ = false;
};

/// Inference stage body: image pair in, normalized 75-vector out.
using Predictor = std::function<encoder::JointVector(const ImagePair&)>;

/// Single-precision inference with a snapshot of `model`'s weights.
Predictor model_predictor(const nn::ForkedModel& model);

struct PipelineOptions {
  double fps = 20.0;                 ///< source rate; 0 emits as fast as possible
  std::size_t queue_capacity = 8;
  std::size_t side = 16;
  /// Extra per-message sleep for source, encoder, inference and
  /// denormalization stages; used to emulate slow nodes.
  std::array<std::chrono::microseconds, 4> stage_delay{};
};

struct FrameTiming {
  double encode_ms = 0.0;
  double infer_ms = 0.0;
  double end_to_end_ms = 0.0;  ///< source emit to world joints
};

struct LatencySummary {
  double median_encode_infer_ms = 0.0;
  double median_end_to_end_ms = 0.0;
  double max_end_to_end_ms = 0.0;
};

struct PipelineResult {
  std::vector<WorldJoints> outputs;
  std::vector<FrameTiming> timings;  ///< aligned with outputs
  std::size_t emitted = 0;
  std::size_t max_queue_depth = 0;
  LatencySummary latency() const;
};

PipelineResult run_pipeline(const std::vector<scene::DatasetRecord>& source,
                            const Predictor& predictor,
                            const encoder::NormalizationParams& norm,
                            const PipelineOptions& opts = {});

}  // namespace mmpose::pipeline
