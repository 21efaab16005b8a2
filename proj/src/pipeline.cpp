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

#include "mmpose/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <memory>
#include <thread>

#include "mmpose/errors.hpp"

namespace mmpose::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void pause(std::chrono::microseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

// A message travelling through the stages, with its timing trail.
template <typename T>
struct Timed {
  T msg;
  Clock::time_point emitted;
  FrameTiming timing;
};

// Runs fn on the calling thread and keeps the first exception; the queue
// passed as `downstream` is always closed so later stages drain and exit.
template <typename Q, typename Fn>
void guarded(Q& downstream, std::exception_ptr& err, std::mutex& mu, Fn fn) {
  try {
    fn();
  } catch (...) {
    std::lock_guard lock(mu);
    if (!err) err = std::current_exception();
  }
  downstream.close();
}

}  // namespace

Predictor model_predictor(const nn::ForkedModel& model) {
  auto frozen = std::make_shared<const nn::FrozenModel>(model);
  return [frozen](const ImagePair& p) { return frozen->forward(p.xy, p.xz); };
}

LatencySummary PipelineResult::latency() const {
  std::vector<double> ei, e2e;
  for (const auto& t : timings) {
    ei.push_back(t.encode_ms + t.infer_ms);
    e2e.push_back(t.end_to_end_ms);
  }
  LatencySummary s;
  s.median_encode_infer_ms = median(ei);
  s.median_end_to_end_ms = median(e2e);
  s.max_end_to_end_ms = e2e.empty() ? 0.0 : *std::max_element(e2e.begin(), e2e.end());
  return s;
}

PipelineResult run_pipeline(const std::vector<scene::DatasetRecord>& source,
                            const Predictor& predictor,
                            const encoder::NormalizationParams& norm,
                            const PipelineOptions& opts) {
  if (!predictor) throw DomainError("pipeline needs a predictor");
  if (opts.fps < 0.0) throw DomainError("pipeline fps must be non-negative");
  norm.validate();

  BoundedQueue<Timed<RawPointCloud>> raw(opts.queue_capacity);
  BoundedQueue<Timed<ImagePair>> images(opts.queue_capacity);
  BoundedQueue<Timed<NormalizedJoints>> joints(opts.queue_capacity);

  PipelineResult result;
  std::exception_ptr err;
  std::mutex err_mu;

  std::thread source_worker([&] {
    guarded(raw, err, err_mu, [&] {
      const auto start = Clock::now();
      for (std::size_t i = 0; i < source.size(); ++i) {
        if (opts.fps > 0.0) {
          std::this_thread::sleep_until(
              start + std::chrono::duration_cast<Clock::duration>(
                          std::chrono::duration<double>(static_cast<double>(i) / opts.fps)));
        }
        pause(opts.stage_delay[0]);
        const auto& rec = source[i];
        raw.push({RawPointCloud{i, rec.truth.timestamp_us, rec.radar_xy, rec.radar_xz},
                  Clock::now(), {}});
        ++result.emitted;
      }
    });
  });

  std::thread encode_worker([&] {
    guarded(images, err, err_mu, [&] {
      while (auto in = raw.pop()) {
        pause(opts.stage_delay[1]);
        const auto t0 = Clock::now();
        ImagePair out{in->msg.seq, in->msg.timestamp_us,
                      encoder::encode_frame(in->msg.xy, norm, opts.side),
                      encoder::encode_frame(in->msg.xz, norm, opts.side)};
        in->timing.encode_ms = ms_between(t0, Clock::now());
        images.push({std::move(out), in->emitted, in->timing});
      }
    });
    // After a failure, keep draining so the source never blocks.
    while (raw.pop()) {
    }
  });

  std::thread infer_worker([&] {
    guarded(joints, err, err_mu, [&] {
      while (auto in = images.pop()) {
        pause(opts.stage_delay[2]);
        const auto t0 = Clock::now();
        NormalizedJoints out{in->msg.seq, in->msg.timestamp_us, predictor(in->msg)};
        in->timing.infer_ms = ms_between(t0, Clock::now());
        joints.push({std::move(out), in->emitted, in->timing});
      }
    });
    while (images.pop()) {
    }
  });

  // Denormalization runs on the calling thread.
  try {
    while (auto in = joints.pop()) {
      pause(opts.stage_delay[3]);
      WorldJoints out{in->msg.seq, in->msg.timestamp_us,
                      encoder::denormalize_skeleton(in->msg.joints, norm, in->msg.timestamp_us)};
      in->timing.end_to_end_ms = ms_between(in->emitted, Clock::now());
      result.outputs.push_back(std::move(out));
      result.timings.push_back(in->timing);
    }
  } catch (...) {
    {
      std::lock_guard lock(err_mu);
      if (!err) err = std::current_exception();
    }
    // Keep draining so upstream workers never block on a full queue.
    while (joints.pop()) {
    }
  }

  source_worker.join();
  encode_worker.join();
  infer_worker.join();
  if (err) std::rethrow_exception(err);

  result.max_queue_depth =
      std::max({raw.high_water(), images.high_water(), joints.high_water()});
  return result;
}

}  // namespace mmpose::pipeline
