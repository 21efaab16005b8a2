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
 * \file eval.hpp
 * \brief Pose-error metrics in world units: per-joint MAE, top-k outlier
 *        joints, per-axis error, the training-mean baseline, per-frame
 *        Euclidean errors and their empirical CDF.
 *
 * Poses are flattened [j0.x, j0.y, j0.z, j1.x, ...] vectors in metres.
 */
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mmpose/encoder.hpp"
#include "mmpose/scene.hpp"

namespace mmpose::eval {

using encoder::JointVector;
using Poses = std::vector<JointVector>;
using JointSet = std::vector<scene::JointId>;

inline constexpr std::size_t kCdfPoints = 100;

/// Mean over frames and the three axes of |pred - truth|, per joint.
std::array<double, scene::kJointCount> mae_per_joint(const Poses& preds, const Poses& truths);

/// The k joints with the highest MAE (ties go to the lower joint index),
/// returned in ascending joint order. Throws DomainError unless k < 25.
JointSet identify_outliers(const std::array<double, scene::kJointCount>& mae, std::size_t k);

/// All joints not in `excluded`, ascending.
JointSet retained_joints(const JointSet& excluded);

struct AxisError {
  double depth = 0.0;
  double elevation = 0.0;
  double azimuth = 0.0;
};

/// Mean absolute error per axis over the retained joints and all frames.
/// Throws DomainError for an empty retained set.
AxisError per_axis_error(const Poses& preds, const Poses& truths, const JointSet& retained);

/// Always predicts the per-coordinate mean of its training poses.
class BaselinePredictor {
 public:
  explicit BaselinePredictor(const JointVector& mean) : mean_(mean) {}
  const JointVector& predict() const { return mean_; }
  Poses predict(std::size_t frames) const { return Poses(frames, mean_); }

 private:
  JointVector mean_;
};

/// Throws DomainError for an empty training set.
BaselinePredictor baseline_predictor(const Poses& train_truths);

/// errors[frame][i] = 3-D distance for retained[i].
std::vector<std::vector<double>> euclid_series(const Poses& preds, const Poses& truths,
                                               const JointSet& retained);

struct Cdf {
  std::vector<double> abscissae;
  std::vector<double> values;
};

/// Empirical CDF on kCdfPoints evenly spaced abscissae from 0 to x_max
/// (default: the largest error). Throws DomainError for empty input.
Cdf error_cdf(const std::vector<double>& errors, double x_max = -1.0);

struct EvalReport {
  std::array<double, scene::kJointCount> mae{};
  std::array<double, scene::kJointCount> baseline_mae{};
  JointSet outliers;
  JointSet retained;
  AxisError axis;
  AxisError baseline_axis;
  std::vector<std::vector<double>> frame_errors;
  std::vector<std::vector<double>> baseline_frame_errors;
  double mean_error = 0.0;           ///< over retained joints and frames, m
  double baseline_mean_error = 0.0;
  Cdf cdf;                           ///< both CDFs share one abscissa grid
  Cdf baseline_cdf;
};

/// Full protocol: outliers from the model's own per-joint MAE, then every
/// metric over the retained joints for both the model and the baseline.
EvalReport evaluate(const Poses& preds, const Poses& truths, const BaselinePredictor& baseline,
                    std::size_t outlier_count = 8);

std::string report_json(const EvalReport& r);
/// Writes report.json plus mae.csv, frame_errors.csv and cdf.csv into dir.
void write_report(const EvalReport& r, const std::filesystem::path& dir);

}  // namespace mmpose::eval
