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

#include "mmpose/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "mmpose/errors.hpp"

namespace mmpose::eval {

namespace {

constexpr std::size_t kJoints = scene::kJointCount;

void check_aligned(const Poses& preds, const Poses& truths) {
  if (preds.size() != truths.size()) {
    throw StructuralError("prediction and truth frame counts differ: " +
                          std::to_string(preds.size()) + " vs " + std::to_string(truths.size()));
  }
}

double max_of(const std::vector<std::vector<double>>& rows) {
  double m = 0.0;
  for (const auto& r : rows) {
    for (double v : r) m = std::max(m, v);
  }
  return m;
}

std::vector<double> flat(const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

nlohmann::json axis_json(const AxisError& a) {
  return {{"depth_m", a.depth}, {"elevation_m", a.elevation}, {"azimuth_m", a.azimuth}};
}

nlohmann::json joint_names(const JointSet& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto j : s) arr.push_back(std::string(scene::joint_name(j)));
  return arr;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.precision(9);
  return out;
}

}  // namespace

std::array<double, kJoints> mae_per_joint(const Poses& preds, const Poses& truths) {
  check_aligned(preds, truths);
  std::array<double, kJoints> mae{};
  if (preds.empty()) return mae;
  for (std::size_t f = 0; f < preds.size(); ++f) {
    for (std::size_t j = 0; j < kJoints; ++j) {
      for (std::size_t a = 0; a < 3; ++a) {
        mae[j] += std::abs(preds[f][3 * j + a] - truths[f][3 * j + a]);
      }
    }
  }
  for (double& m : mae) m /= 3.0 * static_cast<double>(preds.size());
  return mae;
}

JointSet identify_outliers(const std::array<double, kJoints>& mae, std::size_t k) {
  if (k >= kJoints) throw DomainError("outlier count must be below the joint count");
  std::array<std::size_t, kJoints> idx{};
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return mae[a] > mae[b]; });
  JointSet out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(static_cast<scene::JointId>(idx[i]));
  std::sort(out.begin(), out.end());
  return out;
}

JointSet retained_joints(const JointSet& excluded) {
  JointSet out;
  for (std::size_t j = 0; j < kJoints; ++j) {
    const auto id = static_cast<scene::JointId>(j);
    if (std::find(excluded.begin(), excluded.end(), id) == excluded.end()) out.push_back(id);
  }
  return out;
}

AxisError per_axis_error(const Poses& preds, const Poses& truths, const JointSet& retained) {
  check_aligned(preds, truths);
  if (retained.empty()) throw DomainError("per-axis error needs at least one retained joint");
  AxisError e;
  if (preds.empty()) return e;
  for (std::size_t f = 0; f < preds.size(); ++f) {
    for (auto id : retained) {
      const auto j = static_cast<std::size_t>(id);
      e.depth += std::abs(preds[f][3 * j] - truths[f][3 * j]);
      e.azimuth += std::abs(preds[f][3 * j + 1] - truths[f][3 * j + 1]);
      e.elevation += std::abs(preds[f][3 * j + 2] - truths[f][3 * j + 2]);
    }
  }
  const double n = static_cast<double>(preds.size() * retained.size());
  e.depth /= n;
  e.azimuth /= n;
  e.elevation /= n;
  return e;
}

BaselinePredictor baseline_predictor(const Poses& train_truths) {
  if (train_truths.empty()) throw DomainError("baseline needs at least one training pose");
  JointVector mean{};
  for (const auto& t : train_truths) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += t[i];
  }
  for (double& m : mean) m /= static_cast<double>(train_truths.size());
  return BaselinePredictor(mean);
}

std::vector<std::vector<double>> euclid_series(const Poses& preds, const Poses& truths,
                                               const JointSet& retained) {
  check_aligned(preds, truths);
  std::vector<std::vector<double>> out(preds.size(), std::vector<double>(retained.size()));
  for (std::size_t f = 0; f < preds.size(); ++f) {
    for (std::size_t i = 0; i < retained.size(); ++i) {
      const auto j = static_cast<std::size_t>(retained[i]);
      const double dx = preds[f][3 * j] - truths[f][3 * j];
      const double dy = preds[f][3 * j + 1] - truths[f][3 * j + 1];
      const double dz = preds[f][3 * j + 2] - truths[f][3 * j + 2];
      out[f][i] = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  }
  return out;
}

Cdf error_cdf(const std::vector<double>& errors, double x_max) {
  if (errors.empty()) throw DomainError("CDF of an empty error list");
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  if (x_max < 0.0) x_max = sorted.back();
  Cdf cdf;
  cdf.abscissae.resize(kCdfPoints);
  cdf.values.resize(kCdfPoints);
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < kCdfPoints; ++i) {
    // The last abscissa is x_max exactly, so CDF(max) is 1.
    const double x = i + 1 == kCdfPoints ? x_max
                                         : x_max * static_cast<double>(i) / (kCdfPoints - 1);
    cdf.abscissae[i] = x;
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    cdf.values[i] = static_cast<double>(below) / n;
  }
  return cdf;
}

EvalReport evaluate(const Poses& preds, const Poses& truths, const BaselinePredictor& baseline,
                    std::size_t outlier_count) {
  check_aligned(preds, truths);
  if (preds.empty()) throw DomainError("evaluation needs at least one frame");
  const Poses base = baseline.predict(truths.size());
  EvalReport r;
  r.mae = mae_per_joint(preds, truths);
  r.baseline_mae = mae_per_joint(base, truths);
  r.outliers = identify_outliers(r.mae, outlier_count);
  r.retained = retained_joints(r.outliers);
  r.axis = per_axis_error(preds, truths, r.retained);
  r.baseline_axis = per_axis_error(base, truths, r.retained);
  r.frame_errors = euclid_series(preds, truths, r.retained);
  r.baseline_frame_errors = euclid_series(base, truths, r.retained);
  const auto model_flat = flat(r.frame_errors);
  const auto base_flat = flat(r.baseline_frame_errors);
  r.mean_error = mean_of(model_flat);
  r.baseline_mean_error = mean_of(base_flat);
  const double x_max = std::max(max_of(r.frame_errors), max_of(r.baseline_frame_errors));
  r.cdf = error_cdf(model_flat, x_max);
  r.baseline_cdf = error_cdf(base_flat, x_max);
  return r;
}

std::string report_json(const EvalReport& r) {
  nlohmann::json j;
  nlohmann::json joints = nlohmann::json::array();
  for (std::size_t i = 0; i < kJoints; ++i) {
    joints.push_back({{"joint", std::string(scene::joint_name(static_cast<scene::JointId>(i)))},
                      {"mae_m", r.mae[i]},
                      {"baseline_mae_m", r.baseline_mae[i]}});
  }
  j["per_joint"] = joints;
  j["outliers"] = joint_names(r.outliers);
  j["retained"] = joint_names(r.retained);
  j["axis_error"] = axis_json(r.axis);
  j["baseline_axis_error"] = axis_json(r.baseline_axis);
  j["mean_euclidean_error_m"] = r.mean_error;
  j["baseline_mean_euclidean_error_m"] = r.baseline_mean_error;
  j["frames"] = r.frame_errors.size();
  j["cdf"] = {{"abscissae_m", r.cdf.abscissae},
              {"model", r.cdf.values},
              {"baseline", r.baseline_cdf.values}};
  return j.dump(2);
}

void write_report(const EvalReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  open_out(dir / "report.json") << report_json(r) << '\n';

  auto mae = open_out(dir / "mae.csv");
  mae << "joint_index,joint,mae_m,baseline_mae_m,outlier\n";
  for (std::size_t i = 0; i < kJoints; ++i) {
    const auto id = static_cast<scene::JointId>(i);
    const bool outlier = std::find(r.outliers.begin(), r.outliers.end(), id) != r.outliers.end();
    mae << i << ',' << scene::joint_name(id) << ',' << r.mae[i] << ',' << r.baseline_mae[i] << ','
        << (outlier ? 1 : 0) << '\n';
  }

  auto frames = open_out(dir / "frame_errors.csv");
  frames << "frame,joint,model_m,baseline_m\n";
  for (std::size_t f = 0; f < r.frame_errors.size(); ++f) {
    for (std::size_t i = 0; i < r.retained.size(); ++i) {
      frames << f << ',' << scene::joint_name(r.retained[i]) << ',' << r.frame_errors[f][i] << ','
             << r.baseline_frame_errors[f][i] << '\n';
    }
  }

  auto cdf = open_out(dir / "cdf.csv");
  cdf << "error_m,model,baseline\n";
  for (std::size_t i = 0; i < r.cdf.abscissae.size(); ++i) {
    cdf << r.cdf.abscissae[i] << ',' << r.cdf.values[i] << ',' << r.baseline_cdf.values[i] << '\n';
  }
}

}  // namespace mmpose::eval
