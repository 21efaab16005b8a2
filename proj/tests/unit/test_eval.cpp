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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mmpose/errors.hpp"
#include "mmpose/eval.hpp"
#include "mmpose/rng.hpp"

using namespace mmpose;
using namespace mmpose::eval;
using scene::JointId;
using doctest::Approx;

namespace {

Poses random_poses(std::size_t n, Rng& rng) {
  Poses p(n);
  for (auto& f : p) {
    for (double& v : f) v = rng.uniform(-2.0, 2.0);
  }
  return p;
}

std::size_t idx(JointId j) { return static_cast<std::size_t>(j); }

}  // namespace

TEST_CASE("per-joint mean absolute error") {
  Rng rng(1);
  const Poses truth = random_poses(20, rng);
  const auto zero = mae_per_joint(truth, truth);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));

  Poses pred = truth;
  for (auto& f : pred) f[3 * idx(JointId::Head)] += 0.01;
  const auto mae = mae_per_joint(pred, truth);
  for (std::size_t j = 0; j < scene::kJointCount; ++j) {
    CHECK(mae[j] == Approx(j == idx(JointId::Head) ? 0.01 / 3.0 : 0.0).epsilon(1e-9));
  }

  Poses noisy = random_poses(20, rng);
  const auto before = mae_per_joint(noisy, truth);
  Poses t2 = truth;
  std::reverse(noisy.begin(), noisy.end());
  std::reverse(t2.begin(), t2.end());
  const auto after = mae_per_joint(noisy, t2);
  for (std::size_t j = 0; j < scene::kJointCount; ++j) CHECK(after[j] == Approx(before[j]));

  CHECK_THROWS_AS(mae_per_joint(Poses(3), Poses(2)), StructuralError);
}

TEST_CASE("outlier joints are the largest errors") {
  std::array<double, scene::kJointCount> mae{};
  for (std::size_t j = 0; j < mae.size(); ++j) mae[j] = 0.01 + 0.001 * static_cast<double>(j % 5);
  for (JointId h : scene::hand_joints()) mae[idx(h)] = 0.2;

  CHECK(identify_outliers(mae, 0).empty());

  auto out = identify_outliers(mae, 8);
  auto hands = JointSet(scene::hand_joints().begin(), scene::hand_joints().end());
  std::sort(hands.begin(), hands.end());
  CHECK(out == hands);
  CHECK(retained_joints(out).size() == 17);

  std::array<double, scene::kJointCount> ranked{};
  for (std::size_t j = 0; j < ranked.size(); ++j) ranked[j] = 1.0 + static_cast<double>(j);
  ranked[7] = 0.5;
  out = identify_outliers(ranked, 24);
  CHECK(out.size() == 24);
  CHECK(std::find(out.begin(), out.end(), static_cast<JointId>(7)) == out.end());
  CHECK_THROWS_AS(identify_outliers(ranked, 25), DomainError);

  // Ties go to the lower index.
  std::array<double, scene::kJointCount> flat{};
  flat.fill(1.0);
  CHECK(identify_outliers(flat, 2) == JointSet{JointId::SpineBase, JointId::SpineMid});
}

TEST_CASE("per-axis error") {
  Rng rng(2);
  const Poses truth = random_poses(10, rng);
  const auto all = retained_joints({});
  const auto zero = per_axis_error(truth, truth, all);
  CHECK(zero.depth == 0.0);
  CHECK(zero.elevation == 0.0);
  CHECK(zero.azimuth == 0.0);

  Poses pred = truth;
  for (auto& f : pred) {
    for (std::size_t j = 0; j < scene::kJointCount; ++j) f[3 * j + 1] += 0.02;
  }
  const auto e = per_axis_error(pred, truth, all);
  CHECK(e.depth == Approx(0.0));
  CHECK(e.elevation == Approx(0.0));
  CHECK(e.azimuth == Approx(0.02).epsilon(1e-9));
  CHECK_THROWS_AS(per_axis_error(pred, truth, {}), DomainError);
}

TEST_CASE("mean baseline") {
  Rng rng(3);
  const Poses one = random_poses(1, rng);
  CHECK(baseline_predictor(one).predict() == one[0]);

  Poses sym = random_poses(1, rng);
  sym.push_back(sym[0]);
  for (double& v : sym[1]) v = -v;
  for (double v : baseline_predictor(sym).predict()) CHECK(v == Approx(0.0));

  const Poses constant(5, one[0]);
  const auto base = baseline_predictor(constant);
  const auto r = evaluate(base.predict(5), constant, base);
  CHECK(r.baseline_mean_error == 0.0);
  CHECK_THROWS_AS(baseline_predictor({}), DomainError);
}

TEST_CASE("euclidean error series") {
  Rng rng(4);
  const Poses truth = random_poses(3, rng);
  const auto all = retained_joints({});
  for (const auto& row : euclid_series(truth, truth, all)) {
    for (double v : row) CHECK(v == 0.0);
  }

  Poses pred = truth;
  pred[0][0] += 0.03;
  pred[0][1] += 0.04;
  pred[1][3] += 0.01;
  pred[1][4] += 0.01;
  pred[1][5] += 0.01;
  const auto e = euclid_series(pred, truth, all);
  REQUIRE(e.size() == 3);
  REQUIRE(e[0].size() == 25);
  CHECK(e[0][0] == Approx(0.05).epsilon(1e-9));
  CHECK(e[1][1] == Approx(std::sqrt(3.0) * 0.01).epsilon(1e-9));

  const JointSet some{JointId::SpineMid};
  const auto s = euclid_series(pred, truth, some);
  CHECK(s[1].size() == 1);
  CHECK(s[1][0] == Approx(std::sqrt(3.0) * 0.01).epsilon(1e-9));
}

TEST_CASE("error distribution") {
  const auto step = error_cdf({0.02, 0.02, 0.02});
  REQUIRE(step.values.size() == kCdfPoints);
  CHECK(step.abscissae.back() == 0.02);
  CHECK(step.values.back() == 1.0);
  for (std::size_t i = 0; i + 1 < kCdfPoints; ++i) CHECK(step.values[i] == 0.0);

  const auto c = error_cdf({0.01, 0.02, 0.03, 0.04}, 0.0495);
  // Abscissa i sits at i * 0.0005, so index 50 is 2.5 cm.
  CHECK(c.abscissae[50] == Approx(0.025));
  CHECK(c.values[50] == 0.5);
  CHECK(c.values.back() == 1.0);
  CHECK(std::is_sorted(c.values.begin(), c.values.end()));
  CHECK(error_cdf({0.01, 0.02, 0.03, 0.04}).values.back() == 1.0);
  CHECK_THROWS_AS(error_cdf({}), DomainError);
}

TEST_CASE("full evaluation report") {
  Rng rng(5);
  const Poses truth = random_poses(30, rng);
  Poses pred = truth;
  for (auto& f : pred) {
    for (double& v : f) v += rng.uniform(-0.01, 0.01);
    for (JointId h : scene::hand_joints()) f[3 * idx(h)] += 0.3;
  }
  const auto base = baseline_predictor(random_poses(50, rng));
  const auto r = evaluate(pred, truth, base);
  CHECK(r.outliers.size() == 8);
  CHECK(r.retained.size() == 17);
  CHECK(r.mean_error < 0.5 * r.baseline_mean_error);
  CHECK(r.cdf.abscissae == r.baseline_cdf.abscissae);
  CHECK(r.cdf.values.back() == 1.0);
  CHECK(r.baseline_cdf.values.back() == 1.0);
  for (std::size_t i = 0; i < kCdfPoints; ++i) CHECK(r.cdf.values[i] >= r.baseline_cdf.values[i]);

  const auto doc = nlohmann::json::parse(report_json(r));
  CHECK(doc.at("outliers").size() == 8);
  CHECK(doc.at("per_joint").size() == 25);
  CHECK(doc.at("mean_euclidean_error_m").get<double>() == r.mean_error);

  const auto dir = std::filesystem::temp_directory_path() / "mmpose_eval_test";
  write_report(r, dir);
  for (const char* f : {"report.json", "mae.csv", "frame_errors.csv", "cdf.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(evaluate(pred, Poses(29), base), StructuralError);
  CHECK_THROWS_AS(evaluate({}, {}, base), DomainError);
}
