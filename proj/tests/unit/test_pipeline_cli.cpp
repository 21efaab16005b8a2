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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmpose/cli.hpp"
#include "mmpose/dataset.hpp"
#include "mmpose/errors.hpp"
#include "mmpose/pipeline.hpp"

#include <json.hpp>

using namespace mmpose;
using namespace mmpose::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<scene::DatasetRecord> records(std::size_t n) {
  auto r = scene::simulate_session(scene::MotionClass::BothArmsSwing,
                                   static_cast<double>(n) / 20.0, 20.0, 17);
  r.resize(n);
  return r;
}

int run(const std::vector<std::string>& args, std::string* out = nullptr,
        std::string* err = nullptr) {
  std::ostringstream o, e;
  const int rc = cli::cli_dispatch(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

}  // namespace

TEST_CASE("dataset lines round trip") {
  TempDir dir("mmpose_ds_test");
  const auto recs = records(100);
  data::dataset_write(recs, dir.path / "d.jsonl");
  const auto back = data::dataset_read(dir.path / "d.jsonl");
  REQUIRE(back.size() == 100);
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].truth.timestamp_us == recs[i].truth.timestamp_us);
    CHECK(back[i].truth.joints == recs[i].truth.joints);
    CHECK(back[i].radar_xy.points == recs[i].radar_xy.points);
    CHECK(back[i].radar_xz.points == recs[i].radar_xz.points);
    CHECK(back[i].radar_xz.timestamp_us == recs[i].radar_xz.timestamp_us);
    CHECK(back[i].motion == recs[i].motion);
  }

  std::ofstream(dir.path / "empty.jsonl").close();
  CHECK(data::dataset_read(dir.path / "empty.jsonl").empty());
}

TEST_CASE("dataset diagnostics name the defect and the line") {
  const std::string good = data::format_record(records(1)[0]);
  auto doc = nlohmann::json::parse(good);
  doc["truth"].erase(doc["truth"].size() - 1);
  try {
    data::parse_record(doc.dump(), 3);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("24") != std::string::npos);
  }

  auto missing = nlohmann::json::parse(good);
  missing.erase("r2");
  CHECK_THROWS_AS(data::parse_record(missing.dump()), SchemaError);

  TempDir dir("mmpose_ds_bad");
  {
    std::ofstream f(dir.path / "bad.jsonl");
    f << good << "\n" << good << "\n{\"ts_us\": 1,\n";
  }
  try {
    data::dataset_read(dir.path / "bad.jsonl");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find('3') != std::string::npos);
  }
}

TEST_CASE("encoded sample files round trip") {
  TempDir dir("mmpose_samples");
  const auto norm = encoder::compute_norm(scene::SceneBounds{});
  const auto samples = data::encode_records(records(10), norm);
  data::write_samples(samples, dir.path / "s.bin");
  CHECK(data::is_sample_file(dir.path / "s.bin"));
  const auto back = data::read_samples(dir.path / "s.bin");
  REQUIRE(back.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(back[i].xy.pixels == samples[i].xy.pixels);
    CHECK(back[i].xz.pixels == samples[i].xz.pixels);
    CHECK(back[i].target == samples[i].target);
    CHECK(back[i].world == samples[i].world);
  }

  const auto size = fs::file_size(dir.path / "s.bin");
  fs::resize_file(dir.path / "s.bin", size - 10);
  CHECK_THROWS_AS(data::read_samples(dir.path / "s.bin"), TruncationError);
}

TEST_CASE("pipeline keeps every frame in order") {
  const auto norm = encoder::compute_norm(scene::SceneBounds{});
  const auto recs = records(100);
  const Predictor truth_fed = [&](const ImagePair& p) {
    return encoder::normalize_skeleton(recs.at(p.seq).truth, norm);
  };
  PipelineOptions opts;
  opts.fps = 0.0;
  const auto res = run_pipeline(recs, truth_fed, norm, opts);
  CHECK(res.emitted == 100);
  REQUIRE(res.outputs.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(res.outputs[i].seq == i);
    CHECK(res.outputs[i].timestamp_us == recs[i].truth.timestamp_us);
    for (std::size_t j = 0; j < scene::kJointCount; ++j) {
      CHECK(scene::distance(res.outputs[i].skeleton.joints[j], recs[i].truth.joints[j]) < 1e-6);
    }
  }
  CHECK(res.max_queue_depth <= opts.queue_capacity);
}

TEST_CASE("pipeline handles empty input and slow stages") {
  const auto norm = encoder::compute_norm(scene::SceneBounds{});
  const Predictor zero = [](const ImagePair&) { return encoder::JointVector{}; };
  CHECK(run_pipeline({}, zero, norm).outputs.empty());

  const auto recs = records(30);
  PipelineOptions opts;
  opts.fps = 0.0;
  opts.queue_capacity = 2;
  opts.stage_delay[2] = std::chrono::milliseconds(3);
  const auto res = run_pipeline(recs, zero, norm, opts);
  REQUIRE(res.outputs.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) CHECK(res.outputs[i].seq == i);
  CHECK(res.max_queue_depth <= 2);

  CHECK_THROWS_AS(run_pipeline(recs, Predictor{}, norm), DomainError);
}

TEST_CASE("pipeline paced at 20 fps takes about the stream length") {
  const auto norm = encoder::compute_norm(scene::SceneBounds{});
  const Predictor zero = [](const ImagePair&) { return encoder::JointVector{}; };
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_pipeline(records(10), zero, norm);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(res.outputs.size() == 10);
  CHECK(s >= 0.45);
}

TEST_CASE("pipeline surfaces stage failures") {
  const auto norm = encoder::compute_norm(scene::SceneBounds{});
  const Predictor broken = [](const ImagePair& p) -> encoder::JointVector {
    if (p.seq == 5) throw std::runtime_error("boom");
    return {};
  };
  PipelineOptions opts;
  opts.fps = 0.0;
  opts.queue_capacity = 1;
  CHECK_THROWS_WITH(run_pipeline(records(40), broken, norm, opts), "boom");
}

TEST_CASE("cli simulate writes one record per frame") {
  TempDir dir("mmpose_cli_sim");
  const auto out = (dir.path / "walk.jsonl").string();
  CHECK(run({"simulate", "--class", "walking", "--duration", "10", "--fps", "20", "--seed", "1",
             "--out", out}) == cli::kExitOk);
  const auto recs = data::dataset_read(out);
  CHECK(recs.size() == 200);
  for (const auto& r : recs) CHECK(r.motion == scene::MotionClass::Walking);
}

TEST_CASE("cli usage and runtime errors") {
  std::string out, err;
  CHECK(run({"eval", "--test", "x", "--train", "y", "--report", "z"}, &out, &err) ==
        cli::kExitUsage);
  CHECK(err.find("checkpoint") != std::string::npos);

  CHECK(run({"simulate", "--bogus"}, &out, &err) == cli::kExitUsage);
  CHECK(run({"nonsense"}, &out, &err) == cli::kExitUsage);
  CHECK(run({}, &out, &err) == cli::kExitUsage);

  CHECK(run({"encode", "--in", "/nonexistent/file.jsonl", "--out", "/tmp/x.bin"}, &out, &err) ==
        cli::kExitFailure);
  CHECK(err.find("/nonexistent/file.jsonl") != std::string::npos);

  CHECK(run({"--help"}, &out, &err) == cli::kExitOk);
  CHECK(out.find("simulate") != std::string::npos);
}

TEST_CASE("cli dsp demo finds a single target") {
  std::string out;
  CHECK(run({"dsp-demo", "--range", "5"}, &out) == cli::kExitOk);
  CHECK(out.find("detections 1\n") != std::string::npos);
}
