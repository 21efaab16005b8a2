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

#include "mmpose/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmpose/checkpoint.hpp"
#include "mmpose/dataset.hpp"
#include "mmpose/errors.hpp"
#include "mmpose/eval.hpp"
#include "mmpose/pipeline.hpp"
#include "mmpose/radar.hpp"
#include "mmpose/train.hpp"

namespace mmpose::cli {

namespace fs = std::filesystem;

namespace {

// Raised for inputs that do not exist; maps to exit status 1.
struct MissingFile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw MissingFile("no such file: " + path);
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

encoder::NormalizationParams norm_or_default(const std::string& path) {
  if (path.empty()) return encoder::compute_norm(scene::SceneBounds{});
  require_file(path);
  return encoder::load_norm(path);
}

std::vector<data::EncodedSample> samples_from(const std::string& path,
                                              const encoder::NormalizationParams& norm) {
  require_file(path);
  return data::load_samples(path, norm);
}

struct SimulateArgs {
  std::string motion = "walking";
  double duration = 10.0;
  double session = 0.0;  // 0: one session per class
  double fps = 20.0;
  std::uint64_t seed = 0;
  std::string out;
  bool full_dsp = false;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  std::vector<scene::MotionClass> classes;
  if (a.motion == "all") {
    classes.assign(scene::kMotionClasses.begin(), scene::kMotionClasses.end());
  } else {
    const auto m = scene::parse_motion(a.motion);
    if (!m) throw DomainError("unknown motion class '" + a.motion + "'");
    classes.push_back(*m);
  }
  scene::SessionOptions opts;
  opts.full_dsp = a.full_dsp;
  std::vector<scene::DatasetRecord> records;
  for (auto m : classes) {
    const auto k = static_cast<std::uint64_t>(m);
    const double session = a.session > 0.0 ? a.session : a.duration;
    auto part = scene::simulate_sessions(m, a.duration, session, a.fps,
                                         scene::mix_seed(a.seed, k), opts);
    records.insert(records.end(), part.begin(), part.end());
  }
  data::dataset_write(records, a.out);
  out << "wrote " << records.size() << " records to " << a.out << '\n';
  return kExitOk;
}

struct EncodeArgs {
  std::string in, out, norm;
  std::size_t side = 16;
};

int run_encode(const EncodeArgs& a, std::ostream& out) {
  require_file(a.in);
  const auto norm = encoder::compute_norm(scene::SceneBounds{});
  encoder::EncodeStats stats;
  const auto samples = data::encode_records(data::dataset_read(a.in), norm, a.side, &stats);
  data::write_samples(samples, a.out);
  if (!a.norm.empty()) encoder::save_norm(norm, a.norm);
  out << "encoded " << samples.size() << " samples (" << stats.clamped << " values clamped) to "
      << a.out << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string train, val, norm, checkpoint, history;
  std::size_t epochs = 200;
  std::size_t batch = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a, std::ostream& out) {
  const auto norm = norm_or_default(a.norm);
  const auto train_set = data::training_set(samples_from(a.train, norm));
  const auto val_set = data::training_set(samples_from(a.val, norm));

  nn::TrainConfig cfg;
  cfg.adam.learning_rate = a.lr;
  cfg.batch_size = a.batch;
  cfg.max_epochs = a.epochs;
  cfg.seed = a.seed;
  nn::ModelConfig arch = nn::ModelConfig::standard();
  arch.side = train_set.side();
  nn::ForkedModel model(arch, scene::mix_seed(a.seed, 0x6d6f64656cULL));

  std::ofstream hist;
  if (!a.history.empty()) {
    hist.open(a.history, std::ios::binary);
    if (!hist) throw std::runtime_error("cannot write " + a.history);
    hist << "epoch,train_loss,val_loss,checkpointed\n";
  }
  const auto result = nn::train(model, train_set, val_set, cfg, [&](const nn::EpochLoss& e) {
    out << "epoch " << e.epoch << " train=" << fmt(e.train, "%.6e")
        << " val=" << fmt(e.val, "%.6e") << (e.improved ? " *" : "") << std::endl;
    if (hist) {
      hist << e.epoch << ',' << fmt(e.train, "%.17g") << ',' << fmt(e.val, "%.17g") << ','
           << (e.improved ? 1 : 0) << '\n';
    }
  });
  nn::save_checkpoint(result.best, a.checkpoint);
  out << "best epoch " << result.best.epoch << " val=" << fmt(result.best.best_val_loss, "%.6e")
      << " saved to " << a.checkpoint << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, test, train, norm, report;
  std::size_t outliers = 8;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  require_file(a.checkpoint);
  const auto norm = norm_or_default(a.norm);
  const auto model = nn::model_from_checkpoint(nn::load_checkpoint(a.checkpoint));
  const auto test = samples_from(a.test, norm);
  const auto train = samples_from(a.train, norm);
  if (test.empty()) throw DomainError("test set is empty");

  eval::Poses preds;
  for (const auto& p : nn::predict(model, data::training_set(test))) {
    preds.push_back(encoder::flatten_skeleton(encoder::denormalize_skeleton(p, norm)));
  }
  const auto baseline = eval::baseline_predictor(data::world_truths(train));
  const auto report = eval::evaluate(preds, data::world_truths(test), baseline, a.outliers);
  eval::write_report(report, a.report);

  out << "frames " << test.size() << ", retained joints " << report.retained.size() << '\n';
  out << "mean 3-D error  model " << fmt(100 * report.mean_error, "%.2f") << " cm, baseline "
      << fmt(100 * report.baseline_mean_error, "%.2f") << " cm\n";
  out << "axis error (cm) depth " << fmt(100 * report.axis.depth, "%.2f") << " elevation "
      << fmt(100 * report.axis.elevation, "%.2f") << " azimuth "
      << fmt(100 * report.axis.azimuth, "%.2f") << '\n';
  out << "outliers:";
  for (auto j : report.outliers) out << ' ' << scene::joint_name(j);
  out << "\nreport written to " << a.report << '\n';
  return kExitOk;
}

struct InferArgs {
  std::string checkpoint, record, norm;
  std::size_t index = 0;
};

int run_infer(const InferArgs& a, std::ostream& out) {
  require_file(a.checkpoint);
  require_file(a.record);
  const auto norm = norm_or_default(a.norm);
  const auto records = data::dataset_read(a.record);
  if (a.index >= records.size()) {
    throw DomainError("record index " + std::to_string(a.index) + " out of range (" +
                      std::to_string(records.size()) + " records)");
  }
  const auto model = nn::model_from_checkpoint(nn::load_checkpoint(a.checkpoint));
  const auto s = data::encode_record(records[a.index], norm, model.config().side);
  const auto joints =
      encoder::denormalize_skeleton(model.forward(s.xy, s.xz, nn::Mode::Infer), norm,
                                    s.timestamp_us);
  for (std::size_t j = 0; j < scene::kJointCount; ++j) {
    const auto& p = joints.joints[j];
    out << scene::joint_name(static_cast<scene::JointId>(j)) << ' ' << fmt(p.x) << ' '
        << fmt(p.y) << ' ' << fmt(p.z) << '\n';
  }
  return kExitOk;
}

struct PipelineArgs {
  std::string checkpoint, source, norm, report;
  double fps = 20.0;
  std::size_t queue = 8;
};

int run_pipeline_cmd(const PipelineArgs& a, std::ostream& out) {
  require_file(a.checkpoint);
  require_file(a.source);
  const auto norm = norm_or_default(a.norm);
  const auto model = nn::model_from_checkpoint(nn::load_checkpoint(a.checkpoint));
  const auto records = data::dataset_read(a.source);
  pipeline::PipelineOptions opts;
  opts.fps = a.fps;
  opts.queue_capacity = a.queue;
  opts.side = model.config().side;
  const auto res = pipeline::run_pipeline(records, pipeline::model_predictor(model), norm, opts);
  const auto lat = res.latency();
  out << "frames in " << res.emitted << ", out " << res.outputs.size() << '\n';
  out << "median encode+infer " << fmt(lat.median_encode_infer_ms, "%.3f") << " ms, median end-to-end "
      << fmt(lat.median_end_to_end_ms, "%.3f") << " ms, max end-to-end "
      << fmt(lat.max_end_to_end_ms, "%.3f") << " ms\n";
  if (!a.report.empty()) {
    nlohmann::json frames = nlohmann::json::array();
    for (std::size_t i = 0; i < res.outputs.size(); ++i) {
      frames.push_back({{"seq", res.outputs[i].seq},
                        {"ts_us", res.outputs[i].timestamp_us},
                        {"encode_ms", res.timings[i].encode_ms},
                        {"infer_ms", res.timings[i].infer_ms},
                        {"end_to_end_ms", res.timings[i].end_to_end_ms}});
    }
    nlohmann::json j = {{"frames_in", res.emitted},
                        {"frames_out", res.outputs.size()},
                        {"median_encode_infer_ms", lat.median_encode_infer_ms},
                        {"median_end_to_end_ms", lat.median_end_to_end_ms},
                        {"max_end_to_end_ms", lat.max_end_to_end_ms},
                        {"max_queue_depth", res.max_queue_depth},
                        {"frames", frames}};
    std::ofstream f(a.report, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + a.report);
    f << j.dump(2) << '\n';
  }
  return kExitOk;
}

struct DspArgs {
  double range = 5.0;
  double velocity = 0.0;
  double angle_deg = 0.0;
  double rcs = 0.0;
  double snr_db = std::numeric_limits<double>::infinity();
  double threshold = 0.25;
  std::uint64_t seed = 0;
};

int run_dsp_demo(const DspArgs& a, std::ostream& out) {
  const auto cfg = radar::default_chirp();
  radar::SynthesisOptions so;
  so.snr_db = a.snr_db;
  so.seed = a.seed;
  const radar::PointTarget t{a.range, a.velocity, a.angle_deg * std::numbers::pi / 180.0, a.rcs};
  const auto cube = radar::synthesize_baseband(cfg, {t}, so);
  const auto dets = radar::process_cube(cube, cfg, a.threshold);
  out << "range resolution " << fmt(100 * radar::range_resolution(cfg), "%.4f")
      << " cm, velocity resolution " << fmt(100 * radar::velocity_resolution(cfg), "%.4f")
      << " cm/s\n";
  out << "detections " << dets.size() << '\n';
  for (const auto& d : dets) {
    out << "range=" << fmt(d.range, "%.4f") << " m velocity=" << fmt(d.velocity, "%.4f")
        << " m/s angle=" << fmt(d.angle * 180.0 / std::numbers::pi, "%.3f")
        << " deg power=" << fmt(d.power, "%.4f") << '\n';
  }
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mmpose: radar pose estimation toolkit", "mmpose"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a two-radar dataset (JSON lines)");
  simulate->add_option("--class", sim.motion, "walking, left_arm_swing, right_arm_swing, both_arms_swing or all");
  simulate->add_option("--duration", sim.duration, "Seconds per motion class")->check(CLI::PositiveNumber);
  simulate->add_option("--session", sim.session,
                       "Seconds per independent session; default one session per class")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--fps", sim.fps, "Frame rate")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--out", sim.out, "Output dataset")->required();
  simulate->add_flag("--full-dsp", sim.full_dsp, "Run every frame through the full radar chain");

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Encode a dataset into radar images");
  encode->add_option("--in", enc.in, "Input dataset")->required();
  encode->add_option("--out", enc.out, "Output sample file")->required();
  encode->add_option("--norm", enc.norm, "Normalization sidecar to write");
  encode->add_option("--side", enc.side, "Image side")->check(CLI::PositiveNumber);

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train the forked CNN");
  train->add_option("--train", tr.train, "Training data (dataset or sample file)")->required();
  train->add_option("--val", tr.val, "Validation data")->required();
  train->add_option("--norm", tr.norm, "Normalization sidecar");
  train->add_option("--checkpoint", tr.checkpoint, "Checkpoint to write")->required();
  train->add_option("--history", tr.history, "Per-epoch loss CSV to write");
  train->add_option("--epochs", tr.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  train->add_option("--batch", tr.batch, "Minibatch size")->check(CLI::PositiveNumber);
  train->add_option("--lr", tr.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  train->add_option("--seed", tr.seed, "Random seed");

  EvalArgs ev;
  auto* evaluate = app.add_subcommand("eval", "Evaluate a checkpoint against the mean baseline");
  evaluate->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  evaluate->add_option("--test", ev.test, "Test data")->required();
  evaluate->add_option("--train", ev.train, "Training data for the baseline")->required();
  evaluate->add_option("--norm", ev.norm, "Normalization sidecar");
  evaluate->add_option("--report", ev.report, "Report directory")->required();
  evaluate->add_option("--outliers", ev.outliers, "Joints to exclude as outliers");

  InferArgs inf;
  auto* infer = app.add_subcommand("infer", "Predict the skeleton for one record");
  infer->add_option("--checkpoint", inf.checkpoint, "Model checkpoint")->required();
  infer->add_option("--record", inf.record, "Dataset holding the record")->required();
  infer->add_option("--index", inf.index, "Record index (0-based)");
  infer->add_option("--norm", inf.norm, "Normalization sidecar");

  PipelineArgs pl;
  auto* pipe = app.add_subcommand("pipeline", "Stream a dataset through the four-stage pipeline");
  pipe->add_option("--checkpoint", pl.checkpoint, "Model checkpoint")->required();
  pipe->add_option("--source", pl.source, "Dataset to replay")->required();
  pipe->add_option("--norm", pl.norm, "Normalization sidecar");
  pipe->add_option("--fps", pl.fps, "Source frame rate, 0 for unpaced")->check(CLI::NonNegativeNumber);
  pipe->add_option("--queue", pl.queue, "Queue capacity per stage")->check(CLI::PositiveNumber);
  pipe->add_option("--report", pl.report, "Latency report (JSON) to write");

  DspArgs dsp;
  auto* demo = app.add_subcommand("dsp-demo", "Run one point target through the radar chain");
  demo->add_option("--range", dsp.range, "Target range (m)");
  demo->add_option("--velocity", dsp.velocity, "Radial velocity (m/s), positive approaching");
  demo->add_option("--angle", dsp.angle_deg, "Angle of arrival (deg)");
  demo->add_option("--rcs", dsp.rcs, "Radar cross section (dBsm)");
  demo->add_option("--snr", dsp.snr_db, "SNR (dB); noiseless when omitted");
  demo->add_option("--threshold", dsp.threshold, "Detection threshold relative to the peak");
  demo->add_option("--seed", dsp.seed, "Noise seed");

  std::vector<const char*> argv{"mmpose"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim, out);
    if (*encode) return run_encode(enc, out);
    if (*train) return run_train(tr, out);
    if (*evaluate) return run_eval(ev, out);
    if (*infer) return run_infer(inf, out);
    if (*pipe) return run_pipeline_cmd(pl, out);
    if (*demo) return run_dsp_demo(dsp, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int cli_dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace mmpose::cli
