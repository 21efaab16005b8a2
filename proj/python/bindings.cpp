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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <limits>
#include <optional>
#include <sstream>

#include "mmpose/checkpoint.hpp"
#include "mmpose/cli.hpp"
#include "mmpose/dataset.hpp"
#include "mmpose/encoder.hpp"
#include "mmpose/errors.hpp"
#include "mmpose/eval.hpp"
#include "mmpose/layers.hpp"
#include "mmpose/model.hpp"
#include "mmpose/radar.hpp"
#include "mmpose/scene.hpp"

namespace py = pybind11;
using namespace mmpose;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

encoder::NormalizationParams norm_or_default(const std::optional<std::string>& path) {
  return path ? encoder::load_norm(*path) : encoder::compute_norm(scene::SceneBounds{});
}

scene::RadarFrame frame_from(const Array& points) {
  if (points.ndim() != 2 || points.shape(1) != 4) {
    throw py::value_error("points must have shape (n, 4): depth, lateral, velocity, intensity");
  }
  scene::RadarFrame f;
  auto p = points.unchecked<2>();
  for (py::ssize_t i = 0; i < p.shape(0); ++i) {
    f.points.push_back({p(i, 0), p(i, 1), p(i, 2), p(i, 3)});
  }
  return f;
}

Array image_array(const encoder::EncodedImage& img) {
  const auto n = static_cast<py::ssize_t>(img.side);
  Array out({n, n, py::ssize_t{3}});
  std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
  return out;
}

encoder::EncodedImage image_from(const Array& a, radar::Plane plane) {
  if (a.ndim() != 3 || a.shape(0) != a.shape(1) || a.shape(2) != 3) {
    throw py::value_error("image must have shape (n, n, 3)");
  }
  encoder::EncodedImage img(static_cast<std::size_t>(a.shape(0)), plane);
  std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
  return img;
}

Array joints_array(const encoder::JointVector& v) {
  Array out({py::ssize_t{25}, py::ssize_t{3}});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

eval::Poses poses_from(const Array& a) {
  if (a.ndim() != 3 || a.shape(1) != 25 || a.shape(2) != 3) {
    throw py::value_error("poses must have shape (frames, 25, 3)");
  }
  eval::Poses out(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t f = 0; f < out.size(); ++f) {
    std::copy(a.data() + f * 75, a.data() + (f + 1) * 75, out[f].begin());
  }
  return out;
}

class Model {
 public:
  explicit Model(nn::ForkedModel m) : model_(std::move(m)), frozen_(model_) {}

  Array predict(const Array& xy, const Array& xz) const {
    return joints_array(model_.forward(image_from(xy, radar::Plane::XY),
                                       image_from(xz, radar::Plane::XZ), nn::Mode::Infer));
  }
  Array predict_fast(const Array& xy, const Array& xz) const {
    return joints_array(
        frozen_.forward(image_from(xy, radar::Plane::XY), image_from(xz, radar::Plane::XZ)));
  }
  std::size_t parameter_count() const { return model_.parameter_count(); }
  std::size_t side() const { return model_.config().side; }

 private:
  nn::ForkedModel model_;
  nn::FrozenModel frozen_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Radar point-cloud skeletal pose estimation: radar chain, encoder, CNN and metrics.";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<BoundsError>(m, "BoundsError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
  py::register_exception<VersionError>(m, "VersionError", PyExc_IOError);
  py::register_exception<TruncationError>(m, "TruncationError", PyExc_IOError);

  // Radar
  m.def("range_resolution", [] { return radar::range_resolution(radar::default_chirp()); },
        "Range resolution of the default chirp, m.");
  m.def("velocity_resolution", [] { return radar::velocity_resolution(radar::default_chirp()); },
        "Velocity resolution of the default chirp, m/s.");
  m.def("beat_frequency",
        [](double r0) { return radar::beat_frequency(radar::default_chirp(), r0); },
        py::arg("range"));
  m.def(
      "detect",
      [](const std::vector<std::tuple<double, double, double, double>>& targets, double snr_db,
         double threshold, std::uint64_t seed) {
        std::vector<radar::PointTarget> ts;
        for (const auto& [r, v, th, rcs] : targets) ts.push_back({r, v, th, rcs});
        const auto cfg = radar::default_chirp();
        radar::SynthesisOptions o;
        o.snr_db = snr_db;
        o.seed = seed;
        std::vector<std::tuple<double, double, double, double>> out;
        for (const auto& d : radar::process_cube(radar::synthesize_baseband(cfg, ts, o), cfg,
                                                 threshold)) {
          out.emplace_back(d.range, d.velocity, d.angle, d.power);
        }
        return out;
      },
      py::arg("targets"), py::arg("snr_db") = std::numeric_limits<double>::infinity(),
      py::arg("threshold") = 0.25, py::arg("seed") = 0,
      "Synthesize (range m, velocity m/s, angle rad, rcs dBsm) targets and return "
      "(range, velocity, angle, power) detections, strongest first.");

  // Simulation and datasets
  m.def(
      "simulate",
      [](const std::string& motion, double duration, double session, double fps,
         std::uint64_t seed, const std::string& out) {
        const auto mc = scene::parse_motion(motion);
        if (!mc) throw py::value_error("unknown motion class " + motion);
        const auto recs = scene::simulate_sessions(*mc, duration, session > 0 ? session : duration,
                                                   fps, seed);
        data::dataset_write(recs, out);
        return recs.size();
      },
      py::arg("motion"), py::arg("duration"), py::arg("session") = 0.0, py::arg("fps") = 20.0,
      py::arg("seed") = 0, py::arg("out"), "Write a simulated JSON-lines dataset; returns its size.");
  m.def(
      "load_dataset",
      [](const std::string& path, const std::optional<std::string>& norm) {
        const auto samples = data::load_samples(path, norm_or_default(norm));
        const auto n = static_cast<py::ssize_t>(samples.size());
        Array xy({n, py::ssize_t{16}, py::ssize_t{16}, py::ssize_t{3}});
        Array xz({n, py::ssize_t{16}, py::ssize_t{16}, py::ssize_t{3}});
        Array world({n, py::ssize_t{25}, py::ssize_t{3}});
        for (py::ssize_t i = 0; i < n; ++i) {
          const auto& s = samples[static_cast<std::size_t>(i)];
          std::copy(s.xy.pixels.begin(), s.xy.pixels.end(), xy.mutable_data() + i * 768);
          std::copy(s.xz.pixels.begin(), s.xz.pixels.end(), xz.mutable_data() + i * 768);
          std::copy(s.world.begin(), s.world.end(), world.mutable_data() + i * 75);
        }
        return py::make_tuple(xy, xz, world);
      },
      py::arg("path"), py::arg("norm") = py::none(),
      "Encoded images (n, 16, 16, 3) for both planes and world joints (n, 25, 3).");

  // Encoder
  m.def(
      "encode_frame",
      [](const Array& points, const std::optional<std::string>& norm) {
        return image_array(encoder::encode_frame(frame_from(points), norm_or_default(norm)));
      },
      py::arg("points"), py::arg("norm") = py::none(),
      "Encode (n, 4) points [depth, lateral, velocity, intensity] as a 16x16x3 image.");
  m.def(
      "decode_image",
      [](const Array& img, const std::optional<std::string>& norm) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& p : encoder::decode_image(image_from(img, radar::Plane::XY),
                                                   norm_or_default(norm))) {
          out.emplace_back(p.depth, p.lateral, p.intensity);
        }
        return out;
      },
      py::arg("image"), py::arg("norm") = py::none());
  m.def("voxel_dimension", &encoder::voxel_dimension, py::arg("extent"), py::arg("resolution"));

  // Network
  m.def("conv2d_param_count", &nn::conv2d_param_count, py::arg("k"), py::arg("c_in"),
        py::arg("d"), py::arg("with_bias"));
  m.def("total_parameter_count", [] { return nn::total_parameter_count(nn::ModelConfig::standard()); });

  py::class_<Model>(m, "Model")
      .def(py::init([](std::uint64_t seed, bool miniature) {
             return Model(nn::ForkedModel(miniature ? nn::ModelConfig::miniature()
                                                    : nn::ModelConfig::standard(),
                                          seed));
           }),
           py::arg("seed") = 0, py::arg("miniature") = false)
      .def_static("load",
                  [](const std::string& path) {
                    return Model(nn::model_from_checkpoint(nn::load_checkpoint(path)));
                  },
                  py::arg("path"))
      .def("predict", &Model::predict, py::arg("xy"), py::arg("xz"),
           "Normalized (25, 3) joints from two (n, n, 3) images.")
      .def("predict_fast", &Model::predict_fast, py::arg("xy"), py::arg("xz"),
           "Single-precision variant of predict.")
      .def_property_readonly("parameter_count", &Model::parameter_count)
      .def_property_readonly("side", &Model::side);

  // Metrics
  m.def(
      "evaluate",
      [](const Array& preds, const Array& truths, const Array& train_truths, std::size_t k) {
        const auto base = eval::baseline_predictor(poses_from(train_truths));
        const auto r = eval::evaluate(poses_from(preds), poses_from(truths), base, k);
        return py::module_::import("json").attr("loads")(eval::report_json(r));
      },
      py::arg("preds"), py::arg("truths"), py::arg("train_truths"), py::arg("outliers") = 8,
      "Evaluation report as a dict; poses are (frames, 25, 3) arrays in metres.");

  // Command line
  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int rc;
        {
          py::gil_scoped_release release;
          rc = cli::cli_dispatch(args, out, err);
        }
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"), "Run an mmpose subcommand; returns (exit code, stdout, stderr).");
}
