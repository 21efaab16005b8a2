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

#include "mmpose/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mmpose/errors.hpp"

namespace mmpose::encoder {

namespace {

double clamp_unit(double u, EncodeStats* stats) {
  if (u < 0.0 || u > 1.0 || std::isnan(u)) {
    if (stats) ++stats->clamped;
    return std::isnan(u) ? 0.0 : std::clamp(u, 0.0, 1.0);
  }
  return u;
}

void check_axis(const AxisRange& r, const char* name) {
  if (!(r.max > r.min)) {
    throw DomainError(std::string("degenerate ") + name + " range [" + std::to_string(r.min) +
                      ", " + std::to_string(r.max) + "]");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void NormalizationParams::validate() const {
  check_axis(depth, "depth");
  check_axis(azimuth, "azimuth");
  check_axis(elevation, "elevation");
  check_axis(intensity, "intensity");
}

NormalizationParams compute_norm(const scene::SceneBounds& bounds, AxisRange intensity) {
  NormalizationParams p{bounds.depth, bounds.azimuth, bounds.elevation, intensity};
  p.validate();
  return p;
}

std::string format_norm(const NormalizationParams& n) {
  std::ostringstream os;
  os << "# mmpose normalization v1\n";
  auto line = [&](const char* key, const AxisRange& r) {
    os << key << '=' << format_double(r.min) << ',' << format_double(r.max) << '\n';
  };
  line("depth", n.depth);
  line("azimuth", n.azimuth);
  line("elevation", n.elevation);
  line("intensity", n.intensity);
  return os.str();
}

NormalizationParams parse_norm(const std::string& text) {
  std::map<std::string, AxisRange> axes;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    const auto comma = line.find(',', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || comma == std::string::npos) {
      throw ParseError(lineno, "expected axis=min,max");
    }
    try {
      axes[line.substr(0, eq)] = {std::stod(line.substr(eq + 1, comma - eq - 1)),
                                  std::stod(line.substr(comma + 1))};
    } catch (const std::logic_error&) {
      throw ParseError(lineno, "non-numeric bound");
    }
  }
  NormalizationParams p;
  auto take = [&](const char* key, AxisRange& out) {
    auto it = axes.find(key);
    if (it == axes.end()) throw SchemaError(std::string("normalization missing axis ") + key);
    out = it->second;
  };
  take("depth", p.depth);
  take("azimuth", p.azimuth);
  take("elevation", p.elevation);
  take("intensity", p.intensity);
  p.validate();
  return p;
}

void save_norm(const NormalizationParams& norm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_norm(norm);
}

NormalizationParams load_norm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_norm(ss.str());
}

std::size_t image_side(std::size_t max_points) {
  auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(max_points))));
  while (side * side < max_points) ++side;
  return side;
}

std::vector<scene::ReflectionPoint> canonical_order(std::vector<scene::ReflectionPoint> points) {
  std::sort(points.begin(), points.end(),
            [](const scene::ReflectionPoint& a, const scene::ReflectionPoint& b) {
              if (a.intensity != b.intensity) return a.intensity > b.intensity;
              if (a.depth != b.depth) return a.depth < b.depth;
              return a.lateral < b.lateral;
            });
  return points;
}

EncodedImage encode_frame(const scene::RadarFrame& frame, const NormalizationParams& norm,
                          std::size_t side, EncodeStats* stats) {
  const auto plane = frame.module == scene::Module::R1 ? radar::Plane::XY : radar::Plane::XZ;
  EncodedImage img(side, plane);
  if (frame.points.size() > img.capacity()) {
    throw StructuralError("frame holds " + std::to_string(frame.points.size()) +
                          " points but the image has " + std::to_string(img.capacity()) +
                          " pixels");
  }
  const AxisRange& lateral = plane == radar::Plane::XY ? norm.azimuth : norm.elevation;
  const auto points = canonical_order(frame.points);
  for (std::size_t k = 0; k < points.size(); ++k) {
    double* px = img.pixel(k);
    px[0] = clamp_unit(to_unit(norm.depth, points[k].depth), stats);
    px[1] = clamp_unit(to_unit(lateral, points[k].lateral), stats);
    px[2] = clamp_unit(to_unit(norm.intensity, points[k].intensity), stats);
  }
  return img;
}

std::vector<DecodedPoint> decode_image(const EncodedImage& img, const NormalizationParams& norm) {
  const AxisRange& lateral = img.plane == radar::Plane::XY ? norm.azimuth : norm.elevation;
  std::vector<DecodedPoint> out;
  for (std::size_t k = 0; k < img.capacity(); ++k) {
    const double* px = img.pixel(k);
    if (px[0] == 0.0 && px[1] == 0.0 && px[2] == 0.0) continue;
    out.push_back({from_unit(norm.depth, px[0]), from_unit(lateral, px[1]),
                   from_unit(norm.intensity, px[2])});
  }
  return out;
}

JointVector normalize_skeleton(const scene::SkeletonFrame& s, const NormalizationParams& norm,
                               EncodeStats* stats) {
  JointVector v{};
  for (std::size_t j = 0; j < scene::kJointCount; ++j) {
    v[3 * j + 0] = clamp_unit(to_unit(norm.depth, s.joints[j].x), stats);
    v[3 * j + 1] = clamp_unit(to_unit(norm.azimuth, s.joints[j].y), stats);
    v[3 * j + 2] = clamp_unit(to_unit(norm.elevation, s.joints[j].z), stats);
  }
  return v;
}

scene::SkeletonFrame denormalize_skeleton(const JointVector& v, const NormalizationParams& norm,
                                          std::int64_t timestamp_us) {
  scene::SkeletonFrame s;
  s.timestamp_us = timestamp_us;
  for (std::size_t j = 0; j < scene::kJointCount; ++j) {
    s.joints[j] = {from_unit(norm.depth, v[3 * j + 0]), from_unit(norm.azimuth, v[3 * j + 1]),
                   from_unit(norm.elevation, v[3 * j + 2])};
  }
  return s;
}

JointVector flatten_skeleton(const scene::SkeletonFrame& s) {
  JointVector v{};
  for (std::size_t j = 0; j < scene::kJointCount; ++j) {
    v[3 * j] = s.joints[j].x;
    v[3 * j + 1] = s.joints[j].y;
    v[3 * j + 2] = s.joints[j].z;
  }
  return v;
}

std::array<std::size_t, 4> voxel_dimension(const std::array<double, 3>& extent,
                                           const std::array<double, 3>& resolution) {
  std::array<std::size_t, 4> dims{0, 0, 0, 3};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(resolution[i] > 0.0)) throw DomainError("voxel resolution must be positive");
    if (!(extent[i] > 0.0)) throw DomainError("voxel extent must be positive");
    // Absorb representation error such as 5 / 0.05 = 100.000...01.
    const double cells = extent[i] / resolution[i];
    dims[i] = static_cast<std::size_t>(std::ceil(cells - 1e-9 * cells));
  }
  return dims;
}

}  // namespace mmpose::encoder
