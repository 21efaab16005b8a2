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
 * \file encoder.hpp
 * \brief Radar-to-image representation: each detection of a frame becomes
 *        one pixel of an N x N x 3 image whose channels hold the normalized
 *        depth, lateral position and intensity. Unused pixels are (0,0,0).
 */
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "mmpose/scene.hpp"

namespace mmpose::encoder {

using scene::AxisRange;

inline constexpr std::size_t kSkeletonValues = 3 * scene::kJointCount;
using JointVector = std::array<double, kSkeletonValues>;

/// Global affine maps from the experiment space onto [0, 1].
struct NormalizationParams {
  AxisRange depth;
  AxisRange azimuth;
  AxisRange elevation;
  AxisRange intensity;

  void validate() const;
  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

/// Unclamped affine map; callers clamp.
inline double to_unit(const AxisRange& r, double v) { return (v - r.min) / (r.max - r.min); }
inline double from_unit(const AxisRange& r, double u) { return r.min + u * (r.max - r.min); }

/// Throws DomainError when any axis is degenerate (max <= min).
NormalizationParams compute_norm(const scene::SceneBounds& bounds,
                                 AxisRange intensity = {0.0, 1.0});

/// Sidecar text document, one `axis=min,max` line per axis.
void save_norm(const NormalizationParams& norm, const std::filesystem::path& path);
NormalizationParams load_norm(const std::filesystem::path& path);
std::string format_norm(const NormalizationParams& norm);
NormalizationParams parse_norm(const std::string& text);

/// Pixels per side needed to hold max_points detections.
std::size_t image_side(std::size_t max_points = radar::kMaxDetections);

/// Row-major side x side x 3 image; pixel k holds the k-th point of the
/// frame in canonical order.
struct EncodedImage {
  std::size_t side = 16;
  radar::Plane plane = radar::Plane::XY;
  std::vector<double> pixels;  // side * side * 3, channels last

  EncodedImage() : pixels(side * side * 3, 0.0) {}
  EncodedImage(std::size_t n, radar::Plane p) : side(n), plane(p), pixels(n * n * 3, 0.0) {}

  std::size_t capacity() const { return side * side; }
  double* pixel(std::size_t k) { return pixels.data() + 3 * k; }
  const double* pixel(std::size_t k) const { return pixels.data() + 3 * k; }
};

struct EncodeStats {
  std::size_t clamped = 0;  ///< channel values pulled back into [0, 1]
};

/// Canonical pixel order: descending intensity, then ascending depth, then
/// ascending lateral.
std::vector<scene::ReflectionPoint> canonical_order(std::vector<scene::ReflectionPoint> points);

/// Throws StructuralError when the frame holds more points than pixels.
EncodedImage encode_frame(const scene::RadarFrame& frame, const NormalizationParams& norm,
                          std::size_t side = 16, EncodeStats* stats = nullptr);

struct DecodedPoint {
  double depth = 0.0;
  double lateral = 0.0;
  double intensity = 0.0;
};

/// Inverse map of every non-(0,0,0) pixel, in pixel order.
std::vector<DecodedPoint> decode_image(const EncodedImage& img, const NormalizationParams& norm);

/// Flattened [j0.x, j0.y, j0.z, j1.x, ...] in [0, 1]; out-of-box joints are
/// clamped and counted in stats.
JointVector normalize_skeleton(const scene::SkeletonFrame& s, const NormalizationParams& norm,
                               EncodeStats* stats = nullptr);
scene::SkeletonFrame denormalize_skeleton(const JointVector& v, const NormalizationParams& norm,
                                          std::int64_t timestamp_us = 0);

/// World-unit [j0.x, j0.y, j0.z, j1.x, ...] without normalization.
JointVector flatten_skeleton(const scene::SkeletonFrame& s);

/// Size of the dense voxel heat-map alternative: ceil(extent / resolution)
/// per axis, times three colour channels. Throws DomainError for a
/// non-positive resolution.
std::array<std::size_t, 4> voxel_dimension(const std::array<double, 3>& extent,
                                           const std::array<double, 3>& resolution);

}  // namespace mmpose::encoder
