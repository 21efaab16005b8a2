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
 * \file scene.hpp
 * \brief Synthetic 25-joint skeleton motion and its two-radar point clouds.
 *
 * Coordinates are metres with the radar pair at the origin: x is depth,
 * y is azimuth (positive to the subject's left) and z is elevation.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmpose/radar.hpp"

namespace mmpose::scene {

inline constexpr std::size_t kJointCount = 25;

/// Kinect-v2 joint set, in Kinect's index order.
enum class JointId : int {
  SpineBase = 0,
  SpineMid,
  Neck,
  Head,
  ShoulderL,
  ElbowL,
  WristL,
  HandL,
  ShoulderR,
  ElbowR,
  WristR,
  HandR,
  HipL,
  KneeL,
  AnkleL,
  FootL,
  HipR,
  KneeR,
  AnkleR,
  FootR,
  SpineShoulder,
  HandTipL,
  ThumbL,
  HandTipR,
  ThumbR,
};

std::string_view joint_name(JointId id);
/// Wrists, hands (palms), hand tips and thumbs of both arms.
const std::array<JointId, 8>& hand_joints();
bool is_hand_joint(JointId id);
/// Parent of each joint in the kinematic tree; SpineBase is its own parent.
JointId parent(JointId id);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);

struct SkeletonFrame {
  std::int64_t timestamp_us = 0;
  std::array<Vec3, kJointCount> joints{};

  const Vec3& operator[](JointId id) const { return joints[static_cast<int>(id)]; }
  Vec3& operator[](JointId id) { return joints[static_cast<int>(id)]; }
};

enum class Module { R1, R2 };

struct ReflectionPoint {
  double depth = 0.0;
  double lateral = 0.0;   ///< azimuth for R1, elevation for R2
  double velocity = 0.0;  ///< radial, positive = approaching
  double intensity = 0.0; ///< normalized power, (0, 1]
  friend bool operator==(const ReflectionPoint&, const ReflectionPoint&) = default;
};

struct RadarFrame {
  std::int64_t timestamp_us = 0;
  Module module = Module::R1;
  std::vector<ReflectionPoint> points;
};

enum class MotionClass { Walking, LeftArmSwing, RightArmSwing, BothArmsSwing };

inline constexpr std::array<MotionClass, 4> kMotionClasses = {
    MotionClass::Walking, MotionClass::LeftArmSwing, MotionClass::RightArmSwing,
    MotionClass::BothArmsSwing};

std::string_view motion_name(MotionClass m);
/// Accepts the canonical names plus short aliases ("left", "both-arms", ...).
std::optional<MotionClass> parse_motion(std::string_view name);

struct DatasetRecord {
  RadarFrame radar_xy;
  RadarFrame radar_xz;
  SkeletonFrame truth;
  MotionClass motion = MotionClass::Walking;
};

struct AxisRange {
  double min = 0.0;
  double max = 1.0;
  bool contains(double v) const { return v >= min && v <= max; }
  double span() const { return max - min; }
  friend bool operator==(const AxisRange&, const AxisRange&) = default;
};

/// Axis-aligned experiment space.
struct SceneBounds {
  AxisRange depth{0.5, 5.5};
  AxisRange azimuth{-2.0, 2.0};
  AxisRange elevation{-1.5, 1.5};
  bool contains(const Vec3& p) const {
    return depth.contains(p.x) && azimuth.contains(p.y) && elevation.contains(p.z);
  }
};

struct MotionOptions {
  SceneBounds bounds{};
  std::int64_t start_us = 1'600'000'000'000'000;
};

/// Deterministic fixed-bone-length motion track of round(duration * fps)
/// frames. Throws DomainError for non-positive duration or fps.
std::vector<SkeletonFrame> generate_motion(MotionClass motion, double duration,
                                           double fps, std::uint64_t seed,
                                           const MotionOptions& opts = {});

/// Per-joint radar cross sections (dBsm).
std::array<double, kJointCount> default_rcs_table();

struct NoiseConfig {
  double position_sigma = 0.02;       ///< isotropic Gaussian, m
  double miss_probability = 0.05;     ///< independent per scatterer
  double bone_spacing = 0.15;         ///< one interior scatterer per this many m
  std::size_t max_points = radar::kMaxDetections;
  std::array<double, kJointCount> rcs = default_rcs_table();
  /// Intensity is amplitude relative to a 0 dBsm target at this range.
  double reference_range = 1.0;
  SceneBounds bounds{};
};

/// Geometric point-cloud model of one radar module observing a skeleton.
/// Velocities come from the displacement since `previous` (zero without it).
/// Output is sorted by descending intensity and capped at max_points.
/// Throws BoundsError when a joint lies outside noise.bounds.
RadarFrame reflect(const SkeletonFrame& skeleton,
                   const SkeletonFrame* previous, Module module,
                   const NoiseConfig& noise, std::uint64_t seed);

/// Same scatterer model routed through baseband synthesis and the FFT
/// processing chain of the given module.
RadarFrame reflect_full_dsp(const SkeletonFrame& skeleton,
                            const SkeletonFrame* previous, Module module,
                            const NoiseConfig& noise,
                            const radar::ChirpConfig& chirp,
                            std::uint64_t seed,
                            double threshold = 0.05);

struct AssociationResult {
  std::vector<DatasetRecord> records;
  std::size_t skipped = 0;
};

/// Pairs each truth frame with the nearest unused R1 and R2 frames within
/// tol_us. Throws StructuralError when any stream is out of time order.
AssociationResult associate(const std::vector<RadarFrame>& r1,
                            const std::vector<RadarFrame>& r2,
                            const std::vector<SkeletonFrame>& truth,
                            std::int64_t tol_us, MotionClass motion);

struct SessionOptions {
  NoiseConfig noise{};
  MotionOptions motion{};
  std::int64_t r2_offset_us = 400;
  std::int64_t association_tol_us = 1000;
  bool full_dsp = false;
};

/// Motion track, both radar streams and their association, all derived from
/// one seed.
std::vector<DatasetRecord> simulate_session(MotionClass motion, double duration,
                                            double fps, std::uint64_t seed,
                                            const SessionOptions& opts = {});

/// `duration` seconds of one motion class cut into independent sessions of
/// `session_length` seconds, each with its own subject placement and
/// gesture parameters, laid end to end in time with a one second gap.
/// Session k draws from mix_seed(seed, k).
std::vector<DatasetRecord> simulate_sessions(MotionClass motion, double duration,
                                             double session_length, double fps,
                                             std::uint64_t seed,
                                             const SessionOptions& opts = {});

/// splitmix64 finalizer; derives independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mmpose::scene
