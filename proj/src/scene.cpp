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

#include "mmpose/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "mmpose/errors.hpp"
#include "mmpose/rng.hpp"

namespace mmpose::scene {

namespace {

using J = JointId;

constexpr double kDeg = std::numbers::pi / 180.0;

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "SpineBase", "SpineMid",  "Neck",      "Head",          "ShoulderL",
    "ElbowL",    "WristL",    "HandL",     "ShoulderR",     "ElbowR",
    "WristR",    "HandR",     "HipL",      "KneeL",         "AnkleL",
    "FootL",     "HipR",      "KneeR",     "AnkleR",        "FootR",
    "SpineShoulder", "HandTipL", "ThumbL", "HandTipR",      "ThumbR"};

constexpr std::array<J, kJointCount> kParents = {
    J::SpineBase,      // SpineBase
    J::SpineBase,      // SpineMid
    J::SpineShoulder,  // Neck
    J::Neck,           // Head
    J::SpineShoulder,  // ShoulderL
    J::ShoulderL,      // ElbowL
    J::ElbowL,         // WristL
    J::WristL,         // HandL
    J::SpineShoulder,  // ShoulderR
    J::ShoulderR,      // ElbowR
    J::ElbowR,         // WristR
    J::WristR,         // HandR
    J::SpineBase,      // HipL
    J::HipL,           // KneeL
    J::KneeL,          // AnkleL
    J::AnkleL,         // FootL
    J::SpineBase,      // HipR
    J::HipR,           // KneeR
    J::KneeR,          // AnkleR
    J::AnkleR,         // FootR
    J::SpineMid,       // SpineShoulder
    J::HandL,          // HandTipL
    J::WristL,         // ThumbL
    J::HandR,          // HandTipR
    J::WristR,         // ThumbR
};

// Rest-pose offset of each joint from its parent, body frame (forward +x,
// left +y, up +z), for a ~1.75 m subject.
constexpr std::array<Vec3, kJointCount> kRestOffsets = {{
    {0.0, 0.0, 0.0},       // SpineBase
    {0.0, 0.0, 0.28},      // SpineMid
    {0.0, 0.0, 0.07},      // Neck
    {0.02, 0.0, 0.14},     // Head
    {0.0, 0.17, -0.03},    // ShoulderL
    {0.0, 0.02, -0.27},    // ElbowL
    {0.02, 0.0, -0.25},    // WristL
    {0.01, 0.0, -0.08},    // HandL
    {0.0, -0.17, -0.03},   // ShoulderR
    {0.0, -0.02, -0.27},   // ElbowR
    {0.02, 0.0, -0.25},    // WristR
    {0.01, 0.0, -0.08},    // HandR
    {0.0, 0.09, -0.06},    // HipL
    {0.0, 0.0, -0.42},     // KneeL
    {0.0, 0.0, -0.40},     // AnkleL
    {0.10, 0.0, -0.05},    // FootL
    {0.0, -0.09, -0.06},   // HipR
    {0.0, 0.0, -0.42},     // KneeR
    {0.0, 0.0, -0.40},     // AnkleR
    {0.10, 0.0, -0.05},    // FootR
    {0.0, 0.0, 0.22},      // SpineShoulder
    {0.01, 0.0, -0.08},    // HandTipL
    {0.04, -0.02, -0.05},  // ThumbL
    {0.01, 0.0, -0.08},    // HandTipR
    {0.04, 0.02, -0.05},   // ThumbR
}};

// Topological order: every parent precedes its children.
constexpr std::array<J, kJointCount> kEvalOrder = {
    J::SpineBase, J::SpineMid, J::SpineShoulder, J::Neck,   J::Head,
    J::ShoulderL, J::ElbowL,   J::WristL,        J::HandL,  J::HandTipL,
    J::ThumbL,    J::ShoulderR, J::ElbowR,       J::WristR, J::HandR,
    J::HandTipR,  J::ThumbR,   J::HipL,          J::KneeL,  J::AnkleL,
    J::FootL,     J::HipR,     J::KneeR,         J::AnkleR, J::FootR};

constexpr double kFloorZ = -1.0;        // radar mounted 1 m above the floor
constexpr double kRootHeight = 0.97;    // SpineBase above the floor

struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        r.m[3 * i + j] = m[3 * i] * o.m[j] + m[3 * i + 1] * o.m[3 + j] +
                         m[3 * i + 2] * o.m[6 + j];
      }
    }
    return r;
  }
};

// Positive pitch swings a hanging limb forward (toward +x).
Mat3 pitch(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {{c, 0, -s, 0, 1, 0, s, 0, c}};
}

// Positive roll lifts a hanging limb toward +y.
Mat3 roll(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {{1, 0, 0, 0, c, -s, 0, s, c}};
}

Mat3 yaw(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {{c, -s, 0, s, c, 0, 0, 0, 1}};
}

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }

struct Pose {
  Vec3 root;
  Mat3 heading;
  std::array<Mat3, kJointCount> local{};  // rotation applied at each joint
};

std::array<Vec3, kJointCount> forward_kinematics(const Pose& pose, double scale) {
  std::array<Vec3, kJointCount> pos{};
  std::array<Mat3, kJointCount> world{};
  for (J j : kEvalOrder) {
    const int i = static_cast<int>(j);
    if (j == J::SpineBase) {
      pos[i] = pose.root;
      world[i] = pose.heading * pose.local[i];
      continue;
    }
    const int p = static_cast<int>(kParents[i]);
    pos[i] = pos[p] + world[p] * (scale * kRestOffsets[i]);
    world[i] = world[p] * pose.local[i];
  }
  return pos;
}

struct ArmSwing {
  double amplitude = 0.0;
  double elbow = 0.0;
  double abduction = 0.0;
  double phase = 0.0;
};

std::string normalized(std::string_view s) {
  std::string out;
  for (char c : s) {
    out.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

struct Scatterer {
  Vec3 pos;
  Vec3 prev;
  double rcs = 0.0;
};

std::vector<Scatterer> scatterers(const SkeletonFrame& s, const SkeletonFrame* previous,
                                  const NoiseConfig& noise) {
  const SkeletonFrame& before = previous ? *previous : s;
  std::vector<Scatterer> out;
  out.reserve(128);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    out.push_back({s.joints[j], before.joints[j], noise.rcs[j]});
  }
  if (noise.bone_spacing > 0.0) {
    for (std::size_t j = 1; j < kJointCount; ++j) {
      const auto p = static_cast<std::size_t>(kParents[j]);
      const double len = distance(s.joints[j], s.joints[p]);
      const int extra = static_cast<int>(std::floor(len / noise.bone_spacing));
      const double rcs = 0.5 * (noise.rcs[j] + noise.rcs[p]);
      for (int m = 1; m <= extra; ++m) {
        const double f = static_cast<double>(m) / (extra + 1);
        out.push_back({s.joints[p] + f * (s.joints[j] - s.joints[p]),
                       before.joints[p] + f * (before.joints[j] - before.joints[p]), rcs});
      }
    }
  }
  return out;
}

void check_bounds(const SkeletonFrame& s, const SceneBounds& b) {
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (!b.contains(s.joints[j])) {
      throw BoundsError(std::string("joint ") + std::string(kJointNames[j]) +
                        " at t=" + std::to_string(s.timestamp_us) +
                        " us lies outside the scene bounds");
    }
  }
}

double frame_dt(const SkeletonFrame& s, const SkeletonFrame* previous) {
  if (!previous) return 0.0;
  return static_cast<double>(s.timestamp_us - previous->timestamp_us) * 1e-6;
}

double radial_velocity(const Scatterer& sc, double dt) {
  if (dt <= 0.0) return 0.0;
  return -(norm(sc.pos) - norm(sc.prev)) / dt;
}

void canonical_sort(std::vector<ReflectionPoint>& pts) {
  std::sort(pts.begin(), pts.end(), [](const ReflectionPoint& a, const ReflectionPoint& b) {
    if (a.intensity != b.intensity) return a.intensity > b.intensity;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.lateral < b.lateral;
  });
}

double relative_intensity(double rcs, double range, double reference_range) {
  const double amp = radar::amplitude_from_rcs(rcs, std::max(range, 1e-6));
  const double ref = radar::amplitude_from_rcs(0.0, reference_range);
  return std::clamp(amp / ref, 1e-9, 1.0);
}

}  // namespace

std::string_view joint_name(JointId id) { return kJointNames[static_cast<int>(id)]; }

const std::array<JointId, 8>& hand_joints() {
  static constexpr std::array<JointId, 8> kHands = {
      J::WristL, J::HandL, J::HandTipL, J::ThumbL,
      J::WristR, J::HandR, J::HandTipR, J::ThumbR};
  return kHands;
}

bool is_hand_joint(JointId id) {
  const auto& h = hand_joints();
  return std::find(h.begin(), h.end(), id) != h.end();
}

JointId parent(JointId id) { return kParents[static_cast<int>(id)]; }

double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
double norm(const Vec3& a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

std::string_view motion_name(MotionClass m) {
  switch (m) {
    case MotionClass::Walking: return "walking";
    case MotionClass::LeftArmSwing: return "left_arm_swing";
    case MotionClass::RightArmSwing: return "right_arm_swing";
    case MotionClass::BothArmsSwing: return "both_arms_swing";
  }
  return "unknown";
}

std::optional<MotionClass> parse_motion(std::string_view name) {
  const std::string n = normalized(name);
  if (n == "walking" || n == "walk") return MotionClass::Walking;
  if (n == "left_arm_swing" || n == "left_arm" || n == "left") return MotionClass::LeftArmSwing;
  if (n == "right_arm_swing" || n == "right_arm" || n == "right") return MotionClass::RightArmSwing;
  if (n == "both_arms_swing" || n == "both_arms" || n == "both") return MotionClass::BothArmsSwing;
  return std::nullopt;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<SkeletonFrame> generate_motion(MotionClass motion, double duration,
                                           double fps, std::uint64_t seed,
                                           const MotionOptions& opts) {
  if (!(duration > 0.0)) throw DomainError("motion duration must be positive");
  if (!(fps > 0.0)) throw DomainError("frame rate must be positive");

  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(motion)));
  const SceneBounds& b = opts.bounds;
  const double scale = rng.uniform(0.92, 1.08);
  const double lateral = rng.uniform(std::max(b.azimuth.min + 0.6, -0.6),
                                     std::min(b.azimuth.max - 0.6, 0.6));
  const double root_z = kFloorZ + kRootHeight * scale;
  const double freq = rng.uniform(0.5, 1.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

  // Limbs reach at most ~0.8 m ahead of or behind the root.
  constexpr double kReach = 0.8;
  const double x_lo = b.depth.min + kReach;
  const double x_hi = b.depth.max - kReach;
  if (x_hi <= x_lo) throw BoundsError("scene depth range too small for a subject");

  double x0 = 0.0;
  double speed = 0.0;
  Mat3 heading;
  if (motion == MotionClass::Walking) {
    x0 = rng.uniform(x_lo, std::min(x_lo + 0.8, x_hi));
    speed = std::min(rng.uniform(0.3, 0.7), (x_hi - x0) / duration);
  } else {
    x0 = rng.uniform(std::max(x_lo, 1.5), std::max(std::min(x_hi, 4.0), std::max(x_lo, 1.5)));
    heading = yaw(std::numbers::pi);  // facing the radar
  }

  auto draw_arm = [&]() {
    return ArmSwing{rng.uniform(35.0, 75.0) * kDeg, rng.uniform(10.0, 45.0) * kDeg,
                    rng.uniform(5.0, 20.0) * kDeg, rng.uniform(-0.3, 0.3)};
  };
  const ArmSwing left = draw_arm();
  const ArmSwing right = draw_arm();
  const double hip_amp = rng.uniform(20.0, 30.0) * kDeg;
  const double knee_amp = rng.uniform(25.0, 45.0) * kDeg;
  const double arm_walk = rng.uniform(15.0, 30.0) * kDeg;

  const auto frames = static_cast<std::size_t>(std::llround(duration * fps));
  std::vector<SkeletonFrame> track(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const double t = static_cast<double>(i) / fps;
    const double w = 2.0 * std::numbers::pi * freq * t + phase;
    Pose pose;
    pose.heading = heading;
    pose.root = {x0, lateral, root_z};
    // Arms hang slightly away from the torso when at rest.
    pose.local[static_cast<int>(J::ShoulderL)] = roll(left.abduction);
    pose.local[static_cast<int>(J::ShoulderR)] = roll(-right.abduction);

    auto swing_arm = [&](J shoulder, J elbow, const ArmSwing& arm, double side) {
      const double a = arm.amplitude * std::sin(w + arm.phase);
      pose.local[static_cast<int>(shoulder)] = roll(side * arm.abduction) * pitch(a);
      pose.local[static_cast<int>(elbow)] =
          pitch(arm.elbow * 0.5 * (1.0 + std::sin(w + arm.phase)));
    };

    switch (motion) {
      case MotionClass::Walking: {
        pose.root.x = x0 + speed * t;
        const double s = std::sin(w);
        pose.local[static_cast<int>(J::HipL)] = pitch(hip_amp * s);
        pose.local[static_cast<int>(J::HipR)] = pitch(-hip_amp * s);
        pose.local[static_cast<int>(J::KneeL)] = pitch(-knee_amp * std::max(0.0, -std::cos(w)));
        pose.local[static_cast<int>(J::KneeR)] = pitch(-knee_amp * std::max(0.0, std::cos(w)));
        pose.local[static_cast<int>(J::ShoulderL)] = roll(left.abduction) * pitch(-arm_walk * s);
        pose.local[static_cast<int>(J::ShoulderR)] = roll(-right.abduction) * pitch(arm_walk * s);
        break;
      }
      case MotionClass::LeftArmSwing:
        swing_arm(J::ShoulderL, J::ElbowL, left, 1.0);
        break;
      case MotionClass::RightArmSwing:
        swing_arm(J::ShoulderR, J::ElbowR, right, -1.0);
        break;
      case MotionClass::BothArmsSwing:
        swing_arm(J::ShoulderL, J::ElbowL, left, 1.0);
        swing_arm(J::ShoulderR, J::ElbowR, right, -1.0);
        break;
    }

    SkeletonFrame& f = track[i];
    f.timestamp_us = opts.start_us + std::llround(static_cast<double>(i) * 1e6 / fps);
    f.joints = forward_kinematics(pose, scale);
    check_bounds(f, b);
  }
  return track;
}

std::array<double, kJointCount> default_rcs_table() {
  std::array<double, kJointCount> t{};
  auto set = [&](std::initializer_list<J> ids, double v) {
    for (J j : ids) t[static_cast<int>(j)] = v;
  };
  set({J::SpineBase, J::SpineMid, J::SpineShoulder, J::HipL, J::HipR}, -3.0);
  set({J::Head, J::Neck}, -8.0);
  set({J::ShoulderL, J::ShoulderR, J::KneeL, J::KneeR}, -12.0);
  set({J::ElbowL, J::ElbowR, J::AnkleL, J::AnkleR, J::FootL, J::FootR}, -15.0);
  set({J::WristL, J::WristR, J::HandL, J::HandR, J::HandTipL, J::HandTipR, J::ThumbL,
       J::ThumbR},
      -22.0);
  return t;
}

RadarFrame reflect(const SkeletonFrame& skeleton, const SkeletonFrame* previous,
                   Module module, const NoiseConfig& noise, std::uint64_t seed) {
  check_bounds(skeleton, noise.bounds);
  Rng rng(mix_seed(seed, module == Module::R1 ? 0x5231 : 0x5232));
  const double dt = frame_dt(skeleton, previous);

  RadarFrame frame;
  frame.timestamp_us = skeleton.timestamp_us;
  frame.module = module;
  for (const Scatterer& sc : scatterers(skeleton, previous, noise)) {
    if (noise.miss_probability > 0.0 && rng.uniform() < noise.miss_probability) continue;
    Vec3 p = sc.pos;
    if (noise.position_sigma > 0.0) {
      const double nx = rng.normal();
      const double ny = rng.normal();
      const double nz = rng.normal();
      p = p + noise.position_sigma * Vec3{nx, ny, nz};
    }
    ReflectionPoint pt;
    pt.depth = std::max(p.x, 1e-6);
    pt.lateral = module == Module::R1 ? p.y : p.z;
    pt.velocity = radial_velocity(sc, dt);
    pt.intensity = relative_intensity(sc.rcs, norm(p), noise.reference_range);
    frame.points.push_back(pt);
  }
  canonical_sort(frame.points);
  if (frame.points.size() > noise.max_points) frame.points.resize(noise.max_points);
  return frame;
}

RadarFrame reflect_full_dsp(const SkeletonFrame& skeleton, const SkeletonFrame* previous,
                            Module module, const NoiseConfig& noise,
                            const radar::ChirpConfig& chirp, std::uint64_t seed,
                            double threshold) {
  check_bounds(skeleton, noise.bounds);
  Rng rng(mix_seed(seed, module == Module::R1 ? 0x4431 : 0x4432));
  const double dt = frame_dt(skeleton, previous);

  std::vector<radar::PointTarget> targets;
  for (const Scatterer& sc : scatterers(skeleton, previous, noise)) {
    if (noise.miss_probability > 0.0 && rng.uniform() < noise.miss_probability) continue;
    const double depth = sc.pos.x;
    const double lat = module == Module::R1 ? sc.pos.y : sc.pos.z;
    radar::PointTarget t;
    t.r0 = std::hypot(depth, lat);
    t.theta = std::atan2(lat, depth);
    t.v = radial_velocity(sc, dt);
    t.rcs = sc.rcs;
    targets.push_back(t);
  }
  RadarFrame frame;
  frame.timestamp_us = skeleton.timestamp_us;
  frame.module = module;
  if (targets.empty()) return frame;

  radar::SynthesisOptions syn;
  syn.seed = rng.next();
  const auto cube = radar::synthesize_baseband(chirp, targets, syn);
  const auto plane = module == Module::R1 ? radar::Plane::XY : radar::Plane::XZ;
  const double ref = radar::amplitude_from_rcs(0.0, noise.reference_range);
  for (const auto& det : radar::process_cube(cube, chirp, threshold, noise.max_points)) {
    const auto [depth, lateral] = radar::to_cartesian(det, plane);
    if (!(depth > 0.0)) continue;
    ReflectionPoint pt;
    pt.depth = depth;
    pt.lateral = lateral;
    pt.velocity = det.velocity;
    pt.intensity = std::clamp(det.amplitude / ref, 1e-9, 1.0);
    frame.points.push_back(pt);
  }
  canonical_sort(frame.points);
  return frame;
}

AssociationResult associate(const std::vector<RadarFrame>& r1,
                            const std::vector<RadarFrame>& r2,
                            const std::vector<SkeletonFrame>& truth,
                            std::int64_t tol_us, MotionClass motion) {
  auto check_radar = [](const std::vector<RadarFrame>& s, Module m, const char* name) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].module != m) {
        throw StructuralError(std::string(name) + " stream frame " + std::to_string(i) +
                              " carries the wrong module tag");
      }
      if (i > 0 && s[i].timestamp_us < s[i - 1].timestamp_us) {
        throw StructuralError(std::string(name) + " stream is not time-ordered at frame " +
                              std::to_string(i));
      }
    }
  };
  check_radar(r1, Module::R1, "R1");
  check_radar(r2, Module::R2, "R2");
  for (std::size_t i = 1; i < truth.size(); ++i) {
    if (truth[i].timestamp_us < truth[i - 1].timestamp_us) {
      throw StructuralError("truth stream is not time-ordered at frame " + std::to_string(i));
    }
  }

  auto nearest = [](const std::vector<RadarFrame>& s, std::size_t from,
                    std::int64_t t) -> std::optional<std::size_t> {
    if (from >= s.size()) return std::nullopt;
    auto it = std::lower_bound(s.begin() + static_cast<std::ptrdiff_t>(from), s.end(), t,
                               [](const RadarFrame& f, std::int64_t v) { return f.timestamp_us < v; });
    std::size_t best = s.size();
    auto consider = [&](std::size_t k) {
      if (best == s.size() ||
          std::llabs(s[k].timestamp_us - t) < std::llabs(s[best].timestamp_us - t)) {
        best = k;
      }
    };
    const auto idx = static_cast<std::size_t>(it - s.begin());
    if (idx > from) consider(idx - 1);
    if (idx < s.size()) consider(idx);
    return best;
  };

  AssociationResult out;
  std::size_t next1 = 0, next2 = 0;
  for (const auto& sk : truth) {
    const auto i1 = nearest(r1, next1, sk.timestamp_us);
    const auto i2 = nearest(r2, next2, sk.timestamp_us);
    if (i1 && i2 && std::llabs(r1[*i1].timestamp_us - sk.timestamp_us) <= tol_us &&
        std::llabs(r2[*i2].timestamp_us - sk.timestamp_us) <= tol_us) {
      out.records.push_back({r1[*i1], r2[*i2], sk, motion});
      next1 = *i1 + 1;
      next2 = *i2 + 1;
    } else {
      ++out.skipped;
    }
  }
  return out;
}

std::vector<DatasetRecord> simulate_session(MotionClass motion, double duration, double fps,
                                            std::uint64_t seed, const SessionOptions& opts) {
  MotionOptions mo = opts.motion;
  mo.bounds = opts.noise.bounds;
  const auto truth = generate_motion(motion, duration, fps, seed, mo);
  std::vector<RadarFrame> r1, r2;
  r1.reserve(truth.size());
  r2.reserve(truth.size());
  const radar::ChirpConfig chirp = radar::default_chirp();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const SkeletonFrame* prev = i > 0 ? &truth[i - 1] : nullptr;
    const std::uint64_t fseed = mix_seed(seed ^ 0x7261646172ULL, i);
    if (opts.full_dsp) {
      r1.push_back(reflect_full_dsp(truth[i], prev, Module::R1, opts.noise, chirp, fseed));
      r2.push_back(reflect_full_dsp(truth[i], prev, Module::R2, opts.noise, chirp, fseed));
    } else {
      r1.push_back(reflect(truth[i], prev, Module::R1, opts.noise, fseed));
      r2.push_back(reflect(truth[i], prev, Module::R2, opts.noise, fseed));
    }
    r2.back().timestamp_us += opts.r2_offset_us;
  }
  return associate(r1, r2, truth, opts.association_tol_us, motion).records;
}

std::vector<DatasetRecord> simulate_sessions(MotionClass motion, double duration,
                                             double session_length, double fps,
                                             std::uint64_t seed, const SessionOptions& opts) {
  if (!(duration > 0.0) || !(session_length > 0.0)) {
    throw DomainError("duration and session length must be positive");
  }
  if (!(fps > 0.0)) throw DomainError("frame rate must be positive");
  const auto total = static_cast<std::size_t>(std::llround(duration * fps));
  const auto per = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(session_length * fps)));
  std::vector<DatasetRecord> out;
  out.reserve(total);
  SessionOptions so = opts;
  for (std::uint64_t k = 0; out.size() < total; ++k) {
    const std::size_t n = std::min(per, total - out.size());
    auto part = simulate_session(motion, static_cast<double>(n) / fps, fps, mix_seed(seed, k), so);
    out.insert(out.end(), part.begin(), part.end());
    so.motion.start_us += std::llround(static_cast<double>(n) * 1e6 / fps) + 1'000'000;
  }
  return out;
}

}  // namespace mmpose::scene
