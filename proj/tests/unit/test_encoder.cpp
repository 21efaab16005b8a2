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
#include <filesystem>

#include "mmpose/encoder.hpp"
#include "mmpose/errors.hpp"
#include "mmpose/rng.hpp"

using namespace mmpose;
using namespace mmpose::encoder;
using scene::ReflectionPoint;
using scene::RadarFrame;
using doctest::Approx;

namespace {

NormalizationParams box() {
  scene::SceneBounds b;
  b.depth = {0.0, 5.0};
  b.azimuth = {-2.0, 2.0};
  b.elevation = {-1.5, 1.5};
  return compute_norm(b);
}

RadarFrame random_frame(Rng& rng, std::size_t n) {
  RadarFrame f;
  for (std::size_t i = 0; i < n; ++i) {
    f.points.push_back({rng.uniform(0.01, 5.0), rng.uniform(-2.0, 2.0), rng.uniform(-5.0, 5.0),
                        rng.uniform(0.01, 1.0)});
  }
  return f;
}

}  // namespace

TEST_CASE("voxel dimensions") {
  using A = std::array<std::size_t, 4>;
  CHECK(voxel_dimension({5, 5, 5}, {0.05, 0.05, 0.05}) == A{100, 100, 100, 3});
  CHECK(voxel_dimension({0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}) == A{1, 1, 1, 3});
  CHECK(voxel_dimension({2, 4, 5}, {0.1, 0.1, 0.1}) == A{20, 40, 50, 3});
  CHECK(voxel_dimension({1, 1, 1}, {0.3, 0.3, 0.3}) == A{4, 4, 4, 3});
  CHECK_THROWS_AS(voxel_dimension({1, 1, 1}, {0.0, 0.1, 0.1}), DomainError);
  CHECK_THROWS_AS(voxel_dimension({1, 1, 1}, {0.1, -0.1, 0.1}), DomainError);
}

TEST_CASE("encoded image is far smaller than the voxel grid") {
  const auto v = voxel_dimension({5, 5, 5}, {0.05, 0.05, 0.05});
  const std::size_t voxels = v[0] * v[1] * v[2] * v[3];
  CHECK(voxels == 3'000'000);
  const EncodedImage img = encode_frame(RadarFrame{}, box());
  CHECK(img.pixels.size() == 768);
  CHECK(static_cast<double>(voxels) / img.pixels.size() == Approx(3906.25));
  CHECK(image_side(256) == 16);
  CHECK(image_side(257) == 17);
  CHECK(image_side(100) == 10);
}

TEST_CASE("affine normalization") {
  const auto n = box();
  CHECK(to_unit(n.depth, 2.5) == 0.5);
  CHECK(to_unit(n.depth, 0.0) == 0.0);
  CHECK(to_unit(n.depth, 5.0) == 1.0);
  CHECK(to_unit(n.azimuth, -1.0) == Approx(0.25).epsilon(1e-15));
  CHECK(from_unit(n.azimuth, 0.25) == Approx(-1.0).epsilon(1e-15));

  scene::SceneBounds bad;
  bad.elevation = {1.0, 1.0};
  CHECK_THROWS_AS(compute_norm(bad), DomainError);
}

TEST_CASE("empty frame encodes to zeros") {
  const auto img = encode_frame(RadarFrame{}, box());
  CHECK(std::all_of(img.pixels.begin(), img.pixels.end(), [](double v) { return v == 0.0; }));
  CHECK(decode_image(img, box()).empty());
}

TEST_CASE("single centred point lands in pixel zero") {
  RadarFrame f;
  f.points.push_back({2.5, 0.0, 0.3, 1.0});
  const auto img = encode_frame(f, box());
  CHECK(img.pixel(0)[0] == 0.5);
  CHECK(img.pixel(0)[1] == 0.5);
  CHECK(img.pixel(0)[2] == 1.0);
  CHECK(std::all_of(img.pixels.begin() + 3, img.pixels.end(), [](double v) { return v == 0.0; }));

  const auto back = decode_image(img, box());
  REQUIRE(back.size() == 1);
  CHECK(back[0].depth == Approx(2.5));
  CHECK(back[0].lateral == Approx(0.0));
  CHECK(back[0].intensity == Approx(1.0));
}

TEST_CASE("a full frame leaves no zero pixel") {
  Rng rng(5);
  const auto img = encode_frame(random_frame(rng, 256), box());
  for (std::size_t k = 0; k < img.capacity(); ++k) {
    const double* p = img.pixel(k);
    CHECK((p[0] != 0.0 || p[1] != 0.0 || p[2] != 0.0));
  }
  CHECK_THROWS_AS(encode_frame(random_frame(rng, 257), box()), StructuralError);
}

TEST_CASE("out-of-box values are clamped and counted") {
  RadarFrame f;
  f.points.push_back({7.0, -3.0, 0.0, 0.5});
  EncodeStats stats;
  const auto img = encode_frame(f, box(), 16, &stats);
  CHECK(img.pixel(0)[0] == 1.0);
  CHECK(img.pixel(0)[1] == 0.0);
  CHECK(stats.clamped == 2);
}

TEST_CASE("pixel order is canonical and permutation invariant") {
  Rng rng(9);
  auto f = random_frame(rng, 40);
  const auto a = encode_frame(f, box());
  std::reverse(f.points.begin(), f.points.end());
  const auto b = encode_frame(f, box());
  CHECK(a.pixels == b.pixels);
  for (std::size_t k = 1; k < 40; ++k) CHECK(a.pixel(k - 1)[2] >= a.pixel(k)[2]);
}

TEST_CASE("encode then decode round trips 1000 frames") {
  Rng rng(1234);
  const auto n = box();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = random_frame(rng, static_cast<std::size_t>(rng.below(257)));
    const auto back = decode_image(encode_frame(f, n), n);
    REQUIRE(back.size() == f.points.size());
    const auto want = canonical_order(f.points);
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(std::abs(back[i].depth - want[i].depth) < 1e-6);
      CHECK(std::abs(back[i].lateral - want[i].lateral) < 1e-6);
      CHECK(std::abs(back[i].intensity - want[i].intensity) < 1e-6);
    }
  }
}

TEST_CASE("skeleton normalization") {
  const auto n = box();
  scene::SkeletonFrame s;
  for (auto& j : s.joints) j = {2.5, 0.0, 0.0};
  s.joints[3] = {0.0, -2.0, 1.5};
  const auto v = normalize_skeleton(s, n);
  CHECK(v[0] == 0.5);
  CHECK(v[1] == 0.5);
  CHECK(v[2] == 0.5);
  CHECK(v[9] == 0.0);
  CHECK(v[10] == 0.0);
  CHECK(v[11] == 1.0);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    for (auto& j : s.joints) {
      j = {rng.uniform(0.0, 5.0), rng.uniform(-2.0, 2.0), rng.uniform(-1.5, 1.5)};
    }
    const auto back = denormalize_skeleton(normalize_skeleton(s, n), n);
    for (std::size_t j = 0; j < scene::kJointCount; ++j) {
      CHECK(scene::distance(back.joints[j], s.joints[j]) < 1e-9);
    }
  }

  // Strictly monotone per coordinate.
  scene::SkeletonFrame a = s, b = s;
  a.joints[0].y = 0.1;
  b.joints[0].y = 0.1 + 1e-6;
  CHECK(normalize_skeleton(a, n)[1] < normalize_skeleton(b, n)[1]);
}

TEST_CASE("normalization sidecar round trips") {
  const auto n = compute_norm(scene::SceneBounds{}, {0.0, 0.75});
  CHECK(parse_norm(format_norm(n)) == n);
  const auto path = std::filesystem::temp_directory_path() / "mmpose_norm_test.txt";
  save_norm(n, path);
  CHECK(load_norm(path) == n);
  std::filesystem::remove(path);
  CHECK_THROWS(parse_norm("depth=1,0\n"));
}
