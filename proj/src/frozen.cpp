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

#include <Eigen/Dense>

#include <algorithm>

#include "mmpose/errors.hpp"
#include "mmpose/model.hpp"

namespace mmpose::nn {

namespace {

using RowMatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapF = Eigen::Map<RowMatF>;
using ConstMapF = Eigen::Map<const RowMatF>;
using RowVecF = Eigen::Matrix<float, 1, Eigen::Dynamic>;

// Same-padded convolution of one H x W x C image plus ReLU.
FloatBuffer conv_relu(const FloatBuffer& in, std::size_t side, std::size_t c,
                             std::size_t k, const FloatBuffer& kernel,
                             const FloatBuffer& bias) {
  const std::size_t d = bias.size(), taps = k * k * c, pad = k / 2, pixels = side * side;
  RowMatF cols = RowMatF::Zero(static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(taps));
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      float* row = cols.data() + (y * side + x) * taps;
      for (std::size_t ky = 0; ky < k; ++ky) {
        const std::size_t sy = y + ky;
        if (sy < pad || sy - pad >= side) continue;
        for (std::size_t kx = 0; kx < k; ++kx) {
          const std::size_t sx = x + kx;
          if (sx < pad || sx - pad >= side) continue;
          std::copy_n(in.data() + ((sy - pad) * side + (sx - pad)) * c, c,
                      row + (ky * k + kx) * c);
        }
      }
    }
  }
  FloatBuffer out(pixels * d);
  MapF o(out.data(), static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(d));
  o.noalias() = cols * ConstMapF(kernel.data(), static_cast<Eigen::Index>(taps),
                                 static_cast<Eigen::Index>(d));
  o.rowwise() += Eigen::Map<const RowVecF>(bias.data(), static_cast<Eigen::Index>(d));
  for (float& v : out) v = std::max(v, 0.0f);
  return out;
}

FloatBuffer dense(const FloatBuffer& x, const FloatBuffer& w,
                         const FloatBuffer& b, bool relu) {
  const auto in = static_cast<Eigen::Index>(x.size());
  const auto out = static_cast<Eigen::Index>(b.size());
  FloatBuffer y(b.size());
  Eigen::Map<RowVecF> ym(y.data(), out);
  ym.noalias() = Eigen::Map<const RowVecF>(x.data(), in) * ConstMapF(w.data(), in, out);
  ym += Eigen::Map<const RowVecF>(b.data(), out);
  if (relu) {
    for (float& v : y) v = std::max(v, 0.0f);
  }
  return y;
}

}  // namespace

FrozenModel::FrozenModel(const ForkedModel& model) : cfg_(model.config()) {
  for (const auto& p : model.parameters()) {
    params_.emplace_back(p.value.values().begin(), p.value.values().end());
  }
}

encoder::JointVector FrozenModel::forward(const encoder::EncodedImage& xy,
                                          const encoder::EncodedImage& xz) const {
  if (xy.side != cfg_.side || xz.side != cfg_.side) {
    throw StructuralError("images are " + std::to_string(xy.side) + "/" +
                          std::to_string(xz.side) + " pixels wide, model expects " +
                          std::to_string(cfg_.side));
  }
  const std::size_t layers = cfg_.conv_depths.size(), pixels = cfg_.side * cfg_.side;
  std::array<FloatBuffer, 2> branch;
  for (std::size_t br = 0; br < 2; ++br) {
    const auto& img = br == 0 ? xy : xz;
    FloatBuffer h(img.pixels.begin(), img.pixels.end());
    std::size_t c = cfg_.channels;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t idx = (br * layers + l) * 2;
      h = conv_relu(h, cfg_.side, c, cfg_.kernel, params_[idx], params_[idx + 1]);
      c = cfg_.conv_depths[l];
    }
    branch[br] = std::move(h);
  }
  const std::size_t d = cfg_.conv_depths.back();
  FloatBuffer h(pixels * 2 * d);
  for (std::size_t i = 0; i < pixels; ++i) {
    std::copy_n(branch[0].data() + i * d, d, h.data() + i * 2 * d);
    std::copy_n(branch[1].data() + i * d, d, h.data() + i * 2 * d + d);
  }
  const std::size_t head_base = 4 * layers;
  for (std::size_t l = 0; l < cfg_.head.size(); ++l) {
    h = dense(h, params_[head_base + 2 * l], params_[head_base + 2 * l + 1], true);
  }
  const std::size_t out_idx = params_.size() - 2;
  h = dense(h, params_[out_idx], params_[out_idx + 1], false);
  if (h.size() != encoder::kSkeletonValues) {
    throw StructuralError("model does not emit one value per joint coordinate");
  }
  encoder::JointVector v{};
  std::copy(h.begin(), h.end(), v.begin());
  return v;
}

}  // namespace mmpose::nn
