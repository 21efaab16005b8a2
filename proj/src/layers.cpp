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

#include "mmpose/layers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <string>

#include "mmpose/errors.hpp"

namespace mmpose::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

struct ImageDims {
  std::size_t batch, height, width, channels;
  bool batched;
};

ImageDims image_dims(const Tensor& t, const char* what) {
  if (t.rank() == 4) return {t.dim(0), t.dim(1), t.dim(2), t.dim(3), true};
  if (t.rank() == 3) return {1, t.dim(0), t.dim(1), t.dim(2), false};
  throw StructuralError(std::string(what) + " must be HxWxC or BxHxWxC, got " +
                        to_string(t.dims()));
}

void check_kernels(const ImageDims& in, const Tensor& kernels) {
  if (kernels.rank() != 4 || kernels.dim(0) != kernels.dim(1) || kernels.dim(0) % 2 == 0) {
    throw StructuralError("conv kernels must be k x k x C x D with odd k, got " +
                          to_string(kernels.dims()));
  }
  if (kernels.dim(2) != in.channels) {
    throw StructuralError("conv kernels expect " + std::to_string(kernels.dim(2)) +
                          " input channels, input has " + std::to_string(in.channels));
  }
}

// Rows are output pixels (b, y, x); columns are taps (ky, kx, c), matching
// the row-major k x k x C x D kernel viewed as a (k*k*C) x D matrix.
RowMat im2col(const Tensor& input, const ImageDims& d, std::size_t k) {
  const std::size_t pad = k / 2;
  const std::size_t taps = k * k * d.channels;
  RowMat cols = RowMat::Zero(static_cast<Eigen::Index>(d.batch * d.height * d.width),
                             static_cast<Eigen::Index>(taps));
  const double* src = input.data();
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t y = 0; y < d.height; ++y) {
      for (std::size_t x = 0; x < d.width; ++x) {
        double* row = cols.data() + ((b * d.height + y) * d.width + x) * taps;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(pad);
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(d.height)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pad);
            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(d.width)) continue;
            const double* px = src + ((b * d.height + static_cast<std::size_t>(sy)) * d.width +
                                      static_cast<std::size_t>(sx)) * d.channels;
            std::copy_n(px, d.channels, row + (ky * k + kx) * d.channels);
          }
        }
      }
    }
  }
  return cols;
}

void col2im(const RowMat& cols, const ImageDims& d, std::size_t k, double* dst) {
  const std::size_t pad = k / 2;
  const std::size_t taps = k * k * d.channels;
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t y = 0; y < d.height; ++y) {
      for (std::size_t x = 0; x < d.width; ++x) {
        const double* row = cols.data() + ((b * d.height + y) * d.width + x) * taps;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(pad);
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(d.height)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(pad);
            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(d.width)) continue;
            double* px = dst + ((b * d.height + static_cast<std::size_t>(sy)) * d.width +
                                static_cast<std::size_t>(sx)) * d.channels;
            const double* g = row + (ky * k + kx) * d.channels;
            for (std::size_t c = 0; c < d.channels; ++c) px[c] += g[c];
          }
        }
      }
    }
  }
}

struct DenseDims {
  std::size_t batch, in;
  bool batched;
};

DenseDims dense_dims(const Tensor& x, const Tensor& weights) {
  if (weights.rank() != 2) {
    throw StructuralError("dense weights must be in x out, got " + to_string(weights.dims()));
  }
  DenseDims d{};
  if (x.rank() == 2) {
    d = {x.dim(0), x.dim(1), true};
  } else if (x.rank() == 1) {
    d = {1, x.dim(0), false};
  } else {
    throw StructuralError("dense input must be a vector or B x in, got " + to_string(x.dims()));
  }
  if (d.in != weights.dim(0)) {
    throw StructuralError("dense input width " + std::to_string(d.in) +
                          " does not match weights " + to_string(weights.dims()));
  }
  return d;
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  const ImageDims d = image_dims(input, "conv input");
  check_kernels(d, kernels);
  const std::size_t k = kernels.dim(0);
  const std::size_t depth = kernels.dim(3);
  expect_shape(bias, {depth}, "conv bias");

  const RowMat cols = im2col(input, d, k);
  Tensor out(d.batched ? Shape{d.batch, d.height, d.width, depth}
                       : Shape{d.height, d.width, depth});
  MatMap o(out.data(), cols.rows(), static_cast<Eigen::Index>(depth));
  ConstMatMap w(kernels.data(), cols.cols(), static_cast<Eigen::Index>(depth));
  o.noalias() = cols * w;
  Eigen::Map<const Eigen::RowVectorXd> b(bias.data(), static_cast<Eigen::Index>(depth));
  o.rowwise() += b;
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out,
                          bool need_input_grad) {
  const ImageDims d = image_dims(input, "conv input");
  check_kernels(d, kernels);
  const std::size_t k = kernels.dim(0);
  const std::size_t depth = kernels.dim(3);
  const Shape out_dims = d.batched ? Shape{d.batch, d.height, d.width, depth}
                                   : Shape{d.height, d.width, depth};
  expect_shape(grad_out, out_dims, "conv output gradient");

  const RowMat cols = im2col(input, d, k);
  ConstMatMap g(grad_out.data(), cols.rows(), static_cast<Eigen::Index>(depth));
  ConstMatMap w(kernels.data(), cols.cols(), static_cast<Eigen::Index>(depth));

  ConvGrads grads{Tensor(kernels.dims()), Tensor({depth}), Tensor()};
  MatMap gw(grads.kernels.data(), cols.cols(), static_cast<Eigen::Index>(depth));
  gw.noalias() = cols.transpose() * g;
  Eigen::Map<Eigen::RowVectorXd> gb(grads.bias.data(), static_cast<Eigen::Index>(depth));
  gb = g.colwise().sum();

  if (need_input_grad) {
    const RowMat gcols = g * w.transpose();
    grads.input = Tensor(input.dims());
    col2im(gcols, d, k, grads.input.data());
  }
  return grads;
}

std::size_t conv2d_param_count(std::size_t k, std::size_t c_in, std::size_t d, bool with_bias) {
  return k * k * c_in * d + (with_bias ? d : 0);
}

Tensor relu(const Tensor& t) {
  Tensor out = t;
  for (double& v : out.values()) v = std::max(v, 0.0);
  return out;
}

Tensor dropout_mask(const Shape& dims, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout rate must lie in [0, 1)");
  Tensor mask(dims, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask.values()) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

Tensor dropout(const Tensor& t, double rate, Mode mode, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout rate must lie in [0, 1)");
  if (mode == Mode::Infer || rate == 0.0) return t;
  Rng rng(seed);
  const Tensor mask = dropout_mask(t.dims(), rate, rng);
  Tensor out = t;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return out;
}

Tensor dense_forward(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  const DenseDims d = dense_dims(x, weights);
  const std::size_t out_width = weights.dim(1);
  expect_shape(bias, {out_width}, "dense bias");
  Tensor y(d.batched ? Shape{d.batch, out_width} : Shape{out_width});
  ConstMatMap xm(x.data(), static_cast<Eigen::Index>(d.batch), static_cast<Eigen::Index>(d.in));
  ConstMatMap wm(weights.data(), static_cast<Eigen::Index>(d.in),
                 static_cast<Eigen::Index>(out_width));
  MatMap ym(y.data(), static_cast<Eigen::Index>(d.batch), static_cast<Eigen::Index>(out_width));
  ym.noalias() = xm * wm;
  Eigen::Map<const Eigen::RowVectorXd> b(bias.data(), static_cast<Eigen::Index>(out_width));
  ym.rowwise() += b;
  return y;
}

DenseGrads dense_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out) {
  const DenseDims d = dense_dims(x, weights);
  const std::size_t out_width = weights.dim(1);
  expect_shape(grad_out, d.batched ? Shape{d.batch, out_width} : Shape{out_width},
               "dense output gradient");
  const auto rows = static_cast<Eigen::Index>(d.batch);
  const auto in = static_cast<Eigen::Index>(d.in);
  const auto out = static_cast<Eigen::Index>(out_width);
  ConstMatMap xm(x.data(), rows, in);
  ConstMatMap wm(weights.data(), in, out);
  ConstMatMap gm(grad_out.data(), rows, out);

  DenseGrads grads{Tensor(weights.dims()), Tensor({out_width}), Tensor(x.dims())};
  MatMap(grads.weights.data(), in, out).noalias() = xm.transpose() * gm;
  Eigen::Map<Eigen::RowVectorXd>(grads.bias.data(), out) = gm.colwise().sum();
  MatMap(grads.input.data(), rows, in).noalias() = gm * wm.transpose();
  return grads;
}

Tensor flatten(const Tensor& t) { return t.reshaped({t.size()}); }

Tensor flatten_batch(const Tensor& t) {
  if (t.rank() < 2) throw StructuralError("flatten_batch needs a batch axis");
  return t.reshaped({t.dim(0), t.size() / t.dim(0)});
}

Tensor concat_depth(const Tensor& a, const Tensor& b) {
  if (a.rank() == 0 || a.rank() != b.rank() ||
      !std::equal(a.dims().begin(), a.dims().end() - 1, b.dims().begin())) {
    throw StructuralError("cannot concatenate " + to_string(a.dims()) + " and " +
                          to_string(b.dims()) + " along depth");
  }
  const std::size_t da = a.dims().back(), db = b.dims().back();
  Shape dims = a.dims();
  dims.back() = da + db;
  Tensor out(dims);
  const std::size_t cells = a.size() / da;
  for (std::size_t i = 0; i < cells; ++i) {
    std::copy_n(a.data() + i * da, da, out.data() + i * (da + db));
    std::copy_n(b.data() + i * db, db, out.data() + i * (da + db) + da);
  }
  return out;
}

std::pair<Tensor, Tensor> split_depth(const Tensor& t, std::size_t depth_a) {
  if (t.rank() == 0 || depth_a == 0 || depth_a >= t.dims().back()) {
    throw StructuralError("cannot split " + to_string(t.dims()) + " at depth " +
                          std::to_string(depth_a));
  }
  const std::size_t total = t.dims().back(), db = total - depth_a;
  Shape da_dims = t.dims(), db_dims = t.dims();
  da_dims.back() = depth_a;
  db_dims.back() = db;
  Tensor a(da_dims), b(db_dims);
  const std::size_t cells = t.size() / total;
  for (std::size_t i = 0; i < cells; ++i) {
    std::copy_n(t.data() + i * total, depth_a, a.data() + i * depth_a);
    std::copy_n(t.data() + i * total + depth_a, db, b.data() + i * db);
  }
  return {std::move(a), std::move(b)};
}

double mse_loss(const Tensor& pred, const Tensor& truth) {
  if (pred.size() != truth.size() || pred.size() == 0) {
    throw StructuralError("mse_loss length mismatch: " + std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    sum += e * e;
  }
  return sum / static_cast<double>(pred.size());
}

Tensor mse_grad(const Tensor& pred, const Tensor& truth) {
  if (pred.size() != truth.size() || pred.size() == 0) {
    throw StructuralError("mse_grad length mismatch");
  }
  Tensor g(pred.dims());
  const double scale = 2.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = scale * (pred[i] - truth[i]);
  return g;
}

}  // namespace mmpose::nn
