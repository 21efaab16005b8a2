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
#include <cmath>
#include <filesystem>

#include "mmpose/checkpoint.hpp"
#include "mmpose/errors.hpp"
#include "mmpose/layers.hpp"
#include "mmpose/model.hpp"
#include "mmpose/optim.hpp"
#include "mmpose/train.hpp"

using namespace mmpose;
using namespace mmpose::nn;
using doctest::Approx;

namespace {

Tensor random_tensor(const Shape& dims, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Tensor t(dims);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

Batch random_batch(const ModelConfig& cfg, std::size_t n, Rng& rng) {
  const Shape img{n, cfg.side, cfg.side, cfg.channels};
  return {random_tensor(img, rng), random_tensor(img, rng), random_tensor({n, cfg.outputs}, rng)};
}

encoder::EncodedImage random_image(std::size_t side, radar::Plane plane, Rng& rng) {
  encoder::EncodedImage img(side, plane);
  for (double& v : img.pixels) v = rng.uniform();
  return img;
}

TrainingSet random_set(std::size_t side, std::size_t n, Rng& rng) {
  TrainingSet s(side);
  for (std::size_t i = 0; i < n; ++i) {
    encoder::JointVector t{};
    for (double& v : t) v = rng.uniform();
    s.add(random_image(side, radar::Plane::XY, rng), random_image(side, radar::Plane::XZ, rng), t);
  }
  return s;
}

ModelConfig no_dropout(ModelConfig c) {
  c.conv_dropout = 0.0;
  c.dense_dropout = 0.0;
  return c;
}

}  // namespace

TEST_CASE("identity kernel reproduces the input") {
  Rng rng(1);
  const Tensor in = random_tensor({5, 5, 3}, rng);
  Tensor k({3, 3, 3, 3});
  for (std::size_t c = 0; c < 3; ++c) k[((1 * 3 + 1) * 3 + c) * 3 + c] = 1.0;
  CHECK(conv2d_forward(in, k, Tensor({3})) == in);
}

TEST_CASE("ones kernel counts the zero-padded neighbourhood") {
  const Tensor in({4, 4, 1}, 1.0);
  const Tensor out = conv2d_forward(in, Tensor({3, 3, 1, 1}, 1.0), Tensor({1}));
  CHECK(out.dims() == Shape{4, 4, 1});
  CHECK(out[0] == 4.0);
  CHECK(out[3] == 4.0);
  CHECK(out[12] == 4.0);
  CHECK(out[15] == 4.0);
  CHECK(out[1] == 6.0);
  CHECK(out[5] == 9.0);
  CHECK(out[10] == 9.0);
}

TEST_CASE("zero kernel yields the bias") {
  Rng rng(2);
  const Tensor out = conv2d_forward(random_tensor({6, 6, 3}, rng), Tensor({3, 3, 3, 2}),
                                    Tensor({2}, std::vector<double>{0.25, -1.5}));
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == (i % 2 ? -1.5 : 0.25));
}

TEST_CASE("convolution shape errors") {
  CHECK_THROWS_AS(conv2d_forward(Tensor({4, 4, 2}), Tensor({3, 3, 3, 1}), Tensor({1})),
                  StructuralError);
  CHECK_THROWS_AS(conv2d_forward(Tensor({4, 4, 3}), Tensor({3, 3, 3, 2}), Tensor({1})),
                  StructuralError);
}

TEST_CASE("convolution parameter counts") {
  CHECK(conv2d_param_count(3, 3, 1, false) == 27);
  CHECK(conv2d_param_count(3, 3, 16, true) == 448);
  CHECK(conv2d_param_count(1, 1, 1, false) == 1);
  // Linear growth in depth.
  CHECK(conv2d_param_count(3, 3, 64, false) == 64 * conv2d_param_count(3, 3, 1, false));

  const auto cfg = ModelConfig::standard();
  CHECK(branch_parameter_count(cfg) == 448 + (9 * 16 * 32 + 32) + (9 * 32 * 64 + 64));
  CHECK(head_parameter_count(cfg) ==
        (32768 * 512 + 512) + (512 * 256 + 256) + (256 * 128 + 128));
  CHECK(output_parameter_count(cfg) == 128 * 75 + 75);
  CHECK(total_parameter_count(cfg) == 2 * branch_parameter_count(cfg) +
                                          head_parameter_count(cfg) +
                                          output_parameter_count(cfg));
}

TEST_CASE("relu, dropout and concatenation") {
  const Tensor t({3}, std::vector<double>{-1.0, 0.0, 2.0});
  CHECK(relu(t) == Tensor({3}, std::vector<double>{0.0, 0.0, 2.0}));

  Rng rng(4);
  const Tensor x = random_tensor({1000}, rng);
  CHECK(dropout(x, 0.0, Mode::Train, 7) == x);
  CHECK(dropout(x, 0.0, Mode::Infer, 7) == x);
  CHECK(dropout(x, 0.5, Mode::Infer, 7) == x);

  const Tensor d = dropout(x, 0.25, Mode::Train, 7);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (d[i] == 0.0) {
      ++zeros;
    } else {
      CHECK(d[i] == Approx(x[i] / 0.75));
    }
  }
  CHECK(zeros > 180);
  CHECK(zeros < 320);

  const Tensor a({2, 2, 1}, 1.0), b({2, 2, 3}, 2.0);
  const Tensor c = concat_depth(a, b);
  CHECK(c.dims() == Shape{2, 2, 4});
  CHECK(c[0] == 1.0);
  CHECK(c[1] == 2.0);
  const auto [a2, b2] = split_depth(c, 1);
  CHECK(a2 == a);
  CHECK(b2 == b);
  CHECK_THROWS_AS(concat_depth(a, Tensor({3, 2, 1})), StructuralError);
}

TEST_CASE("dense layer and flatten") {
  const Tensor x({2}, std::vector<double>{1.0, 2.0});
  const Tensor w({2, 3}, std::vector<double>{1, 0, -1, 0.5, 1, 2});
  const Tensor b({3}, std::vector<double>{0.0, 1.0, 0.5});
  CHECK(dense_forward(x, w, b) == Tensor({3}, std::vector<double>{2.0, 3.0, 3.5}));
  CHECK_THROWS_AS(dense_forward(Tensor({3}), w, b), StructuralError);
  CHECK(flatten(Tensor({2, 3, 4})).dims() == Shape{24});
}

TEST_CASE("mean squared error") {
  Tensor truth({75}, 0.5);
  CHECK(mse_loss(truth, truth) == 0.0);
  Tensor plus({75}, 1.5);
  CHECK(mse_loss(plus, truth) == 1.0);
  Tensor one = truth;
  one[0] += 3.0;
  CHECK(mse_loss(one, truth) == Approx(0.12).epsilon(1e-15));
  CHECK_THROWS_AS(mse_loss(Tensor({74}), truth), StructuralError);
}

TEST_CASE("zero model outputs zeros") {
  const auto model = ForkedModel::zeros(ModelConfig::miniature());
  Rng rng(5);
  const auto out = model.forward(random_image(4, radar::Plane::XY, rng),
                                 random_image(4, radar::Plane::XZ, rng), Mode::Infer);
  CHECK(std::all_of(out.begin(), out.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("inference is deterministic and training mode is stochastic") {
  const ForkedModel model(ModelConfig::miniature(), 3);
  Rng rng(6);
  const auto xy = random_image(4, radar::Plane::XY, rng);
  const auto xz = random_image(4, radar::Plane::XZ, rng);
  CHECK(model.forward(xy, xz, Mode::Infer) == model.forward(xy, xz, Mode::Infer));
  CHECK(model.forward(xy, xz, Mode::Infer, 1) == model.forward(xy, xz, Mode::Infer, 2));
  CHECK(model.forward(xy, xz, Mode::Train, 1) == model.forward(xy, xz, Mode::Train, 1));
  CHECK_FALSE(model.forward(xy, xz, Mode::Train, 1) == model.forward(xy, xz, Mode::Train, 2));

  const auto small = random_image(3, radar::Plane::XZ, rng);
  CHECK_THROWS_AS(model.forward(xy, small, Mode::Infer), StructuralError);
}

TEST_CASE("standard model shape chain") {
  const auto cfg = ModelConfig::standard();
  const ForkedModel model(cfg, 1);
  const auto& p = model.parameters();
  // Two branches of three convolutions, three hidden dense layers, output.
  REQUIRE(p.size() == 2 * 3 * 2 + 3 * 2 + 2);
  CHECK(p[0].value.dims() == Shape{3, 3, 3, 16});
  CHECK(p[2].value.dims() == Shape{3, 3, 16, 32});
  CHECK(p[4].value.dims() == Shape{3, 3, 32, 64});
  CHECK(p[12].value.dims() == Shape{32768, 512});
  CHECK(p[14].value.dims() == Shape{512, 256});
  CHECK(p[16].value.dims() == Shape{256, 128});
  CHECK(p[18].value.dims() == Shape{128, 75});
  CHECK(model.parameter_count() == total_parameter_count(cfg));

  Rng rng(2);
  const Tensor xy = random_tensor({2, 16, 16, 3}, rng);
  const Tensor xz = random_tensor({2, 16, 16, 3}, rng);
  CHECK(model.forward(xy, xz, Mode::Infer).dims() == Shape{2, 75});
}

TEST_CASE("single precision inference agrees with the reference path") {
  for (const auto& cfg : {ModelConfig::miniature(), ModelConfig::standard()}) {
    const ForkedModel model(cfg, 8);
    const FrozenModel frozen(model);
    Rng rng(3);
    for (int trial = 0; trial < 3; ++trial) {
      const auto xy = random_image(cfg.side, radar::Plane::XY, rng);
      const auto xz = random_image(cfg.side, radar::Plane::XZ, rng);
      const auto ref = model.forward(xy, xz, Mode::Infer);
      const auto got = frozen.forward(xy, xz);
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-4);
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    ModelConfig cfg = ModelConfig::miniature();
    cfg.conv_dropout = 0.2;
    cfg.dense_dropout = 0.3;
    ForkedModel model(cfg, 100 + seed);
    Rng rng(seed);
    // Zero biases over an all-zero neighbourhood put a ReLU exactly on its
    // kink, where central differences are meaningless.
    for (auto& p : model.parameters()) {
      if (p.value.rank() == 1) {
        for (double& v : p.value.values()) v = rng.uniform(-0.1, 0.1);
      }
    }
    const Batch batch = random_batch(cfg, 3, rng);
    const auto mode = seed % 2 ? Mode::Train : Mode::Infer;
    const auto g = model.backward(batch, mode, seed);

    auto loss = [&] { return mse_loss(model.forward(batch.xy, batch.xz, mode, seed), batch.truth); };
    CHECK(g.loss == Approx(loss()).epsilon(1e-12));

    constexpr double kEps = 1e-5;
    double worst = 0.0;
    for (std::size_t p = 0; p < model.parameters().size(); ++p) {
      Tensor& w = model.parameters()[p].value;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double keep = w[i];
        w[i] = keep + kEps;
        const double up = loss();
        w[i] = keep - kEps;
        const double down = loss();
        w[i] = keep;
        const double numeric = (up - down) / (2.0 * kEps);
        const double analytic = g.grads[p][i];
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
        worst = std::max(worst, std::abs(numeric - analytic) / scale);
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("dropped units receive no gradient") {
  ModelConfig cfg = ModelConfig::miniature();
  cfg.conv_dropout = 0.0;
  cfg.dense_dropout = 0.5;
  ForkedModel model(cfg, 11);
  // The last hidden layer outputs a constant 1 per unit unless dropped.
  auto& params = model.parameters();
  params[params.size() - 4].value.fill(0.0);
  params[params.size() - 3].value.fill(1.0);
  Rng rng(12);
  const Batch batch = random_batch(cfg, 1, rng);

  // Rows of the output weights fed by a zeroed hidden unit get no gradient.
  auto zero_rows = [&](Mode mode, std::uint64_t seed) {
    const auto g = model.backward(batch, mode, seed);
    const Tensor& gw = g.grads[g.grads.size() - 2];
    std::size_t n = 0;
    for (std::size_t r = 0; r < 8; ++r) {
      bool all_zero = true;
      for (std::size_t c = 0; c < 75; ++c) all_zero = all_zero && gw[r * 75 + c] == 0.0;
      n += all_zero;
    }
    return n;
  };
  CHECK(zero_rows(Mode::Infer, 0) == 0);
  std::size_t dropped = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) dropped += zero_rows(Mode::Train, seed);
  // About half of 80 units are dropped.
  CHECK(dropped > 20);
  CHECK(dropped < 60);
}

TEST_CASE("perfect predictions give zero gradients") {
  const auto cfg = ModelConfig::miniature();
  const ForkedModel model(cfg, 4);
  Rng rng(4);
  Batch batch = random_batch(cfg, 2, rng);
  batch.truth = model.forward(batch.xy, batch.xz, Mode::Infer);
  const auto g = model.backward(batch, Mode::Infer);
  CHECK(g.loss == 0.0);
  for (const auto& t : g.grads) {
    for (double v : t.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("adam step") {
  const ForkedModel base(ModelConfig::miniature(), 2);
  AdamConfig cfg;

  SUBCASE("zero gradient leaves parameters unchanged") {
    auto params = base.parameters();
    auto state = AdamState::zeros_like(params);
    std::vector<Tensor> grads;
    for (const auto& p : params) grads.emplace_back(p.value.dims());
    adam_step(params, grads, state, cfg);
    for (std::size_t i = 0; i < params.size(); ++i) CHECK(params[i].value == base.parameters()[i].value);
    CHECK(state.step == 1);
  }

  SUBCASE("first step moves every coordinate by the learning rate") {
    auto params = base.parameters();
    auto state = AdamState::zeros_like(params);
    Rng rng(3);
    std::vector<Tensor> grads;
    for (const auto& p : params) {
      Tensor g = random_tensor(p.value.dims(), rng, 0.1, 1.0);
      for (double& v : g.values()) v *= rng.uniform() < 0.5 ? -1.0 : 1.0;
      grads.push_back(std::move(g));
    }
    adam_step(params, grads, state, cfg);
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (std::size_t k = 0; k < params[i].value.size(); ++k) {
        const double step = base.parameters()[i].value[k] - params[i].value[k];
        CHECK(step == Approx(std::copysign(cfg.learning_rate, grads[i][k])).epsilon(1e-6));
      }
    }
  }

  SUBCASE("identical inputs give identical updates") {
    auto p1 = base.parameters();
    auto p2 = base.parameters();
    auto s1 = AdamState::zeros_like(p1);
    auto s2 = AdamState::zeros_like(p2);
    Rng rng(8);
    std::vector<Tensor> grads;
    for (const auto& p : p1) grads.push_back(random_tensor(p.value.dims(), rng, -1.0, 1.0));
    for (int i = 0; i < 3; ++i) {
      adam_step(p1, grads, s1, cfg);
      adam_step(p2, grads, s2, cfg);
    }
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].value == p2[i].value);
  }
}

TEST_CASE("full-batch descent with a small rate never raises the loss") {
  const auto cfg = no_dropout(ModelConfig::miniature());
  ForkedModel model(cfg, 21);
  Rng rng(21);
  const Batch batch = random_batch(cfg, 8, rng);
  double last = model.backward(batch, Mode::Train, 0).loss;
  for (int step = 0; step < 50; ++step) {
    const auto g = model.backward(batch, Mode::Train, 0);
    for (std::size_t p = 0; p < g.grads.size(); ++p) {
      auto& w = model.parameters()[p].value;
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= 1e-4 * g.grads[p][i];
    }
    const double now = model.backward(batch, Mode::Train, 0).loss;
    CHECK(now <= last);
    last = now;
  }
}

TEST_CASE("training returns the best checkpoint") {
  const auto cfg = ModelConfig::miniature();
  Rng rng(30);
  const auto train_set = random_set(4, 40, rng);
  const auto val_set = random_set(4, 12, rng);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.max_epochs = 12;
  tc.seed = 5;

  ForkedModel m1(cfg, 1);
  std::size_t callbacks = 0;
  const auto r1 = train(m1, train_set, val_set, tc, [&](const EpochLoss&) { ++callbacks; });
  CHECK(callbacks == 12);
  REQUIRE(r1.history.size() == 12);

  auto best = std::min_element(r1.history.begin(), r1.history.end(),
                               [](const auto& a, const auto& b) { return a.val < b.val; });
  CHECK(r1.best.best_val_loss == best->val);
  CHECK(r1.best.epoch == best->epoch);
  double running = 1e300;
  for (const auto& e : r1.history) {
    CHECK(e.improved == (e.val < running));
    running = std::min(running, e.val);
  }

  ForkedModel m2(cfg, 1);
  const auto r2 = train(m2, train_set, val_set, tc);
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].train == r2.history[i].train);
    CHECK(r1.history[i].val == r2.history[i].val);
  }

  ForkedModel m3(cfg, 1);
  CHECK_THROWS_AS(train(m3, TrainingSet(4), val_set, tc), DomainError);
  CHECK_THROWS_AS(train(m3, train_set, TrainingSet(4), tc), DomainError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const ForkedModel model(ModelConfig::miniature(), 6);
  const auto ckpt = make_checkpoint(model, AdamState::zeros_like(model.parameters()), 7, 0.25);
  const auto bytes = serialize_checkpoint(ckpt);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MMPW");

  const auto back = deserialize_checkpoint(bytes);
  CHECK(serialize_checkpoint(back) == bytes);
  CHECK(back.epoch == 7);
  CHECK(back.best_val_loss == 0.25);
  CHECK(back.config == model.config());

  const auto path = std::filesystem::temp_directory_path() / "mmpose_ckpt_test.bin";
  save_checkpoint(ckpt, path);
  const auto loaded = load_checkpoint(path);
  std::filesystem::remove(path);

  Rng rng(7);
  const auto xy = random_image(4, radar::Plane::XY, rng);
  const auto xz = random_image(4, radar::Plane::XZ, rng);
  CHECK(model_from_checkpoint(ckpt).forward(xy, xz, Mode::Infer) ==
        model_from_checkpoint(loaded).forward(xy, xz, Mode::Infer));

  // Float32 storage loses less than 1e-7 relative.
  const auto& orig = model.parameters();
  for (std::size_t p = 0; p < orig.size(); ++p) {
    for (std::size_t i = 0; i < orig[p].value.size(); ++i) {
      const double a = orig[p].value[i];
      CHECK(std::abs(loaded.params[p].value[i] - a) <= 1e-7 * std::abs(a));
    }
  }
}

TEST_CASE("corrupt checkpoints raise distinct errors") {
  const ForkedModel model(ModelConfig::miniature(), 6);
  const auto bytes =
      serialize_checkpoint(make_checkpoint(model, AdamState::zeros_like(model.parameters()), 1, 1.0));

  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  CHECK_THROWS_AS(deserialize_checkpoint(truncated), TruncationError);

  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(magic), FormatError);

  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(deserialize_checkpoint(version), VersionError);
}
