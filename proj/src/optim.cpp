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

#include "mmpose/optim.hpp"

#include <cmath>

#include "mmpose/errors.hpp"

namespace mmpose::nn {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0) || !(epsilon > 0.0)) {
    throw DomainError("Adam learning rate and epsilon must be positive");
  }
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw DomainError("Adam betas must lie in (0, 1)");
  }
}

AdamState AdamState::zeros_like(const std::vector<NamedTensor>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.value.dims());
    s.v.emplace_back(p.value.dims());
  }
  return s;
}

void adam_step(std::vector<NamedTensor>& params, const std::vector<Tensor>& grads,
               AdamState& state, const AdamConfig& cfg) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw StructuralError("Adam: parameter, gradient and moment lists differ in length");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    expect_shape(grads[i], params[i].value.dims(), "Adam gradient");
    expect_shape(state.m[i], params[i].value.dims(), "Adam first moment");
    expect_shape(state.v[i], params[i].value.dims(), "Adam second moment");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i].value.data();
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    const double* g = grads[i].data();
    const std::size_t n = params[i].value.size();
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace mmpose::nn
