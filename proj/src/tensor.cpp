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

#include "mmpose/tensor.hpp"

#include <algorithm>

#include "mmpose/errors.hpp"

namespace mmpose::nn {

std::string to_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

std::size_t element_count(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

Tensor::Tensor(Shape dims, double fill) : dims_(std::move(dims)) {
  for (std::size_t d : dims_) {
    if (d == 0) throw StructuralError("tensor dims must be positive, got " + to_string(dims_));
  }
  data_.assign(element_count(dims_), fill);
}

Tensor::Tensor(Shape dims, std::vector<double> values)
    : dims_(std::move(dims)), data_(values.begin(), values.end()) {
  if (data_.size() != element_count(dims_)) {
    throw StructuralError("tensor of dims " + to_string(dims_) + " given " +
                          std::to_string(data_.size()) + " values");
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape dims) const {
  if (element_count(dims) != data_.size()) {
    throw StructuralError("cannot reshape " + to_string(dims_) + " to " + to_string(dims));
  }
  Tensor out;
  out.dims_ = std::move(dims);
  out.data_ = data_;
  return out;
}

void expect_shape(const Tensor& t, const Shape& dims, const char* what) {
  if (t.dims() != dims) {
    throw StructuralError(std::string(what) + " has shape " + to_string(t.dims()) +
                          ", expected " + to_string(dims));
  }
}

}  // namespace mmpose::nn
