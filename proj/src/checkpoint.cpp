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

#include "mmpose/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include "mmpose/errors.hpp"

namespace mmpose::nn {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'P', 'W'};

double round_to_float(double v) { return static_cast<double>(static_cast<float>(v)); }

Tensor rounded(const Tensor& t) {
  Tensor out = t;
  for (double& v : out.values()) v = round_to_float(v);
  return out;
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void tensor(const std::string& name, const Tensor& t) {
    str(name);
    u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.dims()) u32(static_cast<std::uint32_t>(d));
    bytes_.reserve(bytes_.size() + 4 * t.size());
    for (double v : t.values()) f32(static_cast<float>(v));
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw TruncationError(std::string("checkpoint truncated while reading ") + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  NamedTensor tensor() {
    NamedTensor nt;
    nt.name = str("tensor name");
    const std::uint32_t rank = u32("tensor rank");
    if (rank == 0 || rank > 8) throw FormatError("tensor '" + nt.name + "' has invalid rank");
    Shape dims(rank);
    std::size_t count = 1;
    for (auto& d : dims) {
      d = u32("tensor dims");
      if (d == 0) throw FormatError("tensor '" + nt.name + "' has a zero dimension");
      count *= d;
    }
    need(4 * count, "tensor values");
    std::vector<double> values(count);
    for (auto& v : values) {
      std::uint32_t bits = 0;
      for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
      pos_ += 4;
      v = static_cast<double>(std::bit_cast<float>(bits));
    }
    nt.value = Tensor(std::move(dims), std::move(values));
    return nt;
  }
  void magic() {
    need(4, "magic");
    if (std::memcmp(bytes_.data(), kMagic, 4) != 0) {
      throw FormatError("not a checkpoint file (bad magic)");
    }
    pos_ += 4;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::uint64_t meta_u64(const std::string& v, const char* key) {
  if (v.size() != 8) throw FormatError(std::string("metadata ") + key + " must be 8 bytes");
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(v[i])) << (8 * i);
  return out;
}

std::string u64_bytes(std::uint64_t v) {
  std::string s(8, '\0');
  for (int i = 0; i < 8; ++i) s[i] = static_cast<char>(v >> (8 * i));
  return s;
}

}  // namespace

Checkpoint make_checkpoint(const ForkedModel& model, const AdamState& adam, std::uint64_t epoch,
                           double best_val_loss) {
  Checkpoint c;
  c.config = model.config();
  for (const auto& p : model.parameters()) c.params.push_back({p.name, rounded(p.value)});
  c.adam.step = adam.step;
  for (const auto& m : adam.m) c.adam.m.push_back(rounded(m));
  for (const auto& v : adam.v) c.adam.v.push_back(rounded(v));
  c.epoch = epoch;
  c.best_val_loss = best_val_loss;
  return c;
}

ForkedModel model_from_checkpoint(const Checkpoint& ckpt) {
  ForkedModel model = ForkedModel::zeros(ckpt.config);
  auto& params = model.parameters();
  if (params.size() != ckpt.params.size()) {
    throw FormatError("checkpoint holds " + std::to_string(ckpt.params.size()) +
                      " parameter tensors, architecture needs " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != ckpt.params[i].name) {
      throw FormatError("checkpoint tensor '" + ckpt.params[i].name + "' where '" +
                        params[i].name + "' was expected");
    }
    expect_shape(ckpt.params[i].value, params[i].value.dims(), params[i].name.c_str());
    params[i].value = ckpt.params[i].value;
  }
  return model;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  const bool with_adam = !ckpt.adam.m.empty();
  if (with_adam && (ckpt.adam.m.size() != ckpt.params.size() ||
                    ckpt.adam.v.size() != ckpt.params.size())) {
    throw StructuralError("Adam moments do not match the parameter list");
  }
  w.u32(static_cast<std::uint32_t>(ckpt.params.size() * (with_adam ? 3 : 1)));
  for (const auto& p : ckpt.params) w.tensor(p.name, p.value);
  if (with_adam) {
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
      w.tensor("adam.m." + ckpt.params[i].name, ckpt.adam.m[i]);
    }
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
      w.tensor("adam.v." + ckpt.params[i].name, ckpt.adam.v[i]);
    }
  }
  w.u32(4);
  w.str("arch");
  w.str(ckpt.config.describe());
  w.str("epoch");
  w.str(u64_bytes(ckpt.epoch));
  w.str("adam_step");
  w.str(u64_bytes(ckpt.adam.step));
  w.str("best_val_loss");
  w.str(u64_bytes(std::bit_cast<std::uint64_t>(ckpt.best_val_loss)));
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.magic();
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t count = r.u32("tensor count");
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) tensors.push_back(r.tensor());

  const std::uint32_t meta_count = r.u32("metadata count");
  std::map<std::string, std::string> meta;
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string key = r.str("metadata key");
    meta[key] = r.str("metadata value");
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint metadata");

  auto get = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw FormatError(std::string("checkpoint metadata lacks ") + key);
    return it->second;
  };
  Checkpoint c;
  c.config = ModelConfig::parse(get("arch"));
  c.epoch = meta_u64(get("epoch"), "epoch");
  c.adam.step = meta_u64(get("adam_step"), "adam_step");
  c.best_val_loss = std::bit_cast<double>(meta_u64(get("best_val_loss"), "best_val_loss"));

  for (auto& t : tensors) {
    if (t.name.rfind("adam.m.", 0) == 0) {
      c.adam.m.push_back(std::move(t.value));
    } else if (t.name.rfind("adam.v.", 0) == 0) {
      c.adam.v.push_back(std::move(t.value));
    } else {
      c.params.push_back(std::move(t));
    }
  }
  if ((!c.adam.m.empty() || !c.adam.v.empty()) &&
      (c.adam.m.size() != c.params.size() || c.adam.v.size() != c.params.size())) {
    throw FormatError("checkpoint Adam moments do not match its parameters");
  }
  // Validates names and shapes against the architecture.
  (void)model_from_checkpoint(c);
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace mmpose::nn
