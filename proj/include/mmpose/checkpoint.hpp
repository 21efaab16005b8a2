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
 * \file checkpoint.hpp
 * \brief Model snapshots and their binary file format.
 *
 * Layout, all integers little-endian:
 *
 *     "MMPW"  u32 version (=1)  u32 tensor_count
 *     tensor_count x { u32 name_len, name (UTF-8), u32 rank, rank x u32 dim,
 *                      product(dims) x f32 (IEEE-754, row-major) }
 *     u32 meta_count
 *     meta_count   x { u32 key_len, key, u32 value_len, value bytes }
 *
 * Tensors are the model parameters followed by the Adam moments, named
 * "adam.m.<param>" and "adam.v.<param>". Metadata keys: "arch" (model
 * description text), "epoch" (u64), "adam_step" (u64), "best_val_loss" (f64).
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mmpose/model.hpp"
#include "mmpose/optim.hpp"

namespace mmpose::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  std::vector<NamedTensor> params;
  AdamState adam;
  std::uint64_t epoch = 0;
  double best_val_loss = 0.0;
};

/// Snapshot of a model. Values are rounded to float32 here so that a
/// saved and reloaded checkpoint is bit-identical to the in-memory one.
Checkpoint make_checkpoint(const ForkedModel& model, const AdamState& adam, std::uint64_t epoch,
                           double best_val_loss);

ForkedModel model_from_checkpoint(const Checkpoint& ckpt);

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError (bad magic or layout), VersionError, or TruncationError.
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mmpose::nn
