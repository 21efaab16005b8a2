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
 * \file dataset.hpp
 * \brief On-disk datasets.
 *
 * Records are JSON lines:
 *   {"ts_us":..,"motion":"walking",
 *    "r1":{"ts_us":..,"points":[[depth,lateral,vel,intensity],...]},
 *    "r2":{...},"truth":[[x,y,z] x 25]}
 * Encoded samples (images plus targets) use a little-endian binary file
 * starting with "MMPI".
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmpose/encoder.hpp"
#include "mmpose/scene.hpp"
#include "mmpose/train.hpp"

namespace mmpose::data {

using scene::DatasetRecord;

std::string format_record(const DatasetRecord& rec);
/// `line` is 1-based and only used in diagnostics. Throws ParseError for
/// malformed JSON and SchemaError for missing or ill-shaped fields.
DatasetRecord parse_record(const std::string& text, std::size_t line = 1);

void dataset_write(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);
/// Blank lines are skipped; an empty file gives an empty list.
std::vector<DatasetRecord> dataset_read(const std::filesystem::path& path);

struct EncodedSample {
  std::int64_t timestamp_us = 0;
  scene::MotionClass motion = scene::MotionClass::Walking;
  encoder::EncodedImage xy;
  encoder::EncodedImage xz;
  encoder::JointVector target{};  ///< normalized, [0, 1]
  encoder::JointVector world{};   ///< metres
};

EncodedSample encode_record(const DatasetRecord& rec, const encoder::NormalizationParams& norm,
                            std::size_t side = 16, encoder::EncodeStats* stats = nullptr);
std::vector<EncodedSample> encode_records(const std::vector<DatasetRecord>& records,
                                          const encoder::NormalizationParams& norm,
                                          std::size_t side = 16,
                                          encoder::EncodeStats* stats = nullptr);

inline constexpr std::uint32_t kSampleFileVersion = 1;

void write_samples(const std::vector<EncodedSample>& samples, const std::filesystem::path& path);
/// Throws FormatError, VersionError or TruncationError on bad input.
std::vector<EncodedSample> read_samples(const std::filesystem::path& path);

/// True when the file starts with the encoded-sample magic.
bool is_sample_file(const std::filesystem::path& path);

/// Reads either format; JSON-lines input is encoded with `norm`.
std::vector<EncodedSample> load_samples(const std::filesystem::path& path,
                                        const encoder::NormalizationParams& norm,
                                        std::size_t side = 16);

nn::TrainingSet training_set(const std::vector<EncodedSample>& samples);
std::vector<encoder::JointVector> world_truths(const std::vector<EncodedSample>& samples);

}  // namespace mmpose::data
