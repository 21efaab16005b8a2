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

#include "mmpose/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "mmpose/errors.hpp"

namespace mmpose::data {

using json = nlohmann::ordered_json;

namespace {

constexpr char kSampleMagic[4] = {'M', 'M', 'P', 'I'};

json frame_json(const scene::RadarFrame& f) {
  json pts = json::array();
  for (const auto& p : f.points) pts.push_back({p.depth, p.lateral, p.velocity, p.intensity});
  return {{"ts_us", f.timestamp_us}, {"points", std::move(pts)}};
}

[[noreturn]] void schema(std::size_t line, const std::string& what) {
  throw SchemaError("line " + std::to_string(line) + ": " + what);
}

const json& field(const json& obj, const char* key, std::size_t line, const std::string& where) {
  if (!obj.is_object()) schema(line, where + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema(line, "missing field '" + where + key + "'");
  return *it;
}

double number(const json& v, std::size_t line, const std::string& what) {
  if (!v.is_number()) schema(line, what + " is not a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, std::size_t line, const std::string& what) {
  if (!v.is_number_integer()) schema(line, what + " is not an integer");
  return v.get<std::int64_t>();
}

scene::RadarFrame parse_frame(const json& obj, const char* key, scene::Module module,
                              std::int64_t fallback_ts, std::size_t line) {
  const json& f = field(obj, key, line, "");
  const std::string where = std::string(key) + ".";
  scene::RadarFrame out;
  out.module = module;
  auto ts = f.is_object() ? f.find("ts_us") : f.end();
  out.timestamp_us = (f.is_object() && ts != f.end()) ? integer(*ts, line, where + "ts_us")
                                                      : fallback_ts;
  const json& pts = field(f, "points", line, where);
  if (!pts.is_array()) schema(line, where + "points is not an array");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const json& p = pts[i];
    const std::string name = where + "points[" + std::to_string(i) + "]";
    if (!p.is_array() || p.size() != 4) {
      schema(line, name + " must hold 4 values [depth, lateral, velocity, intensity]");
    }
    out.points.push_back({number(p[0], line, name), number(p[1], line, name),
                          number(p[2], line, name), number(p[3], line, name)});
  }
  return out;
}

class ByteWriter {
 public:
  explicit ByteWriter(std::ofstream& out) : out_(out) {}
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  void le(std::uint64_t v, int n) {
    char b[8];
    for (int i = 0; i < n; ++i) b[i] = static_cast<char>(v >> (8 * i));
    out_.write(b, n);
  }
  std::ofstream& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}
  std::uint64_t le(int n, const char* what) {
    if (bytes_.size() - pos_ < static_cast<std::size_t>(n)) {
      throw TruncationError(std::string("sample file truncated while reading ") + what);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(le(4, what)); }
  double f64(const char* what) { return std::bit_cast<double>(le(8, what)); }
  bool done() const { return pos_ == bytes_.size(); }
  const std::vector<char>& bytes() const { return bytes_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string format_record(const DatasetRecord& rec) {
  json truth = json::array();
  for (const auto& j : rec.truth.joints) truth.push_back({j.x, j.y, j.z});
  json obj = {{"ts_us", rec.truth.timestamp_us},
              {"motion", std::string(scene::motion_name(rec.motion))},
              {"r1", frame_json(rec.radar_xy)},
              {"r2", frame_json(rec.radar_xz)},
              {"truth", std::move(truth)}};
  return obj.dump();
}

DatasetRecord parse_record(const std::string& text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) schema(line, "record is not a JSON object");

  DatasetRecord rec;
  rec.truth.timestamp_us = integer(field(obj, "ts_us", line, ""), line, "ts_us");
  const json& motion = field(obj, "motion", line, "");
  if (!motion.is_string()) schema(line, "motion is not a string");
  const auto m = scene::parse_motion(motion.get<std::string>());
  if (!m) schema(line, "unknown motion class '" + motion.get<std::string>() + "'");
  rec.motion = *m;

  rec.radar_xy = parse_frame(obj, "r1", scene::Module::R1, rec.truth.timestamp_us, line);
  rec.radar_xz = parse_frame(obj, "r2", scene::Module::R2, rec.truth.timestamp_us, line);

  const json& truth = field(obj, "truth", line, "");
  if (!truth.is_array() || truth.size() != scene::kJointCount) {
    schema(line, "truth must hold " + std::to_string(scene::kJointCount) + " joints, found " +
                     std::to_string(truth.is_array() ? truth.size() : 0));
  }
  for (std::size_t j = 0; j < scene::kJointCount; ++j) {
    const json& p = truth[j];
    const std::string name = "truth[" + std::to_string(j) + "]";
    if (!p.is_array() || p.size() != 3) schema(line, name + " must hold 3 coordinates");
    rec.truth.joints[j] = {number(p[0], line, name), number(p[1], line, name),
                           number(p[2], line, name)};
  }
  return rec;
}

void dataset_write(const std::vector<DatasetRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << format_record(r) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<DatasetRecord> dataset_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<DatasetRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_record(text, line));
  }
  return out;
}

EncodedSample encode_record(const DatasetRecord& rec, const encoder::NormalizationParams& norm,
                            std::size_t side, encoder::EncodeStats* stats) {
  EncodedSample s;
  s.timestamp_us = rec.truth.timestamp_us;
  s.motion = rec.motion;
  s.xy = encoder::encode_frame(rec.radar_xy, norm, side, stats);
  s.xz = encoder::encode_frame(rec.radar_xz, norm, side, stats);
  s.target = encoder::normalize_skeleton(rec.truth, norm, stats);
  s.world = encoder::flatten_skeleton(rec.truth);
  return s;
}

std::vector<EncodedSample> encode_records(const std::vector<DatasetRecord>& records,
                                          const encoder::NormalizationParams& norm,
                                          std::size_t side, encoder::EncodeStats* stats) {
  std::vector<EncodedSample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(encode_record(r, norm, side, stats));
  return out;
}

void write_samples(const std::vector<EncodedSample>& samples, const std::filesystem::path& path) {
  const std::size_t side = samples.empty() ? 16 : samples.front().xy.side;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kSampleMagic, 4);
  ByteWriter w(out);
  w.u32(kSampleFileVersion);
  w.u32(static_cast<std::uint32_t>(side));
  w.u64(samples.size());
  for (const auto& s : samples) {
    if (s.xy.side != side || s.xz.side != side) {
      throw StructuralError("all samples in one file must share the image side");
    }
    w.u64(static_cast<std::uint64_t>(s.timestamp_us));
    w.u32(static_cast<std::uint32_t>(s.motion));
    for (double v : s.xy.pixels) w.f64(v);
    for (double v : s.xz.pixels) w.f64(v);
    for (double v : s.target) w.f64(v);
    for (double v : s.world) w.f64(v);
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<EncodedSample> read_samples(const std::filesystem::path& path) {
  ByteReader r(slurp(path));
  if (r.bytes().size() < 4 || std::memcmp(r.bytes().data(), kSampleMagic, 4) != 0) {
    throw FormatError(path.string() + " is not an encoded sample file (bad magic)");
  }
  r.skip(4);
  const std::uint32_t version = r.u32("version");
  if (version != kSampleFileVersion) {
    throw VersionError("sample file version " + std::to_string(version) + " is not supported");
  }
  const std::size_t side = r.u32("image side");
  if (side == 0 || side > 4096) throw FormatError("sample file has an invalid image side");
  const std::uint64_t count = r.le(8, "sample count");
  std::vector<EncodedSample> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    EncodedSample s;
    s.timestamp_us = static_cast<std::int64_t>(r.le(8, "timestamp"));
    const std::uint32_t motion = r.u32("motion");
    if (motion >= scene::kMotionClasses.size()) throw FormatError("sample has an unknown motion");
    s.motion = static_cast<scene::MotionClass>(motion);
    s.xy = encoder::EncodedImage(side, radar::Plane::XY);
    s.xz = encoder::EncodedImage(side, radar::Plane::XZ);
    for (double& v : s.xy.pixels) v = r.f64("pixels");
    for (double& v : s.xz.pixels) v = r.f64("pixels");
    for (double& v : s.target) v = r.f64("target");
    for (double& v : s.world) v = r.f64("truth");
    out.push_back(std::move(s));
  }
  if (!r.done()) throw FormatError("trailing bytes after the last sample");
  return out;
}

bool is_sample_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char head[4] = {};
  in.read(head, 4);
  return in.gcount() == 4 && std::memcmp(head, kSampleMagic, 4) == 0;
}

std::vector<EncodedSample> load_samples(const std::filesystem::path& path,
                                        const encoder::NormalizationParams& norm,
                                        std::size_t side) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("no such file: " + path.string());
  if (is_sample_file(path)) return read_samples(path);
  return encode_records(dataset_read(path), norm, side);
}

nn::TrainingSet training_set(const std::vector<EncodedSample>& samples) {
  nn::TrainingSet set(samples.empty() ? 16 : samples.front().xy.side);
  for (const auto& s : samples) set.add(s.xy, s.xz, s.target);
  return set;
}

std::vector<encoder::JointVector> world_truths(const std::vector<EncodedSample>& samples) {
  std::vector<encoder::JointVector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.world);
  return out;
}

}  // namespace mmpose::data
