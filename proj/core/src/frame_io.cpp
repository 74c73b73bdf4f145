// Copyright 2026 The rfcal Authors
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

#include "rfcal/frame_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace rfcal {
namespace {

constexpr char kMagic[4] = {'U', 'R', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_i32(std::string& buf, std::int32_t v) {
  put_u32(buf, static_cast<std::uint32_t>(v));
}

void put_f32(std::string& buf, float v) {
  put_u32(buf, std::bit_cast<std::uint32_t>(v));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint64_t offset() const { return offset_; }

  /// Reads exactly n bytes or throws FormatError(truncated).
  void read_exact(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    std::size_t got = static_cast<std::size_t>(in_.gcount());
    offset_ += got;
    if (got != n) {
      throw FormatError(FormatError::Kind::truncated,
                        std::string("truncated stream while reading ") + what +
                            ": expected " + std::to_string(n) + " bytes, got " +
                            std::to_string(got) + " (offset " +
                            std::to_string(offset_) + ")");
    }
  }

  std::uint32_t read_u32(const char* what) {
    unsigned char b[4];
    read_exact(reinterpret_cast<char*>(b), 4, what);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }

  std::int32_t read_i32(const char* what) {
    return static_cast<std::int32_t>(read_u32(what));
  }

  float read_f32(const char* what) {
    return std::bit_cast<float>(read_u32(what));
  }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

nlohmann::json settings_to_json(const ScanSettings& s) {
  return nlohmann::json{{"pulse_freq_mhz", s.pulse_freq_mhz},
                        {"foci_cm", s.foci_cm},
                        {"output_power_db", s.output_power_db},
                        {"sampling_rate_mhz", s.sampling_rate_mhz},
                        {"label", s.label}};
}

ScanSettings settings_from_json(const nlohmann::json& j) {
  ScanSettings s;
  try {
    s.pulse_freq_mhz = j.at("pulse_freq_mhz").get<double>();
    s.foci_cm = j.at("foci_cm").get<std::vector<double>>();
    s.output_power_db = j.at("output_power_db").get<double>();
    s.sampling_rate_mhz = j.at("sampling_rate_mhz").get<double>();
    s.label = j.at("label").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::bad_field,
                      std::string("bad settings blob: ") + e.what());
  }
  return s;
}

}  // namespace

void save_frame(const RFFrame& frame, std::ostream& out) {
  frame.ensure_finite();

  nlohmann::json blob{{"settings", settings_to_json(frame.settings())},
                      {"frame_id", frame.frame_id()}};
  std::string blob_str = blob.dump();

  std::string buf;
  const std::size_t n_samples =
      static_cast<std::size_t>(frame.axial_len()) * frame.lateral_len();
  buf.reserve(24 + blob_str.size() + 4 * n_samples);

  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(frame.axial_len()));
  put_u32(buf, static_cast<std::uint32_t>(frame.lateral_len()));
  put_f32(buf, static_cast<float>(frame.settings().sampling_rate_mhz));
  put_u32(buf, static_cast<std::uint32_t>(blob_str.size()));
  buf.append(blob_str);
  put_i32(buf, frame.phantom_label() ? *frame.phantom_label() : -1);
  for (float v : frame.raw()) {
    put_f32(buf, v);
  }

  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    std::streampos pos = out.tellp();
    throw IoError(pos < 0 ? 0 : static_cast<std::uint64_t>(pos),
                  "failed to write frame");
  }
}

RFFrame load_frame(std::istream& in) {
  Reader r(in);

  char magic[4];
  r.read_exact(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(FormatError::Kind::bad_magic,
                      "bad magic: expected \"URF1\"");
  }
  std::uint32_t version = r.read_u32("version");
  if (version != kVersion) {
    throw FormatError(FormatError::Kind::bad_version,
                      "unsupported version " + std::to_string(version));
  }
  std::uint32_t axial = r.read_u32("axial_len");
  std::uint32_t lateral = r.read_u32("lateral_len");
  if (axial == 0 || lateral == 0 || axial > (1u << 24) || lateral > (1u << 24)) {
    throw FormatError(FormatError::Kind::bad_field,
                      "implausible frame dimensions " + std::to_string(axial) +
                          "x" + std::to_string(lateral));
  }
  float header_fs = r.read_f32("sampling_rate_mhz");

  std::uint32_t blob_len = r.read_u32("settings length");
  std::string blob(blob_len, '\0');
  r.read_exact(blob.data(), blob_len, "settings blob");

  nlohmann::json j = nlohmann::json::parse(blob, nullptr, false);
  if (j.is_discarded() || !j.contains("settings")) {
    throw FormatError(FormatError::Kind::bad_field,
                      "settings blob is not valid JSON");
  }
  ScanSettings settings = settings_from_json(j["settings"]);
  std::int64_t frame_id = j.value("frame_id", std::int64_t{0});
  if (settings.sampling_rate_mhz <= 0.0) {
    settings.sampling_rate_mhz = static_cast<double>(header_fs);
  }

  std::int32_t label = r.read_i32("phantom_label");

  RFFrame frame(static_cast<int>(axial), static_cast<int>(lateral),
                std::move(settings), frame_id,
                label < 0 ? std::nullopt : std::optional<int>(label));

  const std::size_t n_samples = static_cast<std::size_t>(axial) * lateral;
  std::vector<char> raw(4 * n_samples);
  r.read_exact(raw.data(), raw.size(), "samples");
  auto out = frame.raw();
  for (std::size_t i = 0; i < n_samples; ++i) {
    const unsigned char* b =
        reinterpret_cast<const unsigned char*>(raw.data()) + 4 * i;
    std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                         (static_cast<std::uint32_t>(b[1]) << 8) |
                         (static_cast<std::uint32_t>(b[2]) << 16) |
                         (static_cast<std::uint32_t>(b[3]) << 24);
    out[i] = std::bit_cast<float>(bits);
  }
  frame.ensure_finite();
  return frame;
}

std::string frame_file_name(const RFFrame& frame) {
  return frame.settings().label + "_" + std::to_string(frame.frame_id()) +
         ".urf";
}

std::filesystem::path save_frame_file(const RFFrame& frame,
                                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::filesystem::path path = dir / frame_file_name(frame);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(0, "cannot open " + path.string() + " for writing");
  save_frame(frame, out);
  return path;
}

RFFrame load_frame_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(0, "cannot open " + path.string());
  return load_frame(in);
}

std::vector<RFFrame> load_frame_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".urf") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RFFrame> frames;
  frames.reserve(paths.size());
  for (const auto& p : paths) frames.push_back(load_frame_file(p));
  return frames;
}

}  // namespace rfcal
