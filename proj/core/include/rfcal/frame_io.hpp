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

#ifndef RFCAL_FRAME_IO_HPP_
#define RFCAL_FRAME_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rfcal/frame.hpp"

namespace rfcal {

// URF1 binary frame format, little-endian throughout:
//
//   bytes 0..3   magic "URF1"
//   u32          version (1)
//   u32          axial_len
//   u32          lateral_len
//   f32          sampling_rate_mhz
//   u32          settings blob length, then that many bytes of UTF-8 JSON
//                (scan settings plus frame metadata)
//   i32          phantom_label (-1 if absent)
//   f32[...]     samples, channel-major: all axial samples of channel 0,
//                then channel 1, ...

/// Serializes a frame. Throws IoError (with byte offset) on stream failure.
void save_frame(const RFFrame& frame, std::ostream& out);

/// Inverse of save_frame. Throws FormatError with a distinct kind for a bad
/// magic, unsupported version, truncated payload or non-finite samples.
RFFrame load_frame(std::istream& in);

/// Conventional file name for a frame: "<setting_label>_<frame_id>.urf".
std::string frame_file_name(const RFFrame& frame);

/// Saves a frame into `dir` under its conventional name; returns the path.
std::filesystem::path save_frame_file(const RFFrame& frame,
                                      const std::filesystem::path& dir);

RFFrame load_frame_file(const std::filesystem::path& path);

/// Loads every *.urf file in a directory, sorted by file name so that the
/// result is reproducible.
std::vector<RFFrame> load_frame_dir(const std::filesystem::path& dir);

}  // namespace rfcal

#endif  // RFCAL_FRAME_IO_HPP_
