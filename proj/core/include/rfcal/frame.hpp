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

#ifndef RFCAL_FRAME_HPP_
#define RFCAL_FRAME_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfcal/errors.hpp"

namespace rfcal {

/// Speed of sound used for sample-to-depth mapping, m/s.
inline constexpr double kSpeedOfSoundMps = 1540.0;

/// Axial size of a classifier patch, samples.
inline constexpr int kPatchAxial = 256;

/// First patch start, step between starts, and patch count for the
/// default 2080-sample frame geometry.
inline constexpr int kFirstPatchStart = 400;
inline constexpr int kPatchStride = 100;
inline constexpr int kDepthCount = 12;

/// Default frame geometry.
inline constexpr int kDefaultAxialLen = 2080;
inline constexpr int kDefaultLateralLen = 256;

/// The acquisition knobs that cause train/test mismatch.
struct ScanSettings {
  double pulse_freq_mhz = 9.0;
  std::vector<double> foci_cm = {2.0};
  double output_power_db = 0.0;  // dB relative to maximum, <= 0
  double sampling_rate_mhz = 40.0;
  std::string label;

  /// Checks Nyquist, focus ordering and power sign. Depth compatibility of
  /// the foci is checked where a frame geometry is known (see simulator).
  void validate() const;

  bool operator==(const ScanSettings& other) const;
};

/// Pulse-echo depth of a sample index, cm.
inline double sample_depth_cm(double sample_index, double sampling_rate_mhz) {
  // Two-way travel: depth = i * c / (2 fs).
  return sample_index * kSpeedOfSoundMps / (2.0 * sampling_rate_mhz * 1e6) *
         100.0;
}

/// One post-beamformed RF frame. Samples are stored channel-major: all
/// axial samples of channel 0, then channel 1, and so on. This matches the
/// URF1 on-disk layout and keeps axial filtering contiguous.
class RFFrame {
 public:
  RFFrame(int axial_len, int lateral_len, ScanSettings settings,
          std::int64_t frame_id,
          std::optional<int> phantom_label = std::nullopt);

  int axial_len() const { return axial_len_; }
  int lateral_len() const { return lateral_len_; }
  const ScanSettings& settings() const { return settings_; }
  std::int64_t frame_id() const { return frame_id_; }
  void set_frame_id(std::int64_t id) { frame_id_ = id; }
  std::optional<int> phantom_label() const { return phantom_label_; }
  void set_phantom_label(std::optional<int> label) { phantom_label_ = label; }

  float at(int axial, int lateral) const {
    return samples_[static_cast<std::size_t>(lateral) * axial_len_ + axial];
  }
  float& at(int axial, int lateral) {
    return samples_[static_cast<std::size_t>(lateral) * axial_len_ + axial];
  }

  std::span<const float> channel(int lateral) const {
    return {samples_.data() + static_cast<std::size_t>(lateral) * axial_len_,
            static_cast<std::size_t>(axial_len_)};
  }
  std::span<float> channel(int lateral) {
    return {samples_.data() + static_cast<std::size_t>(lateral) * axial_len_,
            static_cast<std::size_t>(axial_len_)};
  }

  std::span<const float> raw() const { return samples_; }
  std::span<float> raw() { return samples_; }

  double imaging_depth_cm() const {
    return sample_depth_cm(axial_len_, settings_.sampling_rate_mhz);
  }

  /// Throws FormatError(non_finite) if any sample is NaN or infinite.
  void ensure_finite() const;

  bool operator==(const RFFrame& other) const;

 private:
  int axial_len_;
  int lateral_len_;
  ScanSettings settings_;
  std::int64_t frame_id_;
  std::optional<int> phantom_label_;
  std::vector<float> samples_;
};

/// A 256 x lateral classifier input window cut from a frame. Channel-major
/// like RFFrame. Lateral width is 256 for the default geometry; tests may
/// build narrower patches.
class Patch {
 public:
  Patch(int lateral_len, int axial_start, int label,
        std::string settings_label);

  int lateral_len() const { return lateral_len_; }
  int axial_start() const { return axial_start_; }
  /// (axial_start - 400) / 100; exact by construction.
  int depth_index() const { return (axial_start_ - kFirstPatchStart) / kPatchStride; }
  int label() const { return label_; }
  const std::string& settings_label() const { return settings_label_; }
  void set_settings_label(std::string label) {
    settings_label_ = std::move(label);
  }

  float at(int axial, int lateral) const {
    return samples_[static_cast<std::size_t>(lateral) * kPatchAxial + axial];
  }
  float& at(int axial, int lateral) {
    return samples_[static_cast<std::size_t>(lateral) * kPatchAxial + axial];
  }

  std::span<const float> channel(int lateral) const {
    return {samples_.data() + static_cast<std::size_t>(lateral) * kPatchAxial,
            static_cast<std::size_t>(kPatchAxial)};
  }
  std::span<float> channel(int lateral) {
    return {samples_.data() + static_cast<std::size_t>(lateral) * kPatchAxial,
            static_cast<std::size_t>(kPatchAxial)};
  }

  /// Reverses the channel order in place (horizontal flip).
  void flip_lateral();

 private:
  int lateral_len_;
  int axial_start_;
  int label_;
  std::string settings_label_;
  std::vector<float> samples_;
};

enum class SplitTag { train, validation, test };

std::string to_string(SplitTag tag);

/// A set of patches belonging to one split, with the seed that produced it.
struct LabeledPatchSet {
  std::vector<Patch> patches;
  SplitTag split_tag = SplitTag::train;
  std::uint64_t seed = 0;
};

}  // namespace rfcal

#endif  // RFCAL_FRAME_HPP_
