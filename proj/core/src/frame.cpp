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

#include "rfcal/frame.hpp"

#include <algorithm>
#include <cmath>

namespace rfcal {

void ScanSettings::validate() const {
  if (pulse_freq_mhz <= 0.0) {
    throw ConfigError("pulse_freq_mhz must be positive");
  }
  if (sampling_rate_mhz <= 2.0 * pulse_freq_mhz) {
    throw ConfigError("sampling rate violates Nyquist: fs=" +
                      std::to_string(sampling_rate_mhz) + " MHz, pulse=" +
                      std::to_string(pulse_freq_mhz) + " MHz");
  }
  if (foci_cm.empty()) {
    throw ConfigError("at least one focus is required");
  }
  if (!std::is_sorted(foci_cm.begin(), foci_cm.end())) {
    throw ConfigError("foci_cm must be sorted ascending");
  }
  for (double f : foci_cm) {
    if (f <= 0.0) throw ConfigError("foci_cm entries must be positive");
  }
  if (output_power_db > 0.0) {
    throw ConfigError("output_power_db is relative to maximum and must be <= 0");
  }
}

bool ScanSettings::operator==(const ScanSettings& other) const {
  return pulse_freq_mhz == other.pulse_freq_mhz &&
         foci_cm == other.foci_cm &&
         output_power_db == other.output_power_db &&
         sampling_rate_mhz == other.sampling_rate_mhz && label == other.label;
}

RFFrame::RFFrame(int axial_len, int lateral_len, ScanSettings settings,
                 std::int64_t frame_id, std::optional<int> phantom_label)
    : axial_len_(axial_len),
      lateral_len_(lateral_len),
      settings_(std::move(settings)),
      frame_id_(frame_id),
      phantom_label_(phantom_label) {
  if (axial_len < 1 || lateral_len < 1) {
    throw GeometryError("frame dimensions must be positive: " +
                        std::to_string(axial_len) + "x" +
                        std::to_string(lateral_len));
  }
  settings_.validate();
  samples_.assign(static_cast<std::size_t>(axial_len) * lateral_len, 0.0f);
}

void RFFrame::ensure_finite() const {
  for (float v : samples_) {
    if (!std::isfinite(v)) {
      throw FormatError(FormatError::Kind::non_finite,
                        "frame contains non-finite samples");
    }
  }
}

bool RFFrame::operator==(const RFFrame& other) const {
  return axial_len_ == other.axial_len_ && lateral_len_ == other.lateral_len_ &&
         settings_ == other.settings_ && frame_id_ == other.frame_id_ &&
         phantom_label_ == other.phantom_label_ && samples_ == other.samples_;
}

Patch::Patch(int lateral_len, int axial_start, int label,
             std::string settings_label)
    : lateral_len_(lateral_len),
      axial_start_(axial_start),
      label_(label),
      settings_label_(std::move(settings_label)) {
  if (lateral_len < 1) {
    throw GeometryError("patch lateral width must be positive");
  }
  if (axial_start < kFirstPatchStart ||
      (axial_start - kFirstPatchStart) % kPatchStride != 0) {
    throw GeometryError("patch axial_start must be 400 + k*100, got " +
                        std::to_string(axial_start));
  }
  if (depth_index() >= kDepthCount) {
    throw GeometryError("patch start " + std::to_string(axial_start) +
                        " is beyond the last depth index");
  }
  samples_.assign(static_cast<std::size_t>(lateral_len) * kPatchAxial, 0.0f);
}

void Patch::flip_lateral() {
  for (int lo = 0, hi = lateral_len_ - 1; lo < hi; ++lo, --hi) {
    auto a = channel(lo);
    auto b = channel(hi);
    std::swap_ranges(a.begin(), a.end(), b.begin());
  }
}

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::train: return "train";
    case SplitTag::validation: return "validation";
    case SplitTag::test: return "test";
  }
  return "unknown";
}

}  // namespace rfcal
