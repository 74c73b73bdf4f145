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

#ifndef RFCAL_SPECTRUM_HPP_
#define RFCAL_SPECTRUM_HPP_

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rfcal/frame.hpp"

namespace rfcal {

/// Frequency band with usable SNR on the scanner this pipeline models, MHz.
inline constexpr double kAnalysisBandLoMhz = 2.0;
inline constexpr double kAnalysisBandHiMhz = 7.5;

/// One-sided frequency axis of a 256-point transform at 40 MHz:
/// 0 to 20 MHz in 0.15625 MHz steps, 129 bins.
struct FrequencyGrid {
  double start_mhz = 0.0;
  double step_mhz = 0.15625;
  int n_bins = 129;

  static FrequencyGrid default_grid() { return {}; }

  double freq_mhz(int k) const { return start_mhz + step_mhz * k; }
  double nyquist_mhz() const { return freq_mhz(n_bins - 1); }

  /// Inclusive bin range [first, last] covering lo..hi MHz.
  std::pair<int, int> band_bins(double lo_mhz, double hi_mhz) const;

  bool operator==(const FrequencyGrid&) const = default;
};

/// One-sided power spectrum, linear units.
struct PowerSpectrum {
  FrequencyGrid grid;
  std::vector<double> values;  // n_bins entries, >= 0

  PowerSpectrum() : values(static_cast<std::size_t>(grid.n_bins), 0.0) {}
  explicit PowerSpectrum(FrequencyGrid g)
      : grid(g), values(static_cast<std::size_t>(g.n_bins), 0.0) {}
};

/// Per-depth averaged spectra for one scanner setting.
struct DepthSpectra {
  std::array<PowerSpectrum, kDepthCount> per_depth;
  std::string settings_label;
  int n_frames_averaged = 0;
};

/// Per-bin linear SNR with the noise floor it was measured against.
struct SnrProfile {
  FrequencyGrid grid;
  std::vector<double> snr;  // n_bins entries, >= 0
  double noise_floor = 0.0;
};

enum class SnrMode {
  per_bin,      // per-bin minimum across the two settings
  global_min,   // single scalar: in-band minimum of the per-bin profile
};

/// Squared magnitude of the one-sided 256-point DFT, bins 0..128.
/// No taper window and no detrending; only ratios of spectra matter
/// downstream, so the plain convention cancels.
PowerSpectrum channel_power_spectrum(std::span<const float> channel);
PowerSpectrum channel_power_spectrum(std::span<const double> channel);

/// Arithmetic mean of the per-channel spectra, channels in ascending order.
PowerSpectrum average_patch_spectrum(const Patch& patch);

/// Per-depth spectra averaged over stable-acquisition frames (frames in
/// list order). All frames must share settings and geometry.
DepthSpectra compute_depth_spectra(std::span<const RFFrame> frames);

/// Mean of the 5 smallest bins at >= 18 MHz (outside the transducer band).
/// Falls back to a tiny positive floor for degenerate spectra.
double estimate_noise_floor(const PowerSpectrum& spectrum);

/// Per-bin SNR of each spectrum against its own noise floor, combined by
/// the per-bin minimum (or collapsed to the in-band scalar minimum when
/// mode is global_min). The recorded noise floor is the smaller of the two.
SnrProfile estimate_snr(const PowerSpectrum& train, const PowerSpectrum& test,
                        SnrMode mode = SnrMode::per_bin);

/// CSV with header "freq_mhz,power".
void write_csv(const PowerSpectrum& spectrum, std::ostream& out);
/// CSV with header "freq_mhz,power,depth_index".
void write_csv(const DepthSpectra& spectra, std::ostream& out);

}  // namespace rfcal

#endif  // RFCAL_SPECTRUM_HPP_
