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

#ifndef RFCAL_FIR_HPP_
#define RFCAL_FIR_HPP_

#include <complex>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "rfcal/frame.hpp"

namespace rfcal {

/// Default tap count for calibration and denoising filters.
inline constexpr int kDefaultTaps = 151;

/// Type-I linear-phase FIR filter: odd length, symmetric taps.
class FIRFilter {
 public:
  /// Validates odd length, finiteness and tap symmetry (1e-12 absolute).
  FIRFilter(std::vector<double> taps, double sampling_rate_mhz,
            std::vector<std::pair<double, double>> design_gains = {});

  /// Unit impulse at the center tap.
  static FIRFilter identity(int ntaps, double sampling_rate_mhz);

  std::span<const double> taps() const { return taps_; }
  int size() const { return static_cast<int>(taps_.size()); }
  double sampling_rate_mhz() const { return sampling_rate_mhz_; }
  /// Group delay in samples: (ntaps - 1) / 2.
  int group_delay() const { return (size() - 1) / 2; }
  const std::vector<std::pair<double, double>>& design_gains() const {
    return design_gains_;
  }

 private:
  std::vector<double> taps_;
  double sampling_rate_mhz_;
  std::vector<std::pair<double, double>> design_gains_;  // (freq_mhz, gain)
};

/// Linear-phase FIR synthesis from frequency/gain samples, the frequency
/// sampling method:
///   1. linear interpolation of the gains onto a dense uniform grid of
///      nfreqs = 2^ceil(log2(ntaps)) + 1 points on [0, Nyquist],
///   2. multiplication by the linear-phase term for a group delay of
///      (ntaps - 1)/2 samples,
///   3. inverse real-input DFT,
///   4. truncation to ntaps and a Hamming window.
///
/// freq_points_mhz must ascend from 0 to Nyquist; gains must be
/// nonnegative; ntaps must be odd.
FIRFilter design_fir(std::span<const double> freq_points_mhz,
                     std::span<const double> gains, int ntaps,
                     double sampling_rate_mhz);

/// Bandpass design with gain 1 on [lo, hi] MHz and 0 elsewhere, sampled on
/// the default 0..Nyquist grid in 0.15625 MHz steps. The defaults give the
/// 1-10 MHz denoising prefilter.
FIRFilter design_bandpass_fir(double lo_mhz = 1.0, double hi_mhz = 10.0,
                              int ntaps = kDefaultTaps,
                              double sampling_rate_mhz = 40.0);

/// H(f) = sum taps[n] exp(-j 2 pi f n / fs), evaluated directly.
/// Frequencies must lie in [0, Nyquist].
std::vector<std::complex<double>> frequency_response(
    const FIRFilter& filter, std::span<const double> freqs_mhz);

/// Full linear convolution with zero extension, cropped to the input
/// length around the filter center ('same' padding).
std::vector<double> convolve_same(std::span<const double> signal,
                                  const FIRFilter& filter);

/// 'same' convolution applied to every lateral channel along the axial
/// axis; patch metadata is preserved. Runs in single precision, matching
/// the f32 patch storage.
Patch apply_filter_axial(const Patch& patch, const FIRFilter& filter);

/// Two-column text export: "tap_index,value".
void write_taps_csv(const FIRFilter& filter, std::ostream& out);

/// Response export: "freq_mhz,magnitude,phase_rad" on the given frequencies.
void write_response_csv(const FIRFilter& filter,
                        std::span<const double> freqs_mhz, std::ostream& out);

}  // namespace rfcal

#endif  // RFCAL_FIR_HPP_
