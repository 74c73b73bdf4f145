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

#ifndef RFCAL_TRANSFER_HPP_
#define RFCAL_TRANSFER_HPP_

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rfcal/fir.hpp"
#include "rfcal/spectrum.hpp"

namespace rfcal {

// The setting transfer function Gamma(f, x) is the amplitude ratio between
// two scanner settings measured on the same view: testing-domain amplitude
// over training-domain amplitude. Its Wiener-regularized forms give the
// gains of two linear-phase filters:
//
//   fir_train (gain Gamma_wiener)      training-domain data -> testing domain
//   fir_test  (gain inverse Gamma_wiener)  testing-domain data -> training domain
//
// Regularization drives both gains to zero where the calibration scans
// have no usable SNR instead of amplifying noise.

/// Clamps used inside the Wiener forms so degenerate bins yield ~0 gain
/// rather than NaN.
inline constexpr double kGammaClamp = 1e-12;
inline constexpr double kSnrClamp = 1e-9;

/// Per-depth slice of a setting transfer function.
struct DepthTransfer {
  std::vector<double> gamma;               // amplitude ratio, >= 0
  std::vector<double> gamma_wiener_train;  // gain toward the testing domain
  std::vector<double> gamma_wiener_test;   // gain toward the training domain
  SnrProfile snr;
  FIRFilter fir_train;
  FIRFilter fir_test;
};

struct CalibrationConfig {
  int ntaps = kDefaultTaps;
  SnrMode snr_mode = SnrMode::per_bin;
};

/// Depth-indexed calibration between two scanner settings. Immutable after
/// construction; safe to share across threads.
class SettingTransferFunction {
 public:
  SettingTransferFunction(std::vector<DepthTransfer> per_depth,
                          std::string from_label, std::string to_label,
                          FrequencyGrid grid);

  const DepthTransfer& at_depth(int depth_index) const;
  const std::string& from_label() const { return from_label_; }
  const std::string& to_label() const { return to_label_; }
  const FrequencyGrid& grid() const { return grid_; }

 private:
  std::vector<DepthTransfer> per_depth_;  // kDepthCount entries
  std::string from_label_;
  std::string to_label_;
  FrequencyGrid grid_;
};

/// gamma[k] = sqrt(w_test[k] / max(w_train[k], 1e-30)).
std::vector<double> compute_gamma(const PowerSpectrum& w_train,
                                  const PowerSpectrum& w_test);

/// Gamma_wiener[k] = (1/g) / ((1/g)^2 + 1/snr), g and snr clamped below.
/// Approaches gamma as snr grows and 0 as snr vanishes.
std::vector<double> wiener_train(std::span<const double> gamma,
                                 const SnrProfile& snr);

/// Inverse-direction form: g / (g^2 + 1/snr). Approaches 1/gamma as snr
/// grows and 0 as snr vanishes.
std::vector<double> wiener_test(std::span<const double> gamma,
                                const SnrProfile& snr);

/// Full calibration from two stable-acquisition frame sets: per depth,
/// spectra -> gamma -> SNR -> Wiener gains -> 151-tap FIR filters.
SettingTransferFunction build_calibration(std::span<const RFFrame> cal_train,
                                          std::span<const RFFrame> cal_test,
                                          const CalibrationConfig& config = {});

enum class CalibrationMode { train_time, test_time };

/// Applies the depth-matched calibration filter to a patch and relabels it
/// with the target domain.
Patch calibrate_patch(const Patch& patch, const SettingTransferFunction& stf,
                      CalibrationMode mode);

/// Structured-text (JSON) serialization for reuse across CLI invocations.
void save_stf(const SettingTransferFunction& stf, std::ostream& out);
SettingTransferFunction load_stf(std::istream& in);

/// Calibration-plot data at one depth:
/// "freq_mhz,w_train,w_test,gamma,gamma_wiener,fir_response_magnitude".
void write_plot_csv(const SettingTransferFunction& stf,
                    const DepthSpectra& train_spectra,
                    const DepthSpectra& test_spectra, int depth_index,
                    std::ostream& out);

}  // namespace rfcal

#endif  // RFCAL_TRANSFER_HPP_
