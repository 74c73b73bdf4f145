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

#ifndef RFCAL_PHANTOM_HPP_
#define RFCAL_PHANTOM_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "rfcal/frame.hpp"

namespace rfcal {

/// Frequency-dependent attenuation alpha(f) = slope * f^exponent, dB/cm
/// (one way, f in MHz).
struct Attenuation {
  double slope_db_cm_mhz = 0.7;
  double exponent = 1.0;

  double db_per_cm(double freq_mhz) const;
};

/// A uniformly scattering tissue-mimicking phantom. The two classifier
/// classes share the simulator and differ in attenuation law and in the
/// backscatter spectral tilt (amplitude ~ f^backscatter_exponent), the
/// same physical contrast that different glass-bead populations produce.
struct PhantomSpec {
  int label = 0;  // class id; negative means "not a classification target"
  double scatterer_density = 0.25;  // scatterer probability per sample site
  Attenuation attenuation;
  double backscatter_exponent = -1.0;
  double reflectivity_std = 1.0;
};

/// Scanner behavior that is not part of PhantomSpec: transmit pulse shape,
/// focal gain profile and receiver noise. The pulse center frequency and
/// the output gain come from ScanSettings at simulation time.
struct SystemModel {
  /// -6 dB fractional bandwidth of the Gaussian pulse envelope.
  double fractional_bandwidth = 0.6;
  /// Focal gain: g(z) = 1 + sum_f a * exp(-(z - z_f)^2 / (2 sigma^2)).
  double focal_gain_amp = 1.0;
  double focal_sigma_cm = 0.5;
  /// Additive white receiver noise amplitude (independent of output power).
  double noise_std = 5e-4;
};

/// Reference frequency for the backscatter tilt, MHz; the tilt is 1 here.
inline constexpr double kTiltRefMhz = 5.0;

/// Default phantom parameterizations. Attenuation laws follow the physical
/// phantoms this simulator stands in for; densities, tilts and reflectivity
/// levels are artifact parameters frozen by the class-separability and
/// calibration tests.
PhantomSpec phantom_one();
PhantomSpec phantom_two();
PhantomSpec calibration_phantom();

/// Sparse random reflectivity field, channel-major (like RFFrame). Each
/// site holds a scatterer with probability `density`, amplitude
/// N(0, reflectivity_std). Sites are drawn channel-major: channel 0 axial
/// 0..n-1, then channel 1, ...
std::vector<float> generate_scatterers(const PhantomSpec& phantom,
                                       std::uint64_t seed, int n_axial,
                                       int n_lateral);

/// One simulated RF frame:
///   1. reflectivity field from `scatterer_seed`;
///   2. spectral shaping per 256-sample depth block: pulse spectrum x
///      backscatter tilt x round-trip attenuation at the block's depth;
///   3. focal gain and output gain;
///   4. additive white noise from `noise_seed`.
RFFrame simulate_frame(const PhantomSpec& phantom, const ScanSettings& settings,
                       const SystemModel& sys, std::uint64_t scatterer_seed,
                       std::uint64_t noise_seed, std::int64_t frame_id = 0,
                       int axial_len = kDefaultAxialLen,
                       int lateral_len = kDefaultLateralLen);

/// Stable-acquisition calibration pair: both sides image the SAME
/// scatterer field (same view); the frames of one side differ only in
/// noise realizations.
std::pair<std::vector<RFFrame>, std::vector<RFFrame>> simulate_calibration_pair(
    const ScanSettings& settings_a, const ScanSettings& settings_b,
    const SystemModel& sys_a, const SystemModel& sys_b, std::uint64_t seed,
    int n_frames = 10, const PhantomSpec& phantom = calibration_phantom());

/// Free-hand acquisition: every frame is an independent view (fresh
/// scatterer seed) with fresh noise, all derived from `base_seed`.
std::vector<RFFrame> simulate_freehand(const PhantomSpec& phantom,
                                       const ScanSettings& settings,
                                       const SystemModel& sys,
                                       std::uint64_t base_seed, int n_frames);

/// Seeds used by simulate_freehand for frame `index`; exposed so callers
/// can generate any subset of a free-hand sequence frame by frame.
std::uint64_t freehand_scatterer_seed(std::uint64_t base_seed, int index);
std::uint64_t freehand_noise_seed(std::uint64_t base_seed, int index);

}  // namespace rfcal

#endif  // RFCAL_PHANTOM_HPP_
