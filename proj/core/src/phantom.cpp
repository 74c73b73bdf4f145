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

#include "rfcal/phantom.hpp"

#include <cmath>

#include "rfcal/rng.hpp"

namespace rfcal {
namespace {

constexpr int kBlock = 256;       // depth block for spectral shaping
constexpr int kFftLen = 512;      // grid for synthesizing block kernels
constexpr int kKernelHalf = 64;   // zero-phase kernel half-width, samples

// Seed-derivation role tags.
constexpr std::uint64_t kRoleScatterer = 0x5ca77e72ULL;
constexpr std::uint64_t kRoleNoise = 0x4015e5ULL;
constexpr std::uint64_t kRoleCalA = 0xca11aULL;
constexpr std::uint64_t kRoleCalB = 0xca11bULL;

double pulse_amplitude(double freq_mhz, double center_mhz,
                       double fractional_bandwidth) {
  // Gaussian envelope; fractional_bandwidth is the -6 dB (half-amplitude)
  // full width relative to the center frequency.
  double fwhm = fractional_bandwidth * center_mhz;
  double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  double d = (freq_mhz - center_mhz) / sigma;
  return std::exp(-0.5 * d * d);
}

double backscatter_tilt(double freq_mhz, double exponent, double floor_mhz) {
  double f = std::max(freq_mhz, floor_mhz);
  return std::pow(f / kTiltRefMhz, exponent);
}

}  // namespace

double Attenuation::db_per_cm(double freq_mhz) const {
  if (freq_mhz <= 0.0) return 0.0;
  return slope_db_cm_mhz * std::pow(freq_mhz, exponent);
}

PhantomSpec phantom_one() {
  return PhantomSpec{
      .label = 0,
      .scatterer_density = 0.25,
      .attenuation = {0.7, 1.0},
      .backscatter_exponent = -1.1,
      .reflectivity_std = 1.0,
  };
}

PhantomSpec phantom_two() {
  return PhantomSpec{
      .label = 1,
      .scatterer_density = 0.25,
      .attenuation = {0.256, 1.366},
      .backscatter_exponent = -0.9,
      .reflectivity_std = 1.0,
  };
}

PhantomSpec calibration_phantom() {
  return PhantomSpec{
      .label = -1,
      .scatterer_density = 0.25,
      .attenuation = {0.1, 1.0},
      .backscatter_exponent = -1.0,
      .reflectivity_std = 1.0,
  };
}

std::vector<float> generate_scatterers(const PhantomSpec& phantom,
                                       std::uint64_t seed, int n_axial,
                                       int n_lateral) {
  if (n_axial < 1 || n_lateral < 1) {
    throw GeometryError("scatterer field dimensions must be positive");
  }
  std::vector<float> field(static_cast<std::size_t>(n_axial) * n_lateral, 0.0f);
  Rng rng(seed);
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (rng.bernoulli(phantom.scatterer_density)) {
      field[i] = static_cast<float>(rng.normal() * phantom.reflectivity_std);
    }
  }
  return field;
}

namespace {

// Zero-phase shaping kernels, one per 256-sample depth block, synthesized
// from the block's frequency response on a 512-point grid. The responses
// are Gaussian-smooth, so the impulse responses decay far inside the
// 64-sample half-width and truncation is negligible.
std::vector<std::vector<float>> build_block_kernels(
    const PhantomSpec& phantom, const ScanSettings& settings,
    const SystemModel& sys, int n_blocks) {
  const double fs = settings.sampling_rate_mhz;
  const double bin_mhz = fs / kFftLen;

  // cos(2 pi j / kFftLen) lookup for the inverse transform.
  static const std::vector<double>& cos_table = *[] {
    auto* t = new std::vector<double>(kFftLen);
    for (int j = 0; j < kFftLen; ++j) {
      (*t)[j] = std::cos(2.0 * 3.14159265358979323846 * j / kFftLen);
    }
    return t;
  }();

  std::vector<double> resp(kFftLen / 2 + 1);
  std::vector<std::vector<float>> kernels(static_cast<std::size_t>(n_blocks));
  for (int b = 0; b < n_blocks; ++b) {
    double z_cm = sample_depth_cm(b * kBlock + kBlock / 2, fs);
    for (int k = 0; k <= kFftLen / 2; ++k) {
      double f = bin_mhz * k;
      double atten_db = phantom.attenuation.db_per_cm(f) * 2.0 * z_cm;
      resp[k] = pulse_amplitude(f, settings.pulse_freq_mhz,
                                sys.fractional_bandwidth) *
                backscatter_tilt(f, phantom.backscatter_exponent, bin_mhz) *
                std::pow(10.0, -atten_db / 20.0);
    }
    auto& kern = kernels[b];
    kern.resize(2 * kKernelHalf + 1);
    for (int n = 0; n <= kKernelHalf; ++n) {
      double acc = resp[0] + (n % 2 == 0 ? resp[kFftLen / 2]
                                         : -resp[kFftLen / 2]);
      for (int k = 1; k < kFftLen / 2; ++k) {
        acc += 2.0 * resp[k] * cos_table[(k * n) % kFftLen];
      }
      float v = static_cast<float>(acc / kFftLen);
      kern[kKernelHalf + n] = v;
      kern[kKernelHalf - n] = v;
    }
  }
  return kernels;
}

}  // namespace

RFFrame simulate_frame(const PhantomSpec& phantom, const ScanSettings& settings,
                       const SystemModel& sys, std::uint64_t scatterer_seed,
                       std::uint64_t noise_seed, std::int64_t frame_id,
                       int axial_len, int lateral_len) {
  settings.validate();
  RFFrame frame(axial_len, lateral_len, settings, frame_id,
                phantom.label >= 0 ? std::optional<int>(phantom.label)
                                   : std::nullopt);

  const double fs = settings.sampling_rate_mhz;
  const int n_blocks = (axial_len + kBlock - 1) / kBlock;
  const auto kernels = build_block_kernels(phantom, settings, sys, n_blocks);

  // Per-sample gain: focal profile times output power.
  const double output_gain = std::pow(10.0, settings.output_power_db / 20.0);
  std::vector<float> gain(static_cast<std::size_t>(axial_len));
  for (int i = 0; i < axial_len; ++i) {
    double z_cm = sample_depth_cm(i, fs);
    double g = 1.0;
    for (double zf : settings.foci_cm) {
      double d = (z_cm - zf) / sys.focal_sigma_cm;
      g += sys.focal_gain_amp * std::exp(-0.5 * d * d);
    }
    gain[i] = static_cast<float>(g * output_gain);
  }

  std::vector<float> field =
      generate_scatterers(phantom, scatterer_seed, axial_len, lateral_len);

  // Convolve each channel with its depth block's kernel: linear filtering
  // with a kernel switch at block boundaries, so adjacent blocks hand off
  // without wrap artifacts. Scatterers outside the frame are zero.
  std::vector<float> padded(static_cast<std::size_t>(axial_len) +
                            2 * kKernelHalf);
  for (int ch = 0; ch < lateral_len; ++ch) {
    const float* col = field.data() + static_cast<std::size_t>(ch) * axial_len;
    std::fill(padded.begin(), padded.end(), 0.0f);
    std::copy(col, col + axial_len, padded.begin() + kKernelHalf);
    auto out = frame.channel(ch);

    for (int b = 0; b < n_blocks; ++b) {
      const int start = b * kBlock;
      const int len = std::min(kBlock, axial_len - start);
      const std::vector<float>& kern = kernels[b];
      float* dst = out.data() + start;
      const float* src = padded.data() + start;
      std::fill(dst, dst + len, 0.0f);
      for (int m = 0; m < 2 * kKernelHalf + 1; ++m) {
        const float h = kern[2 * kKernelHalf - m];
        const float* s = src + m;
        for (int i = 0; i < len; ++i) {
          dst[i] += h * s[i];
        }
      }
    }
    for (int i = 0; i < axial_len; ++i) {
      out[i] *= gain[i];
    }
  }

  if (sys.noise_std > 0.0) {
    Rng noise(noise_seed);
    auto raw = frame.raw();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      raw[i] += static_cast<float>(noise.normal() * sys.noise_std);
    }
  }
  return frame;
}

std::pair<std::vector<RFFrame>, std::vector<RFFrame>> simulate_calibration_pair(
    const ScanSettings& settings_a, const ScanSettings& settings_b,
    const SystemModel& sys_a, const SystemModel& sys_b, std::uint64_t seed,
    int n_frames, const PhantomSpec& phantom) {
  if (n_frames < 1) {
    throw ConfigError("simulate_calibration_pair: n_frames must be >= 1");
  }
  const std::uint64_t view_seed = derive_seed({seed, kRoleScatterer});
  std::vector<RFFrame> side_a;
  std::vector<RFFrame> side_b;
  side_a.reserve(static_cast<std::size_t>(n_frames));
  side_b.reserve(static_cast<std::size_t>(n_frames));
  for (int i = 0; i < n_frames; ++i) {
    side_a.push_back(simulate_frame(
        phantom, settings_a, sys_a, view_seed,
        derive_seed({seed, kRoleCalA, kRoleNoise, static_cast<std::uint64_t>(i)}),
        i));
    side_b.push_back(simulate_frame(
        phantom, settings_b, sys_b, view_seed,
        derive_seed({seed, kRoleCalB, kRoleNoise, static_cast<std::uint64_t>(i)}),
        i));
  }
  return {std::move(side_a), std::move(side_b)};
}

std::uint64_t freehand_scatterer_seed(std::uint64_t base_seed, int index) {
  return derive_seed({base_seed, kRoleScatterer,
                      static_cast<std::uint64_t>(index)});
}

std::uint64_t freehand_noise_seed(std::uint64_t base_seed, int index) {
  return derive_seed({base_seed, kRoleNoise, static_cast<std::uint64_t>(index)});
}

std::vector<RFFrame> simulate_freehand(const PhantomSpec& phantom,
                                       const ScanSettings& settings,
                                       const SystemModel& sys,
                                       std::uint64_t base_seed, int n_frames) {
  if (n_frames < 1) {
    throw ConfigError("simulate_freehand: n_frames must be >= 1");
  }
  std::vector<RFFrame> frames;
  frames.reserve(static_cast<std::size_t>(n_frames));
  for (int i = 0; i < n_frames; ++i) {
    frames.push_back(simulate_frame(phantom, settings, sys,
                                    freehand_scatterer_seed(base_seed, i),
                                    freehand_noise_seed(base_seed, i), i));
  }
  return frames;
}

}  // namespace rfcal
