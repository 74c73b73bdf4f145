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

#include "rfcal/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

#include "rfcal/fft.hpp"
#include "rfcal/patches.hpp"

namespace rfcal {

namespace {

constexpr double kNoiseBandLoMhz = 18.0;
constexpr int kNoiseFloorBins = 5;

void check_channel_length(std::size_t n) {
  if (n != static_cast<std::size_t>(kPatchAxial)) {
    throw GeometryError("channel_power_spectrum expects exactly 256 samples, got " +
                        std::to_string(n));
  }
}

template <typename T>
PowerSpectrum spectrum_of(std::span<const T> channel) {
  check_channel_length(channel.size());
  std::complex<double> buf[kPatchAxial];
  for (int i = 0; i < kPatchAxial; ++i) {
    double v = static_cast<double>(channel[i]);
    if (!std::isfinite(v)) {
      throw ConfigError("channel contains non-finite samples");
    }
    buf[i] = {v, 0.0};
  }
  fft::forward(buf, kPatchAxial);
  PowerSpectrum out;
  for (int k = 0; k < out.grid.n_bins; ++k) {
    out.values[k] = std::norm(buf[k]);
  }
  return out;
}

}  // namespace

std::pair<int, int> FrequencyGrid::band_bins(double lo_mhz,
                                             double hi_mhz) const {
  double lo = std::ceil((lo_mhz - start_mhz) / step_mhz - 1e-9);
  double hi = std::floor((hi_mhz - start_mhz) / step_mhz + 1e-9);
  int first = static_cast<int>(std::clamp(lo, 0.0, double(n_bins - 1)));
  int last = static_cast<int>(std::clamp(hi, 0.0, double(n_bins - 1)));
  return {first, last};
}

PowerSpectrum channel_power_spectrum(std::span<const float> channel) {
  return spectrum_of(channel);
}

PowerSpectrum channel_power_spectrum(std::span<const double> channel) {
  return spectrum_of(channel);
}

PowerSpectrum average_patch_spectrum(const Patch& patch) {
  // Two real channels are packed into one complex transform: with
  // z = a + i b, the individual spectra are recovered from the conjugate
  // symmetry of Z. Channels accumulate in ascending index order.
  PowerSpectrum acc;
  const int n = kPatchAxial;
  std::complex<double> buf[kPatchAxial];
  int ch = 0;
  for (; ch + 1 < patch.lateral_len(); ch += 2) {
    auto a = patch.channel(ch);
    auto b = patch.channel(ch + 1);
    for (int i = 0; i < n; ++i) {
      buf[i] = {static_cast<double>(a[i]), static_cast<double>(b[i])};
    }
    fft::forward(buf, n);
    for (int k = 0; k < acc.grid.n_bins; ++k) {
      std::complex<double> zk = buf[k];
      std::complex<double> znk = buf[(n - k) & (n - 1)];
      std::complex<double> xa = 0.5 * (zk + std::conj(znk));
      std::complex<double> xb =
          std::complex<double>(0.0, -0.5) * (zk - std::conj(znk));
      acc.values[k] += std::norm(xa) + std::norm(xb);
    }
  }
  if (ch < patch.lateral_len()) {
    PowerSpectrum last = channel_power_spectrum(patch.channel(ch));
    for (int k = 0; k < acc.grid.n_bins; ++k) acc.values[k] += last.values[k];
  }
  double inv = 1.0 / static_cast<double>(patch.lateral_len());
  for (double& v : acc.values) v *= inv;
  return acc;
}

DepthSpectra compute_depth_spectra(std::span<const RFFrame> frames) {
  if (frames.empty()) {
    throw ConfigError("compute_depth_spectra: no frames given");
  }
  const RFFrame& first = frames.front();
  for (const RFFrame& f : frames) {
    if (!(f.settings() == first.settings())) {
      throw ConfigError("compute_depth_spectra: mixed scan settings");
    }
    if (f.axial_len() != first.axial_len() ||
        f.lateral_len() != first.lateral_len()) {
      throw GeometryError("compute_depth_spectra: mixed frame geometry");
    }
  }

  DepthSpectra out;
  out.settings_label = first.settings().label;
  out.n_frames_averaged = static_cast<int>(frames.size());

  bool have_patch[kDepthCount] = {};
  for (const RFFrame& f : frames) {
    std::vector<Patch> patches = extract_patches(f);
    for (const Patch& p : patches) {
      PowerSpectrum s = average_patch_spectrum(p);
      auto& dst = out.per_depth[p.depth_index()];
      for (int k = 0; k < dst.grid.n_bins; ++k) dst.values[k] += s.values[k];
      have_patch[p.depth_index()] = true;
    }
  }
  for (int d = 0; d < kDepthCount; ++d) {
    if (!have_patch[d]) {
      throw GeometryError(
          "calibration frames too short: depth " + std::to_string(d) +
          " has no patch; need axial_len >= " +
          std::to_string(kFirstPatchStart + (kDepthCount - 1) * kPatchStride +
                         kPatchAxial));
    }
    double inv = 1.0 / static_cast<double>(frames.size());
    for (double& v : out.per_depth[d].values) v *= inv;
  }
  return out;
}

double estimate_noise_floor(const PowerSpectrum& spectrum) {
  auto [first, last] = spectrum.grid.band_bins(kNoiseBandLoMhz, 1e18);
  std::vector<double> tail(spectrum.values.begin() + first,
                           spectrum.values.begin() + last + 1);
  std::partial_sort(tail.begin(),
                    tail.begin() + std::min<std::size_t>(kNoiseFloorBins,
                                                         tail.size()),
                    tail.end());
  std::size_t n = std::min<std::size_t>(kNoiseFloorBins, tail.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += tail[i];
  mean /= static_cast<double>(n);
  if (mean > 0.0) return mean;

  double peak = *std::max_element(spectrum.values.begin(),
                                  spectrum.values.end());
  return peak > 0.0 ? 1e-12 * peak : 1e-30;
}

SnrProfile estimate_snr(const PowerSpectrum& train, const PowerSpectrum& test,
                        SnrMode mode) {
  if (!(train.grid == test.grid)) {
    throw ConfigError("estimate_snr: spectra are on different grids");
  }
  double floor_train = estimate_noise_floor(train);
  double floor_test = estimate_noise_floor(test);

  SnrProfile out;
  out.grid = train.grid;
  out.snr.resize(static_cast<std::size_t>(out.grid.n_bins));
  out.noise_floor = std::min(floor_train, floor_test);
  for (int k = 0; k < out.grid.n_bins; ++k) {
    double sig_train = std::max(train.values[k] - floor_train, 0.0);
    double sig_test = std::max(test.values[k] - floor_test, 0.0);
    out.snr[k] = std::min(sig_train / floor_train, sig_test / floor_test);
  }
  if (mode == SnrMode::global_min) {
    auto [first, last] =
        out.grid.band_bins(kAnalysisBandLoMhz, kAnalysisBandHiMhz);
    double m = out.snr[first];
    for (int k = first + 1; k <= last; ++k) m = std::min(m, out.snr[k]);
    std::fill(out.snr.begin(), out.snr.end(), m);
  }
  return out;
}

void write_csv(const PowerSpectrum& spectrum, std::ostream& out) {
  out << "freq_mhz,power\n";
  for (int k = 0; k < spectrum.grid.n_bins; ++k) {
    out << spectrum.grid.freq_mhz(k) << ',' << spectrum.values[k] << '\n';
  }
}

void write_csv(const DepthSpectra& spectra, std::ostream& out) {
  out << "freq_mhz,power,depth_index\n";
  for (int d = 0; d < kDepthCount; ++d) {
    const PowerSpectrum& s = spectra.per_depth[d];
    for (int k = 0; k < s.grid.n_bins; ++k) {
      out << s.grid.freq_mhz(k) << ',' << s.values[k] << ',' << d << '\n';
    }
  }
}

}  // namespace rfcal
