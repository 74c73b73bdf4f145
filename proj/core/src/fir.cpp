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

#include "rfcal/fir.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace rfcal {
namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kSymmetryTol = 1e-12;

// out[i] = sum_m taps_rev[m] * padded[i + m], with padded carrying
// group_delay zeros on each side of the signal. The tap loop is outermost
// so every output accumulates in the same order and the inner loop
// vectorizes without reassociation.
void conv_same_core(const double* padded, int n_out, const double* taps_rev,
                    int ntaps, double* out) {
  std::fill(out, out + n_out, 0.0);
  for (int m = 0; m < ntaps; ++m) {
    const double h = taps_rev[m];
    const double* s = padded + m;
    for (int i = 0; i < n_out; ++i) {
      out[i] += h * s[i];
    }
  }
}

// Single-precision variant for the patch hot path; patches are stored as
// f32, so the double route would be quantized on output anyway.
void conv_same_core_f32(const float* padded, int n_out, const float* taps_rev,
                        int ntaps, float* out) {
  std::fill(out, out + n_out, 0.0f);
  for (int m = 0; m < ntaps; ++m) {
    const float h = taps_rev[m];
    const float* s = padded + m;
    for (int i = 0; i < n_out; ++i) {
      out[i] += h * s[i];
    }
  }
}

}  // namespace

FIRFilter::FIRFilter(std::vector<double> taps, double sampling_rate_mhz,
                     std::vector<std::pair<double, double>> design_gains)
    : taps_(std::move(taps)),
      sampling_rate_mhz_(sampling_rate_mhz),
      design_gains_(std::move(design_gains)) {
  if (taps_.empty() || taps_.size() % 2 == 0) {
    throw ConfigError("FIR filter needs an odd number of taps, got " +
                      std::to_string(taps_.size()));
  }
  if (sampling_rate_mhz_ <= 0.0) {
    throw ConfigError("FIR sampling rate must be positive");
  }
  std::size_t n = taps_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(taps_[i])) {
      throw ConfigError("FIR taps must be finite");
    }
    if (std::abs(taps_[i] - taps_[n - 1 - i]) > kSymmetryTol) {
      throw ConfigError("FIR taps must be symmetric (type-I linear phase)");
    }
  }
}

FIRFilter FIRFilter::identity(int ntaps, double sampling_rate_mhz) {
  std::vector<double> taps(static_cast<std::size_t>(ntaps), 0.0);
  taps[static_cast<std::size_t>((ntaps - 1) / 2)] = 1.0;
  return FIRFilter(std::move(taps), sampling_rate_mhz);
}

FIRFilter design_fir(std::span<const double> freq_points_mhz,
                     std::span<const double> gains, int ntaps,
                     double sampling_rate_mhz) {
  if (ntaps < 3 || ntaps % 2 == 0) {
    throw ConfigError("design_fir: ntaps must be odd and >= 3");
  }
  if (freq_points_mhz.size() != gains.size() || freq_points_mhz.size() < 2) {
    throw ConfigError("design_fir: need matching freq/gain lists of length >= 2");
  }
  const double nyq = sampling_rate_mhz / 2.0;
  if (std::abs(freq_points_mhz.front()) > 1e-9 * nyq) {
    throw ConfigError("design_fir: frequency points must start at 0");
  }
  if (std::abs(freq_points_mhz.back() - nyq) > 1e-9 * nyq) {
    throw ConfigError("design_fir: frequency points must end at Nyquist");
  }
  for (std::size_t i = 1; i < freq_points_mhz.size(); ++i) {
    if (!(freq_points_mhz[i] > freq_points_mhz[i - 1])) {
      throw ConfigError("design_fir: frequency points must be strictly ascending");
    }
  }
  for (double g : gains) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw ConfigError("design_fir: gains must be finite and nonnegative");
    }
  }

  // Dense grid size: next power of two above ntaps, plus one.
  int log2n = 0;
  while ((1 << log2n) < ntaps) ++log2n;
  const int nfreqs = (1 << log2n) + 1;
  const int nfull = 2 * (nfreqs - 1);  // length of the time-domain transform

  // Interpolate the desired gains onto the dense uniform grid and attach
  // the linear-phase term so the impulse response is centered.
  std::vector<double> re(static_cast<std::size_t>(nfreqs));
  std::vector<double> im(static_cast<std::size_t>(nfreqs));
  const double delay = static_cast<double>(ntaps - 1) / 2.0;
  std::size_t seg = 0;
  for (int k = 0; k < nfreqs; ++k) {
    double f = nyq * static_cast<double>(k) / static_cast<double>(nfreqs - 1);
    while (seg + 2 < freq_points_mhz.size() && freq_points_mhz[seg + 1] < f) {
      ++seg;
    }
    double f0 = freq_points_mhz[seg];
    double f1 = freq_points_mhz[seg + 1];
    double g0 = gains[seg];
    double g1 = gains[seg + 1];
    double t = f <= f0 ? 0.0 : (f >= f1 ? 1.0 : (f - f0) / (f1 - f0));
    double gain = g0 + t * (g1 - g0);

    double phase = -kPi * static_cast<double>(k) /
                   static_cast<double>(nfreqs - 1) * delay;
    re[k] = gain * std::cos(phase);
    im[k] = gain * std::sin(phase);
  }

  // Inverse real-input DFT, evaluated directly (the transform is short and
  // this runs only at design time).
  std::vector<double> taps(static_cast<std::size_t>(ntaps));
  for (int n = 0; n < ntaps; ++n) {
    double acc = re[0] + re[nfreqs - 1] * (n % 2 == 0 ? 1.0 : -1.0);
    for (int k = 1; k < nfreqs - 1; ++k) {
      double ang = 2.0 * kPi * static_cast<double>(k) * static_cast<double>(n) /
                   static_cast<double>(nfull);
      acc += 2.0 * (re[k] * std::cos(ang) - im[k] * std::sin(ang));
    }
    taps[n] = acc / static_cast<double>(nfull);
  }

  // Hamming window, then exact symmetrization: the analytic result is
  // symmetric and averaging the mirror pairs removes rounding residue.
  for (int n = 0; n < ntaps; ++n) {
    double w = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(n) /
                                      static_cast<double>(ntaps - 1));
    taps[n] *= w;
  }
  for (int n = 0; n < ntaps / 2; ++n) {
    double avg = 0.5 * (taps[n] + taps[ntaps - 1 - n]);
    taps[n] = avg;
    taps[ntaps - 1 - n] = avg;
  }

  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(freq_points_mhz.size());
  for (std::size_t i = 0; i < freq_points_mhz.size(); ++i) {
    pairs.emplace_back(freq_points_mhz[i], gains[i]);
  }
  return FIRFilter(std::move(taps), sampling_rate_mhz, std::move(pairs));
}

FIRFilter design_bandpass_fir(double lo_mhz, double hi_mhz, int ntaps,
                              double sampling_rate_mhz) {
  const double nyq = sampling_rate_mhz / 2.0;
  const double step = sampling_rate_mhz / 256.0;
  std::vector<double> freqs;
  std::vector<double> gains;
  for (int k = 0; k <= 128; ++k) {
    double f = k == 128 ? nyq : step * k;
    freqs.push_back(f);
    gains.push_back(f >= lo_mhz && f <= hi_mhz ? 1.0 : 0.0);
  }
  return design_fir(freqs, gains, ntaps, sampling_rate_mhz);
}

std::vector<std::complex<double>> frequency_response(
    const FIRFilter& filter, std::span<const double> freqs_mhz) {
  const double nyq = filter.sampling_rate_mhz() / 2.0;
  std::vector<std::complex<double>> out;
  out.reserve(freqs_mhz.size());
  for (double f : freqs_mhz) {
    if (f < -1e-12 || f > nyq * (1.0 + 1e-12)) {
      throw ConfigError("frequency_response: frequency " + std::to_string(f) +
                        " MHz outside [0, Nyquist]");
    }
    std::complex<double> acc = 0.0;
    double w = -2.0 * kPi * f / filter.sampling_rate_mhz();
    for (int n = 0; n < filter.size(); ++n) {
      acc += filter.taps()[n] *
             std::complex<double>(std::cos(w * n), std::sin(w * n));
    }
    out.push_back(acc);
  }
  return out;
}

std::vector<double> convolve_same(std::span<const double> signal,
                                  const FIRFilter& filter) {
  const int n = static_cast<int>(signal.size());
  const int m = filter.size();
  const int delay = filter.group_delay();
  if (n < 1) throw ConfigError("convolve_same: empty signal");

  std::vector<double> padded(static_cast<std::size_t>(n + 2 * delay), 0.0);
  std::copy(signal.begin(), signal.end(), padded.begin() + delay);

  std::vector<double> taps_rev(filter.taps().rbegin(), filter.taps().rend());
  std::vector<double> out(static_cast<std::size_t>(n));
  conv_same_core(padded.data(), n, taps_rev.data(), m, out.data());
  return out;
}

Patch apply_filter_axial(const Patch& patch, const FIRFilter& filter) {
  Patch out = patch;
  const int delay = filter.group_delay();
  const int m = filter.size();

  std::vector<float> taps_rev(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    taps_rev[i] = static_cast<float>(filter.taps()[m - 1 - i]);
  }
  std::vector<float> padded(static_cast<std::size_t>(kPatchAxial + 2 * delay),
                            0.0f);
  for (int ch = 0; ch < patch.lateral_len(); ++ch) {
    auto src = patch.channel(ch);
    std::copy(src.begin(), src.end(), padded.begin() + delay);
    conv_same_core_f32(padded.data(), kPatchAxial, taps_rev.data(), m,
                       out.channel(ch).data());
  }
  return out;
}

void write_taps_csv(const FIRFilter& filter, std::ostream& out) {
  out << "tap_index,value\n";
  out.precision(17);
  for (int n = 0; n < filter.size(); ++n) {
    out << n << ',' << filter.taps()[n] << '\n';
  }
}

void write_response_csv(const FIRFilter& filter,
                        std::span<const double> freqs_mhz, std::ostream& out) {
  auto resp = frequency_response(filter, freqs_mhz);
  out << "freq_mhz,magnitude,phase_rad\n";
  for (std::size_t i = 0; i < freqs_mhz.size(); ++i) {
    out << freqs_mhz[i] << ',' << std::abs(resp[i]) << ',' << std::arg(resp[i])
        << '\n';
  }
}

}  // namespace rfcal
