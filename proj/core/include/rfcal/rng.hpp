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

#ifndef RFCAL_RNG_HPP_
#define RFCAL_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <random>
#include <vector>

namespace rfcal {

// All randomness in the library flows through this header. The standard
// library's distribution objects are implementation-defined, so we draw
// raw bits from std::mt19937_64 (which *is* pinned by the standard) and
// map them to values ourselves. Results are therefore reproducible across
// standard libraries, not just across runs.

/// One step of the splitmix64 sequence; used for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hashes a list of integers into a single well-mixed seed. Used to derive
/// independent per-role, per-frame, per-repetition seeds from a base seed.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = 0x8f1bbcdcbfa53e0bULL;
  std::uint64_t acc = 0;
  for (std::uint64_t p : parts) {
    state ^= p + 0x9e3779b97f4a7c15ULL + (acc << 6) + (acc >> 2);
    acc = splitmix64(state);
  }
  return acc;
}

namespace detail {

/// Tables for the 128-layer Marsaglia-Tsang ziggurat normal sampler.
struct ZigguratTables {
  std::uint32_t kn[128];
  double wn[128];
  double fn[128];

  ZigguratTables() {
    const double m1 = 2147483648.0;  // 2^31
    double dn = 3.442619855899;
    double tn = dn;
    const double vn = 9.91256303526217e-3;

    double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

inline const ZigguratTables& ziggurat_tables() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

/// Deterministic random source: mt19937_64 engine plus hand-rolled
/// uniform / normal / Bernoulli mappings.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the 128-layer ziggurat.
  double normal() {
    const auto& t = detail::ziggurat_tables();
    for (;;) {
      std::int32_t hz = static_cast<std::int32_t>(engine_() >> 32);
      std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
      std::uint32_t az = hz < 0
          ? static_cast<std::uint32_t>(-static_cast<std::int64_t>(hz))
          : static_cast<std::uint32_t>(hz);
      if (az < t.kn[iz]) {
        return hz * t.wn[iz];
      }
      double x = hz * t.wn[iz];
      if (iz == 0) {
        // Tail beyond r = 3.442620.
        const double r = 3.442619855899;
        double xx, yy;
        do {
          xx = -std::log(positive_uniform()) / r;
          yy = -std::log(positive_uniform());
        } while (yy + yy < xx * xx);
        return hz > 0 ? r + xx : -(r + xx);
      }
      if (t.fn[iz] + uniform01() * (t.fn[iz - 1] - t.fn[iz]) <
          std::exp(-0.5 * x * x)) {
        return x;
      }
    }
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n). n must be >= 1.
  std::uint64_t bounded(std::uint64_t n) {
    // Multiply-shift; bias is ~n/2^64, negligible for our ranges.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  /// Fisher-Yates shuffle with the bounded draw above.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  double positive_uniform() {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return u;
  }

  std::mt19937_64 engine_;
};

}  // namespace rfcal

#endif  // RFCAL_RNG_HPP_
