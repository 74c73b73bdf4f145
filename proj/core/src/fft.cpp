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

#include "rfcal/fft.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <vector>

namespace rfcal::fft {
namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr int kMaxLog2 = 24;

struct Tables {
  std::vector<std::uint32_t> bitrev;
  std::vector<std::complex<double>> twiddle;  // one block per stage
};

Tables build_tables(std::size_t n) {
  Tables t;
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  t.bitrev.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < log2n; ++b) {
      r |= ((i >> b) & 1u) << (log2n - 1 - b);
    }
    t.bitrev[i] = static_cast<std::uint32_t>(r);
  }
  t.twiddle.reserve(n);
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t j = 0; j < h; ++j) {
      double ang = -kPi * static_cast<double>(j) / static_cast<double>(h);
      t.twiddle.emplace_back(std::cos(ang), std::sin(ang));
    }
  }
  return t;
}

const Tables& tables_for(std::size_t n) {
  // One slot per power of two; thread-local to stay lock-free.
  thread_local std::unique_ptr<Tables> cache[kMaxLog2 + 1];
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  auto& slot = cache[log2n];
  if (!slot) slot = std::make_unique<Tables>(build_tables(n));
  return *slot;
}

void transform(std::complex<double>* a, std::size_t n, bool invert) {
  if (n <= 1) return;
  if ((n & (n - 1)) != 0) {
    // Power-of-two lengths only; the library never needs others.
    std::abort();
  }
  const Tables& t = tables_for(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = t.bitrev[i];
    if (i < j) std::swap(a[i], a[j]);
  }

  // Stage h = 1: twiddle is +1, plain butterflies.
  for (std::size_t i = 0; i + 1 < n; i += 2) {
    std::complex<double> u = a[i];
    std::complex<double> v = a[i + 1];
    a[i] = u + v;
    a[i + 1] = u - v;
  }

  std::size_t stage_off = 1;
  for (std::size_t h = 2; h < n; h <<= 1) {
    const std::complex<double>* w = t.twiddle.data() + stage_off;
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = 0; j < h; ++j) {
        std::complex<double> wj = invert ? std::conj(w[j]) : w[j];
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + h] * wj;
        a[i + j] = u + v;
        a[i + j + h] = u - v;
      }
    }
    stage_off += h;
  }
  if (invert) {
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) a[i] *= inv_n;
  }
}

}  // namespace

void forward(std::complex<double>* data, std::size_t n) {
  transform(data, n, false);
}

void inverse(std::complex<double>* data, std::size_t n) {
  transform(data, n, true);
}

}  // namespace rfcal::fft
