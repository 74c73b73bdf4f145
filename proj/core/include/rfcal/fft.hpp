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

#ifndef RFCAL_FFT_HPP_
#define RFCAL_FFT_HPP_

#include <complex>
#include <cstddef>

namespace rfcal::fft {

/// In-place unnormalized DFT, radix-2 iterative. n must be a power of two.
void forward(std::complex<double>* data, std::size_t n);

/// In-place inverse DFT including the 1/n scaling. n must be a power of two.
void inverse(std::complex<double>* data, std::size_t n);

}  // namespace rfcal::fft

#endif  // RFCAL_FFT_HPP_
