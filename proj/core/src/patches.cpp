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

#include "rfcal/patches.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "rfcal/rng.hpp"

namespace rfcal {

std::vector<Patch> extract_patches(const RFFrame& frame) {
  std::vector<Patch> patches;
  for (int d = 0; d < kDepthCount; ++d) {
    int start = kFirstPatchStart + d * kPatchStride;
    if (start + kPatchAxial > frame.axial_len()) break;
    Patch patch(frame.lateral_len(), start,
                frame.phantom_label() ? *frame.phantom_label() : -1,
                frame.settings().label);
    for (int ch = 0; ch < frame.lateral_len(); ++ch) {
      auto src = frame.channel(ch);
      auto dst = patch.channel(ch);
      std::memcpy(dst.data(), src.data() + start, kPatchAxial * sizeof(float));
    }
    patches.push_back(std::move(patch));
  }
  if (patches.empty()) {
    throw GeometryError(
        "frame too short for patch extraction: axial_len=" +
        std::to_string(frame.axial_len()) + ", need at least " +
        std::to_string(kFirstPatchStart + kPatchAxial));
  }
  return patches;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx);
  return idx;
}

}  // namespace

SplitIndices split_frame_indices(std::size_t n_train_pool,
                                 std::size_t n_eval_pool, std::uint64_t seed,
                                 double train_fraction,
                                 std::optional<std::size_t> eval_select) {
  if (n_train_pool == 0 && n_eval_pool == 0) {
    throw ConfigError("split_frames: no frames given");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }

  SplitIndices out;
  {
    Rng rng(derive_seed({seed, 0x7261696eULL}));  // training-pool stream
    auto idx = shuffled_indices(n_train_pool, rng);
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(idx.size())));
    out.train.assign(idx.begin(), idx.begin() + n_train);
  }
  {
    Rng rng(derive_seed({seed, 0x6576616cULL}));  // eval-pool stream
    auto idx = shuffled_indices(n_eval_pool, rng);
    std::size_t n_sel = eval_select.value_or(idx.size());
    if (n_sel > idx.size()) {
      throw ConfigError("eval_select " + std::to_string(n_sel) +
                        " exceeds available " + std::to_string(idx.size()) +
                        " frames");
    }
    std::size_t n_val = (n_sel + 1) / 2;
    out.validation.assign(idx.begin(), idx.begin() + n_val);
    out.test.assign(idx.begin() + n_val, idx.begin() + n_sel);
  }
  return out;
}

FrameSplit split_frames(std::span<const RFFrame> train_candidates,
                        std::span<const RFFrame> eval_candidates,
                        std::uint64_t seed, double train_fraction,
                        std::optional<std::size_t> eval_select) {
  SplitIndices idx =
      split_frame_indices(train_candidates.size(), eval_candidates.size(),
                          seed, train_fraction, eval_select);
  FrameSplit split;
  split.seed_used = seed;
  for (std::size_t i : idx.train) split.train.push_back(train_candidates[i]);
  for (std::size_t i : idx.validation) {
    split.validation.push_back(eval_candidates[i]);
  }
  for (std::size_t i : idx.test) split.test.push_back(eval_candidates[i]);
  return split;
}

FrameSplit split_frames(std::span<const RFFrame> frames, std::uint64_t seed,
                        double train_fraction, const std::string& train_label,
                        std::optional<std::size_t> eval_select) {
  std::vector<RFFrame> train_pool;
  std::vector<RFFrame> eval_pool;
  for (const RFFrame& f : frames) {
    (f.settings().label == train_label ? train_pool : eval_pool).push_back(f);
  }
  return split_frames(std::span<const RFFrame>(train_pool),
                      std::span<const RFFrame>(eval_pool), seed,
                      train_fraction, eval_select);
}

double depth_of_patch(int depth_index, double sampling_rate_mhz) {
  if (depth_index < 0 || depth_index >= kDepthCount) {
    throw GeometryError("depth_index out of range: " +
                        std::to_string(depth_index));
  }
  double center = kFirstPatchStart + depth_index * kPatchStride +
                  kPatchAxial / 2;
  return sample_depth_cm(center, sampling_rate_mhz);
}

int nearest_depth_index(double depth_cm, double sampling_rate_mhz) {
  int best = 0;
  double best_err = std::abs(depth_of_patch(0, sampling_rate_mhz) - depth_cm);
  for (int d = 1; d < kDepthCount; ++d) {
    double err = std::abs(depth_of_patch(d, sampling_rate_mhz) - depth_cm);
    if (err < best_err) {
      best = d;
      best_err = err;
    }
  }
  return best;
}

}  // namespace rfcal
