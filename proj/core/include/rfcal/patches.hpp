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

#ifndef RFCAL_PATCHES_HPP_
#define RFCAL_PATCHES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfcal/frame.hpp"

namespace rfcal {

/// Cuts the axially overlapping patches from a frame. Starts run
/// 400, 500, ..., 1500 (80% overlap for 256-sample patches); a frame gets
/// as many of those as its axial length admits, at most 12. The patch
/// spans the full lateral width. Throws GeometryError if no patch fits.
std::vector<Patch> extract_patches(const RFFrame& frame);

struct FrameSplit {
  std::vector<RFFrame> train;
  std::vector<RFFrame> validation;
  std::vector<RFFrame> test;
  std::uint64_t seed_used = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Index-level form of split_frames: which positions of the two candidate
/// pools land in which split. split_frames is defined in terms of this, so
/// callers that materialize frames lazily see the identical selection.
SplitIndices split_frame_indices(std::size_t n_train_pool,
                                 std::size_t n_eval_pool, std::uint64_t seed,
                                 double train_fraction,
                                 std::optional<std::size_t> eval_select =
                                     std::nullopt);

/// Splits acquisition pools into train / validation / test frame sets.
///
/// `train_candidates` are frames acquired at the training setting: a
/// seeded `train_fraction` of them (rounded down) becomes the training
/// pool. `eval_candidates` are frames acquired at the testing setting:
/// `eval_select` of them (all when unset) are selected at random and split
/// half/half into validation and test, validation taking the extra frame
/// when the count is odd. Frames are the unit of splitting so that
/// axially overlapping patches never straddle a split boundary.
FrameSplit split_frames(std::span<const RFFrame> train_candidates,
                        std::span<const RFFrame> eval_candidates,
                        std::uint64_t seed, double train_fraction,
                        std::optional<std::size_t> eval_select = std::nullopt);

/// Convenience overload over a single mixed pool: frames whose settings
/// label equals `train_label` are training candidates, all others are
/// evaluation candidates.
FrameSplit split_frames(std::span<const RFFrame> frames, std::uint64_t seed,
                        double train_fraction, const std::string& train_label,
                        std::optional<std::size_t> eval_select = std::nullopt);

/// Center depth of a patch in cm: (axial_start + 128) * c / (2 fs).
double depth_of_patch(int depth_index, double sampling_rate_mhz);

/// The depth index whose patch center is closest to `depth_cm`.
int nearest_depth_index(double depth_cm, double sampling_rate_mhz);

}  // namespace rfcal

#endif  // RFCAL_PATCHES_HPP_
