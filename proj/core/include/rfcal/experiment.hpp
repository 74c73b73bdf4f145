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

#ifndef RFCAL_EXPERIMENT_HPP_
#define RFCAL_EXPERIMENT_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfcal/classifier.hpp"
#include "rfcal/phantom.hpp"
#include "rfcal/transfer.hpp"

namespace rfcal {

/// The three scanner-knob mismatches reproduced by the harness. Training
/// always uses a 9 MHz pulse focused at 2 cm with 0 dB output power; the
/// testing side changes exactly one knob.
enum class Mismatch { pulse_frequency, focus, output_power };

std::string to_string(Mismatch m);
Mismatch mismatch_from_string(const std::string& s);

/// (training settings, testing settings) for a mismatch.
std::pair<ScanSettings, ScanSettings> settings_for(Mismatch m);

struct ModeSpec {
  enum class Kind {
    benchmark,          // train and test both at the testing setting
    no_calibration,     // train on raw training-setting data
    train_time,         // training patches calibrated with probability p
    test_time,          // every test patch calibrated back to training domain
    transfer_learning,  // no-calibration model fine-tuned on test-setting frames
  };

  Kind kind = Kind::benchmark;
  double calibrated_fraction = 1.0;  // train_time only; p in (0, 1]
  int tl_frames = 50;                // transfer_learning fine-tune pool

  static ModeSpec benchmark() { return {Kind::benchmark}; }
  static ModeSpec no_calibration() { return {Kind::no_calibration}; }
  static ModeSpec train_time(double p) { return {Kind::train_time, p}; }
  static ModeSpec test_time() { return {Kind::test_time}; }
  static ModeSpec transfer_learning(int frames) {
    return {Kind::transfer_learning, 1.0, frames};
  }

  std::string display_name() const;
};

struct SplitConfig {
  double train_fraction = 0.8;
  /// Number of testing-setting frames kept for validation/test (50/50);
  /// all of them when unset.
  std::optional<int> eval_select;
};

struct SimulatorConfig {
  PhantomSpec phantom1 = phantom_one();
  PhantomSpec phantom2 = phantom_two();
  PhantomSpec calibration = calibration_phantom();
  SystemModel system;
  int frames_per_phantom = 200;  // free-hand frames per phantom per setting
  int calibration_frames = 10;   // stable frames per side
};

struct ExperimentConfig {
  Mismatch mismatch = Mismatch::pulse_frequency;
  ModeSpec mode;
  int repetitions = 10;
  SimulatorConfig sim;
  SplitConfig split;
  TrainConfig training;
  /// Fine-tuning phase of transfer learning; falls back to `training`.
  std::optional<TrainConfig> tl_training;
  CalibrationConfig calibration;
  std::uint64_t base_seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct ExperimentResult {
  Mismatch mismatch = Mismatch::pulse_frequency;
  ModeSpec mode;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // n-1 denominator over per_run
  std::vector<double> per_run;
  double wall_time_s = 0.0;
  std::string config_digest;
};

/// FNV-1a hash of the resolved config serialization, hex.
std::string config_digest(const ExperimentConfig& config);

/// Caches the expensive per-(data-parameters, repetition) artifacts --
/// simulated pools reduced to feature tables plus the calibration -- so a
/// suite whose configs share data parameters and base seed does not
/// re-simulate per mode. Entries are immutable; reuse is keyed on every
/// parameter that influences the tables, so results are identical with or
/// without cache hits.
class RepetitionCache {
 public:
  explicit RepetitionCache(std::size_t max_entries = 12);
  ~RepetitionCache();

  RepetitionCache(const RepetitionCache&) = delete;
  RepetitionCache& operator=(const RepetitionCache&) = delete;

  class Impl;
  Impl& impl() { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

/// Runs one experiment: per repetition, simulates free-hand pools for both
/// phantoms, the stable calibration pair, builds the transfer function,
/// assembles mode-specific train/test sets (denoising prefilter always
/// applied first), trains and evaluates. Deterministic given the config.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config,
                                RepetitionCache& cache);

struct SuiteRow {
  ExperimentConfig config;
  std::optional<ExperimentResult> result;  // empty if the run failed
  std::string error;
};

/// Runs experiments in order, sharing one repetition cache. Individual
/// failures are recorded in their row without aborting the rest.
std::vector<SuiteRow> run_suite(std::span<const ExperimentConfig> configs);
std::vector<SuiteRow> run_suite(std::span<const ExperimentConfig> configs,
                                RepetitionCache& cache);

/// Text table: "Experiment Type | Accuracy", accuracy in percent as
/// mean +- std to two decimals.
std::string render_table(std::span<const SuiteRow> rows);

/// JSON (de)serialization of configs; missing keys fall back to defaults.
void save_config(const ExperimentConfig& config, std::ostream& out);
ExperimentConfig load_config(std::istream& in);

/// Result persistence: every ExperimentResult field plus the resolved config.
void save_result(const ExperimentResult& result, const ExperimentConfig& config,
                 std::ostream& out);
ExperimentResult load_result(std::istream& in);

/// Calibration plots: the CSV defined by the transfer module plus a
/// two-panel SVG (left: power spectra of both settings; right: gamma, the
/// Wiener-regularized gain and the realized FIR response) at one depth.
/// The default depth is the patch nearest 2 cm.
void emit_calibration_plots(const SettingTransferFunction& stf,
                            const DepthSpectra& train_spectra,
                            const DepthSpectra& test_spectra, int depth_index,
                            std::ostream& csv_out, std::ostream& svg_out);

/// Depth index of the patch whose center is nearest 2 cm at 40 MHz.
int default_plot_depth();

}  // namespace rfcal

#endif  // RFCAL_EXPERIMENT_HPP_
