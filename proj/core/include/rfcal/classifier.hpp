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

#ifndef RFCAL_CLASSIFIER_HPP_
#define RFCAL_CLASSIFIER_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rfcal/frame.hpp"

namespace rfcal {

inline constexpr int kNumClasses = 2;
inline constexpr int kSpectralFeatures = 129;
inline constexpr int kFeatureDim = kSpectralFeatures + 1;  // + bias slot
inline constexpr double kFeatureEpsilon = 1e-20;

/// Log-spectral features of one patch: log10 of the channel-averaged power
/// spectrum per bin, plus a trailing constant 1.0 bias term.
struct FeatureVector {
  std::array<double, kFeatureDim> values{};
};

/// Feature rows with labels; the harness-level currency once patches have
/// been filtered and featurized.
struct FeatureSet {
  std::vector<FeatureVector> features;
  std::vector<int> labels;

  std::size_t size() const { return features.size(); }
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step_count = 0;

  explicit AdamState(std::size_t n_params = 0)
      : first_moment(n_params, 0.0), second_moment(n_params, 0.0) {}
};

struct TrainConfig {
  double learning_rate = 5e-3;
  int epochs = 25;
  int batch_size = 64;
  std::uint64_t seed = 0;
  double flip_probability = 0.5;
  AdamHyper adam;

  void validate() const;
};

/// Two-class multinomial logistic regression over FeatureVectors.
class ClassifierModel {
 public:
  ClassifierModel();

  /// Row-major weights, kNumClasses x kFeatureDim.
  std::span<const double> weights() const { return weights_; }
  std::span<double> weights() { return weights_; }

  const std::string& config_digest() const { return config_digest_; }
  void set_config_digest(std::string digest) {
    config_digest_ = std::move(digest);
  }

  std::array<double, kNumClasses> logits(const FeatureVector& x) const;
  /// Argmax class; ties break toward the lower class index.
  int predict(const FeatureVector& x) const;

 private:
  std::vector<double> weights_;
  std::string config_digest_;
};

/// Softmax with the usual max-shift for stability; outputs sum to 1.
std::array<double, kNumClasses> softmax(
    const std::array<double, kNumClasses>& logits);

/// log10(average_patch_spectrum + eps) per bin, bias 1.0. The caller is
/// responsible for running the denoising prefilter first; featurize does
/// not filter.
FeatureVector featurize(const Patch& patch);

/// One Adam update with bias correction; increments the step count.
void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads, double learning_rate,
               const AdamHyper& hyper = {});

/// Mean softmax cross-entropy gradient of the batch, laid out like the
/// model weights. Exposed for gradient checking.
std::vector<double> cross_entropy_gradient(const ClassifierModel& model,
                                           std::span<const FeatureVector> x,
                                           std::span<const int> labels);

/// Mean softmax cross-entropy loss of a batch.
double cross_entropy_loss(const ClassifierModel& model,
                          std::span<const FeatureVector> x,
                          std::span<const int> labels);

/// Minimizes mean cross-entropy with Adam over seeded shuffled minibatches,
/// starting from zero weights. Each patch passes the horizontal-flip
/// augmentation stage before featurization; channel-averaged spectra are
/// invariant under the flip, so on features the stage reduces to its
/// seeded Bernoulli draw. Deterministic given the config seed.
ClassifierModel train(const FeatureSet& dataset, const TrainConfig& config);
ClassifierModel train(const LabeledPatchSet& dataset,
                      const TrainConfig& config);

/// Continues training from the given weights with a fresh Adam state.
ClassifierModel fine_tune(const ClassifierModel& model,
                          const FeatureSet& small_set,
                          const TrainConfig& config);
ClassifierModel fine_tune(const ClassifierModel& model,
                          const LabeledPatchSet& small_set,
                          const TrainConfig& config);

/// Fraction of samples whose predicted class equals the label.
double evaluate(const ClassifierModel& model, const FeatureSet& dataset);
double evaluate(const ClassifierModel& model, const LabeledPatchSet& dataset);

/// Structured-text model serialization: class count, feature dimension,
/// row-major weights in decimal.
void save_model(const ClassifierModel& model, std::ostream& out);
ClassifierModel load_model(std::istream& in);

}  // namespace rfcal

#endif  // RFCAL_CLASSIFIER_HPP_
