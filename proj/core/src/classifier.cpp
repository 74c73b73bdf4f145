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

#include "rfcal/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rfcal/rng.hpp"
#include "rfcal/spectrum.hpp"

namespace rfcal {
namespace {

constexpr std::uint64_t kRoleEpoch = 0xe90cULL;

void check_labels(std::span<const int> labels) {
  for (int l : labels) {
    if (l < 0 || l >= kNumClasses) {
      throw ConfigError("label out of range: " + std::to_string(l));
    }
  }
}

FeatureSet featurize_set(const LabeledPatchSet& dataset) {
  FeatureSet out;
  out.features.reserve(dataset.patches.size());
  out.labels.reserve(dataset.patches.size());
  for (const Patch& p : dataset.patches) {
    out.features.push_back(featurize(p));
    out.labels.push_back(p.label());
  }
  return out;
}

ClassifierModel train_from(const ClassifierModel& init,
                           const FeatureSet& dataset,
                           const TrainConfig& config) {
  config.validate();
  if (dataset.features.size() != dataset.labels.size()) {
    throw ConfigError("feature/label count mismatch");
  }
  if (dataset.size() == 0) {
    throw ConfigError("training set is empty");
  }
  check_labels(dataset.labels);
  bool seen[kNumClasses] = {};
  for (int l : dataset.labels) seen[l] = true;
  if (!std::all_of(std::begin(seen), std::end(seen), [](bool b) { return b; })) {
    throw ConfigError("training set must contain every class");
  }

  ClassifierModel model = init;
  AdamState state(model.weights().size());
  const std::size_t n = dataset.size();
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(n);
  std::vector<double> grad(model.weights().size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed({config.seed, kRoleEpoch,
                         static_cast<std::uint64_t>(epoch)}));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    for (std::size_t start = 0; start < n; start += batch_size) {
      std::size_t end = std::min(start + batch_size, n);
      double inv_batch = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);

      for (std::size_t b = start; b < end; ++b) {
        std::size_t idx = order[b];
        // Horizontal-flip augmentation point. Channel-averaged spectra are
        // flip-invariant, so the draw is kept and the transform is a no-op.
        (void)rng.bernoulli(config.flip_probability);

        const FeatureVector& x = dataset.features[idx];
        auto p = softmax(model.logits(x));
        for (int c = 0; c < kNumClasses; ++c) {
          double coeff =
              (p[c] - (c == dataset.labels[idx] ? 1.0 : 0.0)) * inv_batch;
          double* g = grad.data() + static_cast<std::size_t>(c) * kFeatureDim;
          for (int j = 0; j < kFeatureDim; ++j) {
            g[j] += coeff * x.values[j];
          }
        }
      }
      adam_step(state, model.weights(), grad, config.learning_rate,
                config.adam);
    }
  }
  return model;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw ConfigError("flip_probability must be in [0, 1]");
  }
}

ClassifierModel::ClassifierModel()
    : weights_(static_cast<std::size_t>(kNumClasses) * kFeatureDim, 0.0) {}

std::array<double, kNumClasses> ClassifierModel::logits(
    const FeatureVector& x) const {
  std::array<double, kNumClasses> out{};
  for (int c = 0; c < kNumClasses; ++c) {
    const double* w = weights_.data() + static_cast<std::size_t>(c) * kFeatureDim;
    double acc = 0.0;
    for (int j = 0; j < kFeatureDim; ++j) acc += w[j] * x.values[j];
    out[c] = acc;
  }
  return out;
}

int ClassifierModel::predict(const FeatureVector& x) const {
  auto l = logits(x);
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (l[c] > l[best]) best = c;
  }
  return best;
}

std::array<double, kNumClasses> softmax(
    const std::array<double, kNumClasses>& logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  std::array<double, kNumClasses> out{};
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    out[c] = std::exp(logits[c] - m);
    sum += out[c];
  }
  for (double& v : out) v /= sum;
  return out;
}

FeatureVector featurize(const Patch& patch) {
  PowerSpectrum spec = average_patch_spectrum(patch);
  FeatureVector out;
  for (int k = 0; k < kSpectralFeatures; ++k) {
    out.values[k] = std::log10(spec.values[k] + kFeatureEpsilon);
  }
  out.values[kSpectralFeatures] = 1.0;
  return out;
}

void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads, double learning_rate,
               const AdamHyper& hyper) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw ConfigError("adam_step: shape mismatch");
  }
  state.step_count += 1;
  double t = static_cast<double>(state.step_count);
  double bc1 = 1.0 - std::pow(hyper.beta1, t);
  double bc2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    state.first_moment[i] = hyper.beta1 * state.first_moment[i] +
                            (1.0 - hyper.beta1) * g;
    state.second_moment[i] = hyper.beta2 * state.second_moment[i] +
                             (1.0 - hyper.beta2) * g * g;
    double m_hat = state.first_moment[i] / bc1;
    double v_hat = state.second_moment[i] / bc2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + hyper.eps);
  }
}

std::vector<double> cross_entropy_gradient(const ClassifierModel& model,
                                           std::span<const FeatureVector> x,
                                           std::span<const int> labels) {
  if (x.size() != labels.size() || x.empty()) {
    throw ConfigError("cross_entropy_gradient: bad batch");
  }
  std::vector<double> grad(model.weights().size(), 0.0);
  double inv = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto p = softmax(model.logits(x[i]));
    for (int c = 0; c < kNumClasses; ++c) {
      double coeff = (p[c] - (c == labels[i] ? 1.0 : 0.0)) * inv;
      double* g = grad.data() + static_cast<std::size_t>(c) * kFeatureDim;
      for (int j = 0; j < kFeatureDim; ++j) g[j] += coeff * x[i].values[j];
    }
  }
  return grad;
}

double cross_entropy_loss(const ClassifierModel& model,
                          std::span<const FeatureVector> x,
                          std::span<const int> labels) {
  if (x.size() != labels.size() || x.empty()) {
    throw ConfigError("cross_entropy_loss: bad batch");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto l = model.logits(x[i]);
    double m = *std::max_element(l.begin(), l.end());
    double lse = 0.0;
    for (int c = 0; c < kNumClasses; ++c) lse += std::exp(l[c] - m);
    loss += -(l[labels[i]] - m - std::log(lse));
  }
  return loss / static_cast<double>(x.size());
}

ClassifierModel train(const FeatureSet& dataset, const TrainConfig& config) {
  return train_from(ClassifierModel(), dataset, config);
}

ClassifierModel train(const LabeledPatchSet& dataset,
                      const TrainConfig& config) {
  return train(featurize_set(dataset), config);
}

ClassifierModel fine_tune(const ClassifierModel& model,
                          const FeatureSet& small_set,
                          const TrainConfig& config) {
  return train_from(model, small_set, config);
}

ClassifierModel fine_tune(const ClassifierModel& model,
                          const LabeledPatchSet& small_set,
                          const TrainConfig& config) {
  return fine_tune(model, featurize_set(small_set), config);
}

double evaluate(const ClassifierModel& model, const FeatureSet& dataset) {
  if (dataset.size() == 0) {
    throw ConfigError("evaluate: dataset is empty");
  }
  check_labels(dataset.labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (model.predict(dataset.features[i]) == dataset.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

double evaluate(const ClassifierModel& model, const LabeledPatchSet& dataset) {
  return evaluate(model, featurize_set(dataset));
}

void save_model(const ClassifierModel& model, std::ostream& out) {
  out << "rfcal-model 1\n";
  out << "classes " << kNumClasses << '\n';
  out << "features " << kFeatureDim << '\n';
  out << "digest "
      << (model.config_digest().empty() ? "-" : model.config_digest()) << '\n';
  out.precision(17);
  for (int c = 0; c < kNumClasses; ++c) {
    const double* w =
        model.weights().data() + static_cast<std::size_t>(c) * kFeatureDim;
    for (int j = 0; j < kFeatureDim; ++j) {
      out << w[j] << (j + 1 == kFeatureDim ? '\n' : ' ');
    }
  }
}

ClassifierModel load_model(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "rfcal-model" || version != 1) {
    throw FormatError(FormatError::Kind::bad_magic, "not an rfcal model file");
  }
  std::string key;
  int classes = 0, features = 0;
  std::string digest;
  if (!(in >> key >> classes) || key != "classes" || classes != kNumClasses) {
    throw FormatError(FormatError::Kind::bad_field, "bad class count");
  }
  if (!(in >> key >> features) || key != "features" || features != kFeatureDim) {
    throw FormatError(FormatError::Kind::bad_field, "bad feature dimension");
  }
  if (!(in >> key >> digest) || key != "digest") {
    throw FormatError(FormatError::Kind::bad_field, "missing digest line");
  }
  ClassifierModel model;
  for (double& w : model.weights()) {
    if (!(in >> w)) {
      throw FormatError(FormatError::Kind::truncated,
                        "model file ends before all weights are read");
    }
  }
  if (digest != "-") model.set_config_digest(digest);
  return model;
}

}  // namespace rfcal
