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

#include "rfcal/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <istream>
#include <list>
#include <mutex>
#include <numeric>
#include <ostream>
#include <semaphore>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "rfcal/patches.hpp"
#include "rfcal/rng.hpp"

namespace rfcal {
namespace {

using nlohmann::json;

// Seed-derivation roles; every stream of randomness in a repetition hangs
// off (base_seed, repetition) through one of these tags.
constexpr std::uint64_t kRoleRep = 0x2e9d01ULL;
constexpr std::uint64_t kRoleSplit = 0x51737ULL;
constexpr std::uint64_t kRoleTrainPool = 0x7001aULL;
constexpr std::uint64_t kRoleEvalPool = 0x7001bULL;
constexpr std::uint64_t kRoleBenchPool = 0x7001cULL;
constexpr std::uint64_t kRoleCalPair = 0xca1ULL;
constexpr std::uint64_t kRoleTrainSeed = 0x7247ULL;
constexpr std::uint64_t kRoleTlSeed = 0x7248ULL;
constexpr std::uint64_t kRoleTlSplit = 0x7249ULL;
constexpr std::uint64_t kRoleMix = 0x3117ULL;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization of the config tree.

json attenuation_to_json(const Attenuation& a) {
  return {{"slope_db_cm_mhz", a.slope_db_cm_mhz}, {"exponent", a.exponent}};
}

Attenuation attenuation_from_json(const json& j, Attenuation def) {
  def.slope_db_cm_mhz = j.value("slope_db_cm_mhz", def.slope_db_cm_mhz);
  def.exponent = j.value("exponent", def.exponent);
  return def;
}

json phantom_to_json(const PhantomSpec& p) {
  return {{"label", p.label},
          {"scatterer_density", p.scatterer_density},
          {"attenuation", attenuation_to_json(p.attenuation)},
          {"backscatter_exponent", p.backscatter_exponent},
          {"reflectivity_std", p.reflectivity_std}};
}

PhantomSpec phantom_from_json(const json& j, PhantomSpec def) {
  def.label = j.value("label", def.label);
  def.scatterer_density = j.value("scatterer_density", def.scatterer_density);
  if (j.contains("attenuation")) {
    def.attenuation = attenuation_from_json(j["attenuation"], def.attenuation);
  }
  def.backscatter_exponent =
      j.value("backscatter_exponent", def.backscatter_exponent);
  def.reflectivity_std = j.value("reflectivity_std", def.reflectivity_std);
  return def;
}

json system_to_json(const SystemModel& s) {
  return {{"fractional_bandwidth", s.fractional_bandwidth},
          {"focal_gain_amp", s.focal_gain_amp},
          {"focal_sigma_cm", s.focal_sigma_cm},
          {"noise_std", s.noise_std}};
}

SystemModel system_from_json(const json& j, SystemModel def) {
  def.fractional_bandwidth =
      j.value("fractional_bandwidth", def.fractional_bandwidth);
  def.focal_gain_amp = j.value("focal_gain_amp", def.focal_gain_amp);
  def.focal_sigma_cm = j.value("focal_sigma_cm", def.focal_sigma_cm);
  def.noise_std = j.value("noise_std", def.noise_std);
  return def;
}

json training_to_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"seed", t.seed},
          {"flip_probability", t.flip_probability},
          {"adam",
           {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2},
            {"eps", t.adam.eps}}}};
}

TrainConfig training_from_json(const json& j, TrainConfig def) {
  def.learning_rate = j.value("learning_rate", def.learning_rate);
  def.epochs = j.value("epochs", def.epochs);
  def.batch_size = j.value("batch_size", def.batch_size);
  def.seed = j.value("seed", def.seed);
  def.flip_probability = j.value("flip_probability", def.flip_probability);
  if (j.contains("adam")) {
    const json& a = j["adam"];
    def.adam.beta1 = a.value("beta1", def.adam.beta1);
    def.adam.beta2 = a.value("beta2", def.adam.beta2);
    def.adam.eps = a.value("eps", def.adam.eps);
  }
  return def;
}

std::string mode_kind_name(ModeSpec::Kind k) {
  switch (k) {
    case ModeSpec::Kind::benchmark: return "benchmark";
    case ModeSpec::Kind::no_calibration: return "no_calibration";
    case ModeSpec::Kind::train_time: return "train_time";
    case ModeSpec::Kind::test_time: return "test_time";
    case ModeSpec::Kind::transfer_learning: return "transfer_learning";
  }
  return "unknown";
}

ModeSpec::Kind mode_kind_from_string(const std::string& s) {
  if (s == "benchmark") return ModeSpec::Kind::benchmark;
  if (s == "no_calibration") return ModeSpec::Kind::no_calibration;
  if (s == "train_time") return ModeSpec::Kind::train_time;
  if (s == "test_time") return ModeSpec::Kind::test_time;
  if (s == "transfer_learning") return ModeSpec::Kind::transfer_learning;
  throw ConfigError("unknown experiment mode: " + s);
}

json mode_to_json(const ModeSpec& m) {
  return {{"kind", mode_kind_name(m.kind)},
          {"p", m.calibrated_fraction},
          {"tl_frames", m.tl_frames}};
}

ModeSpec mode_from_json(const json& j) {
  ModeSpec m;
  m.kind = mode_kind_from_string(j.value("kind", std::string("benchmark")));
  m.calibrated_fraction = j.value("p", 1.0);
  m.tl_frames = j.value("tl_frames", 50);
  return m;
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"mismatch", to_string(c.mismatch)},
         {"mode", mode_to_json(c.mode)},
         {"repetitions", c.repetitions},
         {"seeds", {{"base", c.base_seed}}},
         {"threads", c.threads},
         {"simulator",
          {{"frames_per_phantom", c.sim.frames_per_phantom},
           {"calibration_frames", c.sim.calibration_frames},
           {"phantom1", phantom_to_json(c.sim.phantom1)},
           {"phantom2", phantom_to_json(c.sim.phantom2)},
           {"calibration_phantom", phantom_to_json(c.sim.calibration)},
           {"system", system_to_json(c.sim.system)}}},
         {"split",
          {{"train_fraction", c.split.train_fraction},
           {"eval_select",
            c.split.eval_select ? json(*c.split.eval_select) : json(nullptr)}}},
         {"training", training_to_json(c.training)},
         {"tl_training",
          c.tl_training ? training_to_json(*c.tl_training) : json(nullptr)},
         {"calibration",
          {{"ntaps", c.calibration.ntaps},
           {"snr_mode", c.calibration.snr_mode == SnrMode::per_bin
                            ? "per_bin"
                            : "global_min"}}}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("mismatch")) {
    c.mismatch = mismatch_from_string(j["mismatch"].get<std::string>());
  }
  if (j.contains("mode")) c.mode = mode_from_json(j["mode"]);
  c.repetitions = j.value("repetitions", c.repetitions);
  if (j.contains("seeds")) c.base_seed = j["seeds"].value("base", c.base_seed);
  c.threads = j.value("threads", c.threads);
  if (j.contains("simulator")) {
    const json& s = j["simulator"];
    c.sim.frames_per_phantom =
        s.value("frames_per_phantom", c.sim.frames_per_phantom);
    c.sim.calibration_frames =
        s.value("calibration_frames", c.sim.calibration_frames);
    if (s.contains("phantom1")) {
      c.sim.phantom1 = phantom_from_json(s["phantom1"], c.sim.phantom1);
    }
    if (s.contains("phantom2")) {
      c.sim.phantom2 = phantom_from_json(s["phantom2"], c.sim.phantom2);
    }
    if (s.contains("calibration_phantom")) {
      c.sim.calibration =
          phantom_from_json(s["calibration_phantom"], c.sim.calibration);
    }
    if (s.contains("system")) {
      c.sim.system = system_from_json(s["system"], c.sim.system);
    }
  }
  if (j.contains("split")) {
    const json& s = j["split"];
    c.split.train_fraction = s.value("train_fraction", c.split.train_fraction);
    if (s.contains("eval_select") && !s["eval_select"].is_null()) {
      c.split.eval_select = s["eval_select"].get<int>();
    }
  }
  if (j.contains("training")) {
    c.training = training_from_json(j["training"], c.training);
  }
  if (j.contains("tl_training") && !j["tl_training"].is_null()) {
    c.tl_training = training_from_json(j["tl_training"], TrainConfig{});
  }
  if (j.contains("calibration")) {
    const json& cal = j["calibration"];
    c.calibration.ntaps = cal.value("ntaps", c.calibration.ntaps);
    std::string mode = cal.value("snr_mode", std::string("per_bin"));
    if (mode == "per_bin") {
      c.calibration.snr_mode = SnrMode::per_bin;
    } else if (mode == "global_min") {
      c.calibration.snr_mode = SnrMode::global_min;
    } else {
      throw ConfigError("unknown snr_mode: " + mode);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Repetition data: simulated pools reduced to feature tables. Frames are
// materialized lazily -- each frame's features are a pure function of the
// data parameters, the repetition seed and its pool position, so the set
// of frames a mode touches does not influence any value.

/// The parameters that determine a repetition's feature tables; serialized
/// to form the cache key.
json data_params_json(const ExperimentConfig& c) {
  auto [s_train, s_test] = settings_for(c.mismatch);
  return json{{"mismatch", to_string(c.mismatch)},
              {"train_label", s_train.label},
              {"test_label", s_test.label},
              {"simulator", config_to_json(c)["simulator"]},
              {"split", config_to_json(c)["split"]},
              {"calibration", config_to_json(c)["calibration"]},
              {"base_seed", c.base_seed}};
}

class RepetitionData {
 public:
  RepetitionData(const ExperimentConfig& config, int rep)
      : sim_(config.sim),
        rep_seed_(derive_seed(
            {config.base_seed, kRoleRep, static_cast<std::uint64_t>(rep)})) {
    std::tie(settings_train_, settings_test_) = settings_for(config.mismatch);

    auto [cal_train, cal_test] = simulate_calibration_pair(
        settings_train_, settings_test_, sim_.system, sim_.system,
        derive_seed({rep_seed_, kRoleCalPair}), sim_.calibration_frames,
        sim_.calibration);
    stf_ = std::make_unique<SettingTransferFunction>(
        build_calibration(cal_train, cal_test, config.calibration));

    denoiser_ = std::make_unique<FIRFilter>(
        design_bandpass_fir(1.0, 10.0, config.calibration.ntaps,
                            settings_train_.sampling_rate_mhz));

    SplitIndices idx = split_frame_indices(
        pool_size(), pool_size(), derive_seed({rep_seed_, kRoleSplit}),
        config.split.train_fraction,
        config.split.eval_select
            ? std::optional<std::size_t>(
                  static_cast<std::size_t>(*config.split.eval_select))
            : std::nullopt);
    train_positions_.assign(idx.train.begin(), idx.train.end());
    std::sort(train_positions_.begin(), train_positions_.end());
    test_positions_.assign(idx.test.begin(), idx.test.end());
    std::sort(test_positions_.begin(), test_positions_.end());
  }

  std::uint64_t rep_seed() const { return rep_seed_; }
  std::size_t pool_size() const {
    return 2 * static_cast<std::size_t>(sim_.frames_per_phantom);
  }

  const FeatureSet& train_raw() const {
    ensure_train();
    return train_raw_;
  }
  const FeatureSet& train_cal() const {
    ensure_train();
    return train_cal_;
  }
  const FeatureSet& bench_raw() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (bench_raw_.size() == 0) {
      for (std::size_t pos : train_positions_) {
        append_frame(kRoleBenchPool, settings_test_, pos, nullptr, &bench_raw_,
                     nullptr);
      }
    }
    return bench_raw_;
  }
  const FeatureSet& eval_test_raw() const {
    ensure_eval_test();
    return eval_test_raw_;
  }
  const FeatureSet& eval_test_cal() const {
    ensure_eval_test();
    return eval_test_cal_;
  }

  /// Raw features of arbitrary evaluation-pool frames (transfer learning).
  FeatureSet eval_raw(std::span<const std::size_t> positions) const {
    std::lock_guard<std::mutex> lock(mu_);
    FeatureSet out;
    out.features.reserve(positions.size() * kDepthCount);
    out.labels.reserve(positions.size() * kDepthCount);
    for (std::size_t pos : positions) {
      auto it = eval_frames_.find(pos);
      if (it == eval_frames_.end()) {
        FeatureSet rows;
        append_frame(kRoleEvalPool, settings_test_, pos, nullptr, &rows,
                     nullptr);
        it = eval_frames_.emplace(pos, std::move(rows)).first;
      }
      out.features.insert(out.features.end(), it->second.features.begin(),
                          it->second.features.end());
      out.labels.insert(out.labels.end(), it->second.labels.begin(),
                        it->second.labels.end());
    }
    return out;
  }

 private:
  void ensure_train() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (train_raw_.size() != 0) return;
    for (std::size_t pos : train_positions_) {
      append_frame(kRoleTrainPool, settings_train_, pos,
                   &CalTrainDir, &train_raw_, &train_cal_);
    }
  }

  void ensure_eval_test() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (eval_test_raw_.size() != 0) return;
    for (std::size_t pos : test_positions_) {
      append_frame(kRoleEvalPool, settings_test_, pos, &CalTestDir,
                   &eval_test_raw_, &eval_test_cal_);
    }
  }

  /// Simulates pool frame `pos`, extracts and denoises its patches, and
  /// appends features (and optionally the calibrated variant).
  void append_frame(std::uint64_t role, const ScanSettings& settings,
                    std::size_t pos, const CalibrationMode* cal_dir,
                    FeatureSet* raw_out, FeatureSet* cal_out) const {
    const int fpp = sim_.frames_per_phantom;
    const PhantomSpec& phantom =
        pos < static_cast<std::size_t>(fpp) ? sim_.phantom1 : sim_.phantom2;
    int i = static_cast<int>(pos % static_cast<std::size_t>(fpp));
    std::uint64_t base = derive_seed(
        {rep_seed_, role, static_cast<std::uint64_t>(phantom.label)});
    RFFrame frame =
        simulate_frame(phantom, settings, sim_.system,
                       freehand_scatterer_seed(base, i),
                       freehand_noise_seed(base, i), i);
    for (const Patch& p : extract_patches(frame)) {
      Patch denoised = apply_filter_axial(p, *denoiser_);
      if (raw_out != nullptr) {
        raw_out->features.push_back(featurize(denoised));
        raw_out->labels.push_back(denoised.label());
      }
      if (cal_out != nullptr && cal_dir != nullptr) {
        Patch calibrated = calibrate_patch(denoised, *stf_, *cal_dir);
        cal_out->features.push_back(featurize(calibrated));
        cal_out->labels.push_back(calibrated.label());
      }
    }
  }

  static constexpr CalibrationMode CalTrainDir = CalibrationMode::train_time;
  static constexpr CalibrationMode CalTestDir = CalibrationMode::test_time;

  SimulatorConfig sim_;
  std::uint64_t rep_seed_;
  ScanSettings settings_train_;
  ScanSettings settings_test_;
  std::unique_ptr<SettingTransferFunction> stf_;
  std::unique_ptr<FIRFilter> denoiser_;
  std::vector<std::size_t> train_positions_;
  std::vector<std::size_t> test_positions_;

  mutable std::mutex mu_;
  mutable FeatureSet train_raw_;
  mutable FeatureSet train_cal_;
  mutable FeatureSet bench_raw_;
  mutable FeatureSet eval_test_raw_;
  mutable FeatureSet eval_test_cal_;
  mutable std::unordered_map<std::size_t, FeatureSet> eval_frames_;
};

double run_mode_on(const RepetitionData& data, const ExperimentConfig& config) {
  TrainConfig tc = config.training;
  tc.seed = derive_seed({data.rep_seed(), kRoleTrainSeed,
                         config.training.seed});

  switch (config.mode.kind) {
    case ModeSpec::Kind::benchmark: {
      ClassifierModel model = train(data.bench_raw(), tc);
      return evaluate(model, data.eval_test_raw());
    }
    case ModeSpec::Kind::no_calibration: {
      ClassifierModel model = train(data.train_raw(), tc);
      return evaluate(model, data.eval_test_raw());
    }
    case ModeSpec::Kind::train_time: {
      // Per-patch Bernoulli mixing of calibrated and raw training rows.
      Rng mix(derive_seed({data.rep_seed(), kRoleMix}));
      const FeatureSet& raw = data.train_raw();
      const FeatureSet& cal = data.train_cal();
      FeatureSet mixed;
      mixed.features.reserve(raw.size());
      mixed.labels.reserve(raw.size());
      for (std::size_t i = 0; i < raw.size(); ++i) {
        const FeatureSet& src =
            mix.bernoulli(config.mode.calibrated_fraction) ? cal : raw;
        mixed.features.push_back(src.features[i]);
        mixed.labels.push_back(src.labels[i]);
      }
      ClassifierModel model = train(mixed, tc);
      return evaluate(model, data.eval_test_raw());
    }
    case ModeSpec::Kind::test_time: {
      ClassifierModel model = train(data.train_raw(), tc);
      return evaluate(model, data.eval_test_cal());
    }
    case ModeSpec::Kind::transfer_learning: {
      ClassifierModel base = train(data.train_raw(), tc);

      // Fine-tuning pool: n train, n/2 validation, n/2 test frames drawn
      // from the evaluation pool in one seeded shuffle.
      const int n = config.mode.tl_frames;
      const int n_side = n / 2;
      std::vector<std::size_t> order(data.pool_size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng tl_rng(derive_seed({data.rep_seed(), kRoleTlSplit}));
      tl_rng.shuffle(order);
      std::vector<std::size_t> ft_train(order.begin(), order.begin() + n);
      std::vector<std::size_t> ft_test(order.begin() + n + n_side,
                                       order.begin() + n + 2 * n_side);

      TrainConfig ft = config.tl_training.value_or(config.training);
      ft.seed = derive_seed({data.rep_seed(), kRoleTlSeed, ft.seed});
      ClassifierModel tuned = fine_tune(base, data.eval_raw(ft_train), ft);
      return evaluate(tuned, data.eval_raw(ft_test));
    }
  }
  throw ConfigError("unhandled experiment mode");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Mismatch m) {
  switch (m) {
    case Mismatch::pulse_frequency: return "pulse_frequency";
    case Mismatch::focus: return "focus";
    case Mismatch::output_power: return "output_power";
  }
  return "unknown";
}

Mismatch mismatch_from_string(const std::string& s) {
  if (s == "pulse_frequency") return Mismatch::pulse_frequency;
  if (s == "focus") return Mismatch::focus;
  if (s == "output_power") return Mismatch::output_power;
  throw ConfigError("unknown mismatch: " + s);
}

std::pair<ScanSettings, ScanSettings> settings_for(Mismatch m) {
  ScanSettings train{9.0, {2.0}, 0.0, 40.0, ""};
  ScanSettings test = train;
  switch (m) {
    case Mismatch::pulse_frequency:
      train.label = "pf9";
      test.pulse_freq_mhz = 5.0;
      test.label = "pf5";
      break;
    case Mismatch::focus:
      train.label = "f2cm";
      test.foci_cm = {1.0, 3.0};
      test.label = "f1cm3cm";
      break;
    case Mismatch::output_power:
      train.label = "p0db";
      test.output_power_db = -6.0;
      test.label = "pm6db";
      break;
  }
  return {train, test};
}

std::string ModeSpec::display_name() const {
  switch (kind) {
    case Kind::benchmark: return "Benchmark";
    case Kind::no_calibration: return "No calibration";
    case Kind::train_time: {
      std::ostringstream os;
      os.precision(2);
      os << std::fixed << "Train-time calibration (p=" << calibrated_fraction
         << ")";
      return os.str();
    }
    case Kind::test_time: return "Test-time calibration";
    case Kind::transfer_learning:
      return "Transfer learning (" + std::to_string(tl_frames) + " frames)";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (repetitions < 2) {
    throw ConfigError("repetitions must be >= 2 for a mean +- std result");
  }
  if (sim.frames_per_phantom < 1 || sim.calibration_frames < 1) {
    throw ConfigError("frame counts must be positive");
  }
  training.validate();
  if (tl_training) tl_training->validate();
  if (mode.kind == ModeSpec::Kind::train_time) {
    if (!(mode.calibrated_fraction > 0.0 && mode.calibrated_fraction <= 1.0)) {
      throw ConfigError("train_time probability must be in (0, 1]");
    }
  }
  if (mode.kind == ModeSpec::Kind::transfer_learning) {
    int pool = 2 * sim.frames_per_phantom;
    int needed = mode.tl_frames + 2 * (mode.tl_frames / 2);
    if (mode.tl_frames < 1) {
      throw ConfigError("transfer learning needs at least 1 frame");
    }
    if (needed > pool) {
      throw ConfigError("transfer learning needs " + std::to_string(needed) +
                        " testing-setting frames but only " +
                        std::to_string(pool) + " are simulated");
    }
  }
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }
  if (calibration.ntaps < 3 || calibration.ntaps % 2 == 0) {
    throw ConfigError("calibration ntaps must be odd and >= 3");
  }
}

std::string config_digest(const ExperimentConfig& config) {
  return hex64(fnv1a64(config_to_json(config).dump()));
}

// ---------------------------------------------------------------------------
// Cache plumbing.

class RepetitionCache::Impl {
 public:
  explicit Impl(std::size_t max_entries) : cap_(max_entries) {}

  std::shared_ptr<const RepetitionData> get(
      const std::string& key,
      const std::function<std::shared_ptr<const RepetitionData>()>& compute) {
    std::shared_future<std::shared_ptr<const RepetitionData>> fut;
    std::promise<std::shared_ptr<const RepetitionData>> prom;
    bool owner = false;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = entries_.find(key);
      if (it != entries_.end()) {
        touch(it);
        fut = it->second.future;
      } else {
        owner = true;
        fut = prom.get_future().share();
        lru_.push_front(key);
        entries_[key] = Entry{fut, lru_.begin()};
        evict_if_needed();
      }
    }
    if (owner) {
      try {
        prom.set_value(compute());
      } catch (...) {
        prom.set_exception(std::current_exception());
        std::lock_guard<std::mutex> lock(mu_);
        drop(key);
        throw;
      }
    }
    return fut.get();
  }

 private:
  struct Entry {
    std::shared_future<std::shared_ptr<const RepetitionData>> future;
    std::list<std::string>::iterator lru_it;
  };

  void touch(std::unordered_map<std::string, Entry>::iterator it) {
    lru_.erase(it->second.lru_it);
    lru_.push_front(it->first);
    it->second.lru_it = lru_.begin();
  }

  void drop(const std::string& key) {
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      lru_.erase(it->second.lru_it);
      entries_.erase(it);
    }
  }

  void evict_if_needed() {
    while (entries_.size() > cap_ && !lru_.empty()) {
      // Evict from the cold end, skipping entries still being computed.
      for (auto rit = lru_.rbegin(); rit != lru_.rend(); ++rit) {
        auto it = entries_.find(*rit);
        if (it != entries_.end() &&
            it->second.future.wait_for(std::chrono::seconds(0)) ==
                std::future_status::ready) {
          drop(*rit);
          break;
        }
        if (std::next(rit) == lru_.rend()) return;  // everything in flight
      }
    }
  }

  std::mutex mu_;
  std::unordered_map<std::string, Entry> entries_;
  std::list<std::string> lru_;
  std::size_t cap_;
};

RepetitionCache::RepetitionCache(std::size_t max_entries)
    : impl_(std::make_unique<Impl>(max_entries)) {}

RepetitionCache::~RepetitionCache() = default;

// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config) {
  RepetitionCache cache;
  return run_experiment(config, cache);
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                RepetitionCache& cache) {
  config.validate();
  auto t0 = std::chrono::steady_clock::now();

  const std::string params = data_params_json(config).dump();
  const int n_threads = resolve_threads(config.threads);

  std::counting_semaphore<256> slots(std::min(n_threads, 256));
  std::vector<std::future<double>> futures;
  futures.reserve(static_cast<std::size_t>(config.repetitions));
  for (int rep = 0; rep < config.repetitions; ++rep) {
    futures.push_back(std::async(std::launch::async, [&, rep]() {
      slots.acquire();
      struct Release {
        std::counting_semaphore<256>& s;
        ~Release() { s.release(); }
      } release{slots};
      std::string key = params + "#rep=" + std::to_string(rep);
      auto data = cache.impl().get(key, [&]() {
        return std::make_shared<const RepetitionData>(config, rep);
      });
      return run_mode_on(*data, config);
    }));
  }

  ExperimentResult result;
  result.mismatch = config.mismatch;
  result.mode = config.mode;
  result.config_digest = config_digest(config);
  result.per_run.reserve(futures.size());
  for (auto& f : futures) result.per_run.push_back(f.get());

  double mean = std::accumulate(result.per_run.begin(), result.per_run.end(),
                                0.0) /
                static_cast<double>(result.per_run.size());
  double var = 0.0;
  for (double a : result.per_run) var += (a - mean) * (a - mean);
  var /= static_cast<double>(result.per_run.size() - 1);
  result.mean_accuracy = mean;
  result.std_accuracy = std::sqrt(var);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

std::vector<SuiteRow> run_suite(std::span<const ExperimentConfig> configs) {
  RepetitionCache cache;
  return run_suite(configs, cache);
}

std::vector<SuiteRow> run_suite(std::span<const ExperimentConfig> configs,
                                RepetitionCache& cache) {
  if (configs.empty()) {
    throw ConfigError("run_suite: no experiment configs given");
  }
  std::vector<SuiteRow> rows;
  rows.reserve(configs.size());
  for (const ExperimentConfig& c : configs) {
    SuiteRow row;
    row.config = c;
    try {
      row.result = run_experiment(c, cache);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_table(std::span<const SuiteRow> rows) {
  std::size_t name_width = std::string("Experiment Type").size();
  for (const SuiteRow& row : rows) {
    name_width = std::max(name_width, row.config.mode.display_name().size());
  }
  std::ostringstream os;
  os << std::left;
  os.setf(std::ios::fixed);
  os.precision(2);
  os.width(static_cast<std::streamsize>(name_width));
  os << "Experiment Type";
  os << " | Accuracy\n";
  os << std::string(name_width, '-') << "-+----------------\n";
  for (const SuiteRow& row : rows) {
    os.width(static_cast<std::streamsize>(name_width));
    os << row.config.mode.display_name();
    if (row.result) {
      os << " | " << 100.0 * row.result->mean_accuracy << " +- "
         << 100.0 * row.result->std_accuracy << '\n';
    } else {
      os << " | FAILED: " << row.error << '\n';
    }
  }
  return os.str();
}

void save_config(const ExperimentConfig& config, std::ostream& out) {
  out << config_to_json(config).dump(2) << '\n';
}

ExperimentConfig load_config(std::istream& in) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw FormatError(FormatError::Kind::bad_field,
                      "experiment config is not valid JSON");
  }
  return config_from_json(j);
}

void save_result(const ExperimentResult& result, const ExperimentConfig& config,
                 std::ostream& out) {
  json j{{"format", "rfcal-result"},
         {"version", 1},
         {"mismatch", to_string(result.mismatch)},
         {"mode", mode_to_json(result.mode)},
         {"mode_display", result.mode.display_name()},
         {"mean_accuracy", result.mean_accuracy},
         {"std_accuracy", result.std_accuracy},
         {"per_run", result.per_run},
         {"wall_time_s", result.wall_time_s},
         {"config_digest", result.config_digest},
         {"config", config_to_json(config)}};
  out << j.dump(2) << '\n';
}

ExperimentResult load_result(std::istream& in) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "rfcal-result") {
    throw FormatError(FormatError::Kind::bad_field, "not a result file");
  }
  ExperimentResult r;
  r.mismatch = mismatch_from_string(j.at("mismatch").get<std::string>());
  r.mode = mode_from_json(j.at("mode"));
  r.mean_accuracy = j.at("mean_accuracy").get<double>();
  r.std_accuracy = j.at("std_accuracy").get<double>();
  r.per_run = j.at("per_run").get<std::vector<double>>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.config_digest = j.value("config_digest", "");
  return r;
}

}  // namespace rfcal
