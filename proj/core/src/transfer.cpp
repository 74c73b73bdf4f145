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

#include "rfcal/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace rfcal {

SettingTransferFunction::SettingTransferFunction(
    std::vector<DepthTransfer> per_depth, std::string from_label,
    std::string to_label, FrequencyGrid grid)
    : per_depth_(std::move(per_depth)),
      from_label_(std::move(from_label)),
      to_label_(std::move(to_label)),
      grid_(grid) {
  if (per_depth_.size() != static_cast<std::size_t>(kDepthCount)) {
    throw ConfigError("SettingTransferFunction needs " +
                      std::to_string(kDepthCount) + " depth entries, got " +
                      std::to_string(per_depth_.size()));
  }
}

const DepthTransfer& SettingTransferFunction::at_depth(int depth_index) const {
  if (depth_index < 0 || depth_index >= kDepthCount) {
    throw GeometryError("depth index out of range: " +
                        std::to_string(depth_index));
  }
  return per_depth_[static_cast<std::size_t>(depth_index)];
}

std::vector<double> compute_gamma(const PowerSpectrum& w_train,
                                  const PowerSpectrum& w_test) {
  if (!(w_train.grid == w_test.grid)) {
    throw ConfigError("compute_gamma: spectra are on different grids");
  }
  std::vector<double> gamma(w_train.values.size());
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    gamma[k] = std::sqrt(w_test.values[k] / std::max(w_train.values[k], 1e-30));
  }
  return gamma;
}

std::vector<double> wiener_train(std::span<const double> gamma,
                                 const SnrProfile& snr) {
  if (gamma.size() != snr.snr.size()) {
    throw ConfigError("wiener_train: gamma/snr length mismatch");
  }
  std::vector<double> out(gamma.size());
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    double g = std::max(gamma[k], kGammaClamp);
    double s = std::max(snr.snr[k], kSnrClamp);
    double inv_g = 1.0 / g;
    out[k] = inv_g / (inv_g * inv_g + 1.0 / s);
  }
  return out;
}

std::vector<double> wiener_test(std::span<const double> gamma,
                                const SnrProfile& snr) {
  if (gamma.size() != snr.snr.size()) {
    throw ConfigError("wiener_test: gamma/snr length mismatch");
  }
  std::vector<double> out(gamma.size());
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    double g = std::max(gamma[k], kGammaClamp);
    double s = std::max(snr.snr[k], kSnrClamp);
    out[k] = g / (g * g + 1.0 / s);
  }
  return out;
}

SettingTransferFunction build_calibration(std::span<const RFFrame> cal_train,
                                          std::span<const RFFrame> cal_test,
                                          const CalibrationConfig& config) {
  if (cal_train.empty() || cal_test.empty()) {
    throw ConfigError("build_calibration: calibration frame lists must be nonempty");
  }
  if (cal_train.front().axial_len() != cal_test.front().axial_len() ||
      cal_train.front().lateral_len() != cal_test.front().lateral_len()) {
    throw GeometryError("build_calibration: geometry mismatch between sides");
  }

  DepthSpectra train_spectra = compute_depth_spectra(cal_train);
  DepthSpectra test_spectra = compute_depth_spectra(cal_test);

  const FrequencyGrid grid = train_spectra.per_depth[0].grid;
  const double fs = cal_train.front().settings().sampling_rate_mhz;
  std::vector<double> freqs(static_cast<std::size_t>(grid.n_bins));
  for (int k = 0; k < grid.n_bins; ++k) freqs[k] = grid.freq_mhz(k);

  std::vector<DepthTransfer> per_depth;
  per_depth.reserve(kDepthCount);
  for (int d = 0; d < kDepthCount; ++d) {
    const PowerSpectrum& wt = train_spectra.per_depth[d];
    const PowerSpectrum& we = test_spectra.per_depth[d];
    DepthTransfer entry{
        .gamma = compute_gamma(wt, we),
        .gamma_wiener_train = {},
        .gamma_wiener_test = {},
        .snr = estimate_snr(wt, we, config.snr_mode),
        .fir_train = FIRFilter::identity(config.ntaps, fs),
        .fir_test = FIRFilter::identity(config.ntaps, fs),
    };
    entry.gamma_wiener_train = wiener_train(entry.gamma, entry.snr);
    entry.gamma_wiener_test = wiener_test(entry.gamma, entry.snr);
    entry.fir_train =
        design_fir(freqs, entry.gamma_wiener_train, config.ntaps, fs);
    entry.fir_test =
        design_fir(freqs, entry.gamma_wiener_test, config.ntaps, fs);
    per_depth.push_back(std::move(entry));
  }

  return SettingTransferFunction(std::move(per_depth),
                                 train_spectra.settings_label,
                                 test_spectra.settings_label, grid);
}

Patch calibrate_patch(const Patch& patch, const SettingTransferFunction& stf,
                      CalibrationMode mode) {
  const DepthTransfer& entry = stf.at_depth(patch.depth_index());
  const FIRFilter& fir =
      mode == CalibrationMode::train_time ? entry.fir_train : entry.fir_test;
  Patch out = apply_filter_axial(patch, fir);
  out.set_settings_label(mode == CalibrationMode::train_time ? stf.to_label()
                                                             : stf.from_label());
  return out;
}

namespace {

nlohmann::json fir_to_json(const FIRFilter& f) {
  nlohmann::json gains = nlohmann::json::array();
  for (const auto& [freq, gain] : f.design_gains()) {
    gains.push_back({freq, gain});
  }
  return nlohmann::json{
      {"taps", std::vector<double>(f.taps().begin(), f.taps().end())},
      {"sampling_rate_mhz", f.sampling_rate_mhz()},
      {"design_gains", gains}};
}

FIRFilter fir_from_json(const nlohmann::json& j) {
  std::vector<std::pair<double, double>> gains;
  for (const auto& g : j.at("design_gains")) {
    gains.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
  }
  return FIRFilter(j.at("taps").get<std::vector<double>>(),
                   j.at("sampling_rate_mhz").get<double>(), std::move(gains));
}

nlohmann::json grid_to_json(const FrequencyGrid& g) {
  return {{"start_mhz", g.start_mhz}, {"step_mhz", g.step_mhz},
          {"n_bins", g.n_bins}};
}

FrequencyGrid grid_from_json(const nlohmann::json& j) {
  FrequencyGrid g;
  g.start_mhz = j.at("start_mhz").get<double>();
  g.step_mhz = j.at("step_mhz").get<double>();
  g.n_bins = j.at("n_bins").get<int>();
  return g;
}

}  // namespace

void save_stf(const SettingTransferFunction& stf, std::ostream& out) {
  nlohmann::json depths = nlohmann::json::array();
  for (int d = 0; d < kDepthCount; ++d) {
    const DepthTransfer& e = stf.at_depth(d);
    depths.push_back({{"gamma", e.gamma},
                      {"gamma_wiener_train", e.gamma_wiener_train},
                      {"gamma_wiener_test", e.gamma_wiener_test},
                      {"snr", e.snr.snr},
                      {"noise_floor", e.snr.noise_floor},
                      {"fir_train", fir_to_json(e.fir_train)},
                      {"fir_test", fir_to_json(e.fir_test)}});
  }
  nlohmann::json doc{{"format", "rfcal-stf"},
                     {"version", 1},
                     {"from_label", stf.from_label()},
                     {"to_label", stf.to_label()},
                     {"grid", grid_to_json(stf.grid())},
                     {"per_depth", depths}};
  out << doc.dump(2) << '\n';
}

SettingTransferFunction load_stf(std::istream& in) {
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || doc.value("format", "") != "rfcal-stf") {
    throw FormatError(FormatError::Kind::bad_field,
                      "not a setting-transfer-function file");
  }
  try {
    FrequencyGrid grid = grid_from_json(doc.at("grid"));
    std::vector<DepthTransfer> per_depth;
    for (const auto& e : doc.at("per_depth")) {
      SnrProfile snr;
      snr.grid = grid;
      snr.snr = e.at("snr").get<std::vector<double>>();
      snr.noise_floor = e.at("noise_floor").get<double>();
      per_depth.push_back(DepthTransfer{
          .gamma = e.at("gamma").get<std::vector<double>>(),
          .gamma_wiener_train =
              e.at("gamma_wiener_train").get<std::vector<double>>(),
          .gamma_wiener_test =
              e.at("gamma_wiener_test").get<std::vector<double>>(),
          .snr = std::move(snr),
          .fir_train = fir_from_json(e.at("fir_train")),
          .fir_test = fir_from_json(e.at("fir_test")),
      });
    }
    return SettingTransferFunction(std::move(per_depth),
                                   doc.at("from_label").get<std::string>(),
                                   doc.at("to_label").get<std::string>(), grid);
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(FormatError::Kind::bad_field,
                      std::string("bad transfer-function file: ") + ex.what());
  }
}

void write_plot_csv(const SettingTransferFunction& stf,
                    const DepthSpectra& train_spectra,
                    const DepthSpectra& test_spectra, int depth_index,
                    std::ostream& out) {
  const DepthTransfer& e = stf.at_depth(depth_index);
  const FrequencyGrid& grid = stf.grid();
  std::vector<double> freqs(static_cast<std::size_t>(grid.n_bins));
  for (int k = 0; k < grid.n_bins; ++k) freqs[k] = grid.freq_mhz(k);
  auto resp = frequency_response(e.fir_train, freqs);

  out << "freq_mhz,w_train,w_test,gamma,gamma_wiener,fir_response_magnitude\n";
  for (int k = 0; k < grid.n_bins; ++k) {
    out << freqs[k] << ','
        << train_spectra.per_depth[depth_index].values[k] << ','
        << test_spectra.per_depth[depth_index].values[k] << ',' << e.gamma[k]
        << ',' << e.gamma_wiener_train[k] << ',' << std::abs(resp[k]) << '\n';
  }
}

}  // namespace rfcal
