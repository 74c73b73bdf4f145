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

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rfcal/experiment.hpp"
#include "rfcal/patches.hpp"

namespace rfcal {
namespace {

struct Series {
  std::string name;
  std::string color;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::string y_label;
  std::vector<Series> series;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

/// One x/y panel with axes, ticks, polylines and a legend.
void render_panel(std::ostringstream& svg, const Panel& panel,
                  const std::vector<double>& x, double ox, double oy,
                  double width, double height) {
  const double ml = 52, mr = 10, mt = 28, mb = 34;
  const double px = ox + ml, py = oy + mt;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_min = x.front(), x_max = x.back();
  double y_min = 0.0, y_max = 0.0;
  bool first = true;
  for (const Series& s : panel.series) {
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      if (first) {
        y_min = y_max = v;
        first = false;
      } else {
        y_min = std::min(y_min, v);
        y_max = std::max(y_max, v);
      }
    }
  }
  if (y_max <= y_min) y_max = y_min + 1.0;
  double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  auto map_x = [&](double v) {
    return px + (v - x_min) / (x_max - x_min) * pw;
  };
  auto map_y = [&](double v) {
    return py + ph - (v - y_min) / (y_max - y_min) * ph;
  };

  svg << "<rect x='" << px << "' y='" << py << "' width='" << pw
      << "' height='" << ph << "' fill='none' stroke='#444'/>\n";
  svg << "<text x='" << px + pw / 2 << "' y='" << oy + 16
      << "' text-anchor='middle' font-size='13' font-weight='bold'>"
      << panel.title << "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    double xv = x_min + (x_max - x_min) * i / 4.0;
    double yv = y_min + (y_max - y_min) * i / 4.0;
    double gx = map_x(xv), gy = map_y(yv);
    svg << "<line x1='" << gx << "' y1='" << py + ph << "' x2='" << gx
        << "' y2='" << py + ph + 4 << "' stroke='#444'/>\n";
    svg << "<text x='" << gx << "' y='" << py + ph + 16
        << "' text-anchor='middle' font-size='10'>" << fmt(xv) << "</text>\n";
    svg << "<line x1='" << px - 4 << "' y1='" << gy << "' x2='" << px
        << "' y2='" << gy << "' stroke='#444'/>\n";
    svg << "<text x='" << px - 6 << "' y='" << gy + 3
        << "' text-anchor='end' font-size='10'>" << fmt(yv) << "</text>\n";
  }
  svg << "<text x='" << px + pw / 2 << "' y='" << py + ph + 30
      << "' text-anchor='middle' font-size='11'>frequency (MHz)</text>\n";
  svg << "<text x='" << ox + 14 << "' y='" << py + ph / 2
      << "' text-anchor='middle' font-size='11' transform='rotate(-90 "
      << ox + 14 << ' ' << py + ph / 2 << ")'>" << panel.y_label
      << "</text>\n";

  double legend_y = py + 12;
  for (const Series& s : panel.series) {
    svg << "<polyline fill='none' stroke='" << s.color
        << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = s.y[i];
      if (!std::isfinite(v)) v = y_min;
      svg << map_x(x[i]) << ',' << map_y(v) << ' ';
    }
    svg << "'/>\n";
    svg << "<line x1='" << px + pw - 120 << "' y1='" << legend_y << "' x2='"
        << px + pw - 100 << "' y2='" << legend_y << "' stroke='" << s.color
        << "' stroke-width='1.5'/>\n";
    svg << "<text x='" << px + pw - 96 << "' y='" << legend_y + 3
        << "' font-size='10'>" << s.name << "</text>\n";
    legend_y += 14;
  }
}

}  // namespace

int default_plot_depth() {
  // The calibration plots are taken near 2 cm.
  return nearest_depth_index(2.0, 40.0);
}

void emit_calibration_plots(const SettingTransferFunction& stf,
                            const DepthSpectra& train_spectra,
                            const DepthSpectra& test_spectra, int depth_index,
                            std::ostream& csv_out, std::ostream& svg_out) {
  if (depth_index < 0 || depth_index >= kDepthCount) {
    throw GeometryError("plot depth index out of range: " +
                        std::to_string(depth_index));
  }
  write_plot_csv(stf, train_spectra, test_spectra, depth_index, csv_out);

  const FrequencyGrid& grid = stf.grid();
  std::vector<double> freqs(static_cast<std::size_t>(grid.n_bins));
  for (int k = 0; k < grid.n_bins; ++k) freqs[k] = grid.freq_mhz(k);

  const DepthTransfer& entry = stf.at_depth(depth_index);
  auto resp = frequency_response(entry.fir_train, freqs);

  auto log_power = [](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = 10.0 * std::log10(std::max(v[i], 1e-30));
    }
    return out;
  };

  Panel left;
  left.title = "Calibration spectra (depth " + std::to_string(depth_index) +
               ", " + stf.from_label() + " vs " + stf.to_label() + ")";
  left.y_label = "power (dB)";
  left.series = {
      {"W_train", "#1f77b4",
       log_power(train_spectra.per_depth[depth_index].values)},
      {"W_test", "#d62728",
       log_power(test_spectra.per_depth[depth_index].values)},
  };

  Panel right;
  right.title = "Setting transfer function";
  right.y_label = "amplitude gain";
  std::vector<double> fir_mag(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    fir_mag[i] = std::abs(resp[i]);
  }
  right.series = {
      {"gamma", "#1f77b4", entry.gamma},
      {"gamma_wiener", "#d62728", entry.gamma_wiener_train},
      {"FIR response", "#2ca02c", fir_mag},
  };

  const double w = 960, h = 400;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w
      << "' height='" << h << "' viewBox='0 0 " << w << ' ' << h << "'>\n";
  svg << "<rect width='" << w << "' height='" << h << "' fill='white'/>\n";
  svg << "<g font-family='sans-serif'>\n";
  render_panel(svg, left, freqs, 0, 0, w / 2, h);
  render_panel(svg, right, freqs, w / 2, 0, w / 2, h);
  svg << "</g>\n</svg>\n";
  svg_out << svg.str();
}

}  // namespace rfcal
