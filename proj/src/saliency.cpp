#include "maxrf/saliency.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace maxrf {

EmissionLineTable load_emission_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open emission line table: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  EmissionLineTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    EmissionLine e;
    std::string energy;
    if (!std::getline(ss, e.element, ',') || !std::getline(ss, e.line, ',') ||
        !std::getline(ss, energy)) {
      throw DataError(path + ": malformed row at line " + std::to_string(line_no));
    }
    e.energy_kev = std::stod(energy);
    if (!(e.energy_kev > 0.0 && e.energy_kev <= 41.0)) {
      throw DataError(path + ": energy out of instrument range at line " +
                      std::to_string(line_no));
    }
    table.push_back(std::move(e));
  }
  return table;
}

double channel_to_energy(int channel_index, int n_channels) {
  if (channel_index < 0 || channel_index >= n_channels) {
    throw DataError("channel_to_energy: index " + std::to_string(channel_index) +
                    " out of range [0, " + std::to_string(n_channels) + ")");
  }
  return (channel_index + 0.5) * 0.020;
}

SaliencyMap saliency_map(const Checkpoint& ckpt,
                         const std::vector<LabeledSpectrum>& batch, Task task) {
  if (!ckpt.target_norm) {
    throw DataError("saliency_map: checkpoint has no regression head (pretrain-only)");
  }
  if (batch.empty()) throw DataError("saliency_map: empty batch");
  const ChannelStats* stats = ckpt.channel_stats ? &*ckpt.channel_stats : nullptr;

  SaliencyMap map;
  map.batch_size = static_cast<int>(batch.size());
  map.task = task_name(task);
  map.values.assign(ckpt.model.n_channels, 0.0);

  ModelGradients scratch = zero_parameters(ckpt.model);
  for (const auto& p : batch) {
    const auto x = apply_transform(p.spectrum->channels, ckpt.transform_kind, stats);
    const RegressionPass pass = regression_forward(x, ckpt.params, ckpt.model);
    const double target = apply_target_norm(p.value_wt_pct, *ckpt.target_norm);
    // per-spectrum MSE is (pred - target)^2
    const double d_pred = 2.0 * (pass.prediction - target);
    Eigen::VectorXd input_grad;
    regression_backward(pass, d_pred, ckpt.params, ckpt.model, scratch, &input_grad);
    for (int i = 0; i < ckpt.model.n_channels; ++i) {
      map.values[static_cast<std::size_t>(i)] += std::abs(input_grad(i));
    }
  }
  for (double& v : map.values) v /= static_cast<double>(batch.size());

  map.energy_axis_kev.resize(ckpt.model.n_channels);
  for (int i = 0; i < ckpt.model.n_channels; ++i) {
    map.energy_axis_kev[static_cast<std::size_t>(i)] =
        channel_to_energy(i, ckpt.model.n_channels);
  }
  return map;
}

std::vector<PeakMatch> annotate_peaks(const SaliencyMap& map,
                                      const EmissionLineTable& lines, int top_k,
                                      double window_kev) {
  if (lines.empty()) throw DataError("annotate_peaks: empty emission line table");
  if (top_k < 1) throw DataError("annotate_peaks: top_k must be >= 1");
  if (!(window_kev > 0.0)) throw DataError("annotate_peaks: window must be positive");

  // strict local maxima; plateaus take the leftmost index
  std::vector<PeakMatch> peaks;
  const auto& v = map.values;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] > v[i + 1]) {
      peaks.push_back({static_cast<int>(i), map.energy_axis_kev[i], v[i], {}});
    }
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const PeakMatch& a, const PeakMatch& b) { return a.value > b.value; });
  if (static_cast<int>(peaks.size()) > top_k) peaks.resize(top_k);

  for (auto& peak : peaks) {
    for (const auto& line : lines) {
      if (std::abs(peak.energy_kev - line.energy_kev) <= window_kev) {
        peak.matched_lines.push_back(line.element + " " + line.line);
      }
      if (std::abs(peak.energy_kev - 2.0 * line.energy_kev) <= window_kev) {
        peak.matched_lines.push_back(line.element + " " + line.line + " sum");
      }
    }
  }
  return peaks;
}

void save_saliency_csv(const SaliencyMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write saliency csv: " + path);
  out.precision(17);
  out << "channel,energy_keV,saliency\n";
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    out << i << ',' << map.energy_axis_kev[i] << ',' << map.values[i] << "\n";
  }
}

}  // namespace maxrf
