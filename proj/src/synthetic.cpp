#include "maxrf/synthetic.hpp"

#include <cmath>

#include "maxrf/common.hpp"

namespace maxrf {

namespace {

struct Generated {
  Spectrum spectrum;
  double label_wt_pct = 0.0;
};

Generated generate_one(int index, std::uint64_t seed, const SyntheticConfig& cfg) {
  Rng rng(derive_seed(seed, 0x5E9DULL, static_cast<std::uint64_t>(index)));
  Generated g;
  g.spectrum.record_id = "syn-" + std::to_string(index);
  g.spectrum.core_id = "synthetic";
  g.spectrum.depth_cm = index * 1.0;
  std::vector<double>& y = g.spectrum.channels;
  y.assign(cfg.n_channels, 20.0);  // flat baseline

  auto add_peak = [&](double center, double sigma, double amplitude) {
    const int lo = std::max(0, static_cast<int>(center - 5 * sigma));
    const int hi = std::min(cfg.n_channels - 1, static_cast<int>(center + 5 * sigma));
    for (int i = lo; i <= hi; ++i) {
      const double z = (i - center) / sigma;
      y[static_cast<std::size_t>(i)] += amplitude * std::exp(-0.5 * z * z);
    }
  };

  const int n_extra =
      cfg.min_peaks + static_cast<int>(rng.next_below(
                          static_cast<std::uint64_t>(cfg.max_peaks - cfg.min_peaks + 1)));
  double extra_area = 0.0;
  for (int p = 0; p < n_extra; ++p) {
    double center = rng.next_unit() * cfg.n_channels;
    while (std::abs(center - cfg.target_peak_center) < cfg.exclusion_channels) {
      center = rng.next_unit() * cfg.n_channels;
    }
    const double sigma = cfg.min_sigma + rng.next_unit() * (cfg.max_sigma - cfg.min_sigma);
    const double amplitude = cfg.min_amp + rng.next_unit() * (cfg.max_amp - cfg.min_amp);
    add_peak(center, sigma, amplitude);
    extra_area += amplitude * sigma;
  }

  // the designated peak; its integrated area over the total peak area of the
  // spectrum is the label, the synthetic analogue of a relative
  // concentration in wt%
  const double t_lo = cfg.target_amp_max > 0.0 ? cfg.target_amp_min : cfg.min_amp;
  const double t_hi = cfg.target_amp_max > 0.0 ? cfg.target_amp_max : cfg.max_amp;
  const double target_amp = t_lo + rng.next_unit() * (t_hi - t_lo);
  double target_center = cfg.target_peak_center;
  if (cfg.target_jitter_channels > 0) {
    target_center += (2.0 * rng.next_unit() - 1.0) * cfg.target_jitter_channels;
  }
  add_peak(target_center, cfg.target_peak_sigma, target_amp);
  const double target_area = target_amp * cfg.target_peak_sigma;
  g.label_wt_pct = 100.0 * target_area / (target_area + extra_area);

  for (auto& v : y) {
    v += rng.next_normal() * cfg.noise_std;
    if (v < 0.0) v = 0.0;
  }
  return g;
}

}  // namespace

std::vector<Spectrum> synth_spectra(int n, std::uint64_t seed,
                                    const SyntheticConfig& cfg) {
  std::vector<Spectrum> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(generate_one(i, seed, cfg).spectrum);
  return out;
}

std::vector<GeochemLabel> synth_labels(int n, std::uint64_t seed, Task task,
                                       const SyntheticConfig& cfg) {
  std::vector<GeochemLabel> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Generated g = generate_one(i, seed, cfg);
    out.push_back({g.spectrum.record_id, task, g.label_wt_pct});
  }
  return out;
}

}  // namespace maxrf
