#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "maxrf/saliency.hpp"
#include "maxrf/synthetic.hpp"

using namespace maxrf;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.n_channels = 64;
  cfg.patch_size = 16;
  cfg.embed_dim = 16;
  cfg.encoder_depth = 1;
  cfg.encoder_heads = 2;
  cfg.decoder_dim = 16;
  cfg.decoder_depth = 1;
  cfg.decoder_heads = 2;
  cfg.mlp_ratio = 2.0;
  return cfg;
}

Checkpoint tiny_checkpoint(std::uint64_t seed) {
  Checkpoint ckpt;
  ckpt.model = tiny_config();
  Rng rng(seed);
  ckpt.params = init_parameters(ckpt.model, rng);
  ckpt.target_norm = TargetNorm{50.0, 20.0};
  ckpt.task = task_name(Task::CaCO3);
  return ckpt;
}

Spectrum random_spectrum(const std::string& id, std::uint64_t seed, int n) {
  Spectrum s{id, "core", 0.0, {}};
  Rng rng(seed);
  for (int i = 0; i < n; ++i) s.channels.push_back(rng.next_unit() * 500.0);
  return s;
}

struct TempPath {
  std::string path;
  explicit TempPath(std::string p) : path(std::move(p)) {}
  ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("channel_to_energy bin centers") {
  CHECK(channel_to_energy(0) == doctest::Approx(0.010));
  CHECK(channel_to_energy(499) == doctest::Approx(9.990));
  CHECK(channel_to_energy(184) == doctest::Approx(3.690));
  CHECK(channel_to_energy(2047) == doctest::Approx(40.950));
  CHECK_THROWS_AS(channel_to_energy(-1), DataError);
  CHECK_THROWS_AS(channel_to_energy(2048), DataError);
}

TEST_CASE("load_emission_lines parses and validates") {
  TempPath tmp("lines_test.csv");
  {
    std::ofstream out(tmp.path);
    out << "element,line,energy_keV\n";
    out << "Ca,Ka,3.690\n";
    out << "Fe,Ka,6.403\n";
  }
  const auto table = load_emission_lines(tmp.path);
  REQUIRE(table.size() == 2);
  CHECK(table[0].element == "Ca");
  CHECK(table[0].line == "Ka");
  CHECK(table[0].energy_kev == doctest::Approx(3.690));
  CHECK(table[1].element == "Fe");

  {
    std::ofstream out(tmp.path);
    out << "element,line,energy_keV\nU,Ka,98.4\n";
  }
  CHECK_THROWS_AS(load_emission_lines(tmp.path), DataError);
  CHECK_THROWS_AS(load_emission_lines("no_such_file.csv"), DataError);
}

TEST_CASE("saliency of a zero-weight head is identically zero") {
  Checkpoint ckpt = tiny_checkpoint(3);
  ckpt.params.head.weight.setZero();
  ckpt.params.head.bias.setZero();

  const auto s = random_spectrum("r0", 10, 64);
  const auto map = saliency_map(ckpt, {{&s, 42.0}}, Task::CaCO3);
  REQUIRE(map.values.size() == 64);
  CHECK(map.batch_size == 1);
  for (double v : map.values) CHECK(v == 0.0);
}

TEST_CASE("saliency_map refuses a pretrain-only checkpoint") {
  Checkpoint ckpt = tiny_checkpoint(3);
  ckpt.target_norm.reset();
  const auto s = random_spectrum("r0", 10, 64);
  CHECK_THROWS_AS(saliency_map(ckpt, {{&s, 42.0}}, Task::CaCO3), DataError);
  ckpt.target_norm = TargetNorm{50.0, 20.0};
  CHECK_THROWS_AS(saliency_map(ckpt, {}, Task::CaCO3), DataError);
}

TEST_CASE("saliency matches a finite-difference oracle on the transformed input") {
  const Checkpoint ckpt = tiny_checkpoint(7);
  const auto s = random_spectrum("r0", 21, 64);
  const double label = 61.0;
  const auto map = saliency_map(ckpt, {{&s, label}}, Task::CaCO3);

  const auto x0 = apply_transform(s.channels, ckpt.transform_kind, nullptr);
  const double target = apply_target_norm(label, *ckpt.target_norm);
  const auto loss_at = [&](const std::vector<double>& x) {
    const auto pass = regression_forward(x, ckpt.params, ckpt.model);
    const double d = pass.prediction - target;
    return d * d;
  };

  const double h = 1e-4;
  for (int i = 0; i < 64; i += 5) {
    auto plus = x0;
    auto minus = x0;
    plus[static_cast<std::size_t>(i)] += h;
    minus[static_cast<std::size_t>(i)] -= h;
    const double fd = std::abs((loss_at(plus) - loss_at(minus)) / (2.0 * h));
    const double got = map.values[static_cast<std::size_t>(i)];
    CHECK(std::abs(got - fd) <= 1e-4 * (1.0 + std::abs(got) + std::abs(fd)));
  }
}

TEST_CASE("saliency of a batch is the mean of per-spectrum maps") {
  const Checkpoint ckpt = tiny_checkpoint(13);
  const auto a = random_spectrum("a", 1, 64);
  const auto b = random_spectrum("b", 2, 64);
  const auto c = random_spectrum("c", 3, 64);
  const std::vector<LabeledSpectrum> batch = {{&a, 20.0}, {&b, 55.0}, {&c, 80.0}};

  const auto whole = saliency_map(ckpt, batch, Task::CaCO3);
  CHECK(whole.batch_size == 3);
  std::vector<double> avg(64, 0.0);
  for (const auto& p : batch) {
    const auto one = saliency_map(ckpt, {p}, Task::CaCO3);
    for (int i = 0; i < 64; ++i) avg[static_cast<std::size_t>(i)] += one.values[static_cast<std::size_t>(i)] / 3.0;
  }
  for (int i = 0; i < 64; ++i) {
    CHECK(whole.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(avg[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("annotate_peaks finds the calcium line and its sum peak") {
  EmissionLineTable lines = {{"Ca", "Ka", 3.690}, {"Fe", "Ka", 6.403}};

  SaliencyMap map;
  map.values.assign(2048, 0.0);
  map.energy_axis_kev.resize(2048);
  for (int i = 0; i < 2048; ++i) {
    map.energy_axis_kev[static_cast<std::size_t>(i)] = channel_to_energy(i);
  }
  // primary spike at 3.69 keV (channel 184) plus a weaker one at the doubled
  // energy, the classic pile-up artifact
  map.values[184] = 10.0;
  map.values[368] = 4.0;

  const auto peaks = annotate_peaks(map, lines, 5, 0.05);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].channel == 184);
  CHECK(peaks[0].energy_kev == doctest::Approx(3.690));
  REQUIRE(peaks[0].matched_lines.size() == 1);
  CHECK(peaks[0].matched_lines[0] == "Ca Ka");
  CHECK(peaks[1].channel == 368);
  REQUIRE(peaks[1].matched_lines.size() == 1);
  CHECK(peaks[1].matched_lines[0] == "Ca Ka sum");

  // top_k truncation keeps the strongest peak only
  const auto top1 = annotate_peaks(map, lines, 1, 0.05);
  REQUIRE(top1.size() == 1);
  CHECK(top1[0].channel == 184);

  // a strictly increasing map has no interior local maximum
  SaliencyMap ramp;
  ramp.values.resize(64);
  ramp.energy_axis_kev.resize(64);
  for (int i = 0; i < 64; ++i) {
    ramp.values[static_cast<std::size_t>(i)] = i;
    ramp.energy_axis_kev[static_cast<std::size_t>(i)] = channel_to_energy(i);
  }
  CHECK(annotate_peaks(ramp, lines, 5, 0.05).empty());

  CHECK_THROWS_AS(annotate_peaks(map, {}, 5, 0.05), DataError);
  CHECK_THROWS_AS(annotate_peaks(map, lines, 0, 0.05), DataError);
  CHECK_THROWS_AS(annotate_peaks(map, lines, 5, 0.0), DataError);
}

TEST_CASE("save_saliency_csv writes one row per channel") {
  SaliencyMap map;
  map.values = {0.5, 1.5, 0.25};
  map.energy_axis_kev = {0.01, 0.03, 0.05};
  TempPath tmp("saliency_test.csv");
  save_saliency_csv(map, tmp.path);

  std::ifstream in(tmp.path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "channel,energy_keV,saliency");
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);
}
