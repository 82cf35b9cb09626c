#include <cmath>

#include "doctest.h"
#include "maxrf/common.hpp"
#include "maxrf/transform.hpp"

using namespace maxrf;

TEST_CASE("instance_normalize matches the hand-computed oracle") {
  const std::vector<double> x = {1, 2, 3};
  const auto out = instance_normalize(x);
  // mu=2, population sigma=sqrt(2/3)
  CHECK(out[0] == doctest::Approx(-1.22474487).epsilon(1e-8));
  CHECK(out[1] == doctest::Approx(0.0));
  CHECK(out[2] == doctest::Approx(1.22474487).epsilon(1e-8));
}

TEST_CASE("instance_normalize leaves standardized input unchanged") {
  const std::vector<double> x = {-1.22474487139159, 0.0, 1.22474487139159};
  const auto out = instance_normalize(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(out[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("instance_normalize zero-variance fallback") {
  const auto out = instance_normalize(std::vector<double>{5, 5, 5});
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("instance_normalize output has mean 0 and population std 1") {
  Rng rng(99);
  std::vector<double> x(512);
  for (auto& v : x) v = rng.next_unit() * 65000.0;
  const auto out = instance_normalize(x);
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= out.size();
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  var /= out.size();
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
}

TEST_CASE("instance_normalize is invariant to positive rescaling") {
  Rng rng(7);
  std::vector<double> x(256), scaled(256);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.next_unit() * 1000.0;
  for (const double c : {0.001, 0.5, 3.0, 1234.5}) {
    for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = c * x[i];
    const auto a = instance_normalize(x);
    const auto b = instance_normalize(scaled);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(a[i] - b[i]) < 1e-9);
    }
  }
}

TEST_CASE("fit_channel_stats population std with zero-variance substitution") {
  std::vector<Spectrum> train = {{"a", "c", 0, {0, 4, 7}}, {"b", "c", 0, {2, 4, 7}}};
  const auto stats = fit_channel_stats(train);
  CHECK(stats.means[0] == doctest::Approx(1.0));
  CHECK(stats.stds[0] == doctest::Approx(1.0));  // population std of {0,2}
  CHECK(stats.stds[1] == 1.0);                   // constant channel -> 1
  CHECK(stats.stds[2] == 1.0);

  // single-spectrum training set: every channel constant
  const auto solo = fit_channel_stats({{"a", "c", 0, {1, 2, 3}}});
  for (double s : solo.stds) CHECK(s == 1.0);

  CHECK_THROWS_AS(fit_channel_stats({}), DataError);
}

TEST_CASE("channel_normalize cases") {
  ChannelStats stats{{1.0, 2.0}, {1.0, 4.0}};
  SUBCASE("means map to zero") {
    const auto out = channel_normalize(std::vector<double>{1.0, 2.0}, stats);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);
  }
  SUBCASE("mean plus std maps to one") {
    const auto out = channel_normalize(std::vector<double>{2.0, 6.0}, stats);
    CHECK(out[0] == doctest::Approx(1.0));
    CHECK(out[1] == doctest::Approx(1.0));
  }
  SUBCASE("derived example") {
    const auto out = channel_normalize(std::vector<double>{3.0, 2.0}, stats);
    CHECK(out[0] == doctest::Approx(2.0));
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(channel_normalize(std::vector<double>{1.0}, stats), DataError);
  }
}

TEST_CASE("channel_normalize centers the training set per channel") {
  Rng rng(3);
  std::vector<Spectrum> train;
  for (int i = 0; i < 10; ++i) {
    Spectrum s{"r" + std::to_string(i), "c", 0.0, {}};
    for (int c = 0; c < 32; ++c) s.channels.push_back(rng.next_unit() * 100.0);
    train.push_back(std::move(s));
  }
  const auto stats = fit_channel_stats(train);
  std::vector<double> colsum(32, 0.0);
  for (const auto& s : train) {
    const auto out = channel_normalize(s.channels, stats);
    for (int c = 0; c < 32; ++c) colsum[c] += out[c];
  }
  for (int c = 0; c < 32; ++c) CHECK(std::abs(colsum[c] / 10.0) < 1e-9);
}

TEST_CASE("log_transform values and monotonicity") {
  const std::vector<double> x = {0.0, std::exp(1.0) - 1.0, 65000.0};
  const auto out = log_transform(x);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(std::log(65001.0)).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(11.0822).epsilon(1e-5));
  CHECK(out[0] <= out[1]);
  CHECK(out[1] <= out[2]);
  CHECK_THROWS_AS(log_transform(std::vector<double>{-0.5}), DataError);
}

TEST_CASE("target normalization fit/apply/invert") {
  const std::vector<double> values = {0.0, 2.0};
  const auto n = fit_target_norm(values);
  CHECK(n.mean == doctest::Approx(1.0));
  CHECK(n.std == doctest::Approx(1.0));
  CHECK(apply_target_norm(2.0, n) == doctest::Approx(1.0));
  CHECK(invert_target_norm(1.0, n) == doctest::Approx(2.0));

  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const double v = rng.next_unit() * 100.0;
    const double rt = invert_target_norm(apply_target_norm(v, n), n);
    CHECK(std::abs(rt - v) <= 1e-12 * std::max(1.0, std::abs(v)));
  }

  CHECK_THROWS_AS(fit_target_norm(std::vector<double>{3.0, 3.0, 3.0}), DataError);
  CHECK_THROWS_AS(fit_target_norm(std::vector<double>{3.0}), DataError);
}
