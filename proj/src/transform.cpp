#include "maxrf/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "maxrf/common.hpp"

namespace maxrf {

std::string transform_name(TransformKind k) {
  switch (k) {
    case TransformKind::InstanceNorm: return "instance";
    case TransformKind::ChannelNorm: return "channel";
    case TransformKind::LogTransform: return "log";
  }
  return "instance";
}

TransformKind parse_transform(const std::string& name) {
  if (name == "instance") return TransformKind::InstanceNorm;
  if (name == "channel") return TransformKind::ChannelNorm;
  if (name == "log") return TransformKind::LogTransform;
  throw DataError("unknown transform '" + name + "' (expected instance, channel, or log)");
}

std::vector<double> instance_normalize(std::span<const double> x) {
  if (x.empty()) throw DataError("instance_normalize: empty spectrum");
  if (!all_finite(x)) throw NumericError("instance_normalize: non-finite input");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  double sd = std::sqrt(var);
  if (sd == 0.0) {
    std::fprintf(stderr, "instance_normalize: zero-variance spectrum, using std=1\n");
    sd = 1.0;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

ChannelStats fit_channel_stats(const std::vector<Spectrum>& train) {
  if (train.empty()) throw DataError("fit_channel_stats: empty training set");
  const std::size_t n = train.front().channels.size();
  ChannelStats stats;
  stats.means.assign(n, 0.0);
  stats.stds.assign(n, 0.0);
  const double m = static_cast<double>(train.size());
  for (const auto& s : train) {
    if (s.channels.size() != n) {
      throw DataError("fit_channel_stats: inconsistent channel counts");
    }
    for (std::size_t i = 0; i < n; ++i) stats.means[i] += s.channels[i];
  }
  for (std::size_t i = 0; i < n; ++i) stats.means[i] /= m;
  for (const auto& s : train) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = s.channels[i] - stats.means[i];
      stats.stds[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    stats.stds[i] = std::sqrt(stats.stds[i] / m);
    if (stats.stds[i] == 0.0) stats.stds[i] = 1.0;
  }
  return stats;
}

std::vector<double> channel_normalize(std::span<const double> x,
                                      const ChannelStats& stats) {
  if (x.size() != stats.means.size()) {
    throw DataError("channel_normalize: length mismatch between input and stats");
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (x[i] - stats.means[i]) / stats.stds[i];
  }
  return out;
}

std::vector<double> log_transform(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0)) {
      throw DataError("log_transform: negative count at channel " + std::to_string(i));
    }
    out[i] = std::log1p(x[i]);
  }
  return out;
}

TargetNorm fit_target_norm(std::span<const double> values) {
  if (values.size() < 2) throw DataError("fit_target_norm: need at least 2 values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  if (var == 0.0) {
    throw DataError("fit_target_norm: zero target variance, task untrainable");
  }
  return TargetNorm{mean, std::sqrt(var)};
}

double apply_target_norm(double v, const TargetNorm& norm) {
  return (v - norm.mean) / norm.std;
}

double invert_target_norm(double z, const TargetNorm& norm) {
  return z * norm.std + norm.mean;
}

std::vector<double> apply_transform(std::span<const double> x, TransformKind kind,
                                    const ChannelStats* stats) {
  switch (kind) {
    case TransformKind::InstanceNorm:
      return instance_normalize(x);
    case TransformKind::ChannelNorm:
      if (stats == nullptr) throw DataError("channel transform requires fitted stats");
      return channel_normalize(x, *stats);
    case TransformKind::LogTransform:
      return log_transform(x);
  }
  throw DataError("apply_transform: bad kind");
}

void save_channel_stats_csv(const ChannelStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write channel stats file: " + path);
  out << "channel_index,mean,std\n";
  for (std::size_t i = 0; i < stats.means.size(); ++i) {
    out << i << ',' << stats.means[i] << ',' << stats.stds[i] << "\n";
  }
}

}  // namespace maxrf
