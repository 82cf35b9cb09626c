#pragma once

#include <span>
#include <string>
#include <vector>

#include "maxrf/dataset.hpp"

namespace maxrf {

enum class TransformKind { InstanceNorm, ChannelNorm, LogTransform };

std::string transform_name(TransformKind k);
TransformKind parse_transform(const std::string& name);

// Per-channel statistics fitted on the training set; stds with zero variance
// are stored as 1.
struct ChannelStats {
  std::vector<double> means;
  std::vector<double> stds;
};

// Mean/std of the training targets, used to normalize regression labels.
struct TargetNorm {
  double mean = 0.0;
  double std = 1.0;
};

// (x - mean) / std per spectrum, population statistics. A zero-variance
// spectrum falls back to std = 1 (all-zero output).
std::vector<double> instance_normalize(std::span<const double> x);

ChannelStats fit_channel_stats(const std::vector<Spectrum>& train);
std::vector<double> channel_normalize(std::span<const double> x,
                                      const ChannelStats& stats);

// ln(x + 1) per channel; rejects negative input.
std::vector<double> log_transform(std::span<const double> x);

TargetNorm fit_target_norm(std::span<const double> values);
double apply_target_norm(double v, const TargetNorm& n);
double invert_target_norm(double z, const TargetNorm& n);

// Apply the selected spectral transform (stats required for ChannelNorm).
std::vector<double> apply_transform(std::span<const double> x, TransformKind kind,
                                    const ChannelStats* stats);

// Standalone inspection CSV: channel_index,mean,std
void save_channel_stats_csv(const ChannelStats& stats, const std::string& path);

}  // namespace maxrf
