#include "maxrf/patch_mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace maxrf {

void PatchGrid::validate() const {
  if (n_channels <= 0 || patch_size <= 0) {
    throw DataError("PatchGrid: dimensions must be positive");
  }
  if (n_channels % patch_size != 0) {
    throw DataError("PatchGrid: n_channels " + std::to_string(n_channels) +
                    " not divisible by patch_size " + std::to_string(patch_size));
  }
}

std::string MaskPlan::to_json_line() const {
  std::ostringstream os;
  os << "{\"n_patches\":" << n_patches << ",\"mask_ratio\":" << mask_ratio
     << ",\"seed\":" << seed << ",\"masked\":[";
  for (std::size_t i = 0; i < masked_indices.size(); ++i) {
    if (i) os << ',';
    os << masked_indices[i];
  }
  os << "]}";
  return os.str();
}

Eigen::MatrixXd patchify(std::span<const double> x, const PatchGrid& grid) {
  grid.validate();
  if (x.size() != static_cast<std::size_t>(grid.n_channels)) {
    throw DataError("patchify: expected " + std::to_string(grid.n_channels) +
                    " channels, got " + std::to_string(x.size()));
  }
  Eigen::MatrixXd patches(grid.n_patches(), grid.patch_size);
  for (int p = 0; p < grid.n_patches(); ++p) {
    for (int i = 0; i < grid.patch_size; ++i) {
      patches(p, i) = x[static_cast<std::size_t>(p) * grid.patch_size + i];
    }
  }
  return patches;
}

std::vector<double> unpatchify(const Eigen::MatrixXd& patches) {
  std::vector<double> out(static_cast<std::size_t>(patches.rows()) * patches.cols());
  for (int p = 0; p < patches.rows(); ++p) {
    for (int i = 0; i < patches.cols(); ++i) {
      out[static_cast<std::size_t>(p) * patches.cols() + i] = patches(p, i);
    }
  }
  return out;
}

Eigen::MatrixXd embed_patches(const Eigen::MatrixXd& patches,
                              const Eigen::MatrixXd& weight,
                              const Eigen::VectorXd& bias) {
  if (weight.cols() != patches.cols() || weight.rows() != bias.size()) {
    throw DataError("embed_patches: projection shape mismatch");
  }
  Eigen::MatrixXd tokens = patches * weight.transpose();
  tokens.rowwise() += bias.transpose();
  return tokens;
}

Eigen::MatrixXd positional_embedding(int n_positions, int dim, bool with_cls) {
  if (dim <= 0 || dim % 2 != 0) {
    throw DataError("positional_embedding: dim must be positive and even");
  }
  if (n_positions <= 0) throw DataError("positional_embedding: n_positions must be positive");
  const int rows = with_cls ? n_positions + 1 : n_positions;
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(rows, dim);
  const int half = dim / 2;
  for (int p = 0; p < n_positions; ++p) {
    const int row = with_cls ? p + 1 : p;
    for (int k = 0; k < half; ++k) {
      const double omega = std::pow(10000.0, -2.0 * k / dim);
      table(row, k) = std::sin(p * omega);
      table(row, half + k) = std::cos(p * omega);
    }
  }
  // cls position stays all-zero
  return table;
}

MaskPlan sample_mask(int n_patches, double mask_ratio, std::uint64_t seed) {
  if (n_patches <= 0) throw DataError("sample_mask: n_patches must be positive");
  if (!(mask_ratio >= 0.0 && mask_ratio < 1.0)) {
    throw DataError("sample_mask: mask_ratio must be in [0, 1)");
  }
  std::vector<int> order(n_patches);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<int>(order));

  const int n_mask = static_cast<int>(std::floor(n_patches * mask_ratio));
  MaskPlan plan;
  plan.n_patches = n_patches;
  plan.mask_ratio = mask_ratio;
  plan.seed = seed;
  plan.masked_indices.assign(order.begin(), order.begin() + n_mask);
  plan.kept_indices.assign(order.begin() + n_mask, order.end());
  std::sort(plan.masked_indices.begin(), plan.masked_indices.end());
  std::sort(plan.kept_indices.begin(), plan.kept_indices.end());
  return plan;
}

}  // namespace maxrf
