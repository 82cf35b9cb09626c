#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maxrf/common.hpp"

namespace maxrf {

struct PatchGrid {
  int n_channels = 2048;
  int patch_size = 16;

  int n_patches() const { return n_channels / patch_size; }
  void validate() const;
};

// Reproducible partition of patch indices into masked and kept sets.
struct MaskPlan {
  int n_patches = 0;
  double mask_ratio = 0.0;
  std::vector<int> masked_indices;  // ascending
  std::vector<int> kept_indices;    // ascending
  std::uint64_t seed = 0;

  std::string to_json_line() const;
};

// Rows are patches: (n_patches, patch_size).
Eigen::MatrixXd patchify(std::span<const double> x, const PatchGrid& grid);
std::vector<double> unpatchify(const Eigen::MatrixXd& patches);

// token_p = W * patch_p + b; W is (embed_dim, patch_size).
Eigen::MatrixXd embed_patches(const Eigen::MatrixXd& patches,
                              const Eigen::MatrixXd& weight,
                              const Eigen::VectorXd& bias);

// Fixed 1D sine-cosine table, one row per position; when with_cls, row 0 is
// the cls position and patch p maps to row p+1.
Eigen::MatrixXd positional_embedding(int n_positions, int dim, bool with_cls);

// Uniform subset via seeded shuffle; |masked| = floor(n_patches * mask_ratio).
MaskPlan sample_mask(int n_patches, double mask_ratio, std::uint64_t seed);

}  // namespace maxrf
