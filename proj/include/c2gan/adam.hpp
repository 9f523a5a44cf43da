#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "c2gan/linalg.hpp"
#include "c2gan/mlp.hpp"

namespace c2gan {

struct AdamHyper {
  double alpha = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-parameter Adam moments, one entry per parameter block.
struct AdamState {
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
  std::uint64_t step_count = 0;
  double alpha = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  AdamState(std::span<const std::size_t> block_sizes, const AdamHyper& hyper);

  static AdamState for_network(const Mlp& net, const AdamHyper& hyper);
};

/// One bias-corrected Adam update. Throws NumericError (leaving params and
/// state untouched) if any gradient entry is not finite.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state);

void adam_step(Mlp& net, const MlpGradients& grads, AdamState& state);

}  // namespace c2gan
