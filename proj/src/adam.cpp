#include "c2gan/adam.hpp"

#include <cmath>

#include "c2gan/error.hpp"

namespace c2gan {

AdamState::AdamState(std::span<const std::size_t> block_sizes, const AdamHyper& hyper)
    : alpha(hyper.alpha), beta1(hyper.beta1), beta2(hyper.beta2), epsilon(hyper.epsilon) {
  if (!(alpha > 0.0)) throw ConfigError("adam: alpha must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("adam: beta1 and beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be positive");
  for (std::size_t n : block_sizes) {
    first_moment.emplace_back(n, 0.0);
    second_moment.emplace_back(n, 0.0);
  }
}

AdamState AdamState::for_network(const Mlp& net, const AdamHyper& hyper) {
  std::vector<std::size_t> sizes;
  for (auto block : net.blocks()) sizes.push_back(block.size());
  return AdamState(sizes, hyper);
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw DimensionError("adam: parameter, gradient and state block counts differ");
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size() || params[b].size() != state.first_moment[b].size())
      throw DimensionError("adam: block " + std::to_string(b) + " has mismatched sizes");
    if (!all_finite(grads[b])) throw NumericError("adam: non-finite gradient");
  }

  const auto t = static_cast<double>(state.step_count + 1);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double g = grads[b][i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      params[b][i] -= state.alpha * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
  ++state.step_count;
}

void adam_step(Mlp& net, const MlpGradients& grads, AdamState& state) {
  auto p = net.blocks();
  auto g = grads.blocks();
  adam_step(std::span<const std::span<double>>(p), std::span<const std::span<const double>>(g),
            state);
}

}  // namespace c2gan
