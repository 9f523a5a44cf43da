#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace c2gan::gradcheck {

inline constexpr double kStep = 1e-5;
inline constexpr double kTolerance = 1e-4;
/// Denominator floor of the relative error, so that coordinates whose true
/// gradient is ~0 are judged on absolute error instead.
inline constexpr double kRelativeFloor = 1e-6;

/// |a - n| / max(|a|, |n|, kRelativeFloor).
double relative_error(double analytic, double numeric);

/// Central differences of `loss` with respect to every entry of `params`
/// (perturbed in place and restored bit-exactly).
std::vector<double> numeric_gradient(std::span<double> params, const std::function<double()>& loss,
                                     double step = kStep);

struct SuiteResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Random small networks, both output kinds, parameters and input gradient.
SuiteResult check_mlp(std::size_t instances, std::uint64_t seed);
/// Discriminator loss with respect to the discriminator parameters.
SuiteResult check_discriminator_loss(std::size_t instances, std::uint64_t seed);
/// Full generator loss (class term + feature matching) with respect to G_v,
/// alternating v over instances.
SuiteResult check_generator_loss(std::size_t instances, std::uint64_t seed);
/// Feature-matching penalty alone with respect to G_v.
SuiteResult check_feature_matching(std::size_t instances, std::uint64_t seed);

std::vector<SuiteResult> run_all(std::size_t instances, std::uint64_t seed);

void print(std::ostream& out, const SuiteResult& r);

}  // namespace c2gan::gradcheck
