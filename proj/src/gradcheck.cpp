#include "c2gan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "c2gan/data.hpp"
#include "c2gan/mlp.hpp"
#include "c2gan/model.hpp"
#include "c2gan/train.hpp"

namespace c2gan::gradcheck {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kRelativeFloor});
  return std::abs(analytic - numeric) / scale;
}

std::vector<double> numeric_gradient(std::span<double> params, const std::function<double()>& loss,
                                     double step) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double up = loss();
    params[i] = saved - step;
    const double down = loss();
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

namespace {

struct Tracker {
  SuiteResult result;

  void compare(std::span<const double> analytic, std::span<const double> numeric) {
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      result.max_relative_error =
          std::max(result.max_relative_error, relative_error(analytic[i], numeric[i]));
      ++result.coordinates;
    }
  }

  SuiteResult finish() {
    result.passed = result.max_relative_error < kTolerance && result.coordinates > 0;
    return result;
  }
};

std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Vector random_vector(Rng& rng, std::size_t n, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

// Small random model with non-zero biases so every code path is exercised.
TripartiteModel random_model(Rng& rng) {
  const std::size_t d1 = uniform_size(rng, 2, 4);
  const std::size_t d2 = uniform_size(rng, 2, 4);
  const std::size_t k = uniform_size(rng, 2, 4);
  const std::size_t h = uniform_size(rng, 3, 6);
  auto m = TripartiteModel::create(d1, d2, k, h, rng);
  for (Mlp* net : {&m.disc, &m.gen1, &m.gen2}) {
    for (double& b : net->bias_in) b = random_vector(rng, 1, 0.3)[0];
    for (double& b : net->bias_out) b = random_vector(rng, 1, 0.3)[0];
  }
  return m;
}

Minibatch random_batch(const TripartiteModel& m, Rng& rng) {
  const std::size_t mb = uniform_size(rng, 1, 3);
  std::uniform_int_distribution<std::size_t> label(0, m.num_classes - 1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto noise = [&](std::size_t n) {
    Vector z(n);
    for (double& x : z) x = unit(rng);
    return z;
  };
  Minibatch b;
  for (std::size_t i = 0; i < mb; ++i) {
    b.full_pairs.push_back(MultiviewExample::make(random_vector(rng, m.d1, 1.0),
                                                  random_vector(rng, m.d2, 1.0), label(rng),
                                                  m.num_classes));
    b.missing_v1.push_back(
        MultiviewExample::make(std::nullopt, random_vector(rng, m.d2, 1.0), label(rng), m.num_classes));
    b.missing_v2.push_back(
        MultiviewExample::make(random_vector(rng, m.d1, 1.0), std::nullopt, label(rng), m.num_classes));
    b.noise_v1.push_back(noise(m.d1));
    b.noise_v2.push_back(noise(m.d2));
  }
  return b;
}

void compare_blocks(Tracker& t, Mlp& net, const MlpGradients& analytic,
                    const std::function<double()>& loss) {
  auto blocks = net.blocks();
  auto grads = analytic.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) t.compare(grads[b], numeric_gradient(blocks[b], loss));
}

SuiteResult check_generator_terms(std::size_t instances, std::uint64_t seed, const char* name,
                                  double class_weight) {
  Tracker t;
  t.result.name = name;
  Rng rng(seed);
  for (std::size_t n = 0; n < instances; ++n) {
    auto model = random_model(rng);
    const auto batch = random_batch(model, rng);
    const View v = n % 2 == 0 ? View::One : View::Two;
    const GeneratorLossWeights w{class_weight, 1.0, 1e-12};
    const auto analytic = loss_generator(model, v, batch, w);
    compare_blocks(t, model.generator(v), analytic.grads,
                   [&] { return loss_generator(model, v, batch, w).value; });
    ++t.result.instances;
  }
  return t.finish();
}

}  // namespace

SuiteResult check_mlp(std::size_t instances, std::uint64_t seed) {
  Tracker t;
  t.result.name = "mlp forward/backward";
  Rng rng(seed);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::size_t in = uniform_size(rng, 1, 6);
    const std::size_t hidden = uniform_size(rng, 1, 8);
    const std::size_t out = uniform_size(rng, 1, 5);
    const bool softmax = n % 2 == 1;
    Mlp net = Mlp::xavier(in, hidden, softmax ? out + 1 : out,
                          softmax ? OutputKind::Softmax : OutputKind::Linear, rng);
    for (double& b : net.bias_in) b = random_vector(rng, 1, 0.3)[0];
    for (double& b : net.bias_out) b = random_vector(rng, 1, 0.3)[0];
    Vector x = random_vector(rng, in, 1.0);

    // Linear: L = c . y. Softmax: L = -log p_target.
    const Vector coeffs = random_vector(rng, net.output_dim(), 1.0);
    const std::size_t target = uniform_size(rng, 0, net.output_dim() - 1);
    auto loss = [&] {
      const auto tr = forward(net, x);
      return softmax ? -std::log(tr.output[target]) : dot(coeffs, tr.output);
    };
    const auto trace = forward(net, x);
    Vector out_grad = coeffs;
    if (softmax) {
      out_grad = trace.output;
      out_grad[target] -= 1.0;
    }
    const auto analytic = backward(net, trace, out_grad);
    compare_blocks(t, net, analytic, loss);
    t.compare(analytic.input, numeric_gradient(x, loss));
    ++t.result.instances;
  }
  return t.finish();
}

SuiteResult check_discriminator_loss(std::size_t instances, std::uint64_t seed) {
  Tracker t;
  t.result.name = "discriminator loss";
  Rng rng(seed);
  for (std::size_t n = 0; n < instances; ++n) {
    auto model = random_model(rng);
    const auto batch = random_batch(model, rng);
    const auto analytic = loss_discriminator(model, batch);
    compare_blocks(t, model.disc, analytic.grads,
                   [&] { return loss_discriminator(model, batch).value; });
    ++t.result.instances;
  }
  return t.finish();
}

SuiteResult check_generator_loss(std::size_t instances, std::uint64_t seed) {
  return check_generator_terms(instances, seed, "generator loss", 1.0);
}

SuiteResult check_feature_matching(std::size_t instances, std::uint64_t seed) {
  return check_generator_terms(instances, seed, "feature matching", 0.0);
}

std::vector<SuiteResult> run_all(std::size_t instances, std::uint64_t seed) {
  return {check_mlp(instances, seed), check_discriminator_loss(instances, seed + 1),
          check_generator_loss(instances, seed + 2), check_feature_matching(instances, seed + 3)};
}

void print(std::ostream& out, const SuiteResult& r) {
  out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.instances << " instances, "
      << r.coordinates << " coordinates, max relative error " << r.max_relative_error << '\n';
}

}  // namespace c2gan::gradcheck
