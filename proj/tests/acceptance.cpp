// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero on any failure.
// Usage: acceptance <synthetic task config>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "c2gan/config.hpp"
#include "c2gan/error.hpp"
#include "c2gan/eval.hpp"
#include "c2gan/gradcheck.hpp"
#include "c2gan/theory.hpp"
#include "c2gan/train.hpp"

using namespace c2gan;
using namespace c2gan::theory;

namespace {

const double kLog4 = std::log(4.0);
int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << detail
            << std::endl;
  if (!ok) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

DiscreteJoint random_joint(Rng& rng, std::size_t n1, std::size_t n2) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix w(n1, n2);
  for (double& x : w.data) x = unit(rng) < 0.3 ? 0.0 : unit(rng);
  w.data[std::uniform_int_distribution<std::size_t>(0, w.data.size() - 1)(rng)] += 1.0;
  return DiscreteJoint::from_weights(std::move(w));
}

void gradient_integrity() {
  const auto start = std::chrono::steady_clock::now();
  const auto suites = gradcheck::run_all(100, 2024);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool ok = secs < 60.0;
  double worst = 0.0;
  for (const auto& s : suites) {
    ok = ok && s.passed && s.instances >= 100;
    worst = std::max(worst, s.max_relative_error);
  }
  report(1, "gradient integrity", ok,
         fmt("4 suites x 100 instances, max rel err %.3g, %.1f s", worst, secs));
}

void optimal_discriminator_grid() {
  Rng rng(11);
  std::uniform_int_distribution<std::size_t> size(1, 20);
  const double step = 1e-3;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n1 = size(rng), n2 = size(rng);
    const auto real = random_joint(rng, n1, n2), g1 = random_joint(rng, n1, n2),
               g2 = random_joint(rng, n1, n2);
    const auto d = optimal_discriminator(real, g1, g2);
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j) {
        const double a = real.table(i, j);
        const double b = 0.5 * (g1.table(i, j) + g2.table(i, j));
        if (a == 0.0 && b == 0.0) continue;
        worst = std::max(worst, std::abs(grid_argmax_cell(a, b, step) - d.table(i, j)));
      }
  }
  report(2, "optimal discriminator vs grid search", worst <= step,
         fmt("100 triples, max |grid - closed form| = %.3g (step 1e-3)", worst));
}

void value_identity() {
  Rng rng(12);
  std::uniform_int_distribution<std::size_t> size(1, 20);
  double worst = 0.0;
  bool consistent = true;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n1 = size(rng), n2 = size(rng);
    const auto r = check_theorem(random_joint(rng, n1, n2), random_joint(rng, n1, n2),
                                 random_joint(rng, n1, n2), 1e-10);
    worst = std::max(worst, r.identity_residual);
    consistent = consistent && r.consistent;
  }
  double eq_gap = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto p = random_joint(rng, size(rng), size(rng));
    eq_gap = std::max(eq_gap, std::abs(value_function(optimal_discriminator(p, p, p), p, p, p) + kLog4));
  }
  report(3, "value identity and minimum", worst < 1e-10 && eq_gap <= 1e-12 && consistent,
         fmt("max identity residual %.3g over 1000 triples, max |V + log 4| at equilibria %.3g",
             worst, eq_gap));
}

void augmented_equilibrium() {
  const DiscreteJoint real(Matrix(2, 2, {0.25, 0.25, 0.25, 0.25}));
  const DiscreteJoint g1(Matrix(2, 2, {0.5, 0.0, 0.5, 0.0}));
  const DiscreteJoint g2(Matrix(2, 2, {0.0, 0.5, 0.0, 0.5}));
  const double v = value_function(optimal_discriminator(real, g1, g2), real, g1, g2);
  const double vbar = augmented_value(optimal_discriminator(real, g1, g2), real, g1, g2);
  const double vbar_eq = augmented_value(optimal_discriminator(real, real, real), real, real, real);

  // Other direction: no random triple of distinct distributions reaches -log 4.
  Rng rng(13);
  double closest = INFINITY;
  for (int t = 0; t < 1000; ++t) {
    const auto p = random_joint(rng, 3, 3), q = random_joint(rng, 3, 3), s = random_joint(rng, 3, 3);
    closest = std::min(closest, augmented_value(optimal_discriminator(p, q, s), p, q, s) + kLog4);
  }
  const bool ok = std::abs(v + kLog4) <= 1e-12 && vbar > -kLog4 + 1e-6 &&
                  std::abs(vbar_eq + kLog4) <= 1e-12 && closest > 1e-6;
  report(4, "augmented value equilibrium", ok,
         fmt("V + log 4 = %.3g, Vbar + log 4 = %.4g (distinct generators), %.3g (coinciding)", v + kLog4,
             vbar + kLog4, vbar_eq + kLog4));
}

void loss_ground_truth() {
  const auto m = TripartiteModel::zeros(4, 5, 6);
  Minibatch b;
  b.full_pairs.push_back(MultiviewExample::make(Vector(4, 0.3), Vector(5, -0.2), 1, 6));
  b.missing_v1.push_back(MultiviewExample::make(std::nullopt, Vector(5, 0.7), 4, 6));
  b.missing_v2.push_back(MultiviewExample::make(Vector(4, -0.1), std::nullopt, 0, 6));
  b.noise_v1.push_back(Vector(4, 0.5));
  b.noise_v2.push_back(Vector(5, -0.5));
  const double log7 = std::log(7.0);
  const double ld = loss_discriminator(m, b).value;
  const double lg1 = loss_generator(m, View::One, b).class_term;
  const double lg2 = loss_generator(m, View::Two, b).class_term;
  const double err = std::max({std::abs(ld - 8.0 / 7.0 * log7), std::abs(lg1 - log7 / 7.0),
                               std::abs(lg2 - log7 / 7.0)});
  report(5, "zero-initialized loss values", err <= 1e-12,
         fmt("L_D = %.15f, generator class term = %.15f, max error %.3g", ld, lg1, err));
}

void end_to_end(const ConfigMap& cfg) {
  auto spec = experiment_spec_from_config(cfg);
  spec.scenarios = {Scenario::TestComplete, Scenario::TestOnView1Generated};
  spec.singleview_baselines = true;
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_experiment(spec);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto gan = result.method_rows("c2gan:complete");
  const auto gen1 = result.method_rows("c2gan:gen1");
  const auto sv1 = result.method_rows("singleview1");
  const auto sv2 = result.method_rows("singleview2");
  const double bayes = gan.front().bayes_accuracy;
  const std::size_t n = gan.size();

  double gan_mean = 0.0, gen1_mean = 0.0, fake_mean = 0.0, majority_mean = 0.0;
  std::size_t wins = 0;
  for (std::size_t r = 0; r < n; ++r) {
    gan_mean += gan[r].accuracy / n;
    gen1_mean += gen1[r].accuracy / n;
    fake_mean += gan[r].fake_rate / n;
    if (gan[r].accuracy > std::min(sv1[r].accuracy, sv2[r].accuracy)) ++wins;
    // Majority-class rate of this repeat's test set.
    const auto test = generate_synthetic(*spec.synthetic, gan[r].seed).test;
    std::vector<std::size_t> counts(spec.synthetic->num_classes, 0);
    for (const auto& ex : test) ++counts[ex.label_index()];
    majority_mean += static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
                     static_cast<double>(test.size()) / n;
  }
  double sv1_mean = 0.0, sv2_mean = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    sv1_mean += sv1[r].accuracy / n;
    sv2_mean += sv2[r].accuracy / n;
  }

  const bool ok6 = gan_mean >= 0.85 * bayes && wins >= 15 && secs < 600.0;
  std::ostringstream d6;
  d6 << fmt("mean accuracy %.4f vs 0.85 x bayes %.4f; ", gan_mean, 0.85 * bayes)
     << "beats weaker single-view baseline in " << wins << "/" << n << " repeats"
     << fmt("; single-view means %.4f / %.4f", sv1_mean, sv2_mean)
     << fmt("; mean fake rate %.3f; %.0f s", fake_mean, secs);
  report(6, "end-to-end synthetic", ok6, d6.str());

  report(7, "generated-view usefulness", gen1_mean >= majority_mean + 0.30,
         fmt("gen1 scenario accuracy %.4f vs majority rate %.4f + 0.30", gen1_mean, majority_mean));
}

std::string training_run(const PartitionedDataset& data, const TrainConfig& cfg) {
  Rng init(derive_seed(cfg.seed, 0x1417));
  auto m = TripartiteModel::create(data.d1, data.d2, data.num_classes, cfg.hidden_dim, init);
  std::ostringstream csv, ckpt;
  write_metrics_csv(csv, train(m, data, cfg));
  write_checkpoint(ckpt, Checkpoint{m, cfg.seed, cfg.iterations});
  return csv.str() + "\n" + ckpt.str();
}

void determinism(const ConfigMap& cfg) {
  auto tc = train_config_from_map(cfg);
  tc.iterations = 200;
  const auto data = generate_synthetic(synthetic_spec_from_config(cfg)).train;
  const auto a = training_run(data, tc);
  const auto b = training_run(data, tc);
  report(8, "determinism", a == b,
         std::to_string(a.size()) + " bytes of metrics CSV and checkpoint, " +
             (a == b ? "identical" : "different"));
}

void update_isolation(const ConfigMap& cfg) {
  const auto tc = train_config_from_map(cfg);
  const auto data = generate_synthetic(synthetic_spec_from_config(cfg)).train;
  Rng init(5);
  auto m = TripartiteModel::create(data.d1, data.d2, data.num_classes, tc.hidden_dim, init);
  TrainingSession session(m, data, tc);
  std::size_t violations = 0;
  const int steps = 100;
  for (int it = 0; it < steps; ++it) {
    const auto batch = session.next_batch();
    auto before = m;
    session.update_discriminator(batch);
    violations += !(m.gen1 == before.gen1) + !(m.gen2 == before.gen2);
    before = m;
    session.update_generator(View::One, batch);
    violations += !(m.disc == before.disc) + !(m.gen2 == before.gen2);
    before = m;
    session.update_generator(View::Two, batch);
    violations += !(m.disc == before.disc) + !(m.gen1 == before.gen1);
  }
  report(9, "update isolation", violations == 0,
         std::to_string(steps) + " iterations, " + std::to_string(violations) +
             " frozen-player changes");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <synthetic task config>\n";
    return 2;
  }
  try {
    const auto cfg = load_config(argv[1]);
    gradient_integrity();
    optimal_discriminator_grid();
    value_identity();
    augmented_equilibrium();
    loss_ground_truth();
    end_to_end(cfg);
    determinism(cfg);
    update_isolation(cfg);
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
