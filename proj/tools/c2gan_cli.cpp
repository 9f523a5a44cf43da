// Command-line front end: train, eval, synth, experiment, theory-check, gradcheck.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "c2gan/config.hpp"
#include "c2gan/data.hpp"
#include "c2gan/error.hpp"
#include "c2gan/eval.hpp"
#include "c2gan/gradcheck.hpp"
#include "c2gan/model.hpp"
#include "c2gan/theory.hpp"
#include "c2gan/train.hpp"

namespace {

using namespace c2gan;

// Model initialization draws from its own stream so that changing the batch
// schedule never changes the initial parameters.
constexpr std::uint64_t kInitStream = 0x1417;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& heldout_path, const std::string& checkpoint_path,
              const std::string& metrics_path) {
  const auto cfg = load_config(config_path);
  auto config = train_config_from_map(cfg);
  const LoadOptions opts{config_bool(cfg, "l2_normalize", false)};
  const auto data = load_multiview_file(data_path, opts);
  std::vector<MultiviewExample> heldout;
  if (!heldout_path.empty()) heldout = load_multiview_file(heldout_path, opts).s_full;

  Rng init(derive_seed(config.seed, kInitStream));
  auto model = TripartiteModel::create(data.d1, data.d2, data.num_classes, config.hidden_dim, init);
  const auto log = train(model, data, config, heldout);

  save_checkpoint(checkpoint_path, Checkpoint{model, config.seed, config.iterations});
  auto out = open_out(metrics_path);
  write_metrics_csv(out, log);
  std::cerr << "trained " << config.iterations << " iterations";
  if (log.clamp_events > 0) std::cerr << " (" << log.clamp_events << " log-clamp events)";
  std::cerr << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& scenario_text, std::uint64_t seed, bool l2_normalize) {
  const auto ckpt = load_checkpoint(checkpoint_path);
  const auto data = load_multiview_file(data_path, LoadOptions{l2_normalize});
  const Scenario scenario = parse_scenario(scenario_text);
  std::vector<MultiviewExample> test = data.s_full;
  if (scenario == Scenario::TestOnView1Generated)
    test.insert(test.end(), data.s_missing1.begin(), data.s_missing1.end());
  if (scenario == Scenario::TestOnView2Generated)
    test.insert(test.end(), data.s_missing2.begin(), data.s_missing2.end());
  const auto report = evaluate(ckpt.model, test, scenario, seed);
  std::cout << "scenario  " << scenario_name(scenario) << '\n';
  print_report(std::cout, report);
  return 0;
}

int cmd_synth(const std::string& config_path, const std::string& train_path,
              const std::string& test_path) {
  const auto spec = synthetic_spec_from_config(load_config(config_path));
  const auto data = generate_synthetic(spec);
  save_multiview_file(train_path, data.train);
  save_multiview_file(test_path, as_complete_dataset(data.test, spec.d1, spec.d2, spec.num_classes));
  std::cout.precision(6);
  std::cout << "bayes_accuracy " << data.bayes_accuracy << '\n'
            << "bayes_accuracy_view1 " << bayes_accuracy(spec, ViewSubset::OnlyView1) << '\n'
            << "bayes_accuracy_view2 " << bayes_accuracy(spec, ViewSubset::OnlyView2) << '\n'
            << "train " << data.train.s_full.size() << " full, " << data.train.s_missing1.size()
            << " missing view1, " << data.train.s_missing2.size() << " missing view2; test "
            << data.test.size() << '\n';
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_path) {
  const auto spec = experiment_spec_from_config(load_config(config_path));
  const auto report = run_experiment(spec);
  if (out_path.empty()) {
    write_experiment_csv(std::cout, report);
  } else {
    auto out = open_out(out_path);
    write_experiment_csv(out, report);
  }
  return 0;
}

theory::DiscreteJoint table(std::initializer_list<double> values, std::size_t n1, std::size_t n2) {
  Matrix m(n1, n2);
  m.data.assign(values.begin(), values.end());
  return theory::DiscreteJoint(std::move(m));
}

int cmd_theory(const std::string& real_path, const std::string& gen1_path,
               const std::string& gen2_path, double tol) {
  struct Instance {
    std::string name;
    theory::DiscreteJoint real, g1, g2;
  };
  std::vector<Instance> instances;
  if (!real_path.empty()) {
    instances.push_back({"files", theory::load_joint(real_path), theory::load_joint(gen1_path),
                         theory::load_joint(gen2_path)});
  } else {
    const auto p = table({0.1, 0.2, 0.3, 0.4}, 2, 2);
    instances.push_back({"equilibrium", p, p, p});
    instances.push_back({"equal mixture, distinct generators", p, table({0.2, 0.0, 0.6, 0.2}, 2, 2),
                         table({0.0, 0.4, 0.0, 0.6}, 2, 2)});
    instances.push_back({"disjoint supports", table({1.0, 0.0, 0.0, 0.0}, 2, 2),
                         table({0.0, 1.0, 0.0, 0.0}, 2, 2), table({0.0, 0.0, 0.5, 0.5}, 2, 2)});
  }
  bool ok = true;
  std::cout.precision(17);
  for (const auto& inst : instances) {
    const auto report = theory::check_theorem(inst.real, inst.g1, inst.g2, tol);
    const auto d_star = theory::optimal_discriminator(inst.real, inst.g1, inst.g2);
    const double augmented = theory::augmented_value(d_star, inst.real, inst.g1, inst.g2);
    std::cout << "== " << inst.name << '\n';
    report.print(std::cout);
    std::cout << "augmented value    " << augmented << '\n';
    ok = ok && report.consistent;
  }
  return ok ? 0 : 1;
}

int cmd_gradcheck(std::size_t instances, std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : gradcheck::run_all(instances, seed)) {
    gradcheck::print(std::cout, r);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional two-generator GAN for multiview classification with missing views"};
  app.require_subcommand(1);

  std::string config, data, heldout, checkpoint, metrics = "metrics.csv";
  auto* train_cmd = app.add_subcommand("train", "train a model; writes checkpoint and metrics CSV");
  train_cmd->add_option("-c,--config", config, "key=value training config")->required();
  train_cmd->add_option("-d,--data", data, "multiview training file")->required();
  train_cmd->add_option("--heldout", heldout, "complete pairs for the heldout_acc column");
  train_cmd->add_option("-o,--checkpoint", checkpoint, "checkpoint output path")->required();
  train_cmd->add_option("-m,--metrics", metrics, "metrics CSV output path");

  std::string scenario = "complete";
  std::uint64_t eval_seed = 0;
  bool l2 = false;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a multiview file");
  eval_cmd->add_option("-k,--checkpoint", checkpoint, "checkpoint path")->required();
  eval_cmd->add_option("-d,--data", data, "multiview test file")->required();
  eval_cmd->add_option("-s,--scenario", scenario, "complete | gen1 | gen2");
  eval_cmd->add_option("--seed", eval_seed, "noise seed for regenerated views");
  eval_cmd->add_flag("--l2-normalize", l2, "unit-normalize each view on load");

  std::string train_out = "train.txt", test_out = "test.txt";
  auto* synth_cmd = app.add_subcommand("synth", "sample a synthetic Gaussian two-view task");
  synth_cmd->add_option("-c,--config", config, "key=value synthetic spec")->required();
  synth_cmd->add_option("--train-out", train_out, "training set output");
  synth_cmd->add_option("--test-out", test_out, "test set output");

  std::string out;
  auto* exp_cmd = app.add_subcommand("experiment", "repeated split/train/evaluate runs");
  exp_cmd->add_option("-c,--config", config, "key=value experiment config")->required();
  exp_cmd->add_option("-o,--out", out, "CSV output (default stdout)");

  std::string real_path, gen1_path, gen2_path;
  double tol = 1e-10;
  auto* theory_cmd = app.add_subcommand("theory-check", "verify the equilibrium identities on tables");
  auto* real_opt = theory_cmd->add_option("--real", real_path, "p_real matrix file");
  auto* g1_opt = theory_cmd->add_option("--gen1", gen1_path, "p_G1 matrix file");
  auto* g2_opt = theory_cmd->add_option("--gen2", gen2_path, "p_G2 matrix file");
  real_opt->needs(g1_opt, g2_opt);
  g1_opt->needs(real_opt, g2_opt);
  g2_opt->needs(real_opt, g1_opt);
  theory_cmd->add_option("--tol", tol, "tolerance for residuals");

  std::size_t instances = 100;
  std::uint64_t gc_seed = 1;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient suites");
  grad_cmd->add_option("-n,--instances", instances, "random instances per suite");
  grad_cmd->add_option("--seed", gc_seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(config, data, heldout, checkpoint, metrics);
    if (*eval_cmd) return cmd_eval(checkpoint, data, scenario, eval_seed, l2);
    if (*synth_cmd) return cmd_synth(config, train_out, test_out);
    if (*exp_cmd) return cmd_experiment(config, out);
    if (*theory_cmd) return cmd_theory(real_path, gen1_path, gen2_path, tol);
    if (*grad_cmd) return cmd_gradcheck(instances, gc_seed);
  } catch (const c2gan::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
