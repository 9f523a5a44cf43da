#include "c2gan/eval.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "c2gan/adam.hpp"
#include "c2gan/config.hpp"
#include "c2gan/error.hpp"

namespace c2gan {

MetricsReport score_predictions(std::span<const std::size_t> truth,
                                std::span<const std::optional<std::size_t>> predicted,
                                std::size_t num_classes) {
  if (truth.size() != predicted.size()) throw DimensionError("truth and predictions differ in length");
  MetricsReport r;
  r.n_test = truth.size();
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes + 1, 0));
  std::size_t fakes = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= num_classes) throw RangeError("true label outside [0, K)");
    if (!predicted[i]) {
      ++fakes;
      ++r.confusion[truth[i]][num_classes];
      continue;
    }
    if (*predicted[i] >= num_classes) throw RangeError("predicted label outside [0, K)");
    ++r.confusion[truth[i]][*predicted[i]];
  }
  std::size_t trace = 0;
  for (std::size_t k = 0; k < num_classes; ++k) trace += r.confusion[k][k];
  const double n = static_cast<double>(r.n_test);
  r.accuracy = r.n_test == 0 ? 0.0 : static_cast<double>(trace) / n;
  r.fake_rate = r.n_test == 0 ? 0.0 : static_cast<double>(fakes) / n;

  r.per_class.resize(num_classes);
  double f1_sum = 0.0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    std::size_t predicted_k = 0, actual_k = 0;
    for (std::size_t t = 0; t < num_classes; ++t) predicted_k += r.confusion[t][k];
    for (std::size_t p = 0; p <= num_classes; ++p) actual_k += r.confusion[k][p];
    const double tp = static_cast<double>(r.confusion[k][k]);
    auto& s = r.per_class[k];
    s.precision = predicted_k == 0 ? 0.0 : tp / static_cast<double>(predicted_k);
    s.recall = actual_k == 0 ? 0.0 : tp / static_cast<double>(actual_k);
    s.f1 = s.precision + s.recall == 0.0 ? 0.0
                                         : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    f1_sum += s.f1;
  }
  r.macro_f1 = num_classes == 0 ? 0.0 : f1_sum / static_cast<double>(num_classes);
  return r;
}

Scenario parse_scenario(const std::string& name) {
  if (name == "complete") return Scenario::TestComplete;
  if (name == "gen1") return Scenario::TestOnView1Generated;
  if (name == "gen2") return Scenario::TestOnView2Generated;
  throw ConfigError("unknown scenario '" + name + "' (expected complete, gen1 or gen2)");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::TestComplete: return "complete";
    case Scenario::TestOnView1Generated: return "gen1";
    case Scenario::TestOnView2Generated: return "gen2";
  }
  return "?";
}

MetricsReport evaluate(const TripartiteModel& model, std::span<const MultiviewExample> test,
                       Scenario scenario, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<std::size_t> truth;
  std::vector<std::optional<std::size_t>> predicted;
  truth.reserve(test.size());
  predicted.reserve(test.size());

  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& ex = test[i];
    Vector v1, v2;
    auto need = [&](View v) -> const Vector& {
      const auto& view = ex.view(v);
      if (!view)
        throw DataError("test example " + std::to_string(i) + " lacks view " +
                        std::to_string(static_cast<int>(v)) + " required by scenario " +
                        scenario_name(scenario));
      return *view;
    };
    auto regenerate = [&](View which) {
      Vector z(model.view_dim(which));
      for (double& x : z) x = unit(rng);
      return generate(model, which, need(other_view(which)), z);
    };
    switch (scenario) {
      case Scenario::TestComplete:
        v1 = need(View::One);
        v2 = need(View::Two);
        break;
      case Scenario::TestOnView1Generated:
        v2 = need(View::Two);
        v1 = regenerate(View::One);
        break;
      case Scenario::TestOnView2Generated:
        v1 = need(View::One);
        v2 = regenerate(View::Two);
        break;
    }
    const auto d = decide(model, v1, v2);
    truth.push_back(ex.label_index());
    predicted.push_back(d.is_fake() ? std::nullopt : std::optional<std::size_t>(d.label));
  }
  auto report = score_predictions(truth, predicted, model.num_classes);
  report.seed = seed;
  return report;
}

std::size_t SingleviewClassifier::predict(std::span<const double> x) const {
  const auto out = forward(net, x).output;
  std::size_t best = 0;
  for (std::size_t k = 1; k < out.size(); ++k)
    if (out[k] > out[best]) best = k;
  return best;
}

MetricsReport evaluate_singleview(const SingleviewClassifier& clf,
                                  std::span<const MultiviewExample> test) {
  std::vector<std::size_t> truth;
  std::vector<std::optional<std::size_t>> predicted;
  for (const auto& ex : test) {
    const auto& view = ex.view(clf.view);
    if (!view) throw DataError("singleview evaluation: example lacks the classifier's view");
    truth.push_back(ex.label_index());
    predicted.emplace_back(clf.predict(*view));
  }
  return score_predictions(truth, predicted, clf.net.output_dim());
}

SingleviewResult train_singleview_baseline(View view, const PartitionedDataset& data,
                                           const TrainConfig& config,
                                           std::span<const MultiviewExample> test) {
  config.validate();
  std::vector<const MultiviewExample*> pool;
  for (const auto& ex : data.s_full) pool.push_back(&ex);
  for (const auto& ex : data.missing(other_view(view))) pool.push_back(&ex);
  if (pool.empty())
    throw ConfigError("singleview baseline: no training example observes view " +
                      std::to_string(static_cast<int>(view)));

  const std::size_t dim = view == View::One ? data.d1 : data.d2;
  const std::size_t k_classes = data.num_classes;
  Rng init_rng(derive_seed(config.seed, 1));
  SingleviewResult result;
  result.classifier.view = view;
  result.classifier.net = Mlp::xavier(dim, config.hidden_dim, k_classes, OutputKind::Softmax, init_rng);
  Mlp& net = result.classifier.net;

  Rng rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  AdamState state = AdamState::for_network(net, config.adam);
  const double w = 1.0 / static_cast<double>(config.minibatch_size);
  Vector logit_grad(k_classes);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    MlpGradients grads = MlpGradients::zeros_like(net);
    for (std::size_t b = 0; b < config.minibatch_size; ++b) {
      const auto& ex = *pool[pick(rng)];
      const auto trace = forward(net, *ex.view(view));
      const std::size_t target = ex.label_index();
      for (std::size_t k = 0; k < k_classes; ++k)
        logit_grad[k] = w * (trace.output[k] - (k == target ? 1.0 : 0.0));
      backward_into(net, trace, logit_grad, {}, grads);
    }
    adam_step(net, grads, state);
  }

  if (!test.empty()) {
    result.report = evaluate_singleview(result.classifier, test);
  } else {
    std::vector<MultiviewExample> train_pool;
    for (const auto* ex : pool) train_pool.push_back(*ex);
    result.report = evaluate_singleview(result.classifier, train_pool);
  }
  result.report.seed = config.seed;
  return result;
}

// ---------------------------------------------------------------------------
// Repeated-splits experiments

void ExperimentSpec::validate() const {
  if (n_repeats == 0) throw ConfigError("n_repeats must be at least 1");
  if (scenarios.empty()) throw ConfigError("experiment needs at least one scenario");
  if (synthetic && !pool.empty()) throw ConfigError("experiment has two data sources");
  if (!synthetic && pool.empty()) throw ConfigError("experiment has no data source");
  if (synthetic) synthetic->validate();
  train.validate();
}

ExperimentSpec experiment_spec_from_config(const std::map<std::string, std::string>& cfg) {
  ExperimentSpec s;
  s.n_repeats = config_size(cfg, "n_repeats", s.n_repeats);
  s.seed = config_u64(cfg, "seed", s.seed);
  s.singleview_baselines = config_bool(cfg, "baselines", s.singleview_baselines);
  s.train = train_config_from_map(cfg);
  const std::string scenarios = config_string(cfg, "scenarios", "complete");
  s.scenarios.clear();
  std::istringstream list(scenarios);
  std::string item;
  while (std::getline(list, item, ',')) s.scenarios.push_back(parse_scenario(item));

  const std::string data_file = config_string(cfg, "data_file", "");
  if (data_file.empty()) {
    s.synthetic = synthetic_spec_from_config(cfg);
  } else {
    const LoadOptions opts{config_bool(cfg, "l2_normalize", false)};
    auto ds = load_multiview_file(data_file, opts);
    s.pool = std::move(ds.s_full);
    s.pool_d1 = ds.d1;
    s.pool_d2 = ds.d2;
    s.pool_classes = ds.num_classes;
    s.m_full = config_size(cfg, "m_full", 0);
    s.m_missing1 = config_size(cfg, "m_missing1", 0);
    s.m_missing2 = config_size(cfg, "m_missing2", 0);
  }
  s.validate();
  return s;
}

std::vector<ExperimentRow> ExperimentReport::method_rows(const std::string& method) const {
  std::vector<ExperimentRow> out;
  for (const auto& r : rows)
    if (r.method == method) out.push_back(r);
  return out;
}

std::vector<AggregateRow> aggregate_rows(std::span<const ExperimentRow> rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ExperimentRow*>> groups;
  for (const auto& r : rows) {
    if (!groups.count(r.method)) order.push_back(r.method);
    groups[r.method].push_back(&r);
  }
  auto stats = [](const std::vector<const ExperimentRow*>& g, double ExperimentRow::*field) {
    double mean = 0.0;
    for (const auto* r : g) mean += r->*field;
    mean /= static_cast<double>(g.size());
    double var = 0.0;
    for (const auto* r : g) var += (r->*field - mean) * (r->*field - mean);
    return std::pair{mean, std::sqrt(var / static_cast<double>(g.size()))};
  };
  std::vector<AggregateRow> out;
  for (const auto& method : order) {
    const auto& g = groups[method];
    AggregateRow a;
    a.method = method;
    a.n = g.size();
    std::tie(a.accuracy_mean, a.accuracy_std) = stats(g, &ExperimentRow::accuracy);
    std::tie(a.macro_f1_mean, a.macro_f1_std) = stats(g, &ExperimentRow::macro_f1);
    std::tie(a.fake_rate_mean, a.fake_rate_std) = stats(g, &ExperimentRow::fake_rate);
    out.push_back(a);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;
  const double bayes = spec.synthetic ? bayes_accuracy(*spec.synthetic, ViewSubset::Both)
                                      : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t r = 0; r < spec.n_repeats; ++r) {
    const std::uint64_t seed = derive_seed(spec.seed, r);
    try {
      PartitionedDataset train_data;
      std::vector<MultiviewExample> test;
      if (spec.synthetic) {
        auto data = generate_synthetic(*spec.synthetic, seed);
        train_data = std::move(data.train);
        test = std::move(data.test);
      } else {
        auto split = split_for_protocol(spec.pool, spec.pool_d1, spec.pool_d2, spec.pool_classes,
                                        spec.m_full, spec.m_missing1, spec.m_missing2, seed);
        train_data = std::move(split.train);
        test = std::move(split.test);
      }

      Rng init_rng(derive_seed(seed, 10));
      auto model = TripartiteModel::create(train_data.d1, train_data.d2, train_data.num_classes,
                                           spec.train.hidden_dim, init_rng);
      TrainConfig cfg = spec.train;
      cfg.seed = derive_seed(seed, 11);
      cfg.checkpoint_every = 0;
      train(model, train_data, cfg);

      for (std::size_t s = 0; s < spec.scenarios.size(); ++s) {
        const auto m = evaluate(model, test, spec.scenarios[s], derive_seed(seed, 12 + s));
        report.rows.push_back({r, seed, "c2gan:" + scenario_name(spec.scenarios[s]), m.accuracy,
                               m.macro_f1, m.fake_rate, bayes});
      }
      if (spec.singleview_baselines) {
        for (View v : {View::One, View::Two}) {
          TrainConfig bcfg = spec.train;
          bcfg.seed = derive_seed(seed, 20 + static_cast<std::uint64_t>(v));
          const auto b = train_singleview_baseline(v, train_data, bcfg, test);
          report.rows.push_back({r, seed, "singleview" + std::to_string(static_cast<int>(v)),
                                 b.report.accuracy, b.report.macro_f1, b.report.fake_rate, bayes});
        }
      }
    } catch (const Error& e) {
      throw Error("repeat " + std::to_string(r) + ": " + e.what());
    }
  }
  report.aggregate = aggregate_rows(report.rows);
  return report;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_experiment_csv(std::ostream& out, const ExperimentReport& report) {
  out << "repeat,seed,method,accuracy,macro_f1,fake_rate,bayes_accuracy\n";
  for (const auto& r : report.rows)
    out << r.repeat << ',' << r.seed << ',' << r.method << ',' << num(r.accuracy) << ','
        << num(r.macro_f1) << ',' << num(r.fake_rate) << ',' << num(r.bayes_accuracy) << '\n';
  out << "\nmethod,n,accuracy_mean,accuracy_std,macro_f1_mean,macro_f1_std,fake_rate_mean,"
         "fake_rate_std\n";
  for (const auto& a : report.aggregate)
    out << a.method << ',' << a.n << ',' << num(a.accuracy_mean) << ',' << num(a.accuracy_std)
        << ',' << num(a.macro_f1_mean) << ',' << num(a.macro_f1_std) << ','
        << num(a.fake_rate_mean) << ',' << num(a.fake_rate_std) << '\n';
}

void print_report(std::ostream& out, const MetricsReport& report) {
  out << std::fixed << std::setprecision(4);
  out << "n_test    " << report.n_test << '\n'
      << "accuracy  " << report.accuracy << '\n'
      << "macro_f1  " << report.macro_f1 << '\n'
      << "fake_rate " << report.fake_rate << '\n';
  for (std::size_t k = 0; k < report.per_class.size(); ++k) {
    const auto& c = report.per_class[k];
    out << "class " << k << "  precision " << c.precision << "  recall " << c.recall << "  f1 "
        << c.f1 << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace c2gan
