#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c2gan/data.hpp"
#include "c2gan/model.hpp"
#include "c2gan/train.hpp"

namespace c2gan {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::vector<ClassScores> per_class;
  double macro_f1 = 0.0;
  double fake_rate = 0.0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  /// confusion[truth][prediction]; column K counts Fake decisions.
  std::vector<std::vector<std::size_t>> confusion;
};

/// Scores predictions against labels; `std::nullopt` marks a Fake decision,
/// which always counts as an error.
MetricsReport score_predictions(std::span<const std::size_t> truth,
                                std::span<const std::optional<std::size_t>> predicted,
                                std::size_t num_classes);

enum class Scenario { TestComplete, TestOnView1Generated, TestOnView2Generated };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

/// Applies the decide rule to each test pair. For the generated scenarios the
/// named view is discarded and regenerated from the other view with one fresh
/// U(-1,1) noise draw.
MetricsReport evaluate(const TripartiteModel& model, std::span<const MultiviewExample> test,
                       Scenario scenario, std::uint64_t seed);

/// K-way softmax classifier on a single view.
struct SingleviewClassifier {
  View view = View::One;
  Mlp net;

  std::size_t predict(std::span<const double> x) const;
};

struct SingleviewResult {
  SingleviewClassifier classifier;
  MetricsReport report;  // on `test` when given, otherwise on the training pool
};

/// Trains a discriminator-shaped classifier with Adam on cross-entropy over
/// every training example whose view `view` is observed.
SingleviewResult train_singleview_baseline(View view, const PartitionedDataset& data,
                                           const TrainConfig& config,
                                           std::span<const MultiviewExample> test = {});

MetricsReport evaluate_singleview(const SingleviewClassifier& clf,
                                  std::span<const MultiviewExample> test);

struct ExperimentSpec {
  std::size_t n_repeats = 20;
  std::vector<Scenario> scenarios{Scenario::TestComplete};
  /// Exactly one data source: a synthetic spec or a pool of complete pairs.
  std::optional<SyntheticSpec> synthetic;
  std::vector<MultiviewExample> pool;
  std::size_t pool_d1 = 0, pool_d2 = 0, pool_classes = 0;
  std::size_t m_full = 0, m_missing1 = 0, m_missing2 = 0;
  TrainConfig train;
  bool singleview_baselines = true;
  std::uint64_t seed = 0;

  void validate() const;
};

ExperimentSpec experiment_spec_from_config(const std::map<std::string, std::string>& cfg);

/// One metrics row of one repeat.
struct ExperimentRow {
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::string method;  // "c2gan:<scenario>", "singleview1", "singleview2"
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double fake_rate = 0.0;
  double bayes_accuracy = 0.0;  // NaN for file-backed experiments
};

struct AggregateRow {
  std::string method;
  std::size_t n = 0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  double macro_f1_mean = 0.0, macro_f1_std = 0.0;
  double fake_rate_mean = 0.0, fake_rate_std = 0.0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  std::vector<AggregateRow> aggregate;

  /// Rows of one method in repeat order.
  std::vector<ExperimentRow> method_rows(const std::string& method) const;
};

/// Population mean and standard deviation per method over `rows`.
std::vector<AggregateRow> aggregate_rows(std::span<const ExperimentRow> rows);

ExperimentReport run_experiment(const ExperimentSpec& spec);

void write_experiment_csv(std::ostream& out, const ExperimentReport& report);

void print_report(std::ostream& out, const MetricsReport& report);

}  // namespace c2gan
