#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c2gan/adam.hpp"
#include "c2gan/data.hpp"
#include "c2gan/model.hpp"

namespace c2gan {

/// m_b examples from each subset plus the noise used to complete the
/// incomplete ones.
struct Minibatch {
  std::vector<MultiviewExample> full_pairs;
  std::vector<MultiviewExample> missing_v1;
  std::vector<MultiviewExample> missing_v2;
  std::vector<Vector> noise_v1;  // U(-1,1)^{d1}, one per missing_v1 example
  std::vector<Vector> noise_v2;  // U(-1,1)^{d2}, one per missing_v2 example

  const std::vector<MultiviewExample>& missing(View v) const {
    return v == View::One ? missing_v1 : missing_v2;
  }
  const std::vector<Vector>& noise(View v) const { return v == View::One ? noise_v1 : noise_v2; }
};

struct TrainConfig {
  std::size_t iterations = 1000;
  std::size_t minibatch_size = 32;
  std::size_t hidden_dim = kDefaultHiddenDim;
  AdamHyper adam;
  std::uint64_t seed = 0;
  double fm_weight = 1.0;
  /// Lower clamp for log arguments; 0 disables clamping.
  double log_clamp = 1e-12;
  /// Held-out accuracy is computed every `eval_every` iterations (0 = never).
  std::size_t eval_every = 0;
  /// A checkpoint is written every `checkpoint_every` iterations (0 = never).
  std::size_t checkpoint_every = 0;
  std::string checkpoint_path;

  void validate() const;
};

TrainConfig train_config_from_map(const std::map<std::string, std::string>& cfg);

/// Loss weights for the generator objective.
struct GeneratorLossWeights {
  double class_weight = 1.0;
  double fm_weight = 1.0;
  double log_clamp = 1e-12;
};

struct DiscriminatorLoss {
  double value = 0.0;
  double full_term = 0.0;      // class term over full pairs
  double missing1_term = 0.0;  // fake term over pairs completed by gen1
  double missing2_term = 0.0;  // fake term over pairs completed by gen2
  std::size_t clamp_events = 0;
  MlpGradients grads;  // with respect to the discriminator
};

/// Empirical discriminator loss. Generator outputs enter as constants.
DiscriminatorLoss loss_discriminator(const TripartiteModel& model, const Minibatch& batch,
                                     double log_clamp = 1e-12);

struct FeatureMatching {
  double value = 0.0;
  /// d value / d (discriminator input) for every generated pair.
  std::vector<Vector> generated_input_grads;
};

/// || mean f(real) - mean f(generated) ||_2 with f the discriminator's hidden
/// sigmoid layer. Pairs are discriminator inputs [view1 || view2].
FeatureMatching feature_matching_penalty(const TripartiteModel& model,
                                         std::span<const Vector> real_pairs,
                                         std::span<const Vector> generated_pairs);

struct GeneratorLoss {
  double value = 0.0;
  double class_term = 0.0;
  double fm_term = 0.0;  // unweighted penalty
  std::size_t clamp_events = 0;
  MlpGradients grads;  // with respect to the generator of the chosen view
};

/// Class-assignment loss of completed pairs plus weighted feature matching,
/// differentiated through the frozen discriminator into G_v.
GeneratorLoss loss_generator(const TripartiteModel& model, View which, const Minibatch& batch,
                             const GeneratorLossWeights& weights = {});

/// Uniform sampling with replacement inside each subset; fresh U(-1,1) noise.
Minibatch sample_minibatch(const PartitionedDataset& data, std::size_t minibatch_size, Rng& rng);

struct IterationMetrics {
  std::size_t iteration = 0;
  double loss_d = 0.0;
  double loss_g1 = 0.0;
  double loss_g2 = 0.0;
  std::optional<double> heldout_accuracy;
};

struct TrainLog {
  std::vector<IterationMetrics> rows;
  std::size_t clamp_events = 0;
};

/// Stepwise view of the training loop; `train` drives it. Exposes each
/// player's update separately so callers can observe the game in between.
class TrainingSession {
 public:
  TrainingSession(TripartiteModel& model, const PartitionedDataset& data, const TrainConfig& config);

  Minibatch next_batch();
  DiscriminatorLoss update_discriminator(const Minibatch& batch);
  GeneratorLoss update_generator(View which, const Minibatch& batch);

  /// One full iteration: sample, then update D, G1, G2 in that order.
  IterationMetrics step();

  std::size_t iterations_done() const { return iterations_done_; }
  std::size_t clamp_events() const { return clamp_events_; }

 private:
  TripartiteModel& model_;
  const PartitionedDataset& data_;
  TrainConfig config_;
  Rng rng_;
  AdamState disc_state_;
  AdamState gen1_state_;
  AdamState gen2_state_;
  std::size_t iterations_done_ = 0;
  std::size_t clamp_events_ = 0;
};

/// Sequential three-player training: per iteration one minibatch, then Adam
/// updates of D, G1 and G2 in that order on the same batch.
/// `heldout` (complete pairs) feeds the optional accuracy column.
TrainLog train(TripartiteModel& model, const PartitionedDataset& data, const TrainConfig& config,
               std::span<const MultiviewExample> heldout = {});

/// Fraction of complete pairs the decide rule assigns to their true class.
double decide_accuracy(const TripartiteModel& model, std::span<const MultiviewExample> pairs);

void write_metrics_csv(std::ostream& out, const TrainLog& log);

}  // namespace c2gan
