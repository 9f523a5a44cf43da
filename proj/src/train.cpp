#include "c2gan/train.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "c2gan/config.hpp"
#include "c2gan/error.hpp"

namespace c2gan {

void TrainConfig::validate() const {
  if (minibatch_size == 0) throw ConfigError("minibatch_size must be at least 1");
  if (hidden_dim == 0) throw ConfigError("hidden_dim must be at least 1");
  if (!(adam.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(fm_weight >= 0.0)) throw ConfigError("fm_weight must be nonnegative");
  if (!(log_clamp >= 0.0 && log_clamp < 1.0)) throw ConfigError("log_clamp must lie in [0, 1)");
  if (checkpoint_every > 0 && checkpoint_path.empty())
    throw ConfigError("checkpoint_every requires checkpoint_path");
}

TrainConfig train_config_from_map(const std::map<std::string, std::string>& cfg) {
  TrainConfig c;
  c.iterations = config_size(cfg, "iterations", c.iterations);
  c.minibatch_size = config_size(cfg, "minibatch_size", c.minibatch_size);
  c.hidden_dim = config_size(cfg, "hidden_dim", c.hidden_dim);
  c.adam.alpha = config_double(cfg, "alpha", c.adam.alpha);
  c.adam.beta1 = config_double(cfg, "beta1", c.adam.beta1);
  c.adam.beta2 = config_double(cfg, "beta2", c.adam.beta2);
  c.adam.epsilon = config_double(cfg, "epsilon", c.adam.epsilon);
  c.seed = config_u64(cfg, "seed", c.seed);
  c.fm_weight = config_double(cfg, "fm_weight", c.fm_weight);
  c.log_clamp = config_double(cfg, "log_clamp", c.log_clamp);
  c.eval_every = config_size(cfg, "eval_every", c.eval_every);
  c.checkpoint_every = config_size(cfg, "checkpoint_every", c.checkpoint_every);
  c.checkpoint_path = config_string(cfg, "checkpoint_path", c.checkpoint_path);
  c.validate();
  return c;
}

namespace {

// -log(p) with the optional lower clamp. Returns whether the clamp fired, in
// which case the term is locally constant and contributes no gradient.
struct LogTerm {
  double value;
  bool clamped;
};

LogTerm neg_log(double p, double clamp) {
  if (clamp > 0.0 && p < clamp) return {-std::log(clamp), true};
  return {-std::log(p), false};
}

std::size_t batch_size_of(const Minibatch& batch) {
  const std::size_t m = batch.full_pairs.size();
  if (m == 0 || batch.missing_v1.empty() || batch.missing_v2.empty())
    throw ConfigError("minibatch has an empty partition");
  if (batch.missing_v1.size() != m || batch.missing_v2.size() != m)
    throw ConfigError("minibatch partitions must have equal size m_b");
  if (batch.noise_v1.size() != m || batch.noise_v2.size() != m)
    throw ConfigError("minibatch needs one noise vector per incomplete example");
  return m;
}

struct Completion {
  ForwardTrace generator;
  Vector pair;  // discriminator input with the generated view in place
};

Completion complete(const TripartiteModel& model, View which, const MultiviewExample& ex,
                    const Vector& noise) {
  const auto& observed = ex.view(other_view(which));
  if (!observed) throw DataError("incomplete example lacks its observed view");
  if (noise.size() != model.view_dim(which)) throw DimensionError("noise has wrong length");
  Completion c;
  c.generator = forward(model.generator(which), generator_input(noise, *observed));
  c.pair = which == View::One ? pair_input(c.generator.output, *observed)
                              : pair_input(*observed, c.generator.output);
  return c;
}

Vector full_pair(const MultiviewExample& ex) {
  if (!ex.complete()) throw DataError("expected a complete pair");
  return pair_input(*ex.view1, *ex.view2);
}

// Value of ||mean(real) - mean(gen)|| and the gradient with respect to each
// generated feature vector (identical for every generated sample).
struct FeatureGap {
  double value = 0.0;
  Vector per_sample_grad;
};

FeatureGap feature_gap(std::span<const Vector> real_features, std::span<const Vector> gen_features) {
  if (real_features.empty() || gen_features.empty())
    throw ConfigError("feature matching needs non-empty real and generated batches");
  const std::size_t h = real_features.front().size();
  Vector diff(h, 0.0);
  Vector gen_mean(h, 0.0);
  for (const auto& f : real_features)
    for (std::size_t j = 0; j < h; ++j) diff[j] += f[j];
  for (const auto& f : gen_features)
    for (std::size_t j = 0; j < h; ++j) gen_mean[j] += f[j];
  const double nr = static_cast<double>(real_features.size());
  const double ng = static_cast<double>(gen_features.size());
  for (std::size_t j = 0; j < h; ++j) diff[j] = diff[j] / nr - gen_mean[j] / ng;

  FeatureGap gap;
  gap.value = std::sqrt(dot(diff, diff));
  gap.per_sample_grad.assign(h, 0.0);
  // The norm is not differentiable at 0; use the zero subgradient there.
  if (gap.value > 0.0)
    for (std::size_t j = 0; j < h; ++j) gap.per_sample_grad[j] = -diff[j] / (gap.value * ng);
  return gap;
}

}  // namespace

DiscriminatorLoss loss_discriminator(const TripartiteModel& model, const Minibatch& batch,
                                     double log_clamp) {
  const std::size_t m = batch_size_of(batch);
  const std::size_t k_classes = model.num_classes;
  const std::size_t fake = model.fake_index();
  const double class_w = 1.0 / (static_cast<double>(m) * static_cast<double>(k_classes + 1));
  const double fake_w = 1.0 / (2.0 * static_cast<double>(m));

  DiscriminatorLoss out;
  out.grads = MlpGradients::zeros_like(model.disc);
  Vector logit_grad(k_classes + 1);

  auto accumulate = [&](const Vector& pair, std::size_t target, double weight, double& term) {
    const auto trace = forward(model.disc, pair);
    const auto lt = neg_log(trace.output[target], log_clamp);
    term += weight * lt.value;
    if (lt.clamped) {
      ++out.clamp_events;
      return;
    }
    for (std::size_t k = 0; k <= k_classes; ++k)
      logit_grad[k] = weight * (trace.output[k] - (k == target ? 1.0 : 0.0));
    backward_into(model.disc, trace, logit_grad, {}, out.grads);
  };

  for (const auto& ex : batch.full_pairs) accumulate(full_pair(ex), ex.label_index(), class_w, out.full_term);
  for (std::size_t i = 0; i < m; ++i)
    accumulate(complete(model, View::One, batch.missing_v1[i], batch.noise_v1[i]).pair, fake, fake_w,
               out.missing1_term);
  for (std::size_t i = 0; i < m; ++i)
    accumulate(complete(model, View::Two, batch.missing_v2[i], batch.noise_v2[i]).pair, fake, fake_w,
               out.missing2_term);

  out.value = out.full_term + out.missing1_term + out.missing2_term;
  return out;
}

FeatureMatching feature_matching_penalty(const TripartiteModel& model,
                                         std::span<const Vector> real_pairs,
                                         std::span<const Vector> generated_pairs) {
  std::vector<Vector> real_features, gen_features;
  std::vector<ForwardTrace> gen_traces;
  for (const auto& p : real_pairs) real_features.push_back(forward(model.disc, p).hidden_act);
  for (const auto& p : generated_pairs) {
    gen_traces.push_back(forward(model.disc, p));
    gen_features.push_back(gen_traces.back().hidden_act);
  }
  const auto gap = feature_gap(real_features, gen_features);
  FeatureMatching out;
  out.value = gap.value;
  const Vector no_output_grad(model.disc.output_dim(), 0.0);
  for (const auto& t : gen_traces)
    out.generated_input_grads.push_back(
        input_gradient(model.disc, t, no_output_grad, gap.per_sample_grad));
  return out;
}

GeneratorLoss loss_generator(const TripartiteModel& model, View which, const Minibatch& batch,
                             const GeneratorLossWeights& weights) {
  const std::size_t m = batch_size_of(batch);
  const std::size_t k_classes = model.num_classes;
  const double class_w = weights.class_weight /
                         (static_cast<double>(m) * static_cast<double>(k_classes + 1));
  const auto& examples = batch.missing(which);
  const auto& noise = batch.noise(which);

  std::vector<Completion> completions;
  std::vector<ForwardTrace> disc_traces;
  std::vector<Vector> gen_features;
  completions.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    completions.push_back(complete(model, which, examples[i], noise[i]));
    disc_traces.push_back(forward(model.disc, completions.back().pair));
    gen_features.push_back(disc_traces.back().hidden_act);
  }
  std::vector<Vector> real_features;
  for (const auto& ex : batch.full_pairs) real_features.push_back(forward(model.disc, full_pair(ex)).hidden_act);
  const auto gap = feature_gap(real_features, gen_features);

  GeneratorLoss out;
  out.fm_term = gap.value;
  out.grads = MlpGradients::zeros_like(model.generator(which));
  Vector fm_hidden_grad = gap.per_sample_grad;
  for (double& g : fm_hidden_grad) g *= weights.fm_weight;

  const std::size_t offset = which == View::One ? 0 : model.d1;
  const std::size_t width = model.view_dim(which);
  Vector logit_grad(k_classes + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& trace = disc_traces[i];
    const std::size_t target = examples[i].label_index();
    const auto lt = neg_log(trace.output[target], weights.log_clamp);
    out.class_term += class_w * lt.value;
    if (lt.clamped) {
      ++out.clamp_events;
      logit_grad.assign(k_classes + 1, 0.0);
    } else {
      for (std::size_t k = 0; k <= k_classes; ++k)
        logit_grad[k] = class_w * (trace.output[k] - (k == target ? 1.0 : 0.0));
    }
    const Vector pair_grad = input_gradient(model.disc, trace, logit_grad, fm_hidden_grad);
    const std::span<const double> view_grad(pair_grad.data() + offset, width);
    backward_into(model.generator(which), completions[i].generator, view_grad, {}, out.grads);
  }
  out.value = out.class_term + weights.fm_weight * out.fm_term;
  return out;
}

Minibatch sample_minibatch(const PartitionedDataset& data, std::size_t minibatch_size, Rng& rng) {
  if (minibatch_size == 0) throw ConfigError("minibatch_size must be at least 1");
  if (data.s_full.empty()) throw ConfigError("cannot sample: subset s_full is empty");
  if (data.s_missing1.empty()) throw ConfigError("cannot sample: subset s_missing1 is empty");
  if (data.s_missing2.empty()) throw ConfigError("cannot sample: subset s_missing2 is empty");

  Minibatch b;
  auto draw = [&](const std::vector<MultiviewExample>& subset, std::vector<MultiviewExample>& dst) {
    std::uniform_int_distribution<std::size_t> pick(0, subset.size() - 1);
    dst.reserve(minibatch_size);
    for (std::size_t i = 0; i < minibatch_size; ++i) dst.push_back(subset[pick(rng)]);
  };
  draw(data.s_full, b.full_pairs);
  draw(data.s_missing1, b.missing_v1);
  draw(data.s_missing2, b.missing_v2);

  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto noise = [&](std::size_t dim, std::vector<Vector>& dst) {
    for (std::size_t i = 0; i < minibatch_size; ++i) {
      Vector z(dim);
      for (double& v : z) v = unit(rng);
      dst.push_back(std::move(z));
    }
  };
  noise(data.d1, b.noise_v1);
  noise(data.d2, b.noise_v2);
  return b;
}

double decide_accuracy(const TripartiteModel& model, std::span<const MultiviewExample> pairs) {
  if (pairs.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : pairs) {
    if (!ex.complete()) throw DataError("decide_accuracy needs complete pairs");
    const auto d = decide(model, *ex.view1, *ex.view2);
    if (!d.is_fake() && d.label == ex.label_index()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

TrainingSession::TrainingSession(TripartiteModel& model, const PartitionedDataset& data,
                                 const TrainConfig& config)
    : model_(model),
      data_(data),
      config_(config),
      rng_(config.seed),
      disc_state_(AdamState::for_network(model.disc, config.adam)),
      gen1_state_(AdamState::for_network(model.gen1, config.adam)),
      gen2_state_(AdamState::for_network(model.gen2, config.adam)) {
  config_.validate();
  model_.validate();
  if (data_.d1 != model_.d1 || data_.d2 != model_.d2 || data_.num_classes != model_.num_classes)
    throw DimensionError("dataset dimensions do not match the model");
}

Minibatch TrainingSession::next_batch() {
  return sample_minibatch(data_, config_.minibatch_size, rng_);
}

DiscriminatorLoss TrainingSession::update_discriminator(const Minibatch& batch) {
  auto loss = loss_discriminator(model_, batch, config_.log_clamp);
  adam_step(model_.disc, loss.grads, disc_state_);
  clamp_events_ += loss.clamp_events;
  return loss;
}

GeneratorLoss TrainingSession::update_generator(View which, const Minibatch& batch) {
  const GeneratorLossWeights weights{1.0, config_.fm_weight, config_.log_clamp};
  auto loss = loss_generator(model_, which, batch, weights);
  adam_step(model_.generator(which), loss.grads, which == View::One ? gen1_state_ : gen2_state_);
  clamp_events_ += loss.clamp_events;
  return loss;
}

IterationMetrics TrainingSession::step() {
  IterationMetrics row;
  row.iteration = iterations_done_;
  try {
    const Minibatch batch = next_batch();
    row.loss_d = update_discriminator(batch).value;
    row.loss_g1 = update_generator(View::One, batch).value;
    row.loss_g2 = update_generator(View::Two, batch).value;
    if (!std::isfinite(row.loss_d) || !std::isfinite(row.loss_g1) || !std::isfinite(row.loss_g2))
      throw NumericError("non-finite loss");
  } catch (const NumericError& e) {
    throw NumericError("iteration " + std::to_string(iterations_done_) + ": " + e.what());
  }
  ++iterations_done_;
  return row;
}

TrainLog train(TripartiteModel& model, const PartitionedDataset& data, const TrainConfig& config,
               std::span<const MultiviewExample> heldout) {
  TrainLog log;
  TrainingSession session(model, data, config);
  log.rows.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    auto row = session.step();
    if (config.eval_every > 0 && !heldout.empty() && (it + 1) % config.eval_every == 0)
      row.heldout_accuracy = decide_accuracy(model, heldout);
    log.rows.push_back(row);
    if (config.checkpoint_every > 0 && (it + 1) % config.checkpoint_every == 0)
      save_checkpoint(config.checkpoint_path, Checkpoint{model, config.seed, it + 1});
  }
  log.clamp_events = session.clamp_events();
  return log;
}

namespace {

std::string csv_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_metrics_csv(std::ostream& out, const TrainLog& log) {
  out << "iter,loss_d,loss_g1,loss_g2,heldout_acc\n";
  for (const auto& r : log.rows) {
    out << r.iteration << ',' << csv_number(r.loss_d) << ',' << csv_number(r.loss_g1) << ','
        << csv_number(r.loss_g2) << ',';
    if (r.heldout_accuracy) out << csv_number(*r.heldout_accuracy);
    out << '\n';
  }
}

}  // namespace c2gan
