#include "c2gan/model.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "c2gan/error.hpp"

namespace c2gan {

namespace {

void check_length(std::span<const double> v, std::size_t expected, const char* what) {
  if (v.size() != expected)
    throw DimensionError(std::string(what) + " has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(expected));
}

}  // namespace

TripartiteModel TripartiteModel::create(std::size_t d1, std::size_t d2, std::size_t num_classes,
                                        std::size_t hidden_dim, Rng& rng) {
  if (d1 == 0 || d2 == 0 || num_classes == 0)
    throw DimensionError("model dimensions must be positive");
  TripartiteModel m;
  m.d1 = d1;
  m.d2 = d2;
  m.num_classes = num_classes;
  m.disc = Mlp::xavier(d1 + d2, hidden_dim, num_classes + 1, OutputKind::Softmax, rng);
  m.gen1 = Mlp::xavier(d1 + d2, hidden_dim, d1, OutputKind::Linear, rng);
  m.gen2 = Mlp::xavier(d1 + d2, hidden_dim, d2, OutputKind::Linear, rng);
  return m;
}

TripartiteModel TripartiteModel::zeros(std::size_t d1, std::size_t d2, std::size_t num_classes,
                                       std::size_t hidden_dim) {
  if (d1 == 0 || d2 == 0 || num_classes == 0)
    throw DimensionError("model dimensions must be positive");
  TripartiteModel m;
  m.d1 = d1;
  m.d2 = d2;
  m.num_classes = num_classes;
  m.disc = Mlp(d1 + d2, hidden_dim, num_classes + 1, OutputKind::Softmax);
  m.gen1 = Mlp(d1 + d2, hidden_dim, d1, OutputKind::Linear);
  m.gen2 = Mlp(d1 + d2, hidden_dim, d2, OutputKind::Linear);
  return m;
}

void TripartiteModel::validate() const {
  const std::size_t in = d1 + d2;
  if (gen1.input_dim() != in || gen1.output_dim() != d1 || gen1.output_kind != OutputKind::Linear)
    throw DimensionError("gen1 does not match (d1, d2)");
  if (gen2.input_dim() != in || gen2.output_dim() != d2 || gen2.output_kind != OutputKind::Linear)
    throw DimensionError("gen2 does not match (d1, d2)");
  if (disc.input_dim() != in || disc.output_dim() != num_classes + 1 ||
      disc.output_kind != OutputKind::Softmax)
    throw DimensionError("discriminator does not match (d1, d2, K)");
}

Vector generator_input(std::span<const double> noise, std::span<const double> condition) {
  return concat(noise, condition);
}

Vector pair_input(std::span<const double> view1, std::span<const double> view2) {
  return concat(view1, view2);
}

Vector generate(const TripartiteModel& model, View which, std::span<const double> observed_other,
                std::span<const double> noise) {
  check_length(noise, model.view_dim(which), "noise");
  check_length(observed_other, model.view_dim(other_view(which)), "observed view");
  return forward(model.generator(which), generator_input(noise, observed_other)).output;
}

Discrimination discriminate(const TripartiteModel& model, std::span<const double> view1,
                            std::span<const double> view2) {
  check_length(view1, model.d1, "view1");
  check_length(view2, model.d2, "view2");
  auto trace = forward(model.disc, pair_input(view1, view2));
  return {std::move(trace.output), std::move(trace.hidden_act)};
}

double aggregate_d(std::span<const double> probabilities) {
  if (probabilities.size() < 2) throw DimensionError("aggregate_d: need at least K+1 = 2 entries");
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < probabilities.size(); ++k) s += probabilities[k];
  return s;
}

Decision decide_probabilities(std::span<const double> probabilities) {
  if (probabilities.size() < 2) throw DimensionError("decide: need at least K+1 = 2 entries");
  const std::size_t fake = probabilities.size() - 1;
  Decision d;
  d.probabilities.assign(probabilities.begin(), probabilities.end());
  if (probabilities[fake] > aggregate_d(probabilities)) {
    d.kind = DecisionKind::Fake;
    d.label = fake;
    return d;
  }
  d.kind = DecisionKind::Class;
  std::size_t best = 0;
  for (std::size_t k = 1; k < fake; ++k)
    if (probabilities[k] > probabilities[best]) best = k;
  d.label = best;
  return d;
}

Decision decide(const TripartiteModel& model, std::span<const double> view1,
                std::span<const double> view2) {
  return decide_probabilities(discriminate(model, view1, view2).probabilities);
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& m = ckpt.model;
  out << kCheckpointMagic << '\n';
  out << "dims " << m.d1 << ' ' << m.d2 << ' ' << m.num_classes << '\n';
  out << "seed " << ckpt.seed << '\n';
  out << "step " << ckpt.step << '\n';
  out << "layout gen1=noise1,view2 gen2=noise2,view1 disc=view1,view2\n";
  out << "net disc\n";
  write_mlp(out, m.disc);
  out << "net gen1\n";
  write_mlp(out, m.gen1);
  out << "net gen2\n";
  write_mlp(out, m.gen2);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic)
    throw ParseError("not a checkpoint (missing " + std::string(kCheckpointMagic) + " header)", 1);
  Checkpoint c;
  std::string key, layout_rest;
  auto expect = [&](const char* k) {
    if (!(in >> key) || key != k) throw ParseError(std::string("checkpoint: expected '") + k + "'", 0);
  };
  expect("dims");
  in >> c.model.d1 >> c.model.d2 >> c.model.num_classes;
  expect("seed");
  in >> c.seed;
  expect("step");
  in >> c.step;
  expect("layout");
  std::getline(in, layout_rest);
  if (layout_rest != " gen1=noise1,view2 gen2=noise2,view1 disc=view1,view2")
    throw ParseError("checkpoint: unsupported input layout", 0);
  for (const char* name : {"disc", "gen1", "gen2"}) {
    std::string tag, which;
    if (!(in >> tag >> which) || tag != "net" || which != name)
      throw ParseError(std::string("checkpoint: expected 'net ") + name + "'", 0);
    Mlp net = read_mlp(in);
    if (which == "disc") c.model.disc = std::move(net);
    else if (which == "gen1") c.model.gen1 = std::move(net);
    else c.model.gen2 = std::move(net);
  }
  if (!in) throw ParseError("checkpoint: truncated", 0);
  c.model.validate();
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_checkpoint(out, ckpt);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace c2gan
