#include "c2gan/mlp.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "c2gan/error.hpp"

namespace c2gan {

namespace {

void require_positive(std::size_t value, const char* what) {
  if (value == 0) throw DimensionError(std::string(what) + " must be positive");
}

std::string hex(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double parse_hex(const std::string& token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  bool negative = false;
  if (first != last && *first == '-') {
    negative = true;
    ++first;
  }
  auto res = std::from_chars(first, last, v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != last) throw ParseError("bad parameter value '" + token + "'", 0);
  return negative ? -v : v;
}

}  // namespace

Mlp::Mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim, OutputKind kind)
    : weights_in(hidden_dim, input_dim),
      bias_in(hidden_dim, 0.0),
      weights_out(output_dim, hidden_dim),
      bias_out(output_dim, 0.0),
      output_kind(kind) {
  require_positive(input_dim, "input_dim");
  require_positive(hidden_dim, "hidden_dim");
  require_positive(output_dim, "output_dim");
}

Mlp Mlp::xavier(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                OutputKind kind, Rng& rng) {
  Mlp net(input_dim, hidden_dim, output_dim, kind);
  net.weights_in = xavier_init(input_dim, hidden_dim, rng);
  net.weights_out = xavier_init(hidden_dim, output_dim, rng);
  return net;
}

std::size_t Mlp::parameter_count() const {
  return weights_in.data.size() + bias_in.size() + weights_out.data.size() + bias_out.size();
}

std::array<std::span<double>, 4> Mlp::blocks() {
  return {std::span<double>(weights_in.data), std::span<double>(bias_in),
          std::span<double>(weights_out.data), std::span<double>(bias_out)};
}

std::array<std::span<const double>, 4> Mlp::blocks() const {
  return {std::span<const double>(weights_in.data), std::span<const double>(bias_in),
          std::span<const double>(weights_out.data), std::span<const double>(bias_out)};
}

MlpGradients MlpGradients::zeros_like(const Mlp& net) {
  MlpGradients g;
  g.weights_in = Matrix(net.weights_in.rows, net.weights_in.cols);
  g.bias_in.assign(net.bias_in.size(), 0.0);
  g.weights_out = Matrix(net.weights_out.rows, net.weights_out.cols);
  g.bias_out.assign(net.bias_out.size(), 0.0);
  g.input.assign(net.input_dim(), 0.0);
  return g;
}

std::array<std::span<double>, 4> MlpGradients::blocks() {
  return {std::span<double>(weights_in.data), std::span<double>(bias_in),
          std::span<double>(weights_out.data), std::span<double>(bias_out)};
}

std::array<std::span<const double>, 4> MlpGradients::blocks() const {
  return {std::span<const double>(weights_in.data), std::span<const double>(bias_in),
          std::span<const double>(weights_out.data), std::span<const double>(bias_out)};
}

void MlpGradients::scale(double factor) {
  for (auto block : blocks())
    for (double& v : block) v *= factor;
}

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  require_positive(fan_in, "fan_in");
  require_positive(fan_out, "fan_out");
  const double bound = xavier_bound(fan_in, fan_out);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(fan_out, fan_in);
  for (double& v : m.data) v = dist(rng);
  return m;
}

ForwardTrace forward(const Mlp& net, std::span<const double> input) {
  if (input.size() != net.input_dim())
    throw DimensionError("forward: input has length " + std::to_string(input.size()) +
                         ", network expects " + std::to_string(net.input_dim()));
  if (!all_finite(input)) throw NumericError("forward: non-finite input");

  ForwardTrace t;
  t.input.assign(input.begin(), input.end());
  const std::size_t hidden = net.hidden_dim();
  t.hidden_pre.resize(hidden);
  t.hidden_act.resize(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    t.hidden_pre[j] = dot(net.weights_in.row(j), input) + net.bias_in[j];
    t.hidden_act[j] = sigmoid(t.hidden_pre[j]);
  }
  const std::size_t out = net.output_dim();
  t.output_pre.resize(out);
  for (std::size_t k = 0; k < out; ++k)
    t.output_pre[k] = dot(net.weights_out.row(k), t.hidden_act) + net.bias_out[k];
  t.output = net.output_kind == OutputKind::Softmax ? softmax(t.output_pre) : t.output_pre;
  return t;
}

void backward_into(const Mlp& net, const ForwardTrace& trace, std::span<const double> output_grad,
                   std::span<const double> hidden_act_grad, MlpGradients& acc) {
  const std::size_t in = net.input_dim();
  const std::size_t hidden = net.hidden_dim();
  const std::size_t out = net.output_dim();
  if (trace.input.size() != in || trace.hidden_act.size() != hidden || output_grad.size() != out)
    throw DimensionError("backward: trace or gradient does not match network");
  if (!hidden_act_grad.empty() && hidden_act_grad.size() != hidden)
    throw DimensionError("backward: hidden gradient does not match network");
  if (acc.weights_in.rows != hidden || acc.weights_in.cols != in || acc.weights_out.rows != out)
    throw DimensionError("backward: accumulator does not match network");

  Vector hidden_grad(hidden, 0.0);
  for (std::size_t k = 0; k < out; ++k) {
    const double g = output_grad[k];
    acc.bias_out[k] += g;
    if (g == 0.0) continue;
    auto grow = acc.weights_out.row(k);
    auto wrow = net.weights_out.row(k);
    for (std::size_t j = 0; j < hidden; ++j) {
      grow[j] += g * trace.hidden_act[j];
      hidden_grad[j] += wrow[j] * g;
    }
  }
  if (!hidden_act_grad.empty())
    for (std::size_t j = 0; j < hidden; ++j) hidden_grad[j] += hidden_act_grad[j];

  acc.input.assign(in, 0.0);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double a = trace.hidden_act[j];
    const double pre_grad = hidden_grad[j] * a * (1.0 - a);
    acc.bias_in[j] += pre_grad;
    if (pre_grad == 0.0) continue;
    auto grow = acc.weights_in.row(j);
    auto wrow = net.weights_in.row(j);
    for (std::size_t i = 0; i < in; ++i) {
      grow[i] += pre_grad * trace.input[i];
      acc.input[i] += wrow[i] * pre_grad;
    }
  }
}

Vector input_gradient(const Mlp& net, const ForwardTrace& trace, std::span<const double> output_grad,
                      std::span<const double> hidden_act_grad) {
  const std::size_t in = net.input_dim();
  const std::size_t hidden = net.hidden_dim();
  const std::size_t out = net.output_dim();
  if (trace.input.size() != in || trace.hidden_act.size() != hidden || output_grad.size() != out)
    throw DimensionError("input_gradient: trace or gradient does not match network");
  if (!hidden_act_grad.empty() && hidden_act_grad.size() != hidden)
    throw DimensionError("input_gradient: hidden gradient does not match network");

  Vector hidden_grad(hidden, 0.0);
  if (!hidden_act_grad.empty()) hidden_grad.assign(hidden_act_grad.begin(), hidden_act_grad.end());
  for (std::size_t k = 0; k < out; ++k) {
    const double g = output_grad[k];
    if (g == 0.0) continue;
    auto wrow = net.weights_out.row(k);
    for (std::size_t j = 0; j < hidden; ++j) hidden_grad[j] += wrow[j] * g;
  }
  Vector grad(in, 0.0);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double a = trace.hidden_act[j];
    const double pre_grad = hidden_grad[j] * a * (1.0 - a);
    if (pre_grad == 0.0) continue;
    auto wrow = net.weights_in.row(j);
    for (std::size_t i = 0; i < in; ++i) grad[i] += wrow[i] * pre_grad;
  }
  return grad;
}

MlpGradients backward(const Mlp& net, const ForwardTrace& trace,
                      std::span<const double> output_grad) {
  MlpGradients g = MlpGradients::zeros_like(net);
  backward_into(net, trace, output_grad, {}, g);
  return g;
}

void write_mlp(std::ostream& out, const Mlp& net) {
  out << "mlp " << net.input_dim() << ' ' << net.hidden_dim() << ' ' << net.output_dim() << ' '
      << (net.output_kind == OutputKind::Softmax ? "softmax" : "linear") << '\n';
  for (auto block : net.blocks()) {
    bool first = true;
    for (double v : block) {
      if (!first) out << ' ';
      out << hex(v);
      first = false;
    }
    out << '\n';
  }
}

Mlp read_mlp(std::istream& in) {
  std::string tag, kind;
  std::size_t input = 0, hidden = 0, output = 0;
  if (!(in >> tag >> input >> hidden >> output >> kind) || tag != "mlp")
    throw ParseError("expected 'mlp <in> <hidden> <out> <kind>' header", 0);
  OutputKind ok;
  if (kind == "softmax") {
    ok = OutputKind::Softmax;
  } else if (kind == "linear") {
    ok = OutputKind::Linear;
  } else {
    throw ParseError("unknown output kind '" + kind + "'", 0);
  }
  Mlp net(input, hidden, output, ok);
  std::string token;
  for (auto block : net.blocks()) {
    for (double& v : block) {
      if (!(in >> token)) throw ParseError("truncated parameter block", 0);
      v = parse_hex(token);
      if (!std::isfinite(v)) throw NumericError("non-finite parameter in checkpoint");
    }
  }
  return net;
}

}  // namespace c2gan
