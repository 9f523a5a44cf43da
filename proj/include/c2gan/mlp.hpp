#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>

#include "c2gan/linalg.hpp"

namespace c2gan {

using Rng = std::mt19937_64;

inline constexpr std::size_t kDefaultHiddenDim = 200;

enum class OutputKind { Linear, Softmax };

/// One-hidden-layer dense network: sigmoid hidden layer, linear or softmax
/// output.
struct Mlp {
  Matrix weights_in;   // hidden x input
  Vector bias_in;      // hidden
  Matrix weights_out;  // output x hidden
  Vector bias_out;     // output
  OutputKind output_kind = OutputKind::Linear;

  Mlp() = default;
  /// All-zero parameters.
  Mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim, OutputKind kind);

  /// Glorot-uniform weights, zero biases.
  static Mlp xavier(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                    OutputKind kind, Rng& rng);

  std::size_t input_dim() const { return weights_in.cols; }
  std::size_t hidden_dim() const { return weights_in.rows; }
  std::size_t output_dim() const { return weights_out.rows; }
  std::size_t parameter_count() const;

  /// The four parameter blocks in a fixed order: W_in, b_in, W_out, b_out.
  std::array<std::span<double>, 4> blocks();
  std::array<std::span<const double>, 4> blocks() const;

  bool operator==(const Mlp&) const = default;
};

/// Activations cached by `forward` for use in `backward`. `hidden_act` is
/// also the feature map used by feature matching.
struct ForwardTrace {
  Vector input;
  Vector hidden_pre;
  Vector hidden_act;
  Vector output_pre;
  Vector output;
};

/// Gradients for every parameter block plus the gradient with respect to the
/// network input.
struct MlpGradients {
  Matrix weights_in;
  Vector bias_in;
  Matrix weights_out;
  Vector bias_out;
  Vector input;

  static MlpGradients zeros_like(const Mlp& net);

  std::array<std::span<double>, 4> blocks();
  std::array<std::span<const double>, 4> blocks() const;

  void scale(double factor);
};

/// (fan_out x fan_in) matrix, entries ~ U[-L, L] with L = sqrt(6 / (fan_in + fan_out)).
Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Glorot bound sqrt(6 / (fan_in + fan_out)).
double xavier_bound(std::size_t fan_in, std::size_t fan_out);

ForwardTrace forward(const Mlp& net, std::span<const double> input);

/// Backpropagates `output_grad` (the loss gradient with respect to the
/// pre-activation output, i.e. the logits for softmax networks) and an
/// optional extra gradient arriving directly at the hidden activations.
/// Parameter gradients are added into `acc`; `acc.input` is overwritten with
/// the gradient with respect to this trace's input.
void backward_into(const Mlp& net, const ForwardTrace& trace, std::span<const double> output_grad,
                   std::span<const double> hidden_act_grad, MlpGradients& acc);

/// Gradient with respect to the input only; parameter gradients are skipped.
Vector input_gradient(const Mlp& net, const ForwardTrace& trace, std::span<const double> output_grad,
                      std::span<const double> hidden_act_grad = {});

/// Fresh gradients for a single sample.
MlpGradients backward(const Mlp& net, const ForwardTrace& trace,
                      std::span<const double> output_grad);

/// Text serialization with exact (hex-float) parameter values.
void write_mlp(std::ostream& out, const Mlp& net);
Mlp read_mlp(std::istream& in);

}  // namespace c2gan
