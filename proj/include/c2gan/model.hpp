#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "c2gan/linalg.hpp"
#include "c2gan/mlp.hpp"

namespace c2gan {

enum class View { One = 1, Two = 2 };

inline View other_view(View v) { return v == View::One ? View::Two : View::One; }

/// Generators G1, G2 and the (K+1)-way discriminator.
///
/// Input layouts are fixed:
///   gen1: [noise (d1) || view2 (d2)] -> view1 (d1), linear output
///   gen2: [noise (d2) || view1 (d1)] -> view2 (d2), linear output
///   disc: [view1 (d1) || view2 (d2)] -> K+1 probabilities, index K is fake
struct TripartiteModel {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t num_classes = 0;
  Mlp gen1;
  Mlp gen2;
  Mlp disc;

  /// Xavier-initialized players.
  static TripartiteModel create(std::size_t d1, std::size_t d2, std::size_t num_classes,
                                std::size_t hidden_dim, Rng& rng);
  /// All parameters zero.
  static TripartiteModel zeros(std::size_t d1, std::size_t d2, std::size_t num_classes,
                               std::size_t hidden_dim = kDefaultHiddenDim);

  std::size_t fake_index() const { return num_classes; }
  std::size_t view_dim(View v) const { return v == View::One ? d1 : d2; }
  Mlp& generator(View v) { return v == View::One ? gen1 : gen2; }
  const Mlp& generator(View v) const { return v == View::One ? gen1 : gen2; }

  /// Throws DimensionError if the networks disagree with (d1, d2, K).
  void validate() const;

  bool operator==(const TripartiteModel&) const = default;
};

/// Generator input: [noise || condition].
Vector generator_input(std::span<const double> noise, std::span<const double> condition);

/// Discriminator input: [view1 || view2].
Vector pair_input(std::span<const double> view1, std::span<const double> view2);

/// Completes view `which` from the other (observed) view and a noise vector in
/// [-1, 1]^{d_which}. The output layer is linear.
Vector generate(const TripartiteModel& model, View which, std::span<const double> observed_other,
                std::span<const double> noise);

struct Discrimination {
  Vector probabilities;  // K+1 entries
  Vector features;       // hidden sigmoid activations
};

Discrimination discriminate(const TripartiteModel& model, std::span<const double> view1,
                            std::span<const double> view2);

/// Sum of the K true-class probabilities, i.e. 1 - p_fake.
double aggregate_d(std::span<const double> probabilities);

enum class DecisionKind { Fake, Class };

struct Decision {
  DecisionKind kind = DecisionKind::Class;
  std::size_t label = 0;  // meaningful only for Class
  Vector probabilities;

  bool is_fake() const { return kind == DecisionKind::Fake; }
};

/// Fake iff p_fake > sum of the class probabilities (strict); otherwise the
/// argmax over the first K entries, lowest index on ties.
Decision decide_probabilities(std::span<const double> probabilities);

Decision decide(const TripartiteModel& model, std::span<const double> view1,
                std::span<const double> view2);

struct Checkpoint {
  TripartiteModel model;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

inline constexpr const char* kCheckpointMagic = "C2GAN-CKPT-1";

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace c2gan
