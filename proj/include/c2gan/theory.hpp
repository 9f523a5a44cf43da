#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>

#include "c2gan/linalg.hpp"

namespace c2gan::theory {

/// Probability table over a finite (n1 x n2) two-view support.
struct DiscreteJoint {
  Matrix table;

  DiscreteJoint() = default;
  explicit DiscreteJoint(Matrix t);

  std::size_t n1() const { return table.rows; }
  std::size_t n2() const { return table.cols; }

  /// Throws InvariantError unless entries are >= 0 and sum to 1 within 1e-12.
  void validate() const;

  /// Normalizes nonnegative weights into a distribution.
  static DiscreteJoint from_weights(Matrix weights);
};

/// Auxiliary discriminator values (probability of "real") per support cell.
struct DiscriminatorTable {
  Matrix table;
};

inline constexpr double kValueLogFloor = 1e-300;

DiscreteJoint mixture(const DiscreteJoint& pg1, const DiscreteJoint& pg2);

/// p_real / (p_real + p_mix) per cell; 0.5 where both vanish.
DiscriminatorTable optimal_discriminator(const DiscreteJoint& p_real, const DiscreteJoint& pg1,
                                         const DiscreteJoint& pg2);

/// sum p_real log D + 1/2 sum pg1 log(1 - D) + 1/2 sum pg2 log(1 - D).
double value_function(const DiscriminatorTable& d, const DiscreteJoint& p_real,
                      const DiscreteJoint& pg1, const DiscreteJoint& pg2);

/// Natural-log KL divergence; +infinity when p has mass outside q's support.
double kl(const DiscreteJoint& p, const DiscreteJoint& q);
double jsd(const DiscreteJoint& p, const DiscreteJoint& q);

/// Value function plus JSD(pg1 || p_real) + JSD(pg2 || p_real).
double augmented_value(const DiscriminatorTable& d, const DiscreteJoint& p_real,
                       const DiscreteJoint& pg1, const DiscreteJoint& pg2);

struct TheoremReport {
  double value_at_optimum = 0.0;     // V(D*)
  double jsd_to_mixture = 0.0;       // JSD(p_real || mixture)
  double identity_residual = 0.0;    // |V(D*) - (-log 4 + 2 JSD)|
  double equilibrium_gap = 0.0;      // V(D*) + log 4
  bool attains_minimum = false;      // equilibrium_gap <= tol
  bool jsd_vanishes = false;         // jsd_to_mixture <= tol
  bool identity_holds = false;       // identity_residual <= tol
  bool consistent = false;           // identity holds and attains_minimum == jsd_vanishes

  void print(std::ostream& out) const;
};

TheoremReport check_theorem(const DiscreteJoint& p_real, const DiscreteJoint& pg1,
                            const DiscreteJoint& pg2, double tol);

/// Best value of z in {0, step, 2 step, ..., 1} for a alpha log z + beta log(1 - z),
/// the pointwise objective maximized by the optimal discriminator.
double grid_argmax_cell(double alpha, double beta, double step = 1e-3);

/// Whitespace-separated matrix text, one row per line.
DiscreteJoint read_joint(std::istream& in);
DiscreteJoint load_joint(const std::string& path);

}  // namespace c2gan::theory
