#include "c2gan/theory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "c2gan/error.hpp"

namespace c2gan::theory {

namespace {

void check_same_shape(const DiscreteJoint& a, const DiscreteJoint& b) {
  if (a.n1() != b.n1() || a.n2() != b.n2()) throw DimensionError("distribution supports differ");
}

double clamped_log(double x) { return std::log(std::max(x, kValueLogFloor)); }

}  // namespace

DiscreteJoint::DiscreteJoint(Matrix t) : table(std::move(t)) { validate(); }

void DiscreteJoint::validate() const {
  if (table.data.empty()) throw InvariantError("distribution has an empty support");
  double total = 0.0;
  for (double p : table.data) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvariantError("probabilities must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvariantError("probabilities must sum to 1");
}

DiscreteJoint DiscreteJoint::from_weights(Matrix weights) {
  double total = 0.0;
  for (double w : weights.data) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvariantError("weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw InvariantError("weights must not all be zero");
  for (double& w : weights.data) w /= total;
  DiscreteJoint out;
  out.table = std::move(weights);
  out.validate();
  return out;
}

DiscreteJoint mixture(const DiscreteJoint& pg1, const DiscreteJoint& pg2) {
  check_same_shape(pg1, pg2);
  DiscreteJoint out;
  out.table = Matrix(pg1.n1(), pg1.n2());
  for (std::size_t i = 0; i < out.table.data.size(); ++i)
    out.table.data[i] = 0.5 * (pg1.table.data[i] + pg2.table.data[i]);
  return out;
}

DiscriminatorTable optimal_discriminator(const DiscreteJoint& p_real, const DiscreteJoint& pg1,
                                         const DiscreteJoint& pg2) {
  check_same_shape(p_real, pg1);
  check_same_shape(p_real, pg2);
  const auto mix = mixture(pg1, pg2);
  DiscriminatorTable d{Matrix(p_real.n1(), p_real.n2())};
  for (std::size_t i = 0; i < d.table.data.size(); ++i) {
    const double real = p_real.table.data[i];
    const double denom = real + mix.table.data[i];
    d.table.data[i] = denom > 0.0 ? real / denom : 0.5;
  }
  return d;
}

double value_function(const DiscriminatorTable& d, const DiscreteJoint& p_real,
                      const DiscreteJoint& pg1, const DiscreteJoint& pg2) {
  check_same_shape(p_real, pg1);
  check_same_shape(p_real, pg2);
  if (d.table.rows != p_real.n1() || d.table.cols != p_real.n2())
    throw DimensionError("discriminator table does not match the support");
  double v = 0.0;
  for (std::size_t i = 0; i < d.table.data.size(); ++i) {
    const double dv = d.table.data[i];
    if (!(dv >= 0.0 && dv <= 1.0)) throw RangeError("discriminator values must lie in [0, 1]");
    // Zero-mass cells contribute nothing, whatever D is there.
    if (p_real.table.data[i] > 0.0) v += p_real.table.data[i] * clamped_log(dv);
    const double fake_mass = 0.5 * pg1.table.data[i] + 0.5 * pg2.table.data[i];
    if (fake_mass > 0.0) v += fake_mass * clamped_log(1.0 - dv);
  }
  return v;
}

double kl(const DiscreteJoint& p, const DiscreteJoint& q) {
  check_same_shape(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.table.data.size(); ++i) {
    const double pi = p.table.data[i];
    if (pi == 0.0) continue;
    const double qi = q.table.data[i];
    if (qi == 0.0) return std::numeric_limits<double>::infinity();
    s += pi * std::log(pi / qi);
  }
  return std::max(s, 0.0);
}

double jsd(const DiscreteJoint& p, const DiscreteJoint& q) {
  const auto m = mixture(p, q);
  return 0.5 * kl(p, m) + 0.5 * kl(q, m);
}

double augmented_value(const DiscriminatorTable& d, const DiscreteJoint& p_real,
                       const DiscreteJoint& pg1, const DiscreteJoint& pg2) {
  return value_function(d, p_real, pg1, pg2) + jsd(pg1, p_real) + jsd(pg2, p_real);
}

TheoremReport check_theorem(const DiscreteJoint& p_real, const DiscreteJoint& pg1,
                            const DiscreteJoint& pg2, double tol) {
  const double log4 = std::log(4.0);
  TheoremReport r;
  r.value_at_optimum = value_function(optimal_discriminator(p_real, pg1, pg2), p_real, pg1, pg2);
  r.jsd_to_mixture = jsd(p_real, mixture(pg1, pg2));
  r.identity_residual = std::abs(r.value_at_optimum - (-log4 + 2.0 * r.jsd_to_mixture));
  r.equilibrium_gap = r.value_at_optimum + log4;
  r.attains_minimum = std::abs(r.equilibrium_gap) <= tol;
  r.jsd_vanishes = r.jsd_to_mixture <= tol;
  r.identity_holds = r.identity_residual <= tol;
  r.consistent = r.identity_holds && (r.attains_minimum == r.jsd_vanishes);
  return r;
}

void TheoremReport::print(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "V(D*)              " << value_at_optimum << '\n'
      << "-log 4             " << -std::log(4.0) << '\n'
      << "JSD(real||mix)     " << jsd_to_mixture << '\n'
      << "identity residual  " << identity_residual << (identity_holds ? "  ok" : "  FAIL") << '\n'
      << "equilibrium gap    " << equilibrium_gap << '\n'
      << "attains -log 4     " << (attains_minimum ? "yes" : "no") << '\n'
      << "JSD vanishes       " << (jsd_vanishes ? "yes" : "no") << '\n'
      << "consistent         " << (consistent ? "yes" : "no") << '\n';
  out.precision(old_precision);
}

double grid_argmax_cell(double alpha, double beta, double step) {
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / step));
  double best_z = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= steps; ++i) {
    const double z = static_cast<double>(i) / static_cast<double>(steps);
    // 0 * log 0 = 0 at the grid ends.
    double f = 0.0;
    if (alpha > 0.0) f += z > 0.0 ? alpha * std::log(z) : -std::numeric_limits<double>::infinity();
    if (beta > 0.0) f += z < 1.0 ? beta * std::log1p(-z) : -std::numeric_limits<double>::infinity();
    if (f > best) {
      best = f;
      best_z = z;
    }
  }
  return best_z;
}

DiscreteJoint read_joint(std::istream& in) {
  Matrix m;
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream row(line);
    std::vector<double> entries;
    std::string tok;
    while (row >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw ParseError("bad number '" + tok + "'", line_no);
      }
      if (used != tok.size()) throw ParseError("bad number '" + tok + "'", line_no);
      entries.push_back(v);
    }
    if (entries.empty()) continue;
    if (m.rows == 0) {
      m.cols = entries.size();
    } else if (entries.size() != m.cols) {
      throw ParseError("ragged matrix row", line_no);
    }
    ++m.rows;
    values.insert(values.end(), entries.begin(), entries.end());
  }
  m.data = std::move(values);
  if (m.rows == 0) throw ParseError("empty distribution file", 0);
  DiscreteJoint out;
  out.table = std::move(m);
  out.validate();
  return out;
}

DiscreteJoint load_joint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open distribution file '" + path + "'");
  return read_joint(in);
}

}  // namespace c2gan::theory
