#include "c2gan/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>

#include "c2gan/config.hpp"
#include "c2gan/error.hpp"

namespace c2gan {

// ---------------------------------------------------------------------------
// Examples and partitions

MultiviewExample MultiviewExample::make(std::optional<Vector> v1, std::optional<Vector> v2,
                                        std::size_t cls, std::size_t num_classes) {
  if (cls >= num_classes)
    throw RangeError("label " + std::to_string(cls) + " outside [0, " +
                     std::to_string(num_classes) + ")");
  MultiviewExample ex;
  ex.view1 = std::move(v1);
  ex.view2 = std::move(v2);
  ex.label.assign(num_classes, 0.0);
  ex.label[cls] = 1.0;
  return ex;
}

std::size_t MultiviewExample::label_index() const {
  for (std::size_t k = 0; k < label.size(); ++k)
    if (label[k] == 1.0) return k;
  throw InvariantError("label is not one-hot");
}

void MultiviewExample::validate(std::size_t d1, std::size_t d2, std::size_t num_classes) const {
  if (!view1 && !view2) throw InvariantError("example has neither view observed");
  if (label.size() != num_classes)
    throw InvariantError("label has " + std::to_string(label.size()) + " entries, expected " +
                         std::to_string(num_classes));
  std::size_t ones = 0;
  for (double v : label) {
    if (v == 1.0) {
      ++ones;
    } else if (v != 0.0) {
      throw InvariantError("label entries must be 0 or 1");
    }
  }
  if (ones != 1) throw InvariantError("label must have exactly one hot entry");
  if (view1 && view1->size() != d1) throw DimensionError("view1 length differs from d1");
  if (view2 && view2->size() != d2) throw DimensionError("view2 length differs from d2");
  if ((view1 && !all_finite(*view1)) || (view2 && !all_finite(*view2)))
    throw NumericError("example holds non-finite feature values");
}

void PartitionedDataset::add(MultiviewExample ex) {
  ex.validate(d1, d2, num_classes);
  if (ex.complete()) {
    s_full.push_back(std::move(ex));
  } else if (!ex.view1) {
    s_missing1.push_back(std::move(ex));
  } else {
    s_missing2.push_back(std::move(ex));
  }
}

void PartitionedDataset::validate() const {
  for (const auto& ex : s_full) {
    ex.validate(d1, d2, num_classes);
    if (!ex.complete()) throw InvariantError("s_full holds an incomplete example");
  }
  for (const auto& ex : s_missing1) {
    ex.validate(d1, d2, num_classes);
    if (ex.view1 || !ex.view2) throw InvariantError("s_missing1 example must lack only view 1");
  }
  for (const auto& ex : s_missing2) {
    ex.validate(d1, d2, num_classes);
    if (!ex.view1 || ex.view2) throw InvariantError("s_missing2 example must lack only view 2");
  }
}

PartitionedDataset as_complete_dataset(std::vector<MultiviewExample> pairs, std::size_t d1,
                                       std::size_t d2, std::size_t num_classes) {
  PartitionedDataset ds;
  ds.d1 = d1;
  ds.d2 = d2;
  ds.num_classes = num_classes;
  for (auto& ex : pairs) {
    if (!ex.complete()) throw DataError("expected complete pairs");
    ds.add(std::move(ex));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Sparse text format

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_full(const std::string& text, T& value) {
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

std::optional<Vector> parse_view(const std::string& field, std::size_t dim, std::size_t line,
                                 const char* name) {
  if (field == "-") return std::nullopt;
  Vector v(dim, 0.0);
  std::istringstream tokens(field);
  std::string tok;
  bool have_prev = false;
  std::size_t prev = 0;
  while (tokens >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw ParseError(std::string(name) + ": expected index:value, got '" + tok + "'", line);
    std::size_t index = 0;
    double value = 0.0;
    if (!parse_full(tok.substr(0, colon), index))
      throw ParseError(std::string(name) + ": bad index in '" + tok + "'", line);
    if (!parse_full(tok.substr(colon + 1), value) || !std::isfinite(value))
      throw ParseError(std::string(name) + ": bad value in '" + tok + "'", line);
    if (have_prev && index <= prev)
      throw ParseError(std::string(name) + ": indices must be strictly increasing", line);
    if (index >= dim)
      throw RangeError("line " + std::to_string(line) + ": " + name + " index " +
                       std::to_string(index) + " >= declared dimension " + std::to_string(dim));
    v[index] = value;
    prev = index;
    have_prev = true;
  }
  return v;
}

void normalize_l2(std::optional<Vector>& v) {
  if (!v) return;
  const double norm = std::sqrt(dot(*v, *v));
  if (norm == 0.0) return;
  for (double& x : *v) x /= norm;
}

std::string format_value(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_view(std::ostream& out, const std::optional<Vector>& v) {
  if (!v) {
    out << '-';
    return;
  }
  bool first = true;
  for (std::size_t i = 0; i < v->size(); ++i) {
    if ((*v)[i] == 0.0) continue;
    if (!first) out << ' ';
    out << i << ':' << format_value((*v)[i]);
    first = false;
  }
}

}  // namespace

PartitionedDataset read_multiview(std::istream& in, const LoadOptions& options) {
  PartitionedDataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      std::istringstream hs(line);
      std::string tag, extra;
      if (!(hs >> tag >> ds.d1 >> ds.d2 >> ds.num_classes) || tag != "#dims" || (hs >> extra))
        throw ParseError("expected header '#dims d1 d2 K'", line_no);
      if (ds.d1 == 0 || ds.d2 == 0 || ds.num_classes == 0)
        throw ParseError("header dimensions must be positive", line_no);
      have_header = true;
      continue;
    }
    if (line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw ParseError("expected 3 tab-separated fields, got " + std::to_string(fields.size()),
                       line_no);
    std::size_t label = 0;
    if (!parse_full(fields[0], label)) throw ParseError("bad label '" + fields[0] + "'", line_no);
    if (label >= ds.num_classes)
      throw RangeError("line " + std::to_string(line_no) + ": label " + std::to_string(label) +
                       " >= K");
    auto v1 = parse_view(fields[1], ds.d1, line_no, "view1");
    auto v2 = parse_view(fields[2], ds.d2, line_no, "view2");
    if (!v1 && !v2)
      throw InvariantError("line " + std::to_string(line_no) + ": both views missing");
    if (options.l2_normalize) {
      normalize_l2(v1);
      normalize_l2(v2);
    }
    ds.add(MultiviewExample::make(std::move(v1), std::move(v2), label, ds.num_classes));
  }
  if (!have_header) throw ParseError("missing '#dims d1 d2 K' header", 0);
  return ds;
}

PartitionedDataset load_multiview_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  return read_multiview(in, options);
}

void write_multiview(std::ostream& out, const PartitionedDataset& data) {
  out << "#dims " << data.d1 << ' ' << data.d2 << ' ' << data.num_classes << '\n';
  for (const auto* subset : {&data.s_full, &data.s_missing1, &data.s_missing2}) {
    for (const auto& ex : *subset) {
      out << ex.label_index() << '\t';
      write_view(out, ex.view1);
      out << '\t';
      write_view(out, ex.view2);
      out << '\n';
    }
  }
}

void save_multiview_file(const std::string& path, const PartitionedDataset& data) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_multiview(out, data);
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian task

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over a golden-ratio stride.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void SyntheticSpec::validate() const {
  if (num_classes == 0 || d1 == 0 || d2 == 0) throw ConfigError("synthetic: K, d1, d2 must be positive");
  if (!(noise_sigma > 0.0)) throw ConfigError("synthetic: noise_sigma must be positive");
  if (!(view_correlation >= 0.0 && view_correlation <= 1.0))
    throw ConfigError("synthetic: view_correlation must lie in [0, 1]");
  if (latent_dim == 0) throw ConfigError("synthetic: latent_dim must be positive");
  if (class_means1.size() != num_classes || class_means2.size() != num_classes)
    throw ConfigError("synthetic: need one mean per class and view");
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (class_means1[k].size() != d1 || class_means2[k].size() != d2)
      throw ConfigError("synthetic: class mean has wrong length");
    for (std::size_t j = 0; j < k; ++j)
      if (class_means1[k] == class_means1[j] || class_means2[k] == class_means2[j])
        throw ConfigError("synthetic: class means must be pairwise distinct per view");
  }
}

SyntheticSpec synthetic_spec_from_config(const std::map<std::string, std::string>& cfg) {
  SyntheticSpec s;
  s.num_classes = config_size(cfg, "K", s.num_classes);
  s.d1 = config_size(cfg, "d1", s.d1);
  s.d2 = config_size(cfg, "d2", s.d2);
  s.noise_sigma = config_double(cfg, "noise_sigma", s.noise_sigma);
  s.view_correlation = config_double(cfg, "view_correlation", s.view_correlation);
  s.latent_dim = config_size(cfg, "latent_dim", s.latent_dim);
  s.m_full = config_size(cfg, "m_full", s.m_full);
  s.m_missing1 = config_size(cfg, "m_missing1", s.m_missing1);
  s.m_missing2 = config_size(cfg, "m_missing2", s.m_missing2);
  s.m_test = config_size(cfg, "m_test", s.m_test);
  s.seed = config_u64(cfg, "seed", s.seed);
  const double sep1 = config_double(cfg, "separation1", 3.0);
  const double sep2 = config_double(cfg, "separation2", 1.0);

  Rng rng(derive_seed(s.seed, 0xC1A55));
  std::normal_distribution<double> normal;
  auto random_direction = [&](std::size_t dim, double norm) {
    Vector v(dim);
    for (double& x : v) x = normal(rng);
    const double n = std::sqrt(dot(v, v));
    for (double& x : v) x *= norm / n;
    return v;
  };
  for (std::size_t k = 0; k < s.num_classes; ++k) {
    s.class_means1.push_back(random_direction(s.d1, sep1));
    s.class_means2.push_back(random_direction(s.d2, sep2));
  }
  s.validate();
  return s;
}

std::pair<Matrix, Matrix> synthetic_mixing(const SyntheticSpec& spec) {
  Rng rng(derive_seed(spec.seed, 0xA11CE));
  std::normal_distribution<double> normal;
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));
  Matrix a1(spec.d1, spec.latent_dim), a2(spec.d2, spec.latent_dim);
  for (double& v : a1.data) v = normal(rng) * scale;
  for (double& v : a2.data) v = normal(rng) * scale;
  return {std::move(a1), std::move(a2)};
}

namespace {

struct GaussianSampler {
  const SyntheticSpec& spec;
  Matrix a1, a2;

  explicit GaussianSampler(const SyntheticSpec& s) : spec(s) {
    auto [m1, m2] = synthetic_mixing(s);
    a1 = std::move(m1);
    a2 = std::move(m2);
  }

  MultiviewExample draw(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, spec.num_classes - 1);
    std::normal_distribution<double> normal;
    const std::size_t cls = pick(rng);
    Vector u(spec.latent_dim);
    for (double& x : u) x = normal(rng);
    auto make_view = [&](const Vector& mean, const Matrix& mix) {
      Vector v(mean.size());
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = mean[i] + spec.view_correlation * dot(mix.row(i), u) + spec.noise_sigma * normal(rng);
      return v;
    };
    Vector v1 = make_view(spec.class_means1[cls], a1);
    Vector v2 = make_view(spec.class_means2[cls], a2);
    return MultiviewExample::make(std::move(v1), std::move(v2), cls, spec.num_classes);
  }
};

// Solves cov x = b with a Cholesky factorization.
class SpdSolver {
 public:
  explicit SpdSolver(const Matrix& cov)
      : llt_(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            cov.data.data(), static_cast<Eigen::Index>(cov.rows),
            static_cast<Eigen::Index>(cov.cols))) {
    if (llt_.info() != Eigen::Success) throw NumericError("covariance is not positive definite");
  }

  Vector solve(const Vector& b) const {
    const Eigen::VectorXd x =
        llt_.solve(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
    return Vector(x.data(), x.data() + x.size());
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

Vector select(const Vector& v1, const Vector& v2, ViewSubset views) {
  switch (views) {
    case ViewSubset::OnlyView1: return v1;
    case ViewSubset::OnlyView2: return v2;
    case ViewSubset::Both: break;
  }
  return concat(v1, v2);
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::vector<MultiviewExample> sample_complete_pairs(const SyntheticSpec& spec, std::size_t count,
                                                    std::uint64_t seed) {
  spec.validate();
  GaussianSampler sampler(spec);
  std::vector<MultiviewExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    out.push_back(sampler.draw(rng));
  }
  return out;
}

double bayes_accuracy(const SyntheticSpec& spec, ViewSubset views) {
  spec.validate();
  const auto [a1, a2] = synthetic_mixing(spec);
  const std::size_t n1 = spec.d1, n2 = spec.d2;

  // Joint covariance c^2 [A1; A2][A1; A2]^T + sigma^2 I, shared by every class.
  Matrix stacked(n1 + n2, spec.latent_dim);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < spec.latent_dim; ++j) stacked(i, j) = a1(i, j);
  for (std::size_t i = 0; i < n2; ++i)
    for (std::size_t j = 0; j < spec.latent_dim; ++j) stacked(n1 + i, j) = a2(i, j);
  std::vector<std::size_t> coords;
  if (views != ViewSubset::OnlyView2)
    for (std::size_t i = 0; i < n1; ++i) coords.push_back(i);
  if (views != ViewSubset::OnlyView1)
    for (std::size_t i = 0; i < n2; ++i) coords.push_back(n1 + i);
  const std::size_t n = coords.size();
  const double c2 = spec.view_correlation * spec.view_correlation;
  Matrix cov(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      cov(r, c) = c2 * dot(stacked.row(coords[r]), stacked.row(coords[c])) +
                  (r == c ? spec.noise_sigma * spec.noise_sigma : 0.0);
  const SpdSolver solver(cov);

  std::vector<Vector> means, weights;
  std::vector<double> offsets;
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    means.push_back(select(spec.class_means1[k], spec.class_means2[k], views));
    weights.push_back(solver.solve(means.back()));
    offsets.push_back(-0.5 * dot(means.back(), weights.back()));
  }

  if (spec.num_classes == 1) return 1.0;
  if (spec.num_classes == 2) {
    Vector diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = means[1][i] - means[0][i];
    const double mahalanobis = std::sqrt(dot(diff, solver.solve(diff)));
    return standard_normal_cdf(mahalanobis / 2.0);
  }

  constexpr std::size_t kDraws = 100000;
  GaussianSampler sampler(spec);
  Rng rng(derive_seed(spec.seed, 0xBA7E5));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < kDraws; ++i) {
    const auto ex = sampler.draw(rng);
    const Vector x = select(*ex.view1, *ex.view2, views);
    std::size_t best = 0;
    double best_score = -INFINITY;
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
      const double score = dot(weights[k], x) + offsets[k];
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    if (best == ex.label_index()) ++correct;
  }
  return static_cast<double>(correct) / kDraws;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  return generate_synthetic(spec, spec.seed);
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t data_seed) {
  spec.validate();
  const std::size_t total = spec.m_full + spec.m_missing1 + spec.m_missing2 + spec.m_test;
  auto pool = sample_complete_pairs(spec, total, derive_seed(data_seed, 1));
  auto split = split_for_protocol(pool, spec.d1, spec.d2, spec.num_classes, spec.m_full,
                                  spec.m_missing1, spec.m_missing2, derive_seed(data_seed, 2));
  SyntheticData out;
  out.train = std::move(split.train);
  out.test = std::move(split.test);
  out.bayes_accuracy = bayes_accuracy(spec, ViewSubset::Both);
  return out;
}

ProtocolSplit split_for_protocol(const std::vector<MultiviewExample>& pool, std::size_t d1,
                                 std::size_t d2, std::size_t num_classes, std::size_t m_full,
                                 std::size_t m_missing1, std::size_t m_missing2,
                                 std::uint64_t seed) {
  const std::size_t needed = m_full + m_missing1 + m_missing2;
  if (pool.size() < needed)
    throw ConfigError("split: pool of " + std::to_string(pool.size()) +
                      " examples cannot supply " + std::to_string(needed));
  for (const auto& ex : pool)
    if (!ex.complete()) throw InvariantError("split: pool examples must have both views");

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  ProtocolSplit out;
  out.train.d1 = d1;
  out.train.d2 = d2;
  out.train.num_classes = num_classes;
  std::size_t i = 0;
  for (; i < m_full; ++i) out.train.add(pool[order[i]]);
  for (; i < m_full + m_missing1; ++i) {
    auto ex = pool[order[i]];
    ex.view1.reset();
    out.train.add(std::move(ex));
  }
  for (; i < needed; ++i) {
    auto ex = pool[order[i]];
    ex.view2.reset();
    out.train.add(std::move(ex));
  }
  for (; i < pool.size(); ++i) {
    pool[order[i]].validate(d1, d2, num_classes);
    out.test.push_back(pool[order[i]]);
  }
  return out;
}

}  // namespace c2gan
