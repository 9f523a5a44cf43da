#include <cmath>
#include <set>
#include <sstream>

#include "c2gan/error.hpp"
#include "c2gan/data.hpp"
#include "doctest.h"

using namespace c2gan;

namespace {

PartitionedDataset parse(const std::string& text, LoadOptions options = {}) {
  std::istringstream in(text);
  return read_multiview(in, options);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

SyntheticSpec two_class_spec(double sigma, double corr) {
  SyntheticSpec s;
  s.num_classes = 2;
  s.d1 = 3;
  s.d2 = 2;
  s.class_means1 = {{1.0, 0.5, 0.0}, {-1.0, -0.5, 0.0}};
  s.class_means2 = {{0.0, 0.8}, {0.0, -0.8}};
  s.noise_sigma = sigma;
  s.view_correlation = corr;
  s.latent_dim = 2;
  s.m_full = 10;
  s.m_missing1 = 10;
  s.m_missing2 = 10;
  s.m_test = 50;
  s.seed = 3;
  return s;
}

std::vector<MultiviewExample> pool_of(std::size_t n) {
  std::vector<MultiviewExample> pool;
  for (std::size_t i = 0; i < n; ++i)
    pool.push_back(MultiviewExample::make(Vector{static_cast<double>(i)}, Vector{-1.0 * i}, i % 3, 3));
  return pool;
}

}  // namespace

TEST_CASE("parses a sparse example with a missing view") {
  const auto ds = parse("#dims 4 4 3\n2\t0:1.5 3:2.0\t-\n");
  CHECK(ds.d1 == 4);
  CHECK(ds.num_classes == 3);
  REQUIRE(ds.s_missing2.size() == 1);
  CHECK(ds.s_full.empty());
  CHECK(ds.s_missing1.empty());
  const auto& ex = ds.s_missing2.front();
  CHECK(*ex.view1 == Vector{1.5, 0.0, 0.0, 2.0});
  CHECK(!ex.view2);
  CHECK(ex.label == Vector{0.0, 0.0, 1.0});
}

TEST_CASE("routing by observed views") {
  const auto ds = parse("#dims 2 2 2\n# comment\n0\t0:1\t1:1\n1\t-\t0:2\n\n1\t1:3\t-\n0\t\t\n");
  CHECK(ds.s_full.size() == 2);  // empty fields are all-zero views
  CHECK(ds.s_missing1.size() == 1);
  CHECK(ds.s_missing2.size() == 1);
  CHECK(*ds.s_full.back().view1 == Vector{0.0, 0.0});
  CHECK_NOTHROW(ds.validate());
}

TEST_CASE("a header-only file is an empty dataset") {
  const auto ds = parse("#dims 5 6 2\n");
  CHECK(ds.size() == 0);
  CHECK(ds.d2 == 6);
}

TEST_CASE("malformed input") {
  SUBCASE("bad token reports its line") {
    try {
      parse("#dims 2 2 2\n0\t0:1\t-\n1\t0=1\t-\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("wrong field count") { CHECK_THROWS_AS(parse("#dims 2 2 2\n0\t0:1\n"), ParseError); }
  SUBCASE("missing header") { CHECK_THROWS_AS(parse("0\t0:1\t-\n"), ParseError); }
  SUBCASE("both views absent") { CHECK_THROWS_AS(parse("#dims 2 2 2\n0\t-\t-\n"), InvariantError); }
  SUBCASE("index beyond dimension") { CHECK_THROWS_AS(parse("#dims 2 2 2\n0\t2:1\t-\n"), RangeError); }
  SUBCASE("label beyond K") { CHECK_THROWS_AS(parse("#dims 2 2 2\n2\t0:1\t-\n"), RangeError); }
  SUBCASE("non-increasing indices") {
    CHECK_THROWS_AS(parse("#dims 3 2 2\n0\t1:1 1:2\t-\n"), ParseError);
    CHECK_THROWS_AS(parse("#dims 3 2 2\n0\t2:1 0:2\t-\n"), ParseError);
  }
  SUBCASE("non-finite value") { CHECK_THROWS(parse("#dims 2 2 2\n0\t0:nan\t-\n")); }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_multiview_file("/nonexistent/x.txt"), ConfigError); }
}

TEST_CASE("l2 normalization") {
  const auto ds = parse("#dims 2 2 2\n0\t0:3 1:4\t-\n1\t-\t\n", LoadOptions{true});
  CHECK(*ds.s_missing2.front().view1 == Vector{0.6, 0.8});
  CHECK(*ds.s_missing1.front().view2 == Vector{0.0, 0.0});
}

TEST_CASE("write then read round-trips exactly") {
  Rng rng(17);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution sparse(0.4);
  std::uniform_int_distribution<int> kind(0, 2);
  PartitionedDataset ds;
  ds.d1 = 7;
  ds.d2 = 5;
  ds.num_classes = 4;
  for (int i = 0; i < 200; ++i) {
    auto draw = [&](std::size_t d) {
      Vector v(d, 0.0);
      for (double& x : v)
        if (sparse(rng)) x = normal(rng) * std::pow(10.0, normal(rng) * 3);
      return v;
    };
    const int k = kind(rng);
    ds.add(MultiviewExample::make(k == 1 ? std::nullopt : std::optional(draw(7)),
                                  k == 2 ? std::nullopt : std::optional(draw(5)), i % 4, 4));
  }
  std::ostringstream out;
  write_multiview(out, ds);
  CHECK(parse(out.str()) == ds);
}

TEST_CASE("example invariants") {
  CHECK_THROWS_AS(MultiviewExample::make(Vector{1.0}, std::nullopt, 3, 3), RangeError);
  auto ex = MultiviewExample::make(Vector{1.0}, Vector{2.0}, 0, 2);
  ex.label = {1.0, 1.0};
  CHECK_THROWS_AS(ex.validate(1, 1, 2), InvariantError);
  ex.label = {0.0, 0.0};
  CHECK_THROWS_AS(ex.validate(1, 1, 2), InvariantError);
  ex.label = {0.5, 0.5};
  CHECK_THROWS_AS(ex.validate(1, 1, 2), InvariantError);
  ex.label = {0.0, 1.0};
  CHECK_NOTHROW(ex.validate(1, 1, 2));
  CHECK_THROWS_AS(ex.validate(2, 1, 2), DimensionError);
  ex.view1.reset();
  ex.view2.reset();
  CHECK_THROWS_AS(ex.validate(1, 1, 2), InvariantError);
}

TEST_CASE("two-class Bayes accuracy matches the closed form") {
  for (double sigma : {0.3, 1.0, 2.5}) {
    const auto spec = two_class_spec(sigma, 0.0);
    // Isotropic noise: accuracy is Phi(distance between means / (2 sigma)).
    const double dist_both = 2.0 * std::sqrt(1.0 + 0.25 + 0.64);
    CHECK(bayes_accuracy(spec) == doctest::Approx(normal_cdf(dist_both / (2 * sigma))).epsilon(1e-10));
    const double dist1 = 2.0 * std::sqrt(1.25);
    CHECK(bayes_accuracy(spec, ViewSubset::OnlyView1) ==
          doctest::Approx(normal_cdf(dist1 / (2 * sigma))).epsilon(1e-10));
    CHECK(bayes_accuracy(spec, ViewSubset::OnlyView2) ==
          doctest::Approx(normal_cdf(1.6 / (2 * sigma))).epsilon(1e-10));
  }
  CHECK(bayes_accuracy(two_class_spec(1e-3, 0.0)) > 1.0 - 1e-12);
}

TEST_CASE("multi-class Bayes accuracy") {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.d1 = 2;
  spec.d2 = 2;
  spec.class_means1 = {{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}};
  spec.class_means2 = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}};
  spec.latent_dim = 1;
  double previous = 1.0;
  for (double sigma : {0.01, 0.5, 1.0, 3.0}) {
    spec.noise_sigma = sigma;
    const double both = bayes_accuracy(spec);
    CHECK(both >= 1.0 / 3.0 - 0.01);
    CHECK(both <= 1.0);
    CHECK(both <= previous + 0.01);
    CHECK(both >= bayes_accuracy(spec, ViewSubset::OnlyView1) - 0.01);
    CHECK(both >= bayes_accuracy(spec, ViewSubset::OnlyView2) - 0.01);
    previous = both;
  }
  spec.noise_sigma = 0.01;
  CHECK(bayes_accuracy(spec) > 0.999);
}

TEST_CASE("synthetic generation") {
  auto spec = two_class_spec(1.0, 0.5);
  const auto a = generate_synthetic(spec, 5);
  const auto b = generate_synthetic(spec, 5);
  const auto c = generate_synthetic(spec, 6);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(!(a.train == c.train));
  CHECK(a.train.s_full.size() == 10);
  CHECK(a.train.s_missing1.size() == 10);
  CHECK(a.train.s_missing2.size() == 10);
  CHECK(a.test.size() == 50);
  CHECK(a.bayes_accuracy == bayes_accuracy(spec));
  CHECK_NOTHROW(a.train.validate());
  spec.noise_sigma = 0.0;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), ConfigError);
}

TEST_CASE("view correlation controls cross-view dependence") {
  auto spec = two_class_spec(1.0, 0.0);
  spec.class_means1 = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  spec.class_means1[1][0] = 1e-9;  // means must differ; keep them effectively equal
  spec.class_means2 = {{0.0, 0.0}, {1e-9, 0.0}};
  auto cross_corr = [&](double corr) {
    spec.view_correlation = corr;
    const auto pairs = sample_complete_pairs(spec, 10000, 11);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (const auto& ex : pairs) {
      double x = 0, y = 0;
      for (double v : *ex.view1) x += v;
      for (double v : *ex.view2) y += v;
      sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
    }
    const double n = static_cast<double>(pairs.size());
    const double cov = sxy / n - sx * sy / (n * n);
    return cov / std::sqrt((sxx / n - sx * sx / (n * n)) * (syy / n - sy * sy / (n * n)));
  };
  CHECK(std::abs(cross_corr(0.0)) < 0.05);
  CHECK(std::abs(cross_corr(1.0)) > 0.1);
}

TEST_CASE("protocol split") {
  SUBCASE("sizes and disjointness") {
    const auto pool = pool_of(20000);
    const auto split = split_for_protocol(pool, 1, 1, 3, 300, 6000, 6000, 9);
    CHECK(split.train.s_full.size() == 300);
    CHECK(split.train.s_missing1.size() == 6000);
    CHECK(split.train.s_missing2.size() == 6000);
    CHECK(split.test.size() == 7700);
    std::set<double> seen;
    for (const auto& ex : split.train.s_full) seen.insert((*ex.view1)[0]);
    for (const auto& ex : split.train.s_missing1) seen.insert(-(*ex.view2)[0]);
    for (const auto& ex : split.train.s_missing2) seen.insert((*ex.view1)[0]);
    for (const auto& ex : split.test) seen.insert((*ex.view1)[0]);
    CHECK(seen.size() == 20000);
    for (const auto& ex : split.train.s_missing1) CHECK(!ex.view1);
    for (const auto& ex : split.train.s_missing2) CHECK(!ex.view2);
  }
  SUBCASE("seeds") {
    const auto pool = pool_of(100);
    const auto a = split_for_protocol(pool, 1, 1, 3, 10, 10, 10, 1);
    const auto b = split_for_protocol(pool, 1, 1, 3, 10, 10, 10, 1);
    const auto c = split_for_protocol(pool, 1, 1, 3, 10, 10, 10, 2);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(!(a.train == c.train));
  }
  SUBCASE("whole pool as complete pairs leaves no test set") {
    const auto split = split_for_protocol(pool_of(30), 1, 1, 3, 30, 0, 0, 4);
    CHECK(split.test.empty());
    CHECK(split.train.s_full.size() == 30);
  }
  SUBCASE("pool too small") {
    CHECK_THROWS_AS(split_for_protocol(pool_of(10), 1, 1, 3, 5, 3, 3, 4), ConfigError);
  }
  SUBCASE("incomplete or invalid pool examples") {
    auto pool = pool_of(10);
    pool[3].view2.reset();
    CHECK_THROWS_AS(split_for_protocol(pool, 1, 1, 3, 2, 2, 2, 4), InvariantError);
    pool = pool_of(10);
    pool[4].label = {1.0, 1.0, 0.0};
    CHECK_THROWS_AS(split_for_protocol(pool, 1, 1, 3, 2, 2, 2, 4), InvariantError);
  }
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t m = 0; m < 50; ++m)
    for (std::uint64_t i = 0; i < 50; ++i) seeds.insert(derive_seed(m, i));
  CHECK(seeds.size() == 2500);
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}
