#include <doctest.h>

#include "meanrisk/error.hpp"
#include "meanrisk/measure.hpp"
#include "oracles.hpp"

using namespace meanrisk;

namespace {

DiscreteMeasure m1(std::vector<std::pair<double, double>> atoms) {
  std::vector<Atom> raw;
  for (auto [p, w] : atoms) raw.push_back({{p}, w});
  return canonicalize(std::move(raw));
}

ScalarDistribution sd(std::vector<std::pair<double, double>> atoms) {
  std::vector<ScalarAtom> raw;
  for (auto [v, w] : atoms) raw.push_back({v, w});
  return ScalarDistribution::from_atoms(std::move(raw));
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("canonicalize merges, renormalizes and sorts") {
  const auto a = m1({{0, 0.5}, {0, 0.25}, {1, 0.25}});
  REQUIRE(a.size() == 2);
  CHECK(a[0].point[0] == 0.0);
  CHECK(a[0].weight == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(a[1].weight == doctest::Approx(0.25).epsilon(1e-15));

  const auto b = m1({{3, 2.0}});
  REQUIRE(b.size() == 1);
  CHECK(b[0].weight == 1.0);

  const auto c = m1({{1, 0.2}, {2, 0.2}, {3, 0.6}});
  REQUIRE(c.size() == 3);
  CHECK(c[2].weight == doctest::Approx(0.6));

  const auto d = m1({{2, 0.5}, {-1, 0.5}});
  CHECK(d[0].point[0] == -1.0);
}

TEST_CASE("canonicalize errors") {
  CHECK(code_of([] { canonicalize({}); }) == ErrorCode::EmptySupport);
  CHECK(code_of([] { m1({{0, -0.1}, {1, 1.0}}); }) == ErrorCode::NegativeWeight);
  CHECK(code_of([] { canonicalize({{{0.0}, 0.5}, {{0.0, 1.0}, 0.5}}); }) == ErrorCode::DimMismatch);
}

TEST_CASE("canonicalize is idempotent and weights sum to one") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const auto mu = oracle::random_measure(rng, 1 + rep % 17, 1 + rep % 3, -3, 3, rep % 2 == 0);
    const auto again = canonicalize({mu.atoms().begin(), mu.atoms().end()});
    CHECK(again == mu);
    double total = 0.0;
    for (const auto& a : mu.atoms()) total += a.weight;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("merge tolerance") {
  const auto a = m1({{1.0, 0.5}, {1.0 + 5e-13, 0.5}});
  CHECK(a.size() == 1);
  const auto b = m1({{1.0, 0.5}, {1.0 + 1e-9, 0.5}});
  CHECK(b.size() == 2);
}

TEST_CASE("quantile examples") {
  const auto two = sd({{0, 0.5}, {1, 0.5}});
  CHECK(quantile(two, 0.5) == 0.0);
  CHECK(quantile(two, 0.6) == 1.0);
  const auto four = sd({{1, 0.25}, {2, 0.25}, {3, 0.25}, {4, 0.25}});
  CHECK(quantile(four, 0.8) == 4.0);
  CHECK(quantile(four, 0.8) == oracle::quantile(oracle::unpack(four), 0.8));
  CHECK(code_of([&] { quantile(two, 0.0); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { quantile(two, 1.0); }) == ErrorCode::OutOfRange);
}

TEST_CASE("quantile is nondecreasing and matches the inf oracle") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 30; ++rep) {
    const auto d = oracle::random_distribution(rng, 1 + rep % 12, -5, 5, rep % 3 == 0);
    const auto s = oracle::unpack(d);
    double prev = -oracle::kInf;
    for (int j = 1; j < 1000; ++j) {
      const double beta = j / 1000.0;
      const double q = quantile(d, beta);
      CHECK(q >= prev);
      CHECK(q == oracle::quantile(s, beta));
      prev = q;
    }
    // left continuity away from the cumulative jumps
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
      const double mid = 0.5 * (d.cumulative()[i] + d.cumulative()[i + 1]);
      CHECK(quantile(d, mid - 1e-12) == quantile(d, mid));
    }
  }
}

TEST_CASE("pushforward examples") {
  const auto nu = m1({{0, 0.5}, {1, 0.5}});
  const auto a = pushforward(nu, {1.0}, [](const Point& x, const Point& z) { return x[0] + z[0]; });
  CHECK(a == sd({{1, 0.5}, {2, 0.5}}));

  const auto nu2 = m1({{0, 0.5}, {2, 0.5}});
  const auto b = pushforward(nu2, {1.0}, [](const Point& x, const Point& z) { return std::abs(x[0] - z[0]); });
  REQUIRE(b.size() == 1);
  CHECK(b.values()[0] == 1.0);
  CHECK(b.weights()[0] == 1.0);
}

TEST_CASE("Fubini consistency of the pushforward") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto nu = oracle::random_measure(rng, 15, 1, -4, 4);
    const Point x{0.3 * rep};
    const auto f = [](const Point& xx, const Point& z) { return xx[0] * z[0] - std::abs(z[0]); };
    const auto d = pushforward(nu, x, f);
    for (double p : {1.0, 2.0, 3.5}) {
      double direct = 0.0;
      for (const auto& a : nu.atoms()) direct += a.weight * std::pow(std::abs(f(x, a.point)), p);
      double via = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) via += d.weights()[i] * std::pow(std::abs(d.values()[i]), p);
      CHECK(std::abs(via - direct) <= 1e-10 * (1.0 + direct));
    }
  }
}

TEST_CASE("moment examples") {
  CHECK(moment(dirac({0.0}), 3.0) == 0.0);
  CHECK(moment(dirac({3.0}), 2.0) == doctest::Approx(9.0).epsilon(1e-15));
  const auto two = canonicalize({{{3.0, 4.0}, 0.5}, {{0.0, 0.0}, 0.5}});
  CHECK(moment(two, 1.0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(moment(two, 1.0) == doctest::Approx(oracle::moment(two, 1.0)).epsilon(1e-15));
}

TEST_CASE("tail functional") {
  CHECK(tail_functional(dirac({0.0}), 1.0, 0.0) == 0.0);
  for (double n : {2.0, 10.0, 1000.0}) {
    const auto mu = m1({{0.0, 1.0 - 1.0 / n}, {n, 1.0 / n}});
    CHECK(tail_functional(mu, 1.0, n - 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tail_functional(mu, 1.0, n) == 0.0);  // strict inequality
  }
  CHECK(tail_functional(m1({{1, 0.5}, {2, 0.5}}), 1.0, 1.5) == doctest::Approx(1.0));

  std::mt19937_64 rng(5);
  const auto mu = oracle::random_measure(rng, 20, 2, -3, 3);
  double prev = oracle::kInf;
  for (double a = 0.0; a < 40.0; a += 0.25) {
    const double t = tail_functional(mu, 2.0, a);
    CHECK(t <= prev);
    prev = t;
  }
  CHECK(prev == 0.0);
  CHECK(tail_functional(mu, 2.0, 0.0) == doctest::Approx(moment(mu, 2.0)).epsilon(1e-14));
}

TEST_CASE("mix") {
  const auto mu = dirac({0.0});
  const auto nu = dirac({1.0});
  CHECK(mix(mu, nu, 0.0) == mu);
  CHECK(mix(mu, nu, 1.0) == nu);
  const auto m = mix(mu, nu, 0.25);
  CHECK(m == m1({{0, 0.75}, {1, 0.25}}));
  CHECK(code_of([&] { mix(mu, dirac({0.0, 1.0}), 0.5); }) == ErrorCode::DimMismatch);

  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = oracle::random_measure(rng, 8, 2, -2, 2);
    const auto b = oracle::random_measure(rng, 5, 2, -2, 2);
    const double t = rep / 19.0;
    for (double q : {1.0, 2.0, 2.5}) {
      const double lhs = moment(mix(a, b, t), q);
      const double rhs = (1 - t) * moment(a, q) + t * moment(b, q);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + rhs));
    }
  }
}

TEST_CASE("empirical sampling") {
  CHECK(empirical(constant_sampler({0.0}), 5, 1) == dirac({0.0}));
  const auto s = uniform_box_sampler({-1.0, 0.0}, {1.0, 2.0});
  CHECK(empirical(s, 200, 42) == empirical(s, 200, 42));
  CHECK(!(empirical(s, 200, 42) == empirical(s, 200, 43)));

  const auto coin = measure_sampler(m1({{0, 0.5}, {1, 0.5}}));
  const auto e = empirical(coin, 10000, 2024);
  REQUIRE(e.size() == 2);
  CHECK(std::abs(e[0].weight - 0.5) <= 0.02);
}

TEST_CASE("content hash follows equality") {
  const auto a = m1({{0, 0.5}, {1, 0.5}});
  const auto b = m1({{1, 0.5}, {0, 0.25}, {0, 0.25}});
  CHECK(a == b);
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() != m1({{0, 0.4}, {1, 0.6}}).content_hash());
}
