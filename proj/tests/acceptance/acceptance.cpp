// Acceptance run: one PASS/FAIL line per criterion, tolerances and time
// limits pinned below. Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "meanrisk/cli.hpp"
#include "meanrisk/io.hpp"
#include "meanrisk/metrics.hpp"
#include "meanrisk/optim.hpp"
#include "meanrisk/recourse.hpp"
#include "meanrisk/risk.hpp"
#include "meanrisk/stability.hpp"
#include "oracles.hpp"

using namespace meanrisk;
namespace fs = std::filesystem;

namespace {

const std::string kDemo = MEANRISK_DEMO_DIR;

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Json demo(const std::string& name) { return read_json_file(kDemo + "/" + name); }

const std::vector<RiskSpec> kSpecs = {Expectation{},        AVaR{0.1},         AVaR{0.5},
                                      AVaR{0.95},           SemiDev{1.0, 1.0}, SemiDev{0.5, 2.0},
                                      SemiDev{0.3, 3.5},    TargetSemiDev{1.0, 0.5, 1.0},
                                      TargetSemiDev{0.7, 2.0, 2.0}};

// 1 ------------------------------------------------------------------------
Outcome risk_exactness() {
  constexpr double kRuTol = 1e-9;
  constexpr double kRiemannTol = 1e-6;
  constexpr double kSemiTol = 1e-12;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> ua(0.01, 0.99);
  double worst_ru = 0.0, worst_riemann = 0.0, worst_semi = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    // Midpoint error is at most (max - min) / n, so values stay in [0, 1].
    const auto d = oracle::random_distribution(rng, 1 + rep % 50, 0.0, 1.0);
    const auto s = oracle::unpack(d);
    const double alpha = ua(rng);
    const double v = avar(d, alpha);
    worst_ru = std::max(worst_ru, std::abs(v - avar_ru_oracle(d, alpha)));
    worst_riemann = std::max(worst_riemann, std::abs(v - oracle::avar_riemann(s, alpha, 1000000)));
    const double a = (rep % 11) / 10.0;
    const double p = 1.0 + (rep % 5) * 0.5;
    worst_semi = std::max(worst_semi, std::abs(semidev(d, a, p) - oracle::semidev(s, a, p)));
    worst_semi = std::max(worst_semi, std::abs(target_semidev(d, a, 0.4, p) - oracle::target_semidev(s, a, 0.4, p)));
  }
  return {worst_ru <= kRuTol && worst_riemann <= kRiemannTol && worst_semi <= kSemiTol,
          "max|avar-RU|=" + fmt(worst_ru) + " max|avar-Riemann|=" + fmt(worst_riemann) +
              " max|semidev-direct|=" + fmt(worst_semi)};
}

// 2 ------------------------------------------------------------------------
Outcome risk_properties() {
  constexpr double kTol = 1e-10;
  constexpr double kWitnessGap = 0.5;
  std::mt19937_64 rng(1002);
  int law = 0, mono = 0, conv = 0, equiv = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const auto d = oracle::random_distribution(rng, 12, -4, 4, rep % 2 == 0);
    std::vector<ScalarAtom> raw;
    for (std::size_t i = 0; i < d.size(); ++i) {
      raw.push_back({d.values()[i], d.weights()[i] / 2});
      raw.push_back({d.values()[i], d.weights()[i] / 2});
    }
    std::shuffle(raw.begin(), raw.end(), rng);
    const auto e = ScalarDistribution::from_atoms(raw);
    std::uniform_real_distribution<double> bump(0.0, 1.0);
    std::vector<ScalarAtom> up;
    for (std::size_t i = 0; i < d.size(); ++i) up.push_back({d.values()[i] + bump(rng), d.weights()[i]});
    const auto dom = ScalarDistribution::from_atoms(up);
    const auto other = oracle::random_distribution(rng, 7, -1, 5);
    const double t = -2.0 + 0.15 * rep;
    for (const auto& spec : kSpecs) {
      law += evaluate_risk(spec, e) != evaluate_risk(spec, d);
      mono += evaluate_risk(spec, dom) < evaluate_risk(spec, d) - kTol;
      for (int k = 1; k <= 9; ++k) {
        const double lambda = k / 10.0;
        conv += evaluate_risk(spec, comonotone_combination(d, other, lambda)) >
                lambda * evaluate_risk(spec, d) + (1 - lambda) * evaluate_risk(spec, other) + kTol;
      }
      if (is_translation_equivariant(spec)) {
        equiv += std::abs(evaluate_risk(spec, d.shifted(t)) - evaluate_risk(spec, d) - t) > kTol;
      }
    }
  }
  const RiskSpec target = TargetSemiDev{1.0, 1.0, 1.0};
  std::vector<ScalarAtom> witness{{0.0, 0.5}, {2.0, 0.5}};
  const auto y = ScalarDistribution::from_atoms(witness);
  const double gap = evaluate_risk(target, y.shifted(1.0)) - (evaluate_risk(target, y) + 1.0);
  const bool ok = law == 0 && mono == 0 && conv == 0 && equiv == 0 && gap >= kWitnessGap - kTol &&
                  !is_translation_equivariant(target);
  return {ok, "violations law/monotone/convex/equivariant=" + std::to_string(law) + "/" + std::to_string(mono) + "/" +
                  std::to_string(conv) + "/" + std::to_string(equiv) + " witness gap=" + fmt(gap)};
}

// 3 ------------------------------------------------------------------------
Outcome order_monotonicity() {
  constexpr double kTol = 1e-10;
  std::mt19937_64 rng(1003);
  int not_ordered = 0, violations = 0;
  const std::vector<RiskSpec> specs = {AVaR{0.1}, AVaR{0.5}, AVaR{0.9}, SemiDev{1.0, 1.0}, SemiDev{0.5, 2.0},
                                       SemiDev{0.8, 3.0}};
  for (int rep = 0; rep < 50; ++rep) {
    const auto mu = oracle::random_distribution(rng, 2 + rep % 9, -3, 3);
    const auto nu = oracle::spread(mu, 0.05 + 0.04 * rep);
    not_ordered += !icx_leq(mu, nu);
    for (const auto& spec : specs) violations += evaluate_risk(spec, mu) > evaluate_risk(spec, nu) + kTol;
  }
  return {not_ordered == 0 && violations == 0,
          "pairs not icx-ordered=" + std::to_string(not_ordered) + " value violations=" + std::to_string(violations)};
}

// 4 ------------------------------------------------------------------------
Outcome solver_correctness() {
  constexpr double kMilpTol = 1e-9;
  constexpr double kMiqpTol = 1e-7;
  constexpr double kSlackTol = 1e-8;
  std::mt19937_64 rng(1004);
  double worst_milp = 0.0, worst_miqp = 0.0, worst_cs = 0.0;
  int status_mismatch = 0, milp_opt = 0, miqp_opt = 0;
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_real_distribution<double> u3(-3.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n_int = 1 + rep % 4;
    const std::size_t n_cont = rep % 3;
    const auto n = static_cast<Eigen::Index>(n_int + n_cont);
    const Eigen::Index m = 1 + rep % 3;
    Eigen::MatrixXd a(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = coef(rng) * 0.5;
    Eigen::VectorXd b(m), c(n);
    for (Eigen::Index i = 0; i < m; ++i) b[i] = u3(rng);
    for (Eigen::Index j = 0; j < n; ++j) c[j] = u3(rng);
    MixedIntegerProgram mip;
    mip.relaxation = LinearProgram::nonnegative(c, a, b, std::vector<RowSense>(m, RowSense::LessEqual));
    for (std::size_t k = 0; k < n_int; ++k) {
      mip.integer_indices.push_back(k);
      mip.integer_bounds.push_back({-5, 5});
      mip.relaxation.lower[static_cast<Eigen::Index>(k)] = -oracle::kInf;
    }
    for (Eigen::Index j = static_cast<Eigen::Index>(n_int); j < n; ++j) mip.relaxation.upper[j] = 4.0;
    const auto s = solve_milp(mip);
    const auto o = enumerate_oracle(mip);
    status_mismatch += s.status != o.status;
    if (s.optimal() && o.optimal()) {
      ++milp_opt;
      worst_milp = std::max(worst_milp, std::abs(s.value - o.value));
    }
  }
  std::uniform_real_distribution<double> u1(-1.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n_int = 1 + rep % 4;
    const std::size_t n_cont = rep % 2;
    const auto n = static_cast<Eigen::Index>(n_int + n_cont);
    const Eigen::Index m = 1 + rep % 3;
    Eigen::MatrixXd bm(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) bm(i, j) = u1(rng);
    const Eigen::MatrixXd d = bm.transpose() * bm + 0.2 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q[i] = 5 * u1(rng);
    Eigen::MatrixXd a(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = u1(rng);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) b[i] = 2 * u1(rng);
    std::vector<std::size_t> idx;
    std::vector<IntegerBound> bounds;
    for (std::size_t k = 0; k < n_int; ++k) {
      idx.push_back(n_cont + k);
      bounds.push_back({-5, 5});
    }
    const QuadraticMixedProgram qmp(d, q, a, b, idx, bounds);
    const auto s = solve_miqp(qmp);
    const auto o = enumerate_oracle(qmp);
    status_mismatch += s.status != o.status;
    if (s.optimal() && o.optimal()) {
      ++miqp_opt;
      worst_miqp = std::max(worst_miqp, std::abs(s.value - o.value));
    }
  }
  std::uniform_real_distribution<double> u2(-2.0, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index m = 2 + rep % 4;
    const Eigen::Index n = 2 + rep % 5;
    Eigen::MatrixXd a(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = u2(rng);
    Eigen::VectorXd b(m), c(n);
    for (Eigen::Index i = 0; i < m; ++i) b[i] = u2(rng) + 1.0;
    for (Eigen::Index j = 0; j < n; ++j) c[j] = u2(rng);
    std::vector<RowSense> senses(m, RowSense::LessEqual);
    senses[0] = rep % 2 ? RowSense::Equal : RowSense::LessEqual;
    const auto s = solve_lp(LinearProgram::nonnegative(c, a, b, senses));
    if (!s.optimal()) continue;
    const Eigen::VectorXd reduced = c - a.transpose() * s.duals;
    worst_cs = std::max(worst_cs, -reduced.minCoeff());
    for (Eigen::Index j = 0; j < n; ++j) worst_cs = std::max(worst_cs, std::abs(s.point[j] * reduced[j]));
    for (Eigen::Index i = 0; i < m; ++i) {
      const double slack = b[i] - a.row(i).dot(s.point);
      if (senses[static_cast<std::size_t>(i)] == RowSense::LessEqual) {
        worst_cs = std::max({worst_cs, s.duals[i], std::abs(s.duals[i] * slack)});
      }
    }
  }
  return {status_mismatch == 0 && worst_milp <= kMilpTol && worst_miqp <= kMiqpTol && worst_cs <= kSlackTol,
          "status mismatches=" + std::to_string(status_mismatch) + " milp max err=" + fmt(worst_milp) + " (" +
              std::to_string(milp_opt) + " optimal) miqp max err=" + fmt(worst_miqp) + " (" +
              std::to_string(miqp_opt) + " optimal) max slackness defect=" + fmt(worst_cs)};
}

// 5 ------------------------------------------------------------------------
Outcome growth_bounds() {
  constexpr double kFactor = 3.0;
  constexpr double kNearNorm = 10.0;
  constexpr double kFarNorm = 1e3;
  std::string detail;
  bool ok = true;
  for (const char* name : {"linear_expectation.json", "milp_simple.json", "miqp.json", "convex_mip.json"}) {
    const auto model = model_from_json(demo(name));
    std::vector<Point> xs;
    for (std::size_t i : {0, 2, 5, 8, 10}) xs.push_back(model.decisions[i]);
    // |z| log-uniform on [1e-1, 1e3] with a random sign
    const Sampler z = [](CounterRng& rng) {
      const double r = std::pow(10.0, -1.0 + 4.0 * uniform01(rng));
      return Point{uniform01(rng) < 0.5 ? -r : r};
    };
    const double gamma = model_exponent(model.recourse);
    const auto cert = certify_growth(model.recourse, xs, z, gamma, 10000, 5);
    double worst = 0.0;
    double far = 0.0;
    for (const auto& s : cert.samples) far = std::max(far, s.z_norm);
    for (std::size_t d = 0; d < xs.size(); ++d) {
      const double near = cert.max_ratio(d, 0.0, kNearNorm);
      const double all = cert.max_ratio(d, 0.0, kFarNorm);
      worst = std::max(worst, all / near);
    }
    const bool pass = worst <= kFactor && far >= 0.9 * kFarNorm && cert.max_residual_margin <= 0.0;
    ok = ok && pass;
    detail += std::string(name) + ": gamma=" + fmt(gamma) + " max ratio/near ratio=" + fmt(worst) +
              " largest |z|=" + fmt(far) + " residual margin=" + fmt(cert.max_residual_margin) + "; ";
  }
  return {ok, detail};
}

// 6 ------------------------------------------------------------------------
Outcome milp_discontinuities() {
  constexpr double kStep = 1e-4;
  constexpr double kMatchTol = 1e-4;
  constexpr double kFarTol = 1e-3;
  const auto model = model_from_json(demo("milp_simple.json"));
  const auto set = milp_discontinuity_predicate(model.recourse);
  const Point x{0.0};
  const double lo = -1.5;
  const std::size_t steps = 70000;  // up to z = 5.5
  std::vector<double> f(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const Point z{lo + static_cast<double>(k) * kStep};
    f[k] = eval_recourse(model.recourse, x, z);
  }
  int jumps = 0, matched = 0, false_pos = 0;
  std::vector<double> hits;
  for (std::size_t k = 0; k < steps; ++k) {
    if (std::abs(f[k + 1] - f[k]) <= 0.5) continue;
    ++jumps;
    const Point a{lo + static_cast<double>(k) * kStep};
    const Point b{lo + static_cast<double>(k + 1) * kStep};
    const double dist = std::min(set.distance(x, a), set.distance(x, b));
    matched += dist <= kMatchTol;
    false_pos += dist > kFarTol;
    hits.push_back(0.5 * (a[0] + b[0]));
  }
  // every candidate in the scanned range must show up as a jump
  int missed = 0;
  for (int c = 0; c <= 5; ++c) {
    const bool seen = std::any_of(hits.begin(), hits.end(), [&](double h) { return std::abs(h - c) <= kMatchTol; });
    missed += !seen;
  }
  return {jumps > 0 && matched == jumps && false_pos == 0 && missed == 0,
          "jumps=" + std::to_string(jumps) + " matched=" + std::to_string(matched) +
              " false positives=" + std::to_string(false_pos) + " candidates missed=" + std::to_string(missed)};
}

// 7 ------------------------------------------------------------------------
Outcome metrics() {
  constexpr double kTol = 1e-9;
  constexpr double kAxiomTol = 1e-8;
  std::mt19937_64 rng(1007);
  double worst_w = 0.0, worst_fm = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto mu = oracle::random_measure(rng, 1 + rep % 8, 1, -5, 5);
    const auto nu = oracle::random_measure(rng, 1 + (rep / 8) % 8, 1, -5, 5);
    for (double q : {1.0, 2.0}) worst_w = std::max(worst_w, std::abs(wasserstein(mu, nu, q) - wasserstein_lp(mu, nu, q)));
    worst_fm = std::max(worst_fm, std::abs(fortet_mourier(mu, nu, 1.0) - wasserstein(mu, nu, 1.0)));
  }
  // Full axioms for BL, W_q and psi; FM_2 relays only through the union
  // support, so its triangle count is reported but not required.
  using Metric = std::function<double(const DiscreteMeasure&, const DiscreteMeasure&)>;
  const std::vector<std::pair<const char*, Metric>> ds = {
      {"BL", bounded_lipschitz},
      {"W1", [](const auto& u, const auto& v) { return wasserstein(u, v, 1.0); }},
      {"W2", [](const auto& u, const auto& v) { return wasserstein(u, v, 2.0); }},
      {"FM1", [](const auto& u, const auto& v) { return fortet_mourier(u, v, 1.0); }},
      {"psi", [](const auto& u, const auto& v) { return psi_metric(u, v, 1.0); }},
  };
  const Metric fm2 = [](const auto& u, const auto& v) { return fortet_mourier(u, v, 2.0); };
  int axiom = 0;
  int fm2_basic = 0;
  int fm2_triangle = 0;
  std::string per_metric;
  std::vector<int> counts(ds.size(), 0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t dim = 1 + rep % 2;
    const auto a = oracle::random_measure(rng, 2 + rep % 3, dim, -3, 3);
    const auto b = oracle::random_measure(rng, 1 + rep % 4, dim, -3, 3);
    const auto c = oracle::random_measure(rng, 3, dim, -3, 3);
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const auto& d = ds[k].second;
      const double ab = d(a, b);
      const int bad = (d(a, a) > kAxiomTol) + (ab < 0.0) + (std::abs(ab - d(b, a)) > kAxiomTol) +
                      (d(a, c) > ab + d(b, c) + kAxiomTol);
      counts[k] += bad;
      axiom += bad;
    }
    const double ab = fm2(a, b);
    fm2_basic += (fm2(a, a) > kAxiomTol) + (ab < 0.0) + (std::abs(ab - fm2(b, a)) > kAxiomTol);
    fm2_triangle += fm2(a, c) > ab + fm2(b, c) + kAxiomTol;
  }
  for (std::size_t k = 0; k < ds.size(); ++k) per_metric += std::string(" ") + ds[k].first + "=" + std::to_string(counts[k]);
  return {worst_w <= kTol && worst_fm <= kTol && axiom == 0 && fm2_basic == 0,
          "max|W quantile-LP|=" + fmt(worst_w) + " max|FM1-W1|=" + fmt(worst_fm) + " axiom violations" + per_metric +
              " FM2 identity/symmetry=" + std::to_string(fm2_basic) +
              " (FM2 triangle, informational=" + std::to_string(fm2_triangle) + ")"};
}

// 8 ------------------------------------------------------------------------
Outcome escape_exhibit() {
  constexpr double kEpsilon = 1.0;
  constexpr double kKappa = 10.0;
  std::vector<double> thresholds;
  for (int j = 0; j <= 8; ++j) thresholds.push_back(std::pow(10.0, j / 2.0));
  const auto origin = dirac({0.0});

  bool escape_ok = true;
  std::vector<DiscreteMeasure> escape;
  for (int k = 0; k <= 7; ++k) {
    const double n = std::pow(4.0, k);
    escape.push_back(mix(origin, dirac({n}), 1.0 / n));
    escape_ok = escape_ok && bounded_lipschitz(escape.back(), origin) <= 2.0 / n + 1e-12;
    escape_ok = escape_ok && psi_metric(escape.back(), origin, 1.0) >= 1.0;
  }
  escape.push_back(origin);
  const bool escape_ui = diagnose_uniform_integrability(escape, 1.0, thresholds).uniformly_integrating;

  // (1 - 1/n) delta_0 + (1/n) delta_{sqrt n}: second moments equal to 1
  std::vector<DiscreteMeasure> bounded;
  std::vector<double> gaps, bounds;
  bool gap_ok = true;
  for (int k = 0; k <= 7; ++k) {
    const double n = std::pow(4.0, k);
    bounded.push_back(mix(origin, dirac({std::sqrt(n)}), 1.0 / n));
    const double bl = bounded_lipschitz(bounded.back(), origin);
    const double gap = psi_metric(bounded.back(), origin, 1.0) - bl;
    // truncate psi at a: the bounded part costs max(1, a) BL, each tail at most kappa / a^eps
    double bound = oracle::kInf;
    for (double a = 0.01; a <= 1e4; a *= 1.01) bound = std::min(bound, std::max(1.0, a) * bl + 2.0 * kKappa / a);
    gap_ok = gap_ok && gap <= bound + 1e-12;
    gaps.push_back(gap);
    bounds.push_back(bound);
  }
  bounded.push_back(origin);
  const bool cert = moment_bound_certificate(bounded, 1.0, kEpsilon, kKappa);
  const bool bounded_ui = diagnose_uniform_integrability(bounded, 1.0, thresholds).uniformly_integrating;
  const bool vanishing = bounds.back() <= bounds.front() / 10.0 && gaps.back() <= gaps.front() / 10.0;
  return {escape_ok && !escape_ui && cert && bounded_ui && gap_ok && vanishing,
          std::string("escape: BL<=2/n and psi>=1 ") + (escape_ok ? "hold" : "fail") +
              ", verdict=" + (escape_ui ? "pass" : "fail") + "; bounded: certificate=" + (cert ? "true" : "false") +
              ", verdict=" + (bounded_ui ? "pass" : "fail") + ", psi-BL gap " + fmt(gaps.front()) + " -> " +
              fmt(gaps.back()) + " under bound " + fmt(bounds.front()) + " -> " + fmt(bounds.back())};
}

// 9 ------------------------------------------------------------------------
Outcome saa_stability() {
  constexpr double kShrink = 3.0;
  constexpr int kNeeded = 4;
  const auto uniform = measure_from_json(demo("base_uniform.json"));
  const auto strict = measure_from_json(demo("base_strict.json"));
  bool bound_ok = true;
  bool argmin_ok = true;
  bool shrink_ok = true;
  std::string detail;
  for (const char* name : {"linear_expectation.json", "linear_avar.json"}) {
    const auto model = model_from_json(demo(name));
    int passing = 0;
    std::string seeds;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SaaScheme scheme{{100, 1000, 10000}, seed};
      const auto rep = run_experiment(model, uniform, scheme);
      const bool pass = rep.rows.back().delta_phi_abs <= rep.rows.front().delta_phi_abs / kShrink;
      passing += pass;
      seeds += (pass ? "+" : "-");
      for (const auto& r : rep.rows) bound_ok = bound_ok && r.error.empty() && r.delta_phi_abs <= r.sup_delta_q;
      const auto srep = run_experiment(model, strict, scheme);
      for (const auto& r : srep.rows) bound_ok = bound_ok && r.error.empty() && r.delta_phi_abs <= r.sup_delta_q;
      argmin_ok = argmin_ok && srep.rows.back().argmin_excess == 0.0;
    }
    shrink_ok = shrink_ok && passing >= kNeeded;
    detail += std::string(name) + " shrink seeds 0..4 " + seeds + " (" + std::to_string(passing) + "/5); ";
  }
  detail += std::string("|dphi|<=sup|dQ| ") + (bound_ok ? "every row" : "violated") + "; strict argmin excess at 1e4 " +
            (argmin_ok ? "0" : "nonzero");
  return {shrink_ok && bound_ok && argmin_ok, detail};
}

// 10 -----------------------------------------------------------------------
Outcome determinism() {
  const auto root = fs::temp_directory_path() / "meanrisk_acceptance";
  fs::remove_all(root);
  int runs = 0, differing = 0;
  for (const char* model : {"linear_expectation.json", "linear_avar.json", "milp_simple.json", "miqp.json",
                            "convex_mip.json"}) {
    for (const char* scheme : {"scheme_saa.json", "scheme_contamination_zero.json", "scheme_escape.json"}) {
      std::string outs[2];
      for (int pass = 0; pass < 2; ++pass) {
        const auto dir = root / (std::string(model) + scheme + std::to_string(pass));
        const std::string args[] = {"meanrisk", "stability", "--model",  kDemo + "/" + model,
                                    "--measure", kDemo + "/base_uniform.json", "--scheme", kDemo + "/" + scheme,
                                    "--out",     dir.string()};
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        for (const char* f : {"report.csv", "report.json", "report.svg"}) {
          std::ifstream in(dir / f, std::ios::binary);
          outs[pass] += std::string(std::istreambuf_iterator<char>(in), {}) + '\0';
        }
      }
      ++runs;
      differing += outs[0] != outs[1] || outs[0].size() < 4;
    }
  }
  fs::remove_all(root);
  return {differing == 0, std::to_string(runs) + " experiments run twice, " + std::to_string(differing) +
                              " with differing report bytes"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "risk-functional exactness", 10, risk_exactness},
      {2, "risk property suite", 10, risk_properties},
      {3, "icx order monotonicity", 5, order_monotonicity},
      {4, "solver correctness", 60, solver_correctness},
      {5, "recourse growth bounds", 60, growth_bounds},
      {6, "MILP discontinuity geometry", 10, milp_discontinuities},
      {7, "metrics", 30, metrics},
      {8, "escape and moment-bounded exhibits", 10, escape_exhibit},
      {9, "SAA stability run", 120, saa_stability},
      {10, "report determinism", 120, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.ok && secs < c.limit_s;
    failed += !pass;
    std::printf("%s %2d %s [%.2fs / %.0fs] %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.limit_s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
