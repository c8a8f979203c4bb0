#include "meanrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "meanrisk/error.hpp"

namespace meanrisk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "AVaR level must lie in (0,1)");
  }
}

void check_semidev(double a, double p) {
  if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::InvalidSpec, "semideviation weight a must lie in [0,1]");
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidSpec, "order p must be >= 1");
}

double pth_power(double v, double p) {
  if (p == 1.0) return v;
  if (p == 2.0) return v * v;
  return std::pow(v, p);
}

double pth_root(double v, double p) {
  if (v == 0.0) return 0.0;
  if (p == 1.0) return v;
  if (p == 2.0) return std::sqrt(v);
  return std::pow(v, 1.0 / p);
}

// E[((Y - t)^+)^p]
double upper_partial_moment(const ScalarDistribution& dist, double t, double p) {
  const auto v = dist.values();
  const auto w = dist.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > t) s += w[i] * pth_power(v[i] - t, p);
  }
  return s;
}

}  // namespace

void validate(const RiskSpec& spec) {
  std::visit(overloaded{
                 [](const Expectation&) {},
                 [](const AVaR& s) {
                   if (!(s.alpha > 0.0 && s.alpha < 1.0)) {
                     throw Error(ErrorCode::InvalidSpec, "AVaR level must lie in (0,1)");
                   }
                 },
                 [](const SemiDev& s) { check_semidev(s.a, s.p); },
                 [](const TargetSemiDev& s) {
                   check_semidev(s.a, s.p);
                   if (!(s.c > 0.0)) throw Error(ErrorCode::InvalidSpec, "target c must be positive");
                 },
             },
             spec);
}

std::string describe(const RiskSpec& spec) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Expectation&) { os << "expectation"; },
                 [&](const AVaR& s) { os << "avar(alpha=" << s.alpha << ")"; },
                 [&](const SemiDev& s) { os << "semidev(a=" << s.a << ",p=" << s.p << ")"; },
                 [&](const TargetSemiDev& s) {
                   os << "target_semidev(a=" << s.a << ",c=" << s.c << ",p=" << s.p << ")";
                 },
             },
             spec);
  return os.str();
}

bool is_translation_equivariant(const RiskSpec& spec) {
  return !std::holds_alternative<TargetSemiDev>(spec);
}

double integrability_order(const RiskSpec& spec) {
  return std::visit(overloaded{
                        [](const Expectation&) { return 1.0; },
                        [](const AVaR&) { return 1.0; },
                        [](const SemiDev& s) { return s.p; },
                        [](const TargetSemiDev& s) { return s.p; },
                    },
                    spec);
}

double evaluate_risk(const RiskSpec& spec, const ScalarDistribution& dist) {
  validate(spec);
  return std::visit(overloaded{
                        [&](const Expectation&) { return expectation(dist); },
                        [&](const AVaR& s) { return avar(dist, s.alpha); },
                        [&](const SemiDev& s) { return semidev(dist, s.a, s.p); },
                        [&](const TargetSemiDev& s) { return target_semidev(dist, s.a, s.c, s.p); },
                    },
                    spec);
}

double expectation(const ScalarDistribution& dist) { return dist.mean(); }

double avar(const ScalarDistribution& dist, double alpha) {
  check_alpha(alpha);
  const auto v = dist.values();
  const auto cum = dist.cumulative();
  // The quantile equals v[i] on (cum[i-1], cum[i]]; clip each plateau to (alpha, 1].
  double integral = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double left = std::max(prev, alpha);
    if (cum[i] > left) integral += (cum[i] - left) * v[i];
    prev = cum[i];
  }
  return integral / (1.0 - alpha);
}

double semidev(const ScalarDistribution& dist, double a, double p) {
  check_semidev(a, p);
  const double m = dist.mean();
  return m + a * pth_root(upper_partial_moment(dist, m, p), p);
}

double target_semidev(const ScalarDistribution& dist, double a, double c, double p) {
  check_semidev(a, p);
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidSpec, "target c must be positive");
  return dist.mean() + a * pth_root(upper_partial_moment(dist, c, p), p);
}

double avar_ru_oracle(const ScalarDistribution& dist, double alpha) {
  check_alpha(alpha);
  double best = std::numeric_limits<double>::infinity();
  for (double t : dist.values()) {
    best = std::min(best, t + upper_partial_moment(dist, t, 1.0) / (1.0 - alpha));
  }
  return best;
}

double stop_loss(const ScalarDistribution& dist, double t) {
  return upper_partial_moment(dist, t, 1.0);
}

bool icx_leq(const ScalarDistribution& mu, const ScalarDistribution& nu) {
  constexpr double kTol = 1e-10;
  auto dominated_at = [&](double t) { return stop_loss(mu, t) <= stop_loss(nu, t) + kTol; };
  return std::all_of(mu.values().begin(), mu.values().end(), dominated_at) &&
         std::all_of(nu.values().begin(), nu.values().end(), dominated_at);
}

ScalarDistribution comonotone_combination(const ScalarDistribution& mu,
                                          const ScalarDistribution& nu, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "combination weight must lie in [0,1]");
  }
  const auto cm = mu.cumulative();
  const auto cn = nu.cumulative();
  std::vector<ScalarAtom> raw;
  raw.reserve(cm.size() + cn.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double prev = 0.0;
  while (i < cm.size() && j < cn.size()) {
    const double next = std::min(cm[i], cn[j]);
    if (next > prev) {
      raw.push_back({lambda * mu.values()[i] + (1.0 - lambda) * nu.values()[j], next - prev});
      prev = next;
    }
    if (cm[i] == next) ++i;
    if (cn[j] == next) ++j;
  }
  return ScalarDistribution::from_atoms(std::move(raw));
}

}  // namespace meanrisk
