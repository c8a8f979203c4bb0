#pragma once

#include <string>
#include <variant>

#include "meanrisk/measure.hpp"

namespace meanrisk {

struct Expectation {
  bool operator==(const Expectation&) const = default;
};

/// Average value at risk at level alpha in (0,1).
struct AVaR {
  double alpha = 0.5;
  bool operator==(const AVaR&) const = default;
};

/// E[Y] + a (E[((Y - E[Y])^+)^p])^{1/p}
struct SemiDev {
  double a = 0.0;
  double p = 1.0;
  bool operator==(const SemiDev&) const = default;
};

/// E[Y] + a (E[((Y - c)^+)^p])^{1/p}; not translation-equivariant.
struct TargetSemiDev {
  double a = 0.0;
  double c = 1.0;
  double p = 1.0;
  bool operator==(const TargetSemiDev&) const = default;
};

using RiskSpec = std::variant<Expectation, AVaR, SemiDev, TargetSemiDev>;

/// Throws InvalidSpec when a parameter leaves its admissible range.
void validate(const RiskSpec& spec);
std::string describe(const RiskSpec& spec);
bool is_translation_equivariant(const RiskSpec& spec);
/// Order p of the L^p space the functional lives on.
double integrability_order(const RiskSpec& spec);

double evaluate_risk(const RiskSpec& spec, const ScalarDistribution& dist);

double expectation(const ScalarDistribution& dist);
double avar(const ScalarDistribution& dist, double alpha);
double semidev(const ScalarDistribution& dist, double a, double p);
double target_semidev(const ScalarDistribution& dist, double a, double c, double p);

/// min_t t + E[(Y-t)^+]/(1-alpha), minimized over the atom values. Independent
/// route to avar() used for cross-checking.
double avar_ru_oracle(const ScalarDistribution& dist, double alpha);

/// Stop-loss transform E[(Y - t)^+].
double stop_loss(const ScalarDistribution& dist, double t);

/// mu <=_icx nu, decided by comparing stop-loss transforms at every atom of
/// both distributions (both transforms are piecewise linear between atoms).
bool icx_leq(const ScalarDistribution& mu, const ScalarDistribution& nu);

/// Law of lambda F_mu^{-1}(U) + (1-lambda) F_nu^{-1}(U), built on the merged
/// grid of cumulative weights.
ScalarDistribution comonotone_combination(const ScalarDistribution& mu,
                                          const ScalarDistribution& nu, double lambda);

}  // namespace meanrisk
