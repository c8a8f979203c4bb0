#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "meanrisk/measure.hpp"

namespace meanrisk {

struct TransportPlan {
  struct Entry {
    std::size_t source = 0;
    std::size_t target = 0;
    double mass = 0.0;
  };
  std::vector<Entry> entries;  // positive masses only
  double total_mass = 0.0;
  double cost = 0.0;
};

/// Min-cost coupling of supply and demand (equal totals within 1e-9) for the
/// given cost matrix, solved as a transport LP.
TransportPlan optimal_transport(std::span<const double> supply, std::span<const double> demand,
                                const Eigen::MatrixXd& cost);

/// sup { int f dmu - int f dnu : |f| <= 1, Lip(f) <= 1 }.
/// One-dimensional inputs go through an exact dynamic program over concave
/// piecewise-linear value functions; higher dimensions through the dual
/// transport problem with cost min(||x - y||, 2).
double bounded_lipschitz(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Wasserstein distance of order q >= 1. Quantile coupling in one dimension,
/// transport LP otherwise.
double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q);
/// Always the transport LP, whatever the dimension.
double wasserstein_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q);

/// ||x - y|| max{1, ||x||^{q-1}, ||y||^{q-1}}
double fortet_mourier_cost(std::span<const double> x, std::span<const double> y, double q);

/// Fortet-Mourier distance of order q >= 1: transport between the positive
/// and negative parts of mu - nu with the cost reduced by shortest paths
/// through the union support.
double fortet_mourier(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q);

/// bounded_lipschitz(mu, nu) + |moment(mu, q) - moment(nu, q)|
double psi_metric(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q);

struct MomentCertificate {
  double epsilon = 0.0;
  double kappa = 0.0;
  bool holds = false;
};

struct UniformIntegrabilityReport {
  double q = 0.0;
  double epsilon = 0.0;
  std::vector<double> thresholds;
  std::vector<std::vector<double>> tails;  // [member][threshold]
  std::vector<double> sup_tail;            // [threshold]
  bool uniformly_integrating = false;
  std::optional<MomentCertificate> moment_certificate;
};

/// Family-sup of tail_functional(., q, a) over the threshold grid. The
/// verdict passes iff the sup drops to epsilon or below at some grid point
/// and stays there for all larger thresholds.
UniformIntegrabilityReport diagnose_uniform_integrability(const std::vector<DiscreteMeasure>& family, double q,
                                                          std::vector<double> thresholds,
                                                          double epsilon = 1e-3);

/// moment(mu, q + epsilon) <= kappa for every member.
bool moment_bound_certificate(const std::vector<DiscreteMeasure>& family, double q, double epsilon,
                              double kappa);

}  // namespace meanrisk
