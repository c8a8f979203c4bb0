#include "meanrisk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "meanrisk/error.hpp"
#include "meanrisk/optim.hpp"

namespace meanrisk {

namespace {

struct SignedSupport {
  std::vector<Point> points;
  std::vector<double> mass;
};

void check_same_dim(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw Error(ErrorCode::DimMismatch, "measures live in different dimensions");
}

void check_order(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw Error(ErrorCode::OutOfRange, "order q must be >= 1");
}

bool same_point(const Point& a, const Point& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > kMergeTolerance) return false;
  }
  return true;
}

// Union support of mu and nu with the signed masses of mu - nu.
SignedSupport signed_difference(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<std::pair<const Point*, double>> all;
  all.reserve(mu.size() + nu.size());
  for (const auto& a : mu.atoms()) all.emplace_back(&a.point, a.weight);
  for (const auto& a : nu.atoms()) all.emplace_back(&a.point, -a.weight);
  std::stable_sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return *l.first < *r.first; });
  SignedSupport out;
  for (const auto& [p, w] : all) {
    if (!out.points.empty() && same_point(out.points.back(), *p)) {
      out.mass.back() += w;
    } else {
      out.points.push_back(*p);
      out.mass.push_back(w);
    }
  }
  return out;
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Transport from the positive to the negative part of a signed support.
double transport_parts(const SignedSupport& s, const Eigen::MatrixXd& cost) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < s.mass.size(); ++i) {
    if (s.mass[i] > 0.0) pos.push_back(i);
    if (s.mass[i] < 0.0) neg.push_back(i);
  }
  if (pos.empty() || neg.empty()) return 0.0;
  std::vector<double> supply;
  std::vector<double> demand;
  for (auto i : pos) supply.push_back(s.mass[i]);
  for (auto j : neg) demand.push_back(-s.mass[j]);
  Eigen::MatrixXd c(static_cast<Eigen::Index>(pos.size()), static_cast<Eigen::Index>(neg.size()));
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = 0; j < neg.size(); ++j) {
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cost(static_cast<Eigen::Index>(pos[i]), static_cast<Eigen::Index>(neg[j]));
    }
  }
  return optimal_transport(supply, demand, c).cost;
}

// Concave piecewise-linear function on [-1, 1] given by breakpoints.
struct ConcavePiecewise {
  std::vector<double> t;
  std::vector<double> v;

  double at(double x) const {
    if (x <= t.front()) return v.front();
    if (x >= t.back()) return v.back();
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const auto k = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[k - 1]) / (t[k] - t[k - 1]);
    return v[k - 1] + w * (v[k] - v[k - 1]);
  }

  // W(s) = max_{|s' - s| <= delta} V(s'), restricted to [-1, 1].
  void window_max(double delta) {
    const double top = *std::max_element(v.begin(), v.end());
    std::size_t left = 0;
    while (v[left] != top) ++left;
    std::size_t right = v.size() - 1;
    while (v[right] != top) --right;
    ConcavePiecewise wide;
    for (std::size_t k = 0; k <= left; ++k) {
      wide.t.push_back(t[k] - delta);
      wide.v.push_back(v[k]);
    }
    for (std::size_t k = right; k < t.size(); ++k) {
      wide.t.push_back(t[k] + delta);
      wide.v.push_back(v[k]);
    }
    ConcavePiecewise clipped;
    clipped.t.push_back(-1.0);
    clipped.v.push_back(wide.at(-1.0));
    for (std::size_t k = 0; k < wide.t.size(); ++k) {
      if (wide.t[k] > -1.0 && wide.t[k] < 1.0 && wide.t[k] > clipped.t.back() + 1e-15) {
        clipped.t.push_back(wide.t[k]);
        clipped.v.push_back(wide.v[k]);
      }
    }
    clipped.t.push_back(1.0);
    clipped.v.push_back(wide.at(1.0));
    *this = std::move(clipped);
  }

  void add_linear(double slope) {
    for (std::size_t k = 0; k < t.size(); ++k) v[k] += slope * t[k];
  }
};

// max sum g_i f_i  s.t. |f_i| <= 1, |f_{i+1} - f_i| <= x_{i+1} - x_i.
double bounded_lipschitz_line(const SignedSupport& s) {
  ConcavePiecewise fn{{-1.0, 1.0}, {-s.mass[0], s.mass[0]}};
  for (std::size_t i = 1; i < s.points.size(); ++i) {
    fn.window_max(s.points[i][0] - s.points[i - 1][0]);
    fn.add_linear(s.mass[i]);
  }
  return std::max(0.0, *std::max_element(fn.v.begin(), fn.v.end()));
}

}  // namespace

TransportPlan optimal_transport(std::span<const double> supply, std::span<const double> demand,
                                const Eigen::MatrixXd& cost) {
  const auto n = supply.size();
  const auto m = demand.size();
  if (static_cast<std::size_t>(cost.rows()) != n || static_cast<std::size_t>(cost.cols()) != m) {
    throw Error(ErrorCode::DimMismatch, "cost matrix must be supply x demand");
  }
  if (n == 0 || m == 0) throw Error(ErrorCode::EmptySupport, "transport needs nonempty marginals");
  const double ts = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double td = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(ts - td) > 1e-9 * std::max(1.0, ts)) {
    throw Error(ErrorCode::InvalidArgument, "supply and demand totals differ");
  }
  for (double v : supply) {
    if (v < 0.0) throw Error(ErrorCode::NegativeWeight, "negative supply");
  }
  for (double v : demand) {
    if (v < 0.0) throw Error(ErrorCode::NegativeWeight, "negative demand");
  }
  // Rows: every supply, every demand but the last (implied by the totals).
  const auto rows = static_cast<Eigen::Index>(n + m - 1);
  const auto vars = static_cast<Eigen::Index>(n * m);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, vars);
  Eigen::VectorXd b(rows);
  Eigen::VectorXd c(vars);
  for (std::size_t i = 0; i < n; ++i) {
    b[static_cast<Eigen::Index>(i)] = supply[i];
    for (std::size_t j = 0; j < m; ++j) {
      const auto v = static_cast<Eigen::Index>(i * m + j);
      c[v] = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      a(static_cast<Eigen::Index>(i), v) = 1.0;
      if (j + 1 < m) a(static_cast<Eigen::Index>(n + j), v) = 1.0;
    }
  }
  for (std::size_t j = 0; j + 1 < m; ++j) b[static_cast<Eigen::Index>(n + j)] = demand[j];
  const Solution sol = solve_lp(LinearProgram::nonnegative(
      c, a, b, std::vector<RowSense>(static_cast<std::size_t>(rows), RowSense::Equal)));
  if (!sol.optimal()) throw Error(ErrorCode::NumericalFailure, "transport LP did not reach an optimum");
  TransportPlan plan;
  plan.cost = sol.value;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double mass = sol.point[static_cast<Eigen::Index>(i * m + j)];
      if (mass > 0.0) {
        plan.entries.push_back({i, j, mass});
        plan.total_mass += mass;
      }
    }
  }
  return plan;
}

double bounded_lipschitz(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_same_dim(mu, nu);
  if (mu == nu) return 0.0;
  const SignedSupport s = signed_difference(mu, nu);
  if (mu.dim() == 1) return bounded_lipschitz_line(s);
  const auto k = static_cast<Eigen::Index>(s.points.size());
  Eigen::MatrixXd cost(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      cost(i, j) = std::min(distance(s.points[static_cast<std::size_t>(i)], s.points[static_cast<std::size_t>(j)]), 2.0);
    }
  }
  return transport_parts(s, cost);
}

double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q) {
  check_same_dim(mu, nu);
  check_order(q);
  if (mu.dim() != 1) return wasserstein_lp(mu, nu, q);
  const auto fm = ScalarDistribution::from_measure(mu);
  const auto fn = ScalarDistribution::from_measure(nu);
  const auto cm = fm.cumulative();
  const auto cn = fn.cumulative();
  double integral = 0.0;
  double prev = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < cm.size() && j < cn.size()) {
    const double next = std::min(cm[i], cn[j]);
    if (next > prev) {
      integral += (next - prev) * std::pow(std::abs(fm.values()[i] - fn.values()[j]), q);
      prev = next;
    }
    if (cm[i] == next) ++i;
    if (cn[j] == next) ++j;
  }
  return std::pow(integral, 1.0 / q);
}

double wasserstein_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q) {
  check_same_dim(mu, nu);
  check_order(q);
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& at : mu.atoms()) a.push_back(at.weight);
  for (const auto& at : nu.atoms()) b.push_back(at.weight);
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(mu.size()), static_cast<Eigen::Index>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::pow(distance(mu[i].point, nu[j].point), q);
    }
  }
  const double total = optimal_transport(a, b, cost).cost;
  return std::pow(std::max(0.0, total), 1.0 / q);
}

double fortet_mourier_cost(std::span<const double> x, std::span<const double> y, double q) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
  const double growth = std::max({1.0, std::pow(euclidean_norm(x), q - 1.0), std::pow(euclidean_norm(y), q - 1.0)});
  return std::sqrt(d) * growth;
}

double fortet_mourier(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q) {
  check_same_dim(mu, nu);
  check_order(q);
  if (mu == nu) return 0.0;
  const SignedSupport s = signed_difference(mu, nu);
  const auto k = static_cast<Eigen::Index>(s.points.size());
  Eigen::MatrixXd cost(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      cost(i, j) = fortet_mourier_cost(s.points[static_cast<std::size_t>(i)], s.points[static_cast<std::size_t>(j)], q);
    }
  }
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) cost(i, j) = std::min(cost(i, j), cost(i, r) + cost(r, j));
    }
  }
  return transport_parts(s, cost);
}

double psi_metric(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q) {
  check_same_dim(mu, nu);
  return bounded_lipschitz(mu, nu) + std::abs(moment(mu, q) - moment(nu, q));
}

UniformIntegrabilityReport diagnose_uniform_integrability(const std::vector<DiscreteMeasure>& family, double q,
                                                          std::vector<double> thresholds, double epsilon) {
  if (family.empty()) throw Error(ErrorCode::EmptySet, "family is empty");
  if (thresholds.empty()) throw Error(ErrorCode::InvalidArgument, "threshold grid is empty");
  if (!(q > 0.0)) throw Error(ErrorCode::OutOfRange, "gauge exponent must be positive");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) throw Error(ErrorCode::InvalidArgument, "thresholds must increase");
  }
  for (const auto& mu : family) check_same_dim(mu, family.front());
  UniformIntegrabilityReport rep;
  rep.q = q;
  rep.epsilon = epsilon;
  rep.thresholds = std::move(thresholds);
  rep.sup_tail.assign(rep.thresholds.size(), 0.0);
  for (const auto& mu : family) {
    std::vector<double> row;
    row.reserve(rep.thresholds.size());
    for (std::size_t k = 0; k < rep.thresholds.size(); ++k) {
      row.push_back(tail_functional(mu, q, rep.thresholds[k]));
      rep.sup_tail[k] = std::max(rep.sup_tail[k], row.back());
    }
    rep.tails.push_back(std::move(row));
  }
  rep.uniformly_integrating = rep.sup_tail.back() <= epsilon;
  return rep;
}

bool moment_bound_certificate(const std::vector<DiscreteMeasure>& family, double q, double epsilon,
                              double kappa) {
  return std::all_of(family.begin(), family.end(),
                     [&](const DiscreteMeasure& mu) { return moment(mu, q + epsilon) <= kappa; });
}

}  // namespace meanrisk
