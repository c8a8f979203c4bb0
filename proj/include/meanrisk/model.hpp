#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "meanrisk/measure.hpp"
#include "meanrisk/recourse.hpp"
#include "meanrisk/risk.hpp"

namespace meanrisk {

/// Finite, nonempty set of decisions of a common dimension.
class DecisionSet {
 public:
  explicit DecisionSet(std::vector<Point> points);
  /// Tensor grid over [lo, hi] with counts[i] points on axis i (a single
  /// point sits at lo). Expanded in lexicographic order.
  static DecisionSet grid(const Point& lo, const Point& hi, const std::vector<std::size_t>& counts);

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dim() const noexcept { return points_.front().size(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const noexcept { return points_; }

 private:
  std::vector<Point> points_;
};

struct MeanRiskModel {
  RecourseModel recourse;
  RiskSpec risk;
  DecisionSet decisions;
  double p = 1.0;      // integrability order of the risk functional
  double gamma = 1.0;  // growth exponent of the recourse function
};

/// Fills p from the risk functional and gamma from model_exponent() when
/// they are not given; validates everything (InvalidSpec / DimMismatch).
MeanRiskModel make_model(RecourseModel recourse, RiskSpec risk, DecisionSet decisions,
                         std::optional<double> p = std::nullopt, std::optional<double> gamma = std::nullopt);

/// Risk of the cost distribution f(x, Z), Z ~ nu.
double objective(const MeanRiskModel& model, const Point& x, const DiscreteMeasure& nu);
/// Minimum of objective() over the decision set.
double optimal_value(const MeanRiskModel& model, const DiscreteMeasure& nu);
/// Indices of decisions whose objective is within tol of the optimum.
std::vector<std::size_t> optimal_set(const MeanRiskModel& model, const DiscreteMeasure& nu, double tol = 1e-8);

/// FNV-1a over the model content (decisions, p, gamma, risk, recourse data).
std::uint64_t model_fingerprint(const MeanRiskModel& model);

struct MomentReport {
  bool feasible = true;    // always, for finitely supported measures
  double order = 0.0;      // gamma * p
  double moment = 0.0;     // moment(nu, gamma * p)
};

MomentReport moment_feasibility(const MeanRiskModel& model, const DiscreteMeasure& nu);

/// Caches objective values per (decision index, measure content hash).
/// Safe to share between threads; concurrent fills store identical values.
class ObjectiveEvaluator {
 public:
  explicit ObjectiveEvaluator(const MeanRiskModel& model, std::size_t threads = 1);

  double value(std::size_t decision, const DiscreteMeasure& nu);
  /// Objective at every decision, in decision order.
  std::vector<double> values(const DiscreteMeasure& nu);
  double optimal_value(const DiscreteMeasure& nu);
  std::vector<std::size_t> optimal_set(const DiscreteMeasure& nu, double tol = 1e-8);

  std::size_t cache_size() const;
  const MeanRiskModel& model() const noexcept { return model_; }

 private:
  const MeanRiskModel& model_;
  std::size_t threads_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::size_t, std::uint64_t>, double> cache_;
};

/// Indices within tol of the minimum of `values`.
std::vector<std::size_t> indices_within(const std::vector<double>& values, double tol);

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace meanrisk
