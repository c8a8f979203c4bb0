#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "meanrisk/measure.hpp"
#include "meanrisk/metrics.hpp"
#include "meanrisk/model.hpp"

namespace meanrisk {

/// Empirical measures of n draws from the base.
struct SaaScheme {
  std::vector<std::size_t> n_schedule;  // strictly increasing
  std::uint64_t seed = 0;
};

/// (1 - t) base + t direction.
struct ContaminationScheme {
  DiscreteMeasure direction;
  std::vector<double> t_schedule;  // nonincreasing, in [0, 1]
};

/// Every atom moved by independent uniform noise on [-sigma, sigma] per
/// coordinate; weights unchanged.
struct JitterScheme {
  std::vector<double> sigma_schedule;  // positive, nonincreasing
  std::uint64_t seed = 0;
};

/// Coordinates snapped to the grid (1/r) Z and coincident atoms merged.
struct DiscretizeScheme {
  std::vector<double> grid_schedule;  // resolutions r, increasing
};

/// (1 - 1/n) base + (1/n) delta at n e_1: weakly convergent to the base
/// while the first moment stays off by about one.
struct EscapeScheme {
  std::vector<double> n_schedule;  // increasing, >= 1
};

using PerturbationScheme =
    std::variant<SaaScheme, ContaminationScheme, JitterScheme, DiscretizeScheme, EscapeScheme>;

/// Throws InvalidSpec on empty or wrongly ordered schedules.
void validate(const PerturbationScheme& scheme);
std::string_view scheme_name(const PerturbationScheme& scheme);
std::vector<double> schedule_parameters(const PerturbationScheme& scheme);
/// Seed used at each step (derive_seed(seed, step)); empty for
/// deterministic schemes.
std::vector<std::uint64_t> step_seeds(const PerturbationScheme& scheme);

std::vector<DiscreteMeasure> generate_sequence(const PerturbationScheme& scheme, const DiscreteMeasure& base);

struct ReportRow {
  std::size_t step = 0;
  double param = 0.0;
  double d_bl = 0.0;
  double d_psi = 0.0;
  double delta_phi_abs = 0.0;
  double sup_delta_q = 0.0;
  double argmin_excess = 0.0;
  std::string error;  // empty unless the step failed; numbers are then NaN
};

inline constexpr std::string_view kReportColumns[] = {"step",          "param",       "d_bl",          "d_psi",
                                                      "delta_phi_abs", "sup_delta_q", "argmin_excess", "error"};

struct ExperimentOptions {
  double argmin_tol = 1e-8;
  double ui_epsilon = 1e-3;
  std::vector<double> thresholds;  // empty: A0 * 10^{j/2}, j = 0..4, A0 = max(1, 2 max psi(base atoms))
  std::size_t threads = 1;
};

struct StabilityReport {
  std::vector<ReportRow> rows;
  PerturbationScheme scheme;
  std::uint64_t model_hash = 0;
  std::uint64_t base_hash = 0;
  std::vector<std::uint64_t> seeds;
  double gamma = 0.0;
  double p = 0.0;
  UniformIntegrabilityReport integrability;
};

/// Compares every perturbed measure with the base. Failures of a single step
/// are recorded in its row; failures on the base measure propagate.
StabilityReport run_experiment(const MeanRiskModel& model, const DiscreteMeasure& base,
                               const PerturbationScheme& scheme, const ExperimentOptions& options = {});

/// max over candidate of the distance to the nearest reference decision.
double argmin_excess(const std::vector<Point>& candidate, const std::vector<Point>& reference);

struct TrendVerdict {
  bool pass = false;
  double first = 0.0;
  double last = 0.0;
  double slope = 0.0;  // least squares of log(value) on log(step + 1), positive entries only
};

/// last <= first / factor on the named column (>= 3 rows; UnknownColumn).
TrendVerdict trend_check(const StabilityReport& report, std::string_view column, double factor);

std::string report_csv(const StabilityReport& report);
/// Log-log line chart of the numeric columns on a fixed canvas.
std::string report_svg(const StabilityReport& report);

}  // namespace meanrisk
