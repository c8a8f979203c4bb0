#include "meanrisk/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "meanrisk/error.hpp"

namespace meanrisk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T>
void require_nonempty(const std::vector<T>& v, const char* what) {
  if (v.empty()) throw Error(ErrorCode::InvalidSpec, std::string(what) + " schedule is empty");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

double row_column(const ReportRow& r, std::string_view column) {
  if (column == "step") return static_cast<double>(r.step);
  if (column == "param") return r.param;
  if (column == "d_bl") return r.d_bl;
  if (column == "d_psi") return r.d_psi;
  if (column == "delta_phi_abs") return r.delta_phi_abs;
  if (column == "sup_delta_q") return r.sup_delta_q;
  if (column == "argmin_excess") return r.argmin_excess;
  throw Error(ErrorCode::UnknownColumn, "unknown report column '" + std::string(column) + "'");
}

std::vector<Point> select(const DecisionSet& set, const std::vector<std::size_t>& idx) {
  std::vector<Point> out;
  for (auto i : idx) out.push_back(set[i]);
  return out;
}

}  // namespace

void validate(const PerturbationScheme& scheme) {
  std::visit(overloaded{
                 [](const SaaScheme& s) {
                   require_nonempty(s.n_schedule, "SAA");
                   for (std::size_t i = 0; i < s.n_schedule.size(); ++i) {
                     if (s.n_schedule[i] == 0 || (i > 0 && s.n_schedule[i] <= s.n_schedule[i - 1])) {
                       throw Error(ErrorCode::InvalidSpec, "SAA sample sizes must be positive and increasing");
                     }
                   }
                 },
                 [](const ContaminationScheme& s) {
                   require_nonempty(s.t_schedule, "contamination");
                   for (std::size_t i = 0; i < s.t_schedule.size(); ++i) {
                     const double t = s.t_schedule[i];
                     if (!(t >= 0.0 && t <= 1.0) || (i > 0 && t > s.t_schedule[i - 1])) {
                       throw Error(ErrorCode::InvalidSpec, "contamination weights must lie in [0,1] and not increase");
                     }
                   }
                 },
                 [](const JitterScheme& s) {
                   require_nonempty(s.sigma_schedule, "jitter");
                   for (std::size_t i = 0; i < s.sigma_schedule.size(); ++i) {
                     const double v = s.sigma_schedule[i];
                     if (!(v > 0.0) || !std::isfinite(v) || (i > 0 && v > s.sigma_schedule[i - 1])) {
                       throw Error(ErrorCode::InvalidSpec, "jitter widths must be positive and not increase");
                     }
                   }
                 },
                 [](const DiscretizeScheme& s) {
                   require_nonempty(s.grid_schedule, "discretize");
                   for (std::size_t i = 0; i < s.grid_schedule.size(); ++i) {
                     const double v = s.grid_schedule[i];
                     if (!(v > 0.0) || !std::isfinite(v) || (i > 0 && v <= s.grid_schedule[i - 1])) {
                       throw Error(ErrorCode::InvalidSpec, "grid resolutions must be positive and increasing");
                     }
                   }
                 },
                 [](const EscapeScheme& s) {
                   require_nonempty(s.n_schedule, "escape");
                   for (std::size_t i = 0; i < s.n_schedule.size(); ++i) {
                     const double v = s.n_schedule[i];
                     if (!(v >= 1.0) || !std::isfinite(v) || (i > 0 && v <= s.n_schedule[i - 1])) {
                       throw Error(ErrorCode::InvalidSpec, "escape positions must be >= 1 and increasing");
                     }
                   }
                 },
             },
             scheme);
}

std::string_view scheme_name(const PerturbationScheme& scheme) {
  static constexpr std::string_view names[] = {"saa", "contamination", "jitter", "discretize", "escape"};
  return names[scheme.index()];
}

std::vector<double> schedule_parameters(const PerturbationScheme& scheme) {
  return std::visit(overloaded{
                        [](const SaaScheme& s) {
                          std::vector<double> out;
                          for (auto n : s.n_schedule) out.push_back(static_cast<double>(n));
                          return out;
                        },
                        [](const ContaminationScheme& s) { return s.t_schedule; },
                        [](const JitterScheme& s) { return s.sigma_schedule; },
                        [](const DiscretizeScheme& s) { return s.grid_schedule; },
                        [](const EscapeScheme& s) { return s.n_schedule; },
                    },
                    scheme);
}

std::vector<std::uint64_t> step_seeds(const PerturbationScheme& scheme) {
  auto derive = [](std::uint64_t seed, std::size_t steps) {
    std::vector<std::uint64_t> out;
    for (std::size_t k = 0; k < steps; ++k) out.push_back(derive_seed(seed, k));
    return out;
  };
  if (const auto* s = std::get_if<SaaScheme>(&scheme)) return derive(s->seed, s->n_schedule.size());
  if (const auto* s = std::get_if<JitterScheme>(&scheme)) return derive(s->seed, s->sigma_schedule.size());
  return {};
}

std::vector<DiscreteMeasure> generate_sequence(const PerturbationScheme& scheme, const DiscreteMeasure& base) {
  validate(scheme);
  const auto seeds = step_seeds(scheme);
  std::vector<DiscreteMeasure> out;
  std::visit(overloaded{
                 [&](const SaaScheme& s) {
                   const Sampler draw = measure_sampler(base);
                   for (std::size_t k = 0; k < s.n_schedule.size(); ++k) {
                     out.push_back(empirical(draw, s.n_schedule[k], seeds[k]));
                   }
                 },
                 [&](const ContaminationScheme& s) {
                   for (double t : s.t_schedule) out.push_back(mix(base, s.direction, t));
                 },
                 [&](const JitterScheme& s) {
                   for (std::size_t k = 0; k < s.sigma_schedule.size(); ++k) {
                     const double sigma = s.sigma_schedule[k];
                     std::vector<Atom> atoms;
                     for (std::size_t i = 0; i < base.size(); ++i) {
                       CounterRng rng(derive_seed(seeds[k], i));
                       Atom a = base[i];
                       for (double& c : a.point) c += sigma * (2.0 * uniform01(rng) - 1.0);
                       atoms.push_back(std::move(a));
                     }
                     out.push_back(canonicalize(std::move(atoms)));
                   }
                 },
                 [&](const DiscretizeScheme& s) {
                   for (double r : s.grid_schedule) {
                     std::vector<Atom> atoms(base.atoms().begin(), base.atoms().end());
                     for (auto& a : atoms) {
                       for (double& c : a.point) c = std::round(c * r) / r;
                     }
                     out.push_back(canonicalize(std::move(atoms)));
                   }
                 },
                 [&](const EscapeScheme& s) {
                   for (double n : s.n_schedule) {
                     Point far(base.dim(), 0.0);
                     far[0] = n;
                     out.push_back(mix(base, dirac(std::move(far)), 1.0 / n));
                   }
                 },
             },
             scheme);
  return out;
}

double argmin_excess(const std::vector<Point>& candidate, const std::vector<Point>& reference) {
  if (candidate.empty() || reference.empty()) throw Error(ErrorCode::EmptySet, "argmin sets must be nonempty");
  double excess = 0.0;
  for (const auto& x : candidate) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& y : reference) {
      if (x.size() != y.size()) throw Error(ErrorCode::DimMismatch, "decisions differ in dimension");
      double d = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
      nearest = std::min(nearest, std::sqrt(d));
    }
    excess = std::max(excess, nearest);
  }
  return excess;
}

StabilityReport run_experiment(const MeanRiskModel& model, const DiscreteMeasure& base,
                               const PerturbationScheme& scheme, const ExperimentOptions& options) {
  if (base.dim() != model.recourse.scenario_dim()) {
    throw Error(ErrorCode::DimMismatch, "base measure has the wrong dimension");
  }
  const auto sequence = generate_sequence(scheme, base);
  const auto params = schedule_parameters(scheme);
  const double order = model.gamma * model.p;

  ObjectiveEvaluator eval(model, options.threads);
  const auto base_values = eval.values(base);
  const double base_phi = *std::min_element(base_values.begin(), base_values.end());
  const auto base_argmin = select(model.decisions, indices_within(base_values, options.argmin_tol));

  StabilityReport rep{{}, scheme, model_fingerprint(model), base.content_hash(), step_seeds(scheme),
                      model.gamma, model.p, {}};
  rep.rows.resize(sequence.size());
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    ReportRow& row = rep.rows[k];
    row.step = k;
    row.param = params[k];
    const auto& nu = sequence[k];
    try {
      row.d_bl = bounded_lipschitz(nu, base);
      row.d_psi = row.d_bl + std::abs(moment(nu, order) - moment(base, order));
      const auto values = eval.values(nu);
      const double phi = *std::min_element(values.begin(), values.end());
      row.delta_phi_abs = std::abs(phi - base_phi);
      row.sup_delta_q = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        row.sup_delta_q = std::max(row.sup_delta_q, std::abs(values[i] - base_values[i]));
      }
      row.argmin_excess =
          argmin_excess(select(model.decisions, indices_within(values, options.argmin_tol)), base_argmin);
    } catch (const Error& e) {
      row = ReportRow{k, params[k], kNaN, kNaN, kNaN, kNaN, kNaN, e.what()};
    }
  }

  std::vector<double> thresholds = options.thresholds;
  if (thresholds.empty()) {
    double top = 0.0;
    for (const auto& a : base.atoms()) top = std::max(top, std::pow(euclidean_norm(a.point), order));
    const double a0 = std::max(1.0, 2.0 * top);
    for (int j = 0; j <= 4; ++j) thresholds.push_back(a0 * std::pow(10.0, j / 2.0));
  }
  std::vector<DiscreteMeasure> family = sequence;
  family.push_back(base);
  rep.integrability = diagnose_uniform_integrability(family, order, thresholds, options.ui_epsilon);
  return rep;
}

TrendVerdict trend_check(const StabilityReport& report, std::string_view column, double factor) {
  if (report.rows.empty()) throw Error(ErrorCode::InvalidArgument, "report has no rows");
  row_column(report.rows.front(), column);
  if (report.rows.size() < 3) throw Error(ErrorCode::InvalidArgument, "trend check needs at least three rows");
  if (!(factor > 1.0)) throw Error(ErrorCode::InvalidArgument, "trend factor must exceed 1");
  TrendVerdict v;
  v.first = row_column(report.rows.front(), column);
  v.last = row_column(report.rows.back(), column);
  v.pass = v.last <= v.first / factor;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : report.rows) {
    const double y = row_column(r, column);
    if (y > 0.0 && std::isfinite(y)) {
      xs.push_back(std::log(static_cast<double>(r.step) + 1.0));
      ys.push_back(std::log(y));
    }
  }
  if (xs.size() >= 2) {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    v.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return v;
}

std::string report_csv(const StabilityReport& report) {
  std::string out;
  for (std::size_t i = 0; i < std::size(kReportColumns); ++i) {
    out += i ? "," : "";
    out += kReportColumns[i];
  }
  out += '\n';
  for (const auto& r : report.rows) {
    out += std::to_string(r.step) + ',' + format_double(r.param) + ',' + format_double(r.d_bl) + ',' +
           format_double(r.d_psi) + ',' + format_double(r.delta_phi_abs) + ',' + format_double(r.sup_delta_q) +
           ',' + format_double(r.argmin_excess) + ',' + csv_escape(r.error) + '\n';
  }
  return out;
}

std::string report_svg(const StabilityReport& report) {
  constexpr double kWidth = 800.0;
  constexpr double kHeight = 500.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 170.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 60.0;
  constexpr double kFloor = 1e-16;
  static constexpr std::string_view series[] = {"d_bl", "d_psi", "delta_phi_abs", "sup_delta_q", "argmin_excess"};
  static constexpr std::string_view colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};

  const bool log_x = !report.rows.empty() && std::all_of(report.rows.begin(), report.rows.end(),
                                                         [](const ReportRow& r) { return r.param > 0.0; });
  auto xval = [&](const ReportRow& r) { return log_x ? std::log10(r.param) : static_cast<double>(r.step); };
  auto yval = [&](double v) { return std::log10(std::max(v, kFloor)); };

  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = -16.0;
  double y1 = 0.0;
  if (!report.rows.empty()) {
    x0 = x1 = xval(report.rows.front());
    y0 = std::numeric_limits<double>::infinity();
    y1 = -std::numeric_limits<double>::infinity();
    for (const auto& r : report.rows) {
      x0 = std::min(x0, xval(r));
      x1 = std::max(x1, xval(r));
      for (auto s : series) {
        const double v = row_column(r, s);
        if (std::isnan(v)) continue;
        y0 = std::min(y0, yval(v));
        y1 = std::max(y1, yval(v));
      }
    }
    if (!std::isfinite(y0)) {
      y0 = -16.0;
      y1 = 0.0;
    }
    y0 = std::floor(y0);
    y1 = std::ceil(y1);
    if (y1 <= y0) y1 = y0 + 1.0;
    if (x1 <= x0) x1 = x0 + 1.0;
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
     << xml_escape(scheme_name(report.scheme)) << " stability report</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double y = y0; y <= y1 + 1e-9; y += 1.0) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << fmt(py(y))
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(py(y) + 4) << "\" font-family=\"sans-serif\" font-size=\"10\" "
       << "text-anchor=\"end\">1e" << static_cast<int>(y) << "</text>\n";
  }
  for (const auto& r : report.rows) {
    os << "<text x=\"" << fmt(px(xval(r))) << "\" y=\"" << fmt(kTop + ph + 16)
       << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << format_double(r.param)
       << "</text>\n";
  }
  os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 16)
     << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
     << (log_x ? "parameter (log scale)" : "step") << "</text>\n";
  for (std::size_t s = 0; s < std::size(series); ++s) {
    std::string points;
    for (const auto& r : report.rows) {
      const double v = row_column(r, series[s]);
      if (std::isnan(v)) continue;
      points += (points.empty() ? "" : " ") + fmt(px(xval(r))) + "," + fmt(py(yval(v)));
    }
    if (!points.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << colors[s] << "\" stroke-width=\"2\" points=\"" << points
         << "\"/>\n";
    }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << fmt(ly) << "\" x2=\"" << kLeft + pw + 32 << "\" y2=\""
       << fmt(ly) << "\" stroke=\"" << colors[s] << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kLeft + pw + 38 << "\" y=\"" << fmt(ly + 4) << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << series[s] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace meanrisk
