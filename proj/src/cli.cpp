#include "meanrisk/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "meanrisk/error.hpp"
#include "meanrisk/io.hpp"
#include "meanrisk/metrics.hpp"
#include "meanrisk/model.hpp"
#include "meanrisk/recourse.hpp"
#include "meanrisk/stability.hpp"

namespace meanrisk::cli {

namespace {

struct Options {
  std::string model;
  std::string measure;
  std::string measure2;
  std::string scheme;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  double q = 1.0;
  std::string kind;
  std::optional<std::size_t> x;
  bool all = false;
  std::vector<std::string> gates;
  std::size_t samples = 10000;
  std::size_t threads = 1;
};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto model = model_from_json(read_json_file(o.model));
  const auto nu = measure_from_json(read_json_file(o.measure));
  const double tol = o.tol.value_or(1e-8);
  if (o.x) {
    if (*o.x >= model.decisions.size()) throw Error(ErrorCode::OutOfRange, "--x index outside the decision set");
    const double q = objective(model, model.decisions[*o.x], nu);
    out << Json{{"index", *o.x}, {"x", model.decisions[*o.x]}, {"Q", q}}.dump() << '\n';
    return kOk;
  }
  ObjectiveEvaluator eval(model, o.threads);
  const auto values = eval.values(nu);
  const auto argmin = indices_within(values, tol);
  Json rows = Json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    rows.push_back({{"index", i}, {"x", model.decisions[i]}, {"Q", values[i]}});
  }
  Json points = Json::array();
  for (auto i : argmin) points.push_back(model.decisions[i]);
  out << Json{{"phi", *std::min_element(values.begin(), values.end())},
              {"argmin", argmin},
              {"argmin_points", std::move(points)},
              {"tol", tol},
              {"Q", std::move(rows)}}
             .dump()
      << '\n';
  return kOk;
}

int cmd_metrics(const Options& o, std::ostream& out) {
  const auto mu = measure_from_json(read_json_file(o.measure));
  const auto nu = measure_from_json(read_json_file(o.measure2));
  double v = 0.0;
  if (o.kind == "bl") {
    v = bounded_lipschitz(mu, nu);
  } else if (o.kind == "wasserstein") {
    v = wasserstein(mu, nu, o.q);
  } else if (o.kind == "fm") {
    v = fortet_mourier(mu, nu, o.q);
  } else if (o.kind == "psi") {
    v = psi_metric(mu, nu, o.q);
  } else {
    throw Error(ErrorCode::InvalidArgument, "--kind must be bl, wasserstein, fm or psi");
  }
  out << format_number(v) << '\n';
  return kOk;
}

void override_seed(PerturbationScheme& scheme, std::uint64_t seed) {
  if (auto* s = std::get_if<SaaScheme>(&scheme)) s->seed = seed;
  if (auto* s = std::get_if<JitterScheme>(&scheme)) s->seed = seed;
}

int cmd_stability(const Options& o, std::ostream& out, std::ostream& err) {
  const auto model = model_from_json(read_json_file(o.model));
  const auto base = measure_from_json(read_json_file(o.measure));
  auto cfg = scheme_from_json(read_json_file(o.scheme));
  if (o.seed) override_seed(cfg.scheme, *o.seed);
  for (const auto& g : o.gates) cfg.gates.push_back(parse_gate(g));

  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec || !std::filesystem::is_directory(o.out)) {
    throw Error(ErrorCode::InvalidArgument, "cannot create output directory '" + o.out + "'");
  }

  ExperimentOptions opts;
  opts.argmin_tol = o.tol ? *o.tol : cfg.tol.value_or(opts.argmin_tol);
  opts.threads = o.threads;
  const auto report = run_experiment(model, base, cfg.scheme, opts);

  const std::filesystem::path dir(o.out);
  write_file_atomic((dir / "report.csv").string(), report_csv(report));
  write_file_atomic((dir / "report.json").string(), report_to_json(report).dump(2) + "\n");
  write_file_atomic((dir / "report.svg").string(), report_svg(report));

  bool gates_ok = true;
  Json gates = Json::array();
  for (const auto& g : cfg.gates) {
    const auto verdict = trend_check(report, g.column, g.factor);
    gates_ok = gates_ok && verdict.pass;
    gates.push_back({{"column", g.column},
                     {"factor", g.factor},
                     {"pass", verdict.pass},
                     {"first", verdict.first},
                     {"last", verdict.last},
                     {"slope", verdict.slope}});
    if (!verdict.pass) {
      err << "gate failed: " << g.column << " went from " << format_number(verdict.first) << " to "
          << format_number(verdict.last) << ", needed a factor " << format_number(g.factor) << '\n';
    }
  }
  std::size_t failed_steps = 0;
  for (const auto& r : report.rows) {
    if (!r.error.empty()) {
      ++failed_steps;
      err << "step " << r.step << " failed: " << r.error << '\n';
    }
  }
  out << Json{{"out", o.out},
              {"rows", report.rows.size()},
              {"failed_steps", failed_steps},
              {"uniformly_integrating", report.integrability.uniformly_integrating},
              {"gates", std::move(gates)}}
             .dump()
      << '\n';
  return gates_ok ? kOk : kGateFailure;
}

int cmd_certify(const Options& o, std::ostream& out) {
  const auto model = model_from_json(read_json_file(o.model));
  const auto nu = measure_from_json(read_json_file(o.measure));
  const double gamma = model_exponent(model.recourse);
  const auto cert = certify_growth(model.recourse, model.decisions.points(), measure_sampler(nu), gamma, o.samples,
                                   o.seed.value_or(0));
  Json j = certificate_to_json(cert);
  j["theoretical_exponent"] = gamma;
  out << j.dump() << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Mean-risk two-stage stochastic programs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto* eval = app.add_subcommand("eval", "Objective values, optimal value and optimal set");
  eval->add_option("--model", o.model, "model JSON")->required();
  eval->add_option("--measure", o.measure, "scenario measure JSON")->required();
  auto* x_opt = eval->add_option("--x", o.x, "decision index");
  auto* all_opt = eval->add_flag("--all", o.all, "evaluate every decision");
  x_opt->excludes(all_opt);
  eval->add_option("--tol", o.tol, "optimal-set tolerance");
  eval->add_option("--threads", o.threads, "worker threads");

  auto* metrics = app.add_subcommand("metrics", "Distance between two measures");
  metrics->add_option("--measure", o.measure, "first measure JSON")->required();
  metrics->add_option("--measure2", o.measure2, "second measure JSON")->required();
  metrics->add_option("--kind", o.kind, "bl | wasserstein | fm | psi")->required();
  metrics->add_option("--q", o.q, "order");

  auto* stab = app.add_subcommand("stability", "Perturbation experiment with CSV, JSON and SVG output");
  stab->add_option("--model", o.model, "model JSON")->required();
  stab->add_option("--measure", o.measure, "base measure JSON")->required();
  stab->add_option("--scheme", o.scheme, "scheme JSON")->required();
  stab->add_option("--out", o.out, "output directory")->required();
  stab->add_option("--seed", o.seed, "seed override for random schemes");
  stab->add_option("--tol", o.tol, "optimal-set tolerance");
  stab->add_option("--gate", o.gates, "trend gate column:factor (repeatable)");
  stab->add_option("--threads", o.threads, "worker threads");

  auto* cert = app.add_subcommand("certify", "Sampled growth certificate for the recourse function");
  cert->add_option("--model", o.model, "model JSON")->required();
  cert->add_option("--measure", o.measure, "scenario measure JSON sampled for z")->required();
  cert->add_option("--samples", o.samples, "number of z samples");
  cert->add_option("--seed", o.seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (eval->parsed()) {
      if (!o.x && !o.all) {
        err << "error: eval needs --x INDEX or --all\n";
        return kConfigError;
      }
      return cmd_eval(o, out);
    }
    if (metrics->parsed()) return cmd_metrics(o, out);
    if (stab->parsed()) return cmd_stability(o, out, err);
    if (cert->parsed()) return cmd_certify(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_model_error() ? kModelError : kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace meanrisk::cli
