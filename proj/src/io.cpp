#include "meanrisk/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "meanrisk/error.hpp"

namespace meanrisk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    parse_fail(std::string(what) + ": " + e.what());
  }
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) parse_fail(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) parse_fail(std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) parse_fail(std::string(what) + " must be a number");
  return j.get<double>();
}

double number_field(const Json& j, const char* key) { return number(field(j, key), key); }

std::optional<double> optional_number(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return number(*it, key);
}

std::size_t size_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer() || v.get<long long>() < 0) parse_fail(std::string(key) + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> vector_of(const Json& j, const char* what) {
  if (!j.is_array()) parse_fail(std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

Eigen::VectorXd eigen_vector(const Json& j, const char* what) {
  const auto v = vector_of(j, what);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Row-major nested arrays; an empty array gives a 0 x cols matrix.
Eigen::MatrixXd eigen_matrix(const Json& j, const char* what, std::size_t cols_if_empty = 0) {
  if (!j.is_array()) parse_fail(std::string(what) + " must be an array of rows");
  if (j.empty()) return Eigen::MatrixXd(0, static_cast<Eigen::Index>(cols_if_empty));
  const auto cols = vector_of(j.front(), what).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = vector_of(j[r], what);
    if (row.size() != cols) throw Error(ErrorCode::DimMismatch, std::string(what) + " has ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

std::vector<IntegerBound> bounds_from_json(const Json& j) {
  if (!j.is_array()) parse_fail("integer_bounds must be an array of [lo, hi] pairs");
  std::vector<IntegerBound> out;
  for (const auto& b : j) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number_integer() || !b[1].is_number_integer()) {
      parse_fail("integer bounds must be integer pairs [lo, hi]");
    }
    out.push_back({b[0].get<long long>(), b[1].get<long long>()});
  }
  return out;
}

Json bounds_json(const std::vector<IntegerBound>& b) {
  Json out = Json::array();
  for (const auto& iv : b) out.push_back({iv.lo, iv.hi});
  return out;
}

std::vector<IntegerBound> optional_bounds(const Json& j) {
  const auto it = j.find("integer_bounds");
  return it == j.end() ? std::vector<IntegerBound>{} : bounds_from_json(*it);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::vector<Expr> expr_list(const Json& j, std::size_t from) {
  std::vector<Expr> out;
  for (std::size_t i = from; i < j.size(); ++i) out.push_back(expr_from_json(j[i]));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

DiscreteMeasure measure_from_json(const Json& j) {
  return guarded("measure", [&] {
    const Json& atoms = field(j, "atoms");
    if (!atoms.is_array()) parse_fail("atoms must be an array");
    std::vector<Atom> raw;
    for (const auto& a : atoms) raw.push_back({vector_of(field(a, "point"), "point"), number_field(a, "weight")});
    if (j.contains("dim")) {
      const std::size_t d = size_field(j, "dim");
      for (const auto& a : raw) {
        if (a.point.size() != d) throw Error(ErrorCode::DimMismatch, "atom dimension differs from declared dim");
      }
    }
    return canonicalize(std::move(raw));
  });
}

Json measure_to_json(const DiscreteMeasure& mu) {
  Json atoms = Json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"point", a.point}, {"weight", a.weight}});
  return {{"dim", mu.dim()}, {"atoms", std::move(atoms)}};
}

RiskSpec risk_from_json(const Json& j) {
  return guarded("risk", [&]() -> RiskSpec {
    const std::string kind = field(j, "kind").get<std::string>();
    RiskSpec spec;
    if (kind == "expectation") {
      spec = Expectation{};
    } else if (kind == "avar") {
      spec = AVaR{number_field(j, "alpha")};
    } else if (kind == "semidev") {
      spec = SemiDev{number_field(j, "a"), optional_number(j, "p").value_or(1.0)};
    } else if (kind == "target_semidev") {
      spec = TargetSemiDev{number_field(j, "a"), number_field(j, "c"), optional_number(j, "p").value_or(1.0)};
    } else {
      parse_fail("unknown risk kind '" + kind + "'");
    }
    validate(spec);
    return spec;
  });
}

Json risk_to_json(const RiskSpec& spec) {
  return std::visit(overloaded{
                        [](const Expectation&) { return Json{{"kind", "expectation"}}; },
                        [](const AVaR& s) { return Json{{"kind", "avar"}, {"alpha", s.alpha}}; },
                        [](const SemiDev& s) { return Json{{"kind", "semidev"}, {"a", s.a}, {"p", s.p}}; },
                        [](const TargetSemiDev& s) {
                          return Json{{"kind", "target_semidev"}, {"a", s.a}, {"c", s.c}, {"p", s.p}};
                        },
                    },
                    spec);
}

Expr expr_from_json(const Json& j) {
  return guarded("expression", [&]() -> Expr {
    if (j.is_number()) return Expr::constant(j.get<double>());
    if (!j.is_array() || j.empty() || !j.front().is_string()) parse_fail("expression must be a number or [op, ...]");
    const std::string op = j.front().get<std::string>();
    const std::size_t argc = j.size() - 1;
    auto need = [&](std::size_t n) {
      if (argc != n) parse_fail("operator '" + op + "' takes " + std::to_string(n) + " argument(s)");
    };
    if (op == "x" || op == "z" || op == "y") {
      need(1);
      if (!j[1].is_number_integer() || j[1].get<long long>() < 0) parse_fail("variable index must be a nonnegative integer");
      const VarSpace space = op == "x" ? VarSpace::X : (op == "z" ? VarSpace::Z : VarSpace::Y);
      return Expr::variable(space, j[1].get<std::size_t>());
    }
    if (argc == 0) parse_fail("operator '" + op + "' needs arguments");
    if (op == "+") return Expr::sum(expr_list(j, 1));
    if (op == "-") {
      if (argc == 1) return Expr::scale(-1.0, expr_from_json(j[1]));
      need(2);
      return Expr::sum({expr_from_json(j[1]), Expr::scale(-1.0, expr_from_json(j[2]))});
    }
    if (op == "neg") {
      need(1);
      return Expr::scale(-1.0, expr_from_json(j[1]));
    }
    if (op == "*") {
      need(2);
      if (j[1].is_number()) return Expr::scale(j[1].get<double>(), expr_from_json(j[2]));
      if (j[2].is_number()) return Expr::scale(j[2].get<double>(), expr_from_json(j[1]));
      throw Error(ErrorCode::InvalidSpec, "products are limited to a constant times an expression");
    }
    if (op == "max") return Expr::max(expr_list(j, 1));
    if (op == "min") return Expr::min(expr_list(j, 1));
    if (op == "abs") {
      need(1);
      return Expr::abs(expr_from_json(j[1]));
    }
    if (op == "pow") {
      need(2);
      if (!j[2].is_number_integer()) parse_fail("pow exponent must be an integer");
      return Expr::power(expr_from_json(j[1]), j[2].get<int>());
    }
    if (op == "norm") return Expr::norm(expr_list(j, 1));
    parse_fail("unknown operator '" + op + "'");
  });
}

Json expr_to_json(const Expr& e) {
  using Kind = Expr::Kind;
  auto with_children = [&](const char* op) {
    Json out = Json::array({op});
    for (const auto& c : e.children()) out.push_back(expr_to_json(c));
    return out;
  };
  switch (e.kind()) {
    case Kind::Constant:
      return e.value();
    case Kind::Variable: {
      const char* name = e.space() == VarSpace::X ? "x" : (e.space() == VarSpace::Z ? "z" : "y");
      return Json::array({name, e.index()});
    }
    case Kind::Sum:
      return with_children("+");
    case Kind::Scale:
      return Json::array({"*", e.value(), expr_to_json(e.children()[0])});
    case Kind::Max:
      return with_children("max");
    case Kind::Min:
      return with_children("min");
    case Kind::Abs:
      return with_children("abs");
    case Kind::Power:
      return Json::array({"pow", expr_to_json(e.children()[0]), static_cast<int>(e.value())});
    case Kind::Norm:
      return with_children("norm");
  }
  return nullptr;
}

ParamMap param_map_from_json(const Json& j, std::size_t out_dim, std::size_t n, std::size_t s) {
  return guarded("parameter map", [&]() -> ParamMap {
    if (j.contains("affine")) {
      const Json& a = j["affine"];
      const auto k = static_cast<Eigen::Index>(out_dim);
      AffineMap m{Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(n)),
                  Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(s)), Eigen::VectorXd::Zero(k)};
      if (a.contains("x")) m.x_coef = eigen_matrix(a["x"], "affine x", n);
      if (a.contains("z")) m.z_coef = eigen_matrix(a["z"], "affine z", s);
      if (a.contains("c")) m.constant = eigen_vector(a["c"], "affine c");
      if (static_cast<std::size_t>(m.constant.size()) != out_dim) {
        throw Error(ErrorCode::DimMismatch, "affine constant has the wrong length");
      }
      ParamMap pm(std::move(m));
      pm.check_inputs(n, s);
      return pm;
    }
    if (j.contains("expr")) {
      const Json& list = j["expr"];
      if (!list.is_array()) parse_fail("expr must be an array with one expression per output");
      ExpressionMap m;
      for (const auto& e : list) m.outputs.push_back(expr_from_json(e));
      m.declared_exponent = optional_number(j, "exponent");
      if (m.outputs.size() != out_dim) throw Error(ErrorCode::DimMismatch, "expression map has the wrong length");
      ParamMap pm(std::move(m));
      pm.check_inputs(n, s);
      return pm;
    }
    parse_fail("parameter map needs an 'affine' or 'expr' member");
  });
}

Json param_map_to_json(const ParamMap& pm) {
  return std::visit(overloaded{
                        [](const AffineMap& m) {
                          return Json{{"affine",
                                       {{"x", matrix_json(m.x_coef)},
                                        {"z", matrix_json(m.z_coef)},
                                        {"c", vector_json(m.constant)}}}};
                        },
                        [](const ExpressionMap& m) {
                          Json list = Json::array();
                          for (const auto& e : m.outputs) list.push_back(expr_to_json(e));
                          Json out{{"expr", std::move(list)}};
                          if (m.declared_exponent) out["exponent"] = *m.declared_exponent;
                          return out;
                        },
                    },
                    pm.repr());
}

RecourseModel recourse_from_json(const Json& j) {
  return guarded("recourse", [&]() -> RecourseModel {
    const std::string kind = field(j, "kind").get<std::string>();
    const std::size_t n = size_field(j, "n");
    const std::size_t s = size_field(j, "s");
    if (kind == "linear") {
      Eigen::MatrixXd a = eigen_matrix(field(j, "A"), "A");
      const auto m = static_cast<std::size_t>(a.cols());
      const auto k = static_cast<std::size_t>(a.rows());
      return RecourseModel(n, s,
                           LinearRecourse{std::move(a), param_map_from_json(field(j, "q"), m, n, s),
                                          param_map_from_json(field(j, "h"), k, n, s)});
    }
    if (kind == "milp") {
      Eigen::MatrixXd a = eigen_matrix(field(j, "A"), "A");
      const auto k = static_cast<std::size_t>(a.rows());
      MilpRecourse r{eigen_vector(field(j, "q"), "q"),
                     std::move(a),
                     size_field(j, "m1"),
                     size_field(j, "m2"),
                     param_map_from_json(field(j, "h"), k, n, s),
                     optional_bounds(j),
                     j.value("rational", true)};
      return RecourseModel(n, s, std::move(r));
    }
    if (kind == "miqp") {
      const std::size_t m1 = size_field(j, "m1");
      const std::size_t m2 = size_field(j, "m2");
      Eigen::MatrixXd a = j.contains("A") ? eigen_matrix(j["A"], "A", m1 + m2) : Eigen::MatrixXd(0, static_cast<Eigen::Index>(m1 + m2));
      const auto k = static_cast<std::size_t>(a.rows());
      MiqpRecourse r{eigen_matrix(field(j, "D"), "D"),
                     std::move(a),
                     param_map_from_json(field(j, "q"), m1 + m2, n, s),
                     j.contains("h") ? param_map_from_json(j["h"], k, n, s) : ParamMap::constant(Eigen::VectorXd(0), n, s),
                     m1,
                     m2,
                     optional_bounds(j),
                     j.value("rational", true)};
      return RecourseModel(n, s, std::move(r));
    }
    if (kind == "convex_mip") {
      std::vector<ConvexExpr> g;
      const Json& gj = field(j, "g");
      if (!gj.is_array()) parse_fail("g must be an array of expressions");
      for (const auto& e : gj) g.emplace_back(expr_from_json(e));
      std::vector<Interval> box;
      if (j.contains("continuous_box")) {
        for (const auto& iv : j["continuous_box"]) {
          const auto v = vector_of(iv, "continuous_box");
          if (v.size() != 2) parse_fail("continuous_box entries must be [lo, hi]");
          box.push_back({v[0], v[1]});
        }
      }
      const std::size_t k = g.size();
      ConvexMipRecourse r{ConvexExpr(expr_from_json(field(j, "v"))),
                          std::move(g),
                          param_map_from_json(field(j, "h"), k, n, s),
                          size_field(j, "m1"),
                          size_field(j, "m2"),
                          optional_bounds(j),
                          std::move(box),
                          optional_number(j, "gamma_v"),
                          optional_number(j, "gamma_K")};
      return RecourseModel(n, s, std::move(r));
    }
    parse_fail("unknown recourse kind '" + kind + "'");
  });
}

Json recourse_to_json(const RecourseModel& model) {
  Json out{{"kind", std::string(model.kind())}, {"n", model.decision_dim()}, {"s", model.scenario_dim()}};
  std::visit(overloaded{
                 [&](const LinearRecourse& r) {
                   out["A"] = matrix_json(r.a);
                   out["q"] = param_map_to_json(r.q);
                   out["h"] = param_map_to_json(r.h);
                 },
                 [&](const MilpRecourse& r) {
                   out["A"] = matrix_json(r.a);
                   out["q"] = vector_json(r.q);
                   out["m1"] = r.m1;
                   out["m2"] = r.m2;
                   out["h"] = param_map_to_json(r.h);
                   out["integer_bounds"] = bounds_json(r.integer_bounds);
                   out["rational"] = r.rational_entries;
                 },
                 [&](const MiqpRecourse& r) {
                   out["D"] = matrix_json(r.d);
                   out["A"] = matrix_json(r.a);
                   out["q"] = param_map_to_json(r.q);
                   out["h"] = param_map_to_json(r.h);
                   out["m1"] = r.m1;
                   out["m2"] = r.m2;
                   out["integer_bounds"] = bounds_json(r.integer_bounds);
                   out["rational"] = r.rational_entries;
                 },
                 [&](const ConvexMipRecourse& r) {
                   out["v"] = expr_to_json(r.v.expr());
                   Json g = Json::array();
                   for (const auto& e : r.g) g.push_back(expr_to_json(e.expr()));
                   out["g"] = std::move(g);
                   out["h"] = param_map_to_json(r.h);
                   out["m1"] = r.m1;
                   out["m2"] = r.m2;
                   out["integer_bounds"] = bounds_json(r.integer_bounds);
                   Json box = Json::array();
                   for (const auto& iv : r.continuous_box) box.push_back({iv.lo, iv.hi});
                   out["continuous_box"] = std::move(box);
                   if (r.gamma_v) out["gamma_v"] = *r.gamma_v;
                   if (r.gamma_k) out["gamma_K"] = *r.gamma_k;
                 },
             },
             model.problem());
  return out;
}

DecisionSet decisions_from_json(const Json& j) {
  return guarded("decisions", [&]() -> DecisionSet {
    if (j.contains("points")) {
      std::vector<Point> pts;
      for (const auto& p : j["points"]) pts.push_back(vector_of(p, "decision"));
      return DecisionSet(std::move(pts));
    }
    if (j.contains("box")) {
      const Json& b = j["box"];
      std::vector<std::size_t> counts;
      for (const auto& c : field(b, "counts")) {
        if (!c.is_number_integer() || c.get<long long>() <= 0) parse_fail("grid counts must be positive integers");
        counts.push_back(c.get<std::size_t>());
      }
      return DecisionSet::grid(vector_of(field(b, "lo"), "lo"), vector_of(field(b, "hi"), "hi"), counts);
    }
    parse_fail("decisions need 'points' or 'box'");
  });
}

MeanRiskModel model_from_json(const Json& j) {
  return guarded("model", [&] {
    return make_model(recourse_from_json(field(j, "recourse")), risk_from_json(field(j, "risk")),
                      decisions_from_json(field(j, "decisions")), optional_number(j, "p"),
                      optional_number(j, "gamma"));
  });
}

Gate parse_gate(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) parse_fail("gate must look like column:factor");
  Gate g;
  g.column = text.substr(0, colon);
  try {
    std::size_t used = 0;
    g.factor = std::stod(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) parse_fail("gate factor is not a number");
  } catch (const std::logic_error&) {
    parse_fail("gate factor is not a number");
  }
  return g;
}

SchemeConfig scheme_from_json(const Json& j) {
  return guarded("scheme", [&]() -> SchemeConfig {
    const std::string kind = field(j, "kind").get<std::string>();
    auto seed = [&]() -> std::uint64_t {
      if (!j.contains("seed")) return 0;
      if (!j["seed"].is_number_unsigned()) parse_fail("seed must be a nonnegative integer");
      return j["seed"].get<std::uint64_t>();
    };
    SchemeConfig cfg;
    if (kind == "saa") {
      std::vector<std::size_t> ns;
      for (const auto& v : field(j, "n_schedule")) {
        if (!v.is_number_unsigned()) parse_fail("n_schedule entries must be positive integers");
        ns.push_back(v.get<std::size_t>());
      }
      cfg.scheme = SaaScheme{std::move(ns), seed()};
    } else if (kind == "contamination") {
      cfg.scheme = ContaminationScheme{measure_from_json(field(j, "direction")), vector_of(field(j, "t_schedule"), "t_schedule")};
    } else if (kind == "jitter") {
      cfg.scheme = JitterScheme{vector_of(field(j, "sigma_schedule"), "sigma_schedule"), seed()};
    } else if (kind == "discretize") {
      cfg.scheme = DiscretizeScheme{vector_of(field(j, "grid_schedule"), "grid_schedule")};
    } else if (kind == "escape") {
      cfg.scheme = EscapeScheme{vector_of(field(j, "n_schedule"), "n_schedule")};
    } else {
      parse_fail("unknown scheme kind '" + kind + "'");
    }
    validate(cfg.scheme);
    if (j.contains("gates")) {
      for (const auto& g : j["gates"]) {
        if (g.is_string()) {
          cfg.gates.push_back(parse_gate(g.get<std::string>()));
        } else {
          cfg.gates.push_back({field(g, "column").get<std::string>(), number_field(g, "factor")});
        }
      }
    }
    cfg.tol = optional_number(j, "tol");
    return cfg;
  });
}

Json scheme_to_json(const PerturbationScheme& scheme) {
  return std::visit(overloaded{
                        [](const SaaScheme& s) {
                          return Json{{"kind", "saa"}, {"n_schedule", s.n_schedule}, {"seed", s.seed}};
                        },
                        [](const ContaminationScheme& s) {
                          return Json{{"kind", "contamination"},
                                      {"direction", measure_to_json(s.direction)},
                                      {"t_schedule", s.t_schedule}};
                        },
                        [](const JitterScheme& s) {
                          return Json{{"kind", "jitter"}, {"sigma_schedule", s.sigma_schedule}, {"seed", s.seed}};
                        },
                        [](const DiscretizeScheme& s) {
                          return Json{{"kind", "discretize"}, {"grid_schedule", s.grid_schedule}};
                        },
                        [](const EscapeScheme& s) { return Json{{"kind", "escape"}, {"n_schedule", s.n_schedule}}; },
                    },
                    scheme);
}

Json integrability_to_json(const UniformIntegrabilityReport& rep) {
  Json sup = Json::array();
  for (double v : rep.sup_tail) sup.push_back(number_or_null(v));
  Json out{{"q", rep.q},
           {"epsilon", rep.epsilon},
           {"thresholds", rep.thresholds},
           {"sup_tail", std::move(sup)},
           {"uniformly_integrating", rep.uniformly_integrating}};
  if (rep.moment_certificate) {
    out["moment_certificate"] = {{"epsilon", rep.moment_certificate->epsilon},
                                 {"kappa", rep.moment_certificate->kappa},
                                 {"holds", rep.moment_certificate->holds}};
  }
  return out;
}

Json report_to_json(const StabilityReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"step", r.step},
                    {"param", number_or_null(r.param)},
                    {"d_bl", number_or_null(r.d_bl)},
                    {"d_psi", number_or_null(r.d_psi)},
                    {"delta_phi_abs", number_or_null(r.delta_phi_abs)},
                    {"sup_delta_q", number_or_null(r.sup_delta_q)},
                    {"argmin_excess", number_or_null(r.argmin_excess)},
                    {"error", r.error.empty() ? Json(nullptr) : Json(r.error)}});
  }
  Json seeds = Json::array();
  for (auto s : report.seeds) seeds.push_back(hex64(s));
  Json columns = Json::array();
  for (auto c : kReportColumns) columns.push_back(std::string(c));
  return {{"columns", std::move(columns)},
          {"rows", std::move(rows)},
          {"metadata",
           {{"model_hash", hex64(report.model_hash)},
            {"base_hash", hex64(report.base_hash)},
            {"scheme", scheme_to_json(report.scheme)},
            {"step_seeds", std::move(seeds)},
            {"gamma", report.gamma},
            {"p", report.p}}},
          {"uniform_integrability", integrability_to_json(report.integrability)}};
}

Json certificate_to_json(const GrowthCertificate& cert) {
  Json per = Json::array();
  for (std::size_t i = 0; i < cert.decisions.size(); ++i) {
    per.push_back({{"x", cert.decisions[i]}, {"eta_hat", cert.eta_hat[i]}});
  }
  return {{"gamma", cert.gamma},
          {"sample_count", cert.sample_count},
          {"max_residual_margin", cert.max_residual_margin},
          {"decisions", std::move(per)}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::exception& e) {
    parse_fail("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + tmp + "'");
    out << content;
    if (!out.flush()) throw Error(ErrorCode::InvalidArgument, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::InvalidArgument, "cannot move '" + tmp + "' into place: " + ec.message());
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace meanrisk
