#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "meanrisk/measure.hpp"
#include "meanrisk/model.hpp"
#include "meanrisk/recourse.hpp"
#include "meanrisk/risk.hpp"
#include "meanrisk/stability.hpp"

namespace meanrisk {

using Json = nlohmann::json;

// All parsers throw ParseError on malformed input and the owning module's
// errors (InvalidSpec, DimMismatch, ...) on well-formed but invalid content.

/// {"dim": d, "atoms": [{"point": [...], "weight": w}, ...]}
DiscreteMeasure measure_from_json(const Json& j);
Json measure_to_json(const DiscreteMeasure& mu);

/// {"kind": "expectation" | "avar" | "semidev" | "target_semidev", "alpha", "a", "c", "p"}
RiskSpec risk_from_json(const Json& j);
Json risk_to_json(const RiskSpec& spec);

/// Prefix notation: numbers, ["x", i], ["z", i], ["y", i], ["+", ...],
/// ["-", a, b], ["neg", a], ["*", c, e], ["max", ...], ["min", ...],
/// ["abs", e], ["pow", e, k], ["norm", ...].
Expr expr_from_json(const Json& j);
Json expr_to_json(const Expr& e);

/// {"affine": {"x": rows, "z": rows, "c": vector}} or {"expr": [...], "exponent": g}.
/// Missing affine blocks are zero.
ParamMap param_map_from_json(const Json& j, std::size_t out_dim, std::size_t n, std::size_t s);
Json param_map_to_json(const ParamMap& pm);

RecourseModel recourse_from_json(const Json& j);
Json recourse_to_json(const RecourseModel& model);

/// {"points": [[...], ...]} or {"box": {"lo": [...], "hi": [...], "counts": [...]}}
DecisionSet decisions_from_json(const Json& j);

/// {"recourse": ..., "risk": ..., "decisions": ..., "p"?: ..., "gamma"?: ...}
MeanRiskModel model_from_json(const Json& j);

struct Gate {
  std::string column;
  double factor = 2.0;
};

/// "column:factor"
Gate parse_gate(const std::string& text);

struct SchemeConfig {
  PerturbationScheme scheme;
  std::vector<Gate> gates;
  std::optional<double> tol;
};

/// Scheme object plus optional "gates": [{"column", "factor"}] and "tol".
SchemeConfig scheme_from_json(const Json& j);
Json scheme_to_json(const PerturbationScheme& scheme);

Json report_to_json(const StabilityReport& report);
Json certificate_to_json(const GrowthCertificate& cert);
Json integrability_to_json(const UniformIntegrabilityReport& rep);

/// Reads and parses a JSON file (ParseError when unreadable or malformed).
Json read_json_file(const std::string& path);
/// Writes through a temporary file in the same directory and renames it
/// into place.
void write_file_atomic(const std::string& path, const std::string& content);

std::string hex64(std::uint64_t v);

}  // namespace meanrisk
