#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "meanrisk/expr.hpp"
#include "meanrisk/measure.hpp"
#include "meanrisk/optim.hpp"

namespace meanrisk {

/// (x, z) -> x_coef x + z_coef z + constant
struct AffineMap {
  Eigen::MatrixXd x_coef;
  Eigen::MatrixXd z_coef;
  Eigen::VectorXd constant;
};

/// One expression per output coordinate, plus the growth exponent the user
/// asserts for it.
struct ExpressionMap {
  std::vector<Expr> outputs;
  std::optional<double> declared_exponent;
};

class ParamMap {
 public:
  ParamMap(AffineMap map);
  ParamMap(ExpressionMap map);

  /// Constant vector, no dependence on (x, z).
  static ParamMap constant(Eigen::VectorXd value, std::size_t n, std::size_t s);

  std::size_t output_dim() const noexcept;
  Eigen::VectorXd operator()(std::span<const double> x, std::span<const double> z) const;
  /// Throws DimMismatch unless the map reads at most n decision and s
  /// scenario coordinates.
  void check_inputs(std::size_t n, std::size_t s) const;

  const std::variant<AffineMap, ExpressionMap>& repr() const noexcept { return repr_; }

 private:
  std::variant<AffineMap, ExpressionMap> repr_;
};

/// Affine -> 1, Expression -> declared exponent (MissingDeclaredExponent if none).
double map_exponent(const ParamMap& pm);

/// min q(x,z)'y  s.t.  A y = h(x,z), y >= 0
struct LinearRecourse {
  Eigen::MatrixXd a;
  ParamMap q;
  ParamMap h;
};

/// min q'y  s.t.  A y = h(x,z), y >= 0, y = (y1, y2) with y2 integer.
struct MilpRecourse {
  Eigen::VectorXd q;
  Eigen::MatrixXd a;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  ParamMap h;
  std::vector<IntegerBound> integer_bounds;  // m2 entries
  bool rational_entries = true;              // recorded, not enforced
};

/// min y'Dy + q(x,z)'y  s.t.  A y <= h(x,z), y2 integer.
struct MiqpRecourse {
  Eigen::MatrixXd d;
  Eigen::MatrixXd a;
  ParamMap q;
  ParamMap h;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::vector<IntegerBound> integer_bounds;
  bool rational_entries = true;
};

/// min v(y)  s.t.  g(y) <= h(x,z), y2 integer, y1 searched inside continuous_box.
struct ConvexMipRecourse {
  ConvexExpr v;
  std::vector<ConvexExpr> g;
  ParamMap h;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::vector<IntegerBound> integer_bounds;
  std::vector<Interval> continuous_box;
  std::optional<double> gamma_v;
  std::optional<double> gamma_k;
};

using RecourseProblem = std::variant<LinearRecourse, MilpRecourse, MiqpRecourse, ConvexMipRecourse>;

/// Recourse value function f(x, z) with decision dimension n and scenario
/// dimension s. Dimensions are checked at construction (DimMismatch /
/// InvalidSpec).
class RecourseModel {
 public:
  RecourseModel(std::size_t n, std::size_t s, RecourseProblem problem);

  std::size_t decision_dim() const noexcept { return n_; }
  std::size_t scenario_dim() const noexcept { return s_; }
  const RecourseProblem& problem() const noexcept { return problem_; }
  std::string_view kind() const noexcept;

 private:
  std::size_t n_;
  std::size_t s_;
  RecourseProblem problem_;
};

/// Optimal value of the recourse problem. RecourseInfeasible /
/// RecourseUnbounded name (x, z) in the message.
double eval_recourse(const RecourseModel& model, std::span<const double> x, std::span<const double> z);

/// f as a plain callable.
RecourseFn recourse_function(const RecourseModel& model);

/// Growth exponent implied by the class of the model; only the arguments
/// relevant to it are read. InvalidExponent if one of them is not positive.
double theoretical_exponent(const RecourseModel& model, double gamma_q, double gamma_h, double gamma_v,
                            double gamma_k);

/// theoretical_exponent() fed with the map exponents and the declared
/// gamma_v / gamma_K of a convex model.
double model_exponent(const RecourseModel& model);

struct GrowthSample {
  std::size_t decision = 0;
  double z_norm = 0.0;
  double ratio = 0.0;
};

/// Empirical evidence for |f(x,z)| <= eta(x)(||z||^gamma + 1). It can refute
/// a claimed exponent, never prove one.
struct GrowthCertificate {
  double gamma = 0.0;
  std::vector<Point> decisions;
  std::vector<double> eta_hat;  // per decision, floored at 1e-12
  std::size_t sample_count = 0;
  /// max over samples of |f| - eta_hat(x)(||z||^gamma + 1); <= 0 by construction.
  double max_residual_margin = 0.0;
  std::vector<GrowthSample> samples;

  /// Largest sampled ratio for one decision over samples with lo <= ||z|| <= hi.
  double max_ratio(std::size_t decision, double lo, double hi) const;
};

GrowthCertificate certify_growth(const RecourseModel& model, const std::vector<Point>& decisions,
                                 const Sampler& z_sampler, double gamma, std::size_t n,
                                 std::uint64_t seed);

/// Candidate discontinuity set of a MILP recourse: (x,z) whose right-hand
/// side h(x,z) lies within tolerance of {A2 y2} + boundary(cone{A1 y1 : y1 >= 0})
/// for some lattice point y2 >= 0 of the box.
class MilpDiscontinuitySet {
 public:
  struct Piece {
    enum class Kind { Origin, Ray, Line } kind;
    Eigen::VectorXd direction;  // unit, unused for Origin
  };

  MilpDiscontinuitySet(const RecourseModel& model, std::vector<IntegerBound> integer_box);

  bool empty() const noexcept { return shifts_.empty() || pieces_.empty(); }
  double distance(std::span<const double> x, std::span<const double> z) const;
  bool contains(std::span<const double> x, std::span<const double> z, double tol = 1e-9) const;
  const std::vector<Piece>& boundary() const noexcept { return pieces_; }

 private:
  ParamMap h_;
  std::vector<Piece> pieces_;
  std::vector<Eigen::VectorXd> shifts_;  // A2 y2 over the lattice
};

/// Uses the model's own integer bounds when `integer_box` is empty.
MilpDiscontinuitySet milp_discontinuity_predicate(const RecourseModel& model,
                                                  std::vector<IntegerBound> integer_box = {});

enum class Semicontinuity { Continuous, Lower, Upper, Neither };
std::string_view to_string(Semicontinuity s);

/// Compares f(x, z) with f at z +- radius e_j for every coordinate j. A
/// direction counts as observed when no probe drops below (lower) or rises
/// above (upper) the center value by more than tol.
Semicontinuity observe_semicontinuity(const RecourseModel& model, std::span<const double> x,
                                      std::span<const double> z, double radius = 1e-8,
                                      double tol = 1e-6);

}  // namespace meanrisk
