#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "meanrisk/expr.hpp"

namespace meanrisk {

enum class RowSense { Equal, LessEqual };
enum class SolveStatus { Optimal, Infeasible, Unbounded };

/// min c'y  s.t.  A y (=|<=) b,  lower <= y <= upper.
/// Bounds may be infinite; the default is y >= 0.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  std::vector<RowSense> senses;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// All variables nonnegative and unbounded above.
  static LinearProgram nonnegative(Eigen::VectorXd c, Eigen::MatrixXd a, Eigen::VectorXd b,
                                   std::vector<RowSense> senses);
  std::size_t num_vars() const noexcept { return static_cast<std::size_t>(objective.size()); }
  std::size_t num_rows() const noexcept { return static_cast<std::size_t>(rhs.size()); }
  /// Throws DimMismatch / InvalidArgument.
  void validate() const;
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double value = 0.0;
  Eigen::VectorXd point;
  /// LP only: multipliers u with c - A'u the reduced costs; u_i <= 0 on
  /// binding <= rows. Empty for the integer and nonlinear solvers.
  Eigen::VectorXd duals;

  bool optimal() const noexcept { return status == SolveStatus::Optimal; }
};

struct IntegerBound {
  long long lo = 0;
  long long hi = 0;
};

struct MixedIntegerProgram {
  LinearProgram relaxation;
  std::vector<std::size_t> integer_indices;
  std::vector<IntegerBound> integer_bounds;  // parallel to integer_indices

  void validate() const;
};

/// min y'Dy + q'y  s.t.  A y <= b, integer coordinates boxed.
class QuadraticMixedProgram {
 public:
  /// Throws InvalidSpec unless D is symmetric (1e-12) and positive definite
  /// (smallest eigenvalue > 1e-10).
  QuadraticMixedProgram(Eigen::MatrixXd d, Eigen::VectorXd q, Eigen::MatrixXd a, Eigen::VectorXd b,
                        std::vector<std::size_t> integer_indices = {},
                        std::vector<IntegerBound> integer_bounds = {});

  const Eigen::MatrixXd& quadratic() const noexcept { return d_; }
  const Eigen::VectorXd& linear() const noexcept { return q_; }
  const Eigen::MatrixXd& matrix() const noexcept { return a_; }
  const Eigen::VectorXd& rhs() const noexcept { return b_; }
  const std::vector<std::size_t>& integer_indices() const noexcept { return int_idx_; }
  const std::vector<IntegerBound>& integer_bounds() const noexcept { return int_bounds_; }
  std::size_t num_vars() const noexcept { return static_cast<std::size_t>(q_.size()); }

 private:
  Eigen::MatrixXd d_;
  Eigen::VectorXd q_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  std::vector<std::size_t> int_idx_;
  std::vector<IntegerBound> int_bounds_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// min v(y)  s.t.  g_i(y) <= rhs_i. Variables are ordered continuous first
/// (searched inside continuous_box), then integer (enumerated over
/// integer_bounds).
struct ConvexMixedProgram {
  ConvexExpr objective;
  std::vector<ConvexExpr> constraints;
  Eigen::VectorXd rhs;
  std::vector<Interval> continuous_box;
  std::vector<IntegerBound> integer_bounds;

  std::size_t num_vars() const noexcept { return continuous_box.size() + integer_bounds.size(); }
  void validate() const;
};

Solution solve_lp(const LinearProgram& lp);
Solution solve_milp(const MixedIntegerProgram& mip);

/// Continuous convex QP by a primal active-set method. No integrality.
Solution solve_qp(const Eigen::MatrixXd& d, const Eigen::VectorXd& q, const Eigen::MatrixXd& a,
                  const Eigen::VectorXd& b);
/// Same problem solved by trying every active set (at most 20 rows, else
/// ConstraintLimitExceeded).
Solution solve_qp_kkt_enumeration(const Eigen::MatrixXd& d, const Eigen::VectorXd& q,
                                  const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

Solution solve_miqp(const QuadraticMixedProgram& qmp);
Solution solve_convex_mip(const ConvexMixedProgram& cmp);

/// Exhaustive lattice enumeration with a continuous solve per assignment.
/// BoxTooLarge above 10^6 assignments.
Solution enumerate_oracle(const MixedIntegerProgram& mip);
Solution enumerate_oracle(const QuadraticMixedProgram& qmp);

/// Number of points in the integer box, saturating at max size_t.
std::size_t lattice_volume(const std::vector<IntegerBound>& bounds);

}  // namespace meanrisk
