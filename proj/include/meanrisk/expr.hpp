#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace meanrisk {

enum class Curvature { Constant, Affine, Convex, Concave, Unknown };

/// Which argument vector a variable node reads: decision x, scenario z, or
/// recourse variable y.
enum class VarSpace { X, Z, Y };

/// Immutable expression tree. Curvature is inferred bottom-up with
/// disciplined-convex rules at construction time; nothing is ever proven
/// numerically.
class Expr {
 public:
  enum class Kind { Constant, Variable, Sum, Scale, Max, Min, Abs, Power, Norm };

  static Expr constant(double value);
  static Expr variable(VarSpace space, std::size_t index);
  static Expr sum(std::vector<Expr> terms);
  static Expr scale(double factor, Expr child);
  static Expr max(std::vector<Expr> terms);
  static Expr min(std::vector<Expr> terms);
  static Expr abs(Expr child);
  /// child^k for a positive integer k.
  static Expr power(Expr child, int k);
  /// Euclidean norm of the vector (terms...).
  static Expr norm(std::vector<Expr> terms);

  double evaluate(std::span<const double> x, std::span<const double> z,
                  std::span<const double> y) const;

  Curvature curvature() const noexcept;
  Kind kind() const noexcept;
  double value() const noexcept;  // constant value, scale factor or exponent
  VarSpace space() const noexcept;
  std::size_t index() const noexcept;
  std::vector<Expr> children() const;

  /// One past the largest variable index used in `space` (0 if unused).
  std::size_t arity(VarSpace space) const noexcept;

 struct Node;  // opaque

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Expression in the recourse variables y only, convex by construction.
/// Construction throws InvalidSpec otherwise.
class ConvexExpr {
 public:
  explicit ConvexExpr(Expr expr);
  double operator()(std::span<const double> y) const { return expr_.evaluate({}, {}, y); }
  const Expr& expr() const noexcept { return expr_; }
  std::size_t arity() const noexcept { return expr_.arity(VarSpace::Y); }

 private:
  Expr expr_;
};

}  // namespace meanrisk
