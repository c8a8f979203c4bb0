#include "meanrisk/expr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "meanrisk/error.hpp"

namespace meanrisk {

struct Expr::Node {
  Kind kind = Kind::Constant;
  Curvature curvature = Curvature::Unknown;
  double value = 0.0;
  VarSpace space = VarSpace::Y;
  std::size_t index = 0;
  std::vector<std::shared_ptr<const Node>> children;
};

namespace {

Expr::Node make_node(Expr::Kind kind, Curvature curvature, double value = 0.0) {
  Expr::Node n;
  n.kind = kind;
  n.curvature = curvature;
  n.value = value;
  return n;
}

bool at_most_affine(Curvature c) { return c == Curvature::Constant || c == Curvature::Affine; }
bool convex_like(Curvature c) { return at_most_affine(c) || c == Curvature::Convex; }
bool concave_like(Curvature c) { return at_most_affine(c) || c == Curvature::Concave; }

Curvature negate(Curvature c) {
  if (c == Curvature::Convex) return Curvature::Concave;
  if (c == Curvature::Concave) return Curvature::Convex;
  return c;
}

Curvature sum_curvature(const std::vector<Curvature>& cs) {
  if (std::all_of(cs.begin(), cs.end(), [](Curvature c) { return c == Curvature::Constant; })) {
    return Curvature::Constant;
  }
  if (std::all_of(cs.begin(), cs.end(), at_most_affine)) return Curvature::Affine;
  if (std::all_of(cs.begin(), cs.end(), convex_like)) return Curvature::Convex;
  if (std::all_of(cs.begin(), cs.end(), concave_like)) return Curvature::Concave;
  return Curvature::Unknown;
}

double eval_node(const Expr::Node& n, std::span<const double> x, std::span<const double> z,
                 std::span<const double> y);

double eval_child(const std::shared_ptr<const Expr::Node>& c, std::span<const double> x,
                  std::span<const double> z, std::span<const double> y) {
  return eval_node(*c, x, z, y);
}

double eval_node(const Expr::Node& n, std::span<const double> x, std::span<const double> z,
                 std::span<const double> y) {
  switch (n.kind) {
    case Expr::Kind::Constant:
      return n.value;
    case Expr::Kind::Variable: {
      const auto& v = n.space == VarSpace::X ? x : (n.space == VarSpace::Z ? z : y);
      if (n.index >= v.size()) throw Error(ErrorCode::DimMismatch, "expression variable out of range");
      return v[n.index];
    }
    case Expr::Kind::Sum: {
      double s = 0.0;
      for (const auto& c : n.children) s += eval_child(c, x, z, y);
      return s;
    }
    case Expr::Kind::Scale:
      return n.value * eval_child(n.children[0], x, z, y);
    case Expr::Kind::Max: {
      double m = -std::numeric_limits<double>::infinity();
      for (const auto& c : n.children) m = std::max(m, eval_child(c, x, z, y));
      return m;
    }
    case Expr::Kind::Min: {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& c : n.children) m = std::min(m, eval_child(c, x, z, y));
      return m;
    }
    case Expr::Kind::Abs:
      return std::abs(eval_child(n.children[0], x, z, y));
    case Expr::Kind::Power: {
      const double b = eval_child(n.children[0], x, z, y);
      const int k = static_cast<int>(n.value);
      double r = 1.0;
      for (int i = 0; i < k; ++i) r *= b;
      return r;
    }
    case Expr::Kind::Norm: {
      double s = 0.0;
      for (const auto& c : n.children) {
        const double v = eval_child(c, x, z, y);
        s += v * v;
      }
      return std::sqrt(s);
    }
  }
  return 0.0;
}

}  // namespace

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidSpec, "non-finite constant");
  return Expr(std::make_shared<const Node>(make_node(Expr::Kind::Constant, Curvature::Constant, value)));
}

Expr Expr::variable(VarSpace space, std::size_t index) {
  Node n = make_node(Expr::Kind::Variable, Curvature::Affine);
  n.space = space;
  n.index = index;
  return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::sum(std::vector<Expr> terms) {
  if (terms.empty()) throw Error(ErrorCode::InvalidSpec, "empty sum");
  Node n = make_node(Expr::Kind::Sum, Curvature::Unknown);
  std::vector<Curvature> cs;
  for (auto& t : terms) {
    cs.push_back(t.curvature());
    n.children.push_back(std::move(t.node_));
  }
  n.curvature = sum_curvature(cs);
  return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::scale(double factor, Expr child) {
  if (!std::isfinite(factor)) throw Error(ErrorCode::InvalidSpec, "non-finite scale factor");
  Node n = make_node(Expr::Kind::Scale, Curvature::Unknown, factor);
  const Curvature c = child.curvature();
  n.curvature = factor == 0.0 ? Curvature::Constant : (factor > 0.0 ? c : negate(c));
  n.children.push_back(std::move(child.node_));
  return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::max(std::vector<Expr> terms) {
  if (terms.empty()) throw Error(ErrorCode::InvalidSpec, "empty max");
  Node n = make_node(Expr::Kind::Max, Curvature::Unknown);
  bool all_const = true;
  bool all_convex = true;
  for (auto& t : terms) {
    all_const = all_const && t.curvature() == Curvature::Constant;
    all_convex = all_convex && convex_like(t.curvature());
    n.children.push_back(std::move(t.node_));
  }
  n.curvature = all_const ? Curvature::Constant : (all_convex ? Curvature::Convex : Curvature::Unknown);
  if (n.children.size() == 1) n.curvature = Expr(n.children[0]).curvature();
  return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::min(std::vector<Expr> terms) {
  if (terms.empty()) throw Error(ErrorCode::InvalidSpec, "empty min");
  Node n = make_node(Expr::Kind::Min, Curvature::Unknown);
  bool all_const = true;
  bool all_concave = true;
  for (auto& t : terms) {
    all_const = all_const && t.curvature() == Curvature::Constant;
    all_concave = all_concave && concave_like(t.curvature());
    n.children.push_back(std::move(t.node_));
  }
  n.curvature = all_const ? Curvature::Constant : (all_concave ? Curvature::Concave : Curvature::Unknown);
  if (n.children.size() == 1) n.curvature = Expr(n.children[0]).curvature();
  return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::abs(Expr child) {
  Node n = make_node(Expr::Kind::Abs, Curvature::Unknown);
  const Curvature c = child.curvature();
  n.curvature = c == Curvature::Constant ? c : (c == Curvature::Affine ? Curvature::Convex : Curvature::Unknown);
  n.children.push_back(std::move(child.node_));
  return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::power(Expr child, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidSpec, "power exponent must be a positive integer");
  Node n = make_node(Expr::Kind::Power, Curvature::Unknown, static_cast<double>(k));
  const Curvature c = child.curvature();
  if (c == Curvature::Constant || k == 1) {
    n.curvature = c;
  } else if (k % 2 == 0 && c == Curvature::Affine) {
    n.curvature = Curvature::Convex;
  }
  n.children.push_back(std::move(child.node_));
  return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::norm(std::vector<Expr> terms) {
  if (terms.empty()) throw Error(ErrorCode::InvalidSpec, "empty norm");
  Node n = make_node(Expr::Kind::Norm, Curvature::Unknown);
  bool all_const = true;
  bool all_affine = true;
  for (auto& t : terms) {
    all_const = all_const && t.curvature() == Curvature::Constant;
    all_affine = all_affine && at_most_affine(t.curvature());
    n.children.push_back(std::move(t.node_));
  }
  n.curvature = all_const ? Curvature::Constant : (all_affine ? Curvature::Convex : Curvature::Unknown);
  return Expr(std::make_shared<const Node>(std::move(n)));
}

double Expr::evaluate(std::span<const double> x, std::span<const double> z,
                      std::span<const double> y) const {
  return eval_node(*node_, x, z, y);
}

Curvature Expr::curvature() const noexcept { return node_->curvature; }
Expr::Kind Expr::kind() const noexcept { return node_->kind; }
double Expr::value() const noexcept { return node_->value; }
VarSpace Expr::space() const noexcept { return node_->space; }
std::size_t Expr::index() const noexcept { return node_->index; }

std::vector<Expr> Expr::children() const {
  std::vector<Expr> out;
  out.reserve(node_->children.size());
  for (const auto& c : node_->children) out.push_back(Expr(c));
  return out;
}

std::size_t Expr::arity(VarSpace space) const noexcept {
  if (node_->kind == Kind::Variable) return node_->space == space ? node_->index + 1 : 0;
  std::size_t a = 0;
  for (const auto& c : node_->children) a = std::max(a, Expr(c).arity(space));
  return a;
}

ConvexExpr::ConvexExpr(Expr expr) : expr_(std::move(expr)) {
  if (expr_.arity(VarSpace::X) > 0 || expr_.arity(VarSpace::Z) > 0) {
    throw Error(ErrorCode::InvalidSpec, "recourse objective/constraints may only use y variables");
  }
  const Curvature c = expr_.curvature();
  if (c != Curvature::Constant && c != Curvature::Affine && c != Curvature::Convex) {
    throw Error(ErrorCode::InvalidSpec, "expression is not convex under the composition rules");
  }
}

}  // namespace meanrisk
