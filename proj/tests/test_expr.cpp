#include <doctest.h>

#include <cmath>
#include <vector>

#include "meanrisk/error.hpp"
#include "meanrisk/expr.hpp"

using namespace meanrisk;

namespace {
Expr y(std::size_t i) { return Expr::variable(VarSpace::Y, i); }
Expr z(std::size_t i) { return Expr::variable(VarSpace::Z, i); }
}  // namespace

TEST_CASE("evaluation") {
  const std::vector<double> xs{2.0};
  const std::vector<double> zs{-1.0, 3.0};
  const std::vector<double> ys{0.5, -4.0};
  const auto e = Expr::sum({Expr::scale(2.0, y(0)), Expr::abs(y(1)), Expr::power(z(1), 2),
                            Expr::variable(VarSpace::X, 0), Expr::constant(-1.0)});
  CHECK(e.evaluate(xs, zs, ys) == doctest::Approx(1.0 + 4.0 + 9.0 + 2.0 - 1.0));
  CHECK(Expr::norm({y(0), y(1)}).evaluate({}, {}, ys) == doctest::Approx(std::hypot(0.5, 4.0)));
  CHECK(Expr::max({y(0), y(1), Expr::constant(0.1)}).evaluate({}, {}, ys) == 0.5);
  CHECK(Expr::min({y(0), y(1)}).evaluate({}, {}, ys) == -4.0);
  CHECK(e.arity(VarSpace::Z) == 2);
  CHECK(e.arity(VarSpace::Y) == 2);
  CHECK(e.arity(VarSpace::X) == 1);
}

TEST_CASE("curvature rules") {
  CHECK(Expr::constant(3).curvature() == Curvature::Constant);
  CHECK(y(0).curvature() == Curvature::Affine);
  CHECK(Expr::sum({y(0), Expr::scale(-2, y(1))}).curvature() == Curvature::Affine);
  CHECK(Expr::abs(Expr::sum({y(0), Expr::constant(-1)})).curvature() == Curvature::Convex);
  CHECK(Expr::power(y(0), 2).curvature() == Curvature::Convex);
  CHECK(Expr::power(y(0), 3).curvature() == Curvature::Unknown);
  CHECK(Expr::power(Expr::abs(y(0)), 2).curvature() == Curvature::Unknown);
  CHECK(Expr::norm({y(0), Expr::sum({y(1), Expr::constant(2)})}).curvature() == Curvature::Convex);
  CHECK(Expr::max({Expr::abs(y(0)), y(1)}).curvature() == Curvature::Convex);
  CHECK(Expr::scale(-1, Expr::abs(y(0))).curvature() == Curvature::Concave);
  CHECK(Expr::min({Expr::scale(-1, Expr::abs(y(0))), y(1)}).curvature() == Curvature::Concave);
  CHECK(Expr::sum({Expr::abs(y(0)), Expr::scale(-1, Expr::abs(y(1)))}).curvature() == Curvature::Unknown);
  CHECK(Expr::abs(Expr::abs(y(0))).curvature() == Curvature::Unknown);
}

TEST_CASE("ConvexExpr accepts convex trees over y only") {
  CHECK_NOTHROW(ConvexExpr(Expr::sum({Expr::power(y(0), 2), Expr::abs(y(1))})));
  CHECK_NOTHROW(ConvexExpr(Expr::constant(1.0)));
  CHECK_THROWS_AS(ConvexExpr(Expr::scale(-1, Expr::abs(y(0)))), Error);
  CHECK_THROWS_AS(ConvexExpr(Expr::sum({y(0), z(0)})), Error);
  const ConvexExpr c(Expr::max({y(0), Expr::scale(-1, y(0))}));
  const std::vector<double> pt{-2.5};
  CHECK(c(pt) == 2.5);
}

TEST_CASE("convexity holds numerically for accepted trees") {
  const ConvexExpr c(Expr::sum({Expr::norm({y(0), Expr::sum({y(1), Expr::constant(-1)})}), Expr::power(y(0), 4),
                                Expr::max({Expr::abs(y(1)), Expr::scale(0.5, y(0))})}));
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> a{std::sin(i) * 3, std::cos(1.7 * i) * 2};
    const std::vector<double> b{std::cos(i) * 2, std::sin(0.3 * i) * 4};
    for (double t = 0.1; t < 1.0; t += 0.2) {
      const std::vector<double> m{t * a[0] + (1 - t) * b[0], t * a[1] + (1 - t) * b[1]};
      CHECK(c(m) <= t * c(a) + (1 - t) * c(b) + 1e-12);
    }
  }
}

TEST_CASE("builder errors") {
  CHECK_THROWS_AS(Expr::power(y(0), 0), Error);
  CHECK_THROWS_AS(Expr::sum({}), Error);
  CHECK_THROWS_AS(Expr::max({}), Error);
}
