#include "meanrisk/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "meanrisk/error.hpp"

namespace meanrisk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_point(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::DimMismatch, what);
}

void check_exponent(double g, const char* name) {
  if (!(g > 0.0) || !std::isfinite(g)) {
    throw Error(ErrorCode::InvalidExponent, std::string(name) + " must be a positive finite exponent");
  }
}

std::vector<std::size_t> integer_positions(std::size_t m1, std::size_t m2) {
  std::vector<std::size_t> idx(m2);
  for (std::size_t k = 0; k < m2; ++k) idx[k] = m1 + k;
  return idx;
}

Solution solve_problem(const RecourseModel& model, std::span<const double> x, std::span<const double> z) {
  return std::visit(
      overloaded{
          [&](const LinearRecourse& p) {
            auto lp = LinearProgram::nonnegative(p.q(x, z), p.a, p.h(x, z),
                                                 std::vector<RowSense>(static_cast<std::size_t>(p.a.rows()),
                                                                       RowSense::Equal));
            return solve_lp(lp);
          },
          [&](const MilpRecourse& p) {
            MixedIntegerProgram mip;
            mip.relaxation = LinearProgram::nonnegative(
                p.q, p.a, p.h(x, z), std::vector<RowSense>(static_cast<std::size_t>(p.a.rows()), RowSense::Equal));
            mip.integer_indices = integer_positions(p.m1, p.m2);
            mip.integer_bounds = p.integer_bounds;
            return solve_milp(mip);
          },
          [&](const MiqpRecourse& p) {
            QuadraticMixedProgram qmp(p.d, p.q(x, z), p.a, p.h(x, z), integer_positions(p.m1, p.m2),
                                      p.integer_bounds);
            return solve_miqp(qmp);
          },
          [&](const ConvexMipRecourse& p) {
            ConvexMixedProgram cmp{p.v, p.g, p.h(x, z), p.continuous_box, p.integer_bounds};
            return solve_convex_mip(cmp);
          },
      },
      model.problem());
}

double point_piece_distance(const Eigen::VectorXd& t, const MilpDiscontinuitySet::Piece& piece) {
  using Kind = MilpDiscontinuitySet::Piece::Kind;
  if (piece.kind == Kind::Origin) return t.norm();
  const double proj = t.dot(piece.direction);
  if (piece.kind == Kind::Ray && proj <= 0.0) return t.norm();
  return (t - proj * piece.direction).norm();
}

Eigen::VectorXd unit_from_angle(double theta) {
  Eigen::VectorXd d(2);
  d << std::cos(theta), std::sin(theta);
  return d;
}

// Boundary of cone{A1 y1 : y1 >= 0} for k <= 2.
std::vector<MilpDiscontinuitySet::Piece> cone_boundary(const Eigen::MatrixXd& a1, Eigen::Index k) {
  using Piece = MilpDiscontinuitySet::Piece;
  using Kind = Piece::Kind;
  constexpr double kZero = 1e-12;
  std::vector<Piece> out;
  if (k == 1) {
    bool pos = false;
    bool neg = false;
    for (Eigen::Index j = 0; j < a1.cols(); ++j) {
      pos = pos || a1(0, j) > kZero;
      neg = neg || a1(0, j) < -kZero;
    }
    if (!(pos && neg)) out.push_back({Kind::Origin, {}});
    return out;
  }
  std::vector<double> angles;
  for (Eigen::Index j = 0; j < a1.cols(); ++j) {
    if (a1.col(j).norm() > kZero) angles.push_back(std::atan2(a1(1, j), a1(0, j)));
  }
  if (angles.empty()) {
    out.push_back({Kind::Origin, {}});
    return out;
  }
  std::sort(angles.begin(), angles.end());
  std::vector<double> uniq;
  for (double a : angles) {
    if (uniq.empty() || a - uniq.back() > kZero) uniq.push_back(a);
  }
  if (uniq.size() > 1 && uniq.front() + 2.0 * std::numbers::pi - uniq.back() <= kZero) uniq.pop_back();
  if (uniq.size() == 1) {
    out.push_back({Kind::Ray, unit_from_angle(uniq[0])});
    return out;
  }
  // Largest circular gap between consecutive generator angles.
  std::size_t gap_at = 0;
  double gap = -1.0;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    const double next = i + 1 < uniq.size() ? uniq[i + 1] : uniq[0] + 2.0 * std::numbers::pi;
    if (next - uniq[i] > gap + kZero) {
      gap = next - uniq[i];
      gap_at = i;
    }
  }
  const double first = uniq[gap_at];
  const double second = gap_at + 1 < uniq.size() ? uniq[gap_at + 1] : uniq[0];
  if (gap > std::numbers::pi + 1e-12) {
    out.push_back({Kind::Ray, unit_from_angle(first)});
    out.push_back({Kind::Ray, unit_from_angle(second)});
  } else if (gap >= std::numbers::pi - 1e-12) {
    out.push_back({Kind::Line, unit_from_angle(first)});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ParamMap::ParamMap(AffineMap map) : repr_(std::move(map)) {
  const auto& m = std::get<AffineMap>(repr_);
  require(m.x_coef.rows() == m.constant.size() && m.z_coef.rows() == m.constant.size(),
          "affine map blocks disagree on the output dimension");
  if (!m.x_coef.allFinite() || !m.z_coef.allFinite() || !m.constant.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "affine map entries must be finite");
  }
}

ParamMap::ParamMap(ExpressionMap map) : repr_(std::move(map)) {
  const auto& m = std::get<ExpressionMap>(repr_);
  for (const auto& e : m.outputs) {
    if (e.arity(VarSpace::Y) > 0) throw Error(ErrorCode::InvalidSpec, "parameter maps read only x and z");
  }
  if (m.declared_exponent && !(*m.declared_exponent > 0.0)) {
    throw Error(ErrorCode::InvalidExponent, "declared exponent must be positive");
  }
}

ParamMap ParamMap::constant(Eigen::VectorXd value, std::size_t n, std::size_t s) {
  const auto k = value.size();
  return ParamMap(AffineMap{Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(n)),
                            Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(s)), std::move(value)});
}

std::size_t ParamMap::output_dim() const noexcept {
  return std::visit(overloaded{
                        [](const AffineMap& m) { return static_cast<std::size_t>(m.constant.size()); },
                        [](const ExpressionMap& m) { return m.outputs.size(); },
                    },
                    repr_);
}

Eigen::VectorXd ParamMap::operator()(std::span<const double> x, std::span<const double> z) const {
  return std::visit(overloaded{
                        [&](const AffineMap& m) -> Eigen::VectorXd {
                          require(static_cast<std::size_t>(m.x_coef.cols()) == x.size() &&
                                      static_cast<std::size_t>(m.z_coef.cols()) == z.size(),
                                  "affine map applied to vectors of the wrong size");
                          return m.x_coef * as_vector(x) + m.z_coef * as_vector(z) + m.constant;
                        },
                        [&](const ExpressionMap& m) -> Eigen::VectorXd {
                          Eigen::VectorXd out(static_cast<Eigen::Index>(m.outputs.size()));
                          for (std::size_t i = 0; i < m.outputs.size(); ++i) {
                            out[static_cast<Eigen::Index>(i)] = m.outputs[i].evaluate(x, z, {});
                          }
                          return out;
                        },
                    },
                    repr_);
}

void ParamMap::check_inputs(std::size_t n, std::size_t s) const {
  std::visit(overloaded{
                 [&](const AffineMap& m) {
                   require(static_cast<std::size_t>(m.x_coef.cols()) == n, "affine map x block has wrong width");
                   require(static_cast<std::size_t>(m.z_coef.cols()) == s, "affine map z block has wrong width");
                 },
                 [&](const ExpressionMap& m) {
                   for (const auto& e : m.outputs) {
                     require(e.arity(VarSpace::X) <= n, "expression reads a decision coordinate beyond n");
                     require(e.arity(VarSpace::Z) <= s, "expression reads a scenario coordinate beyond s");
                   }
                 },
             },
             repr_);
}

double map_exponent(const ParamMap& pm) {
  return std::visit(overloaded{
                        [](const AffineMap&) { return 1.0; },
                        [](const ExpressionMap& m) {
                          if (!m.declared_exponent) {
                            throw Error(ErrorCode::MissingDeclaredExponent,
                                        "expression map has no declared growth exponent");
                          }
                          return *m.declared_exponent;
                        },
                    },
                    pm.repr());
}

// ---------------------------------------------------------------------------

RecourseModel::RecourseModel(std::size_t n, std::size_t s, RecourseProblem problem)
    : n_(n), s_(s), problem_(std::move(problem)) {
  auto rows = [](const Eigen::MatrixXd& a) { return static_cast<std::size_t>(a.rows()); };
  auto cols = [](const Eigen::MatrixXd& a) { return static_cast<std::size_t>(a.cols()); };
  std::visit(
      overloaded{
          [&](const LinearRecourse& p) {
            require(p.q.output_dim() == cols(p.a), "q must have one entry per column of A");
            require(p.h.output_dim() == rows(p.a), "h must have one entry per row of A");
            p.q.check_inputs(n, s);
            p.h.check_inputs(n, s);
          },
          [&](const MilpRecourse& p) {
            require(p.m1 + p.m2 == cols(p.a), "A must have m1 + m2 columns");
            require(static_cast<std::size_t>(p.q.size()) == cols(p.a), "q must have m1 + m2 entries");
            require(p.h.output_dim() == rows(p.a), "h must have one entry per row of A");
            require(p.integer_bounds.size() == p.m2, "one integer bound per integer variable required");
            p.h.check_inputs(n, s);
          },
          [&](const MiqpRecourse& p) {
            const std::size_t m = p.m1 + p.m2;
            require(rows(p.d) == m && cols(p.d) == m, "D must be (m1+m2) x (m1+m2)");
            require(rows(p.a) == 0 || cols(p.a) == m, "A must have m1 + m2 columns");
            require(p.q.output_dim() == m, "q must have m1 + m2 entries");
            require(p.h.output_dim() == rows(p.a), "h must have one entry per row of A");
            require(p.integer_bounds.size() == p.m2, "one integer bound per integer variable required");
            p.q.check_inputs(n, s);
            p.h.check_inputs(n, s);
            // Symmetry and definiteness of D.
            QuadraticMixedProgram(p.d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)), p.a,
                                  Eigen::VectorXd::Zero(p.a.rows()), integer_positions(p.m1, p.m2),
                                  p.integer_bounds);
          },
          [&](const ConvexMipRecourse& p) {
            const std::size_t m = p.m1 + p.m2;
            require(p.v.arity() <= m, "v reads variables beyond m1 + m2");
            for (const auto& g : p.g) require(g.arity() <= m, "g reads variables beyond m1 + m2");
            require(p.h.output_dim() == p.g.size(), "h must have one entry per constraint");
            require(p.integer_bounds.size() == p.m2, "one integer bound per integer variable required");
            require(p.continuous_box.size() == p.m1, "one box interval per continuous variable required");
            p.h.check_inputs(n, s);
            ConvexMixedProgram{p.v, p.g, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.g.size())),
                               p.continuous_box, p.integer_bounds}
                .validate();
            if (p.gamma_v) check_exponent(*p.gamma_v, "gamma_v");
            if (p.gamma_k) check_exponent(*p.gamma_k, "gamma_K");
          },
      },
      problem_);
}

std::string_view RecourseModel::kind() const noexcept {
  switch (problem_.index()) {
    case 0:
      return "linear";
    case 1:
      return "milp";
    case 2:
      return "miqp";
    default:
      return "convex_mip";
  }
}

double eval_recourse(const RecourseModel& model, std::span<const double> x, std::span<const double> z) {
  if (x.size() != model.decision_dim() || z.size() != model.scenario_dim()) {
    throw Error(ErrorCode::DimMismatch, "decision or scenario has the wrong dimension");
  }
  const Solution sol = solve_problem(model, x, z);
  if (sol.status == SolveStatus::Infeasible) {
    throw Error(ErrorCode::RecourseInfeasible,
                "no feasible recourse at x=" + format_point(x) + " z=" + format_point(z));
  }
  if (sol.status == SolveStatus::Unbounded) {
    throw Error(ErrorCode::RecourseUnbounded,
                "recourse unbounded below at x=" + format_point(x) + " z=" + format_point(z));
  }
  return sol.value;
}

RecourseFn recourse_function(const RecourseModel& model) {
  return [model](const Point& x, const Point& z) { return eval_recourse(model, x, z); };
}

double theoretical_exponent(const RecourseModel& model, double gamma_q, double gamma_h, double gamma_v,
                            double gamma_k) {
  switch (model.problem().index()) {
    case 0:
      check_exponent(gamma_q, "gamma_q");
      check_exponent(gamma_h, "gamma_h");
      return gamma_q + gamma_h;
    case 1:
      check_exponent(gamma_h, "gamma_h");
      return gamma_h;
    case 2:
      check_exponent(gamma_q, "gamma_q");
      check_exponent(gamma_h, "gamma_h");
      return std::max(2.0 * gamma_q, 2.0 * gamma_h);
    default:
      check_exponent(gamma_h, "gamma_h");
      check_exponent(gamma_v, "gamma_v");
      check_exponent(gamma_k, "gamma_K");
      return gamma_h * (gamma_k + 1.0) * (gamma_v + 1.0);
  }
}

double model_exponent(const RecourseModel& model) {
  return std::visit(
      overloaded{
          [&](const LinearRecourse& p) {
            return theoretical_exponent(model, map_exponent(p.q), map_exponent(p.h), 0.0, 0.0);
          },
          [&](const MilpRecourse& p) { return theoretical_exponent(model, 0.0, map_exponent(p.h), 0.0, 0.0); },
          [&](const MiqpRecourse& p) {
            return theoretical_exponent(model, map_exponent(p.q), map_exponent(p.h), 0.0, 0.0);
          },
          [&](const ConvexMipRecourse& p) {
            if (!p.gamma_v || !p.gamma_k) {
              throw Error(ErrorCode::MissingDeclaredExponent, "convex recourse needs declared gamma_v and gamma_K");
            }
            return theoretical_exponent(model, 0.0, map_exponent(p.h), *p.gamma_v, *p.gamma_k);
          },
      },
      model.problem());
}

// ---------------------------------------------------------------------------

double GrowthCertificate::max_ratio(std::size_t decision, double lo, double hi) const {
  double best = 0.0;
  for (const auto& s : samples) {
    if (s.decision == decision && s.z_norm >= lo && s.z_norm <= hi) best = std::max(best, s.ratio);
  }
  return best;
}

GrowthCertificate certify_growth(const RecourseModel& model, const std::vector<Point>& decisions,
                                 const Sampler& z_sampler, double gamma, std::size_t n, std::uint64_t seed) {
  check_exponent(gamma, "gamma");
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
  if (decisions.empty()) throw Error(ErrorCode::EmptySet, "no decisions to certify");
  std::vector<Point> zs;
  zs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(seed, i));
    zs.push_back(z_sampler(rng));
  }
  GrowthCertificate cert;
  cert.gamma = gamma;
  cert.decisions = decisions;
  cert.sample_count = n;
  cert.max_residual_margin = -kInf;
  for (std::size_t d = 0; d < decisions.size(); ++d) {
    std::vector<double> values(n);
    std::vector<double> scale(n);
    double eta = 1e-12;
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = std::abs(eval_recourse(model, decisions[d], zs[i]));
      const double zn = euclidean_norm(zs[i]);
      scale[i] = std::pow(zn, gamma) + 1.0;
      const double ratio = values[i] / scale[i];
      cert.samples.push_back({d, zn, ratio});
      eta = std::max(eta, ratio);
    }
    // the division above may round down by an ulp
    for (std::size_t i = 0; i < n; ++i) {
      while (values[i] > eta * scale[i]) eta = std::nextafter(eta, kInf);
    }
    cert.eta_hat.push_back(eta);
    for (std::size_t i = 0; i < n; ++i) {
      cert.max_residual_margin = std::max(cert.max_residual_margin, values[i] - eta * scale[i]);
    }
  }
  return cert;
}

// ---------------------------------------------------------------------------

MilpDiscontinuitySet::MilpDiscontinuitySet(const RecourseModel& model, std::vector<IntegerBound> integer_box)
    : h_([&]() -> ParamMap {
        const auto* p = std::get_if<MilpRecourse>(&model.problem());
        if (!p) throw Error(ErrorCode::InvalidArgument, "discontinuity set is defined for MILP recourse only");
        return p->h;
      }()) {
  const auto& p = std::get<MilpRecourse>(model.problem());
  const Eigen::Index k = p.a.rows();
  if (k > 2) throw Error(ErrorCode::DimensionUnsupported, "cone boundary implemented for at most two rows");
  if (integer_box.empty()) integer_box = p.integer_bounds;
  require(integer_box.size() == p.m2, "integer box must have one interval per integer variable");
  if (p.m2 == 0) return;

  const Eigen::MatrixXd a1 = p.a.leftCols(static_cast<Eigen::Index>(p.m1));
  const Eigen::MatrixXd a2 = p.a.rightCols(static_cast<Eigen::Index>(p.m2));
  pieces_ = cone_boundary(a1, k);

  for (auto& b : integer_box) b.lo = std::max<long long>(b.lo, 0);
  if (lattice_volume(integer_box) > 1000000) {
    throw Error(ErrorCode::BoxTooLarge, "integer box has more than 10^6 points");
  }
  for (const auto& b : integer_box) {
    if (b.lo > b.hi) return;
  }
  Eigen::VectorXd y2(static_cast<Eigen::Index>(p.m2));
  for (std::size_t i = 0; i < p.m2; ++i) y2[static_cast<Eigen::Index>(i)] = static_cast<double>(integer_box[i].lo);
  while (true) {
    shifts_.push_back(a2 * y2);
    std::size_t i = p.m2;
    bool done = true;
    while (i > 0) {
      --i;
      const auto ii = static_cast<Eigen::Index>(i);
      if (y2[ii] < static_cast<double>(integer_box[i].hi)) {
        y2[ii] += 1.0;
        done = false;
        break;
      }
      y2[ii] = static_cast<double>(integer_box[i].lo);
    }
    if (done) break;
  }
}

double MilpDiscontinuitySet::distance(std::span<const double> x, std::span<const double> z) const {
  if (empty()) return kInf;
  const Eigen::VectorXd t = h_(x, z);
  double best = kInf;
  for (const auto& s : shifts_) {
    const Eigen::VectorXd u = t - s;
    for (const auto& piece : pieces_) best = std::min(best, point_piece_distance(u, piece));
  }
  return best;
}

bool MilpDiscontinuitySet::contains(std::span<const double> x, std::span<const double> z, double tol) const {
  return distance(x, z) <= tol;
}

MilpDiscontinuitySet milp_discontinuity_predicate(const RecourseModel& model,
                                                  std::vector<IntegerBound> integer_box) {
  return MilpDiscontinuitySet(model, std::move(integer_box));
}

std::string_view to_string(Semicontinuity s) {
  switch (s) {
    case Semicontinuity::Continuous:
      return "continuous";
    case Semicontinuity::Lower:
      return "lower";
    case Semicontinuity::Upper:
      return "upper";
    case Semicontinuity::Neither:
      return "neither";
  }
  return "neither";
}

Semicontinuity observe_semicontinuity(const RecourseModel& model, std::span<const double> x,
                                      std::span<const double> z, double radius, double tol) {
  const double center = eval_recourse(model, x, z);
  bool lower = true;
  bool upper = true;
  Point probe(z.begin(), z.end());
  for (std::size_t j = 0; j < z.size(); ++j) {
    for (double sign : {-1.0, 1.0}) {
      probe[j] = z[j] + sign * radius;
      const double v = eval_recourse(model, x, probe);
      lower = lower && v >= center - tol;
      upper = upper && v <= center + tol;
      probe[j] = z[j];
    }
  }
  if (lower && upper) return Semicontinuity::Continuous;
  if (lower) return Semicontinuity::Lower;
  if (upper) return Semicontinuity::Upper;
  return Semicontinuity::Neither;
}

}  // namespace meanrisk
