#include "meanrisk/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "meanrisk/error.hpp"

namespace meanrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kIntegralityTol = 1e-9;
constexpr std::size_t kPivotCap = 1000000;
constexpr std::size_t kMaxLattice = 1000000;

// ---------------------------------------------------------------------------
// Dense tableau simplex on  min c'x, M x = r, x >= 0, r >= 0.

class Tableau {
 public:
  enum class Outcome { Optimal, Unbounded };

  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0), active_(rows, 1) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  double& cost(std::size_t j) { return at(m_, j); }
  double& objective_cell() { return at(m_, n_); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::vector<char>& active() { return active_; }

  void pivot(std::size_t r, std::size_t s) {
    double* row = &t_[r * (n_ + 1)];
    const double p = row[s];
    for (std::size_t j = 0; j <= n_; ++j) row[j] /= p;
    row[s] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* other = &t_[i * (n_ + 1)];
      const double f = other[s];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) other[j] -= f * row[j];
      other[s] = 0.0;
    }
    basis_[r] = s;
    if (++pivots_ > kPivotCap) throw Error(ErrorCode::NumericalFailure, "simplex pivot cap exceeded");
  }

  // Bland's rule: lowest-index improving column, lowest basis index among
  // tied ratios.
  Outcome optimize(const std::vector<char>& allowed) {
    while (true) {
      std::size_t s = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (allowed[j] && cost(j) < -kCostTol) {
          s = j;
          break;
        }
      }
      if (s == n_) return Outcome::Optimal;
      std::size_t r = m_;
      double best = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!active_[i]) continue;
        const double a = at(i, s);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(0.0, rhs(i)) / a;
        const double tie = 1e-12 * (1.0 + std::abs(best));
        if (r == m_ || ratio < best - tie) {
          r = i;
          best = ratio;
        } else if (ratio <= best + tie && basis_[i] < basis_[r]) {
          r = i;
          best = std::min(best, ratio);
        }
      }
      if (r == m_) return Outcome::Unbounded;
      pivot(r, s);
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<char> active_;
  std::size_t pivots_ = 0;
};

struct VarMap {
  enum class Kind { Shift, Reflect, Split } kind;
  std::size_t col;
  std::size_t col_neg = 0;
  double offset = 0.0;
};

Solution make_status(SolveStatus s) {
  Solution out;
  out.status = s;
  return out;
}

double row_tolerance(const Eigen::VectorXd& b) {
  return 1e-9 * (1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0));
}

// ---------------------------------------------------------------------------
// Integer box helpers

template <class Visit>
void for_each_assignment(const std::vector<IntegerBound>& bounds, Visit&& visit) {
  std::vector<long long> cur(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) cur[i] = bounds[i].lo;
  while (true) {
    visit(cur);
    std::size_t k = bounds.size();
    while (k > 0) {
      --k;
      if (cur[k] < bounds[k].hi) {
        ++cur[k];
        break;
      }
      cur[k] = bounds[k].lo;
      if (k == 0) return;
    }
    if (bounds.empty()) return;
  }
}

void check_bounds(const std::vector<IntegerBound>& bounds) {
  for (const auto& b : bounds) {
    if (b.lo > b.hi) throw Error(ErrorCode::InvalidSpec, "integer bound with lo > hi");
  }
}

void check_lattice(const std::vector<IntegerBound>& bounds) {
  if (lattice_volume(bounds) > kMaxLattice) {
    throw Error(ErrorCode::BoxTooLarge, "integer box has more than 10^6 points");
  }
}

struct Branch {
  std::size_t position;  // index into the integer list
  double value;
};

// Lowest-index most-fractional integer coordinate, or none.
std::optional<Branch> pick_branch(const Eigen::VectorXd& y, const std::vector<std::size_t>& idx) {
  std::optional<Branch> out;
  double worst = kIntegralityTol;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double v = y[static_cast<Eigen::Index>(idx[k])];
    const double frac = v - std::floor(v);
    const double dist = std::min(frac, 1.0 - frac);
    if (dist > worst) {
      worst = dist;
      out = Branch{k, v};
    }
  }
  return out;
}

bool improves(double value, double best) {
  if (!std::isfinite(best)) return value < best;
  return value < best - 1e-12 * (1.0 + std::abs(best));
}

// ---------------------------------------------------------------------------
// MILP pieces

Solution solve_lp_fixed(const MixedIntegerProgram& mip, const std::vector<long long>& values) {
  LinearProgram lp = mip.relaxation;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(mip.integer_indices[k]);
    lp.lower[j] = static_cast<double>(values[k]);
    lp.upper[j] = static_cast<double>(values[k]);
  }
  return solve_lp(lp);
}

LinearProgram boxed_relaxation(const MixedIntegerProgram& mip) {
  LinearProgram lp = mip.relaxation;
  for (std::size_t k = 0; k < mip.integer_indices.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(mip.integer_indices[k]);
    lp.lower[j] = std::max(lp.lower[j], static_cast<double>(mip.integer_bounds[k].lo));
    lp.upper[j] = std::min(lp.upper[j], static_cast<double>(mip.integer_bounds[k].hi));
    lp.lower[j] = std::ceil(lp.lower[j] - kIntegralityTol);
    lp.upper[j] = std::floor(lp.upper[j] + kIntegralityTol);
  }
  return lp;
}

// ---------------------------------------------------------------------------
// QP pieces

double quad_value(const Eigen::MatrixXd& d, const Eigen::VectorXd& q, const Eigen::VectorXd& y) {
  return y.dot(d * y) + q.dot(y);
}

bool qp_feasible(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& y) {
  if (a.rows() == 0) return true;
  const double tol = row_tolerance(b);
  return ((a * y - b).array() <= tol).all();
}

// Solves G p + A_W' mu = -g, A_W p = 0. Returns false when singular.
bool solve_eqp(const Eigen::MatrixXd& g_mat, const Eigen::VectorXd& g, const Eigen::MatrixXd& a,
               const std::vector<std::size_t>& w, Eigen::VectorXd& p, Eigen::VectorXd& mu) {
  const auto n = g_mat.rows();
  const auto k = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
  kkt.topLeftCorner(n, n) = g_mat;
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto row = a.row(static_cast<Eigen::Index>(w[static_cast<std::size_t>(r)]));
    kkt.block(n + r, 0, 1, n) = row;
    kkt.block(0, n + r, n, 1) = row.transpose();
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
  rhs.head(n) = -g;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return false;
  const Eigen::VectorXd sol = lu.solve(rhs);
  p = sol.head(n);
  mu = sol.tail(k);
  return true;
}

void check_qp_dims(const Eigen::MatrixXd& d, const Eigen::VectorXd& q, const Eigen::MatrixXd& a,
                   const Eigen::VectorXd& b) {
  if (d.rows() != q.size() || d.cols() != q.size()) throw Error(ErrorCode::DimMismatch, "D must be n x n");
  if (a.rows() != b.size() || (a.rows() > 0 && a.cols() != q.size())) {
    throw Error(ErrorCode::DimMismatch, "constraint matrix does not match");
  }
}

Eigen::MatrixXd constraint_matrix(const Eigen::MatrixXd& a, Eigen::Index n) {
  return a.rows() == 0 ? Eigen::MatrixXd(0, n) : a;
}

Solution solve_qp_fixed(const QuadraticMixedProgram& qmp, const std::vector<long long>& values) {
  const auto n = static_cast<Eigen::Index>(qmp.num_vars());
  const auto& idx = qmp.integer_indices();
  std::vector<char> is_int(static_cast<std::size_t>(n), 0);
  for (auto j : idx) is_int[j] = 1;
  std::vector<Eigen::Index> cont;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!is_int[static_cast<std::size_t>(j)]) cont.push_back(j);
  }
  Eigen::VectorXd yi = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < idx.size(); ++k) yi[static_cast<Eigen::Index>(idx[k])] = static_cast<double>(values[k]);

  const auto& d = qmp.quadratic();
  const auto& q = qmp.linear();
  const Eigen::MatrixXd a = constraint_matrix(qmp.matrix(), n);
  const auto& b = qmp.rhs();
  if (cont.empty()) {
    if (!qp_feasible(a, b, yi)) return make_status(SolveStatus::Infeasible);
    Solution s = make_status(SolveStatus::Optimal);
    s.value = quad_value(d, q, yi);
    s.point = yi;
    return s;
  }
  const auto nc = static_cast<Eigen::Index>(cont.size());
  Eigen::MatrixXd dcc(nc, nc);
  Eigen::VectorXd qc(nc);
  Eigen::MatrixXd ac(a.rows(), nc);
  const Eigen::VectorXd dyi = d * yi;
  for (Eigen::Index r = 0; r < nc; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) dcc(r, c) = d(cont[r], cont[c]);
    qc[r] = q[cont[r]] + 2.0 * dyi[cont[r]];
    for (Eigen::Index i = 0; i < a.rows(); ++i) ac(i, r) = a(i, cont[r]);
  }
  const Eigen::VectorXd bc = b - a * yi;
  Solution inner = solve_qp(dcc, qc, ac, bc);
  if (!inner.optimal()) return inner;
  Solution s = make_status(SolveStatus::Optimal);
  s.point = yi;
  for (Eigen::Index r = 0; r < nc; ++r) s.point[cont[r]] = inner.point[r];
  s.value = quad_value(d, q, s.point);
  return s;
}

// ---------------------------------------------------------------------------
// Convex continuous slices

struct Minimum {
  double value;
  double arg;
};

template <class F>
Minimum golden_minimize(F&& f, double lo, double hi) {
  Minimum best{f(lo), lo};
  if (!(hi > lo)) return best;
  const double fh = f(hi);
  if (fh < best.value) best = {fh, hi};
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 300; ++it) {
    if (fc < best.value) best = {fc, c};
    if (fd < best.value) best = {fd, d};
    if (b - a <= 1e-11 + 1e-14 * (std::abs(a) + std::abs(b))) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return best;
}

// Nested golden-section over coordinates [k, box.size()) of y; the
// minimizing coordinates are left in y.
template <class F>
double nested_minimize(F&& f, const std::vector<Interval>& box, std::size_t k, std::vector<double>& y) {
  if (k == box.size()) return f(y);
  auto inner = [&](double t) {
    y[k] = t;
    return nested_minimize(f, box, k + 1, y);
  };
  const Minimum m = golden_minimize(inner, box[k].lo, box[k].hi);
  y[k] = m.arg;
  return nested_minimize(f, box, k + 1, y);
}

}  // namespace

// ---------------------------------------------------------------------------

LinearProgram LinearProgram::nonnegative(Eigen::VectorXd c, Eigen::MatrixXd a, Eigen::VectorXd b,
                                         std::vector<RowSense> senses) {
  LinearProgram lp;
  const auto n = c.size();
  lp.objective = std::move(c);
  lp.matrix = a.rows() == 0 ? Eigen::MatrixXd(0, n) : std::move(a);
  lp.rhs = std::move(b);
  lp.senses = std::move(senses);
  lp.lower = Eigen::VectorXd::Zero(n);
  lp.upper = Eigen::VectorXd::Constant(n, kInf);
  return lp;
}

void LinearProgram::validate() const {
  const auto n = objective.size();
  if (matrix.rows() != rhs.size() || static_cast<std::size_t>(rhs.size()) != senses.size()) {
    throw Error(ErrorCode::DimMismatch, "LP rows, rhs and senses disagree");
  }
  if (matrix.rows() > 0 && matrix.cols() != n) throw Error(ErrorCode::DimMismatch, "LP columns disagree");
  if (lower.size() != n || upper.size() != n) throw Error(ErrorCode::DimMismatch, "LP bounds disagree");
  if (!objective.allFinite() || !matrix.allFinite() || !rhs.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "LP data must be finite");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInf || upper[j] == -kInf) {
      throw Error(ErrorCode::InvalidArgument, "invalid variable bound");
    }
  }
}

Solution solve_lp(const LinearProgram& lp) {
  lp.validate();
  const auto n = static_cast<std::size_t>(lp.objective.size());
  for (std::size_t j = 0; j < n; ++j) {
    if (lp.lower[static_cast<Eigen::Index>(j)] > lp.upper[static_cast<Eigen::Index>(j)]) {
      return make_status(SolveStatus::Infeasible);
    }
  }

  // Variable substitution onto nonnegative structural columns.
  std::vector<VarMap> vars;
  std::size_t ns = 0;
  std::vector<std::pair<std::size_t, double>> bound_rows;  // (col, width)
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lp.lower[static_cast<Eigen::Index>(j)];
    const double hi = lp.upper[static_cast<Eigen::Index>(j)];
    if (std::isfinite(lo)) {
      vars.push_back({VarMap::Kind::Shift, ns, 0, lo});
      if (std::isfinite(hi)) bound_rows.emplace_back(ns, hi - lo);
      ++ns;
    } else if (std::isfinite(hi)) {
      vars.push_back({VarMap::Kind::Reflect, ns, 0, hi});
      ++ns;
    } else {
      vars.push_back({VarMap::Kind::Split, ns, ns + 1, 0.0});
      ns += 2;
    }
  }

  const std::size_t m0 = lp.num_rows();
  const std::size_t m = m0 + bound_rows.size();
  std::vector<std::vector<double>> rows(m, std::vector<double>(ns, 0.0));
  std::vector<double> r(m, 0.0);
  std::vector<char> is_le(m, 1);
  for (std::size_t i = 0; i < m0; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    r[i] = lp.rhs[ii];
    is_le[i] = lp.senses[i] == RowSense::LessEqual;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = lp.matrix(ii, static_cast<Eigen::Index>(j));
      if (a == 0.0) continue;
      const auto& v = vars[j];
      switch (v.kind) {
        case VarMap::Kind::Shift:
          rows[i][v.col] += a;
          r[i] -= a * v.offset;
          break;
        case VarMap::Kind::Reflect:
          rows[i][v.col] -= a;
          r[i] -= a * v.offset;
          break;
        case VarMap::Kind::Split:
          rows[i][v.col] += a;
          rows[i][v.col_neg] -= a;
          break;
      }
    }
  }
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    rows[m0 + k][bound_rows[k].first] = 1.0;
    r[m0 + k] = bound_rows[k].second;
  }
  std::vector<double> c(ns, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double cj = lp.objective[static_cast<Eigen::Index>(j)];
    const auto& v = vars[j];
    if (v.kind == VarMap::Kind::Shift) c[v.col] += cj;
    if (v.kind == VarMap::Kind::Reflect) c[v.col] -= cj;
    if (v.kind == VarMap::Kind::Split) {
      c[v.col] += cj;
      c[v.col_neg] -= cj;
    }
  }

  // Column layout: structural | slacks | artificials.
  std::size_t n_slack = 0;
  for (std::size_t i = 0; i < m; ++i) n_slack += is_le[i] ? 1 : 0;
  std::vector<double> sign(m, 1.0);
  std::vector<char> needs_art(m, 0);
  std::size_t n_art = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (r[i] < 0.0) sign[i] = -1.0;
    needs_art[i] = !is_le[i] || sign[i] < 0.0;
    n_art += needs_art[i] ? 1 : 0;
  }
  const std::size_t total = ns + n_slack + n_art;
  Tableau tab(m, total);
  std::vector<std::size_t> id_col(m);
  std::vector<char> allowed(total, 1);
  {
    std::size_t slack = ns;
    std::size_t art = ns + n_slack;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < ns; ++j) tab.at(i, j) = sign[i] * rows[i][j];
      tab.rhs(i) = sign[i] * r[i];
      if (is_le[i]) {
        tab.at(i, slack) = sign[i];
        if (!needs_art[i]) id_col[i] = slack;
        ++slack;
      }
      if (needs_art[i]) {
        tab.at(i, art) = 1.0;
        allowed[art] = 0;
        id_col[i] = art;
        ++art;
      }
      tab.basis()[i] = id_col[i];
    }
  }

  if (n_art > 0) {
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!needs_art[i]) continue;
      for (std::size_t j = 0; j < ns + n_slack; ++j) tab.cost(j) -= tab.at(i, j);
      z += tab.rhs(i);
    }
    tab.objective_cell() = -z;
    tab.optimize(allowed);
    double max_r = 0.0;
    for (double v : r) max_r = std::max(max_r, std::abs(v));
    if (-tab.objective_cell() > 1e-9 * (1.0 + max_r)) return make_status(SolveStatus::Infeasible);
    // Drive remaining artificials out of the basis; rows where that is
    // impossible are redundant.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis()[i] < ns + n_slack) continue;
      std::size_t best = total;
      double mag = kPivotTol;
      for (std::size_t j = 0; j < ns + n_slack; ++j) {
        if (std::abs(tab.at(i, j)) > mag) {
          mag = std::abs(tab.at(i, j));
          best = j;
        }
      }
      if (best == total) {
        tab.active()[i] = 0;
      } else {
        tab.pivot(i, best);
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.rhs(i) < 0.0 && tab.rhs(i) > -1e-9) tab.rhs(i) = 0.0;
    }
  }

  for (std::size_t j = 0; j <= total; ++j) tab.at(m, j) = j < ns ? c[j] : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bcol = tab.basis()[i];
    const double cb = bcol < ns ? c[bcol] : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= total; ++j) tab.at(m, j) -= cb * tab.at(i, j);
  }
  if (tab.optimize(allowed) == Tableau::Outcome::Unbounded) return make_status(SolveStatus::Unbounded);

  std::vector<double> xs(ns, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis()[i] < ns) xs[tab.basis()[i]] = std::max(0.0, tab.rhs(i));
  }
  Solution sol = make_status(SolveStatus::Optimal);
  sol.point.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const auto& v = vars[j];
    double y = 0.0;
    if (v.kind == VarMap::Kind::Shift) y = v.offset + xs[v.col];
    if (v.kind == VarMap::Kind::Reflect) y = v.offset - xs[v.col];
    if (v.kind == VarMap::Kind::Split) y = xs[v.col] - xs[v.col_neg];
    sol.point[static_cast<Eigen::Index>(j)] = y;
  }
  sol.value = lp.objective.dot(sol.point);
  sol.duals.resize(static_cast<Eigen::Index>(m0));
  for (std::size_t i = 0; i < m0; ++i) {
    sol.duals[static_cast<Eigen::Index>(i)] = -sign[i] * tab.cost(id_col[i]);
  }
  return sol;
}

// ---------------------------------------------------------------------------

void MixedIntegerProgram::validate() const {
  relaxation.validate();
  if (integer_indices.size() != integer_bounds.size()) {
    throw Error(ErrorCode::DimMismatch, "one bound per integer variable required");
  }
  for (auto j : integer_indices) {
    if (j >= relaxation.num_vars()) throw Error(ErrorCode::OutOfRange, "integer index out of range");
  }
  check_bounds(integer_bounds);
}

Solution solve_milp(const MixedIntegerProgram& mip) {
  mip.validate();
  if (mip.integer_indices.empty()) return solve_lp(mip.relaxation);
  const LinearProgram root = boxed_relaxation(mip);
  const Solution root_sol = solve_lp(root);
  if (root_sol.status == SolveStatus::Infeasible) return root_sol;
  if (root_sol.status == SolveStatus::Unbounded) {
    // Unbounded iff some integer point is feasible: search with zero cost.
    MixedIntegerProgram feas = mip;
    feas.relaxation.objective.setZero();
    const Solution f = solve_milp(feas);
    return make_status(f.optimal() ? SolveStatus::Unbounded : SolveStatus::Infeasible);
  }

  struct Node {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
  };
  std::vector<Node> stack{{root.lower, root.upper}};
  Solution best = make_status(SolveStatus::Infeasible);
  double best_value = kInf;
  LinearProgram lp = root;
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    lp.lower = node.lower;
    lp.upper = node.upper;
    const Solution s = solve_lp(lp);
    if (!s.optimal() || !improves(s.value, best_value)) continue;
    const auto br = pick_branch(s.point, mip.integer_indices);
    if (!br) {
      std::vector<long long> fixed(mip.integer_indices.size());
      for (std::size_t k = 0; k < fixed.size(); ++k) {
        fixed[k] = std::llround(s.point[static_cast<Eigen::Index>(mip.integer_indices[k])]);
      }
      Solution leaf = solve_lp_fixed(mip, fixed);
      if (!leaf.optimal()) continue;
      if (improves(leaf.value, best_value)) {
        best_value = leaf.value;
        best = std::move(leaf);
      }
      continue;
    }
    const auto j = static_cast<Eigen::Index>(mip.integer_indices[br->position]);
    Node up = node;
    up.lower[j] = std::ceil(br->value);
    Node down = std::move(node);
    down.upper[j] = std::floor(br->value);
    if (up.lower[j] <= up.upper[j]) stack.push_back(std::move(up));
    if (down.lower[j] <= down.upper[j]) stack.push_back(std::move(down));
  }
  best.duals.resize(0);
  return best;
}

// ---------------------------------------------------------------------------

QuadraticMixedProgram::QuadraticMixedProgram(Eigen::MatrixXd d, Eigen::VectorXd q, Eigen::MatrixXd a,
                                             Eigen::VectorXd b, std::vector<std::size_t> integer_indices,
                                             std::vector<IntegerBound> integer_bounds)
    : d_(std::move(d)),
      q_(std::move(q)),
      a_(std::move(a)),
      b_(std::move(b)),
      int_idx_(std::move(integer_indices)),
      int_bounds_(std::move(integer_bounds)) {
  const auto n = q_.size();
  if (a_.rows() == 0) a_.resize(0, n);
  check_qp_dims(d_, q_, a_, b_);
  if (!d_.allFinite() || !q_.allFinite() || !a_.allFinite() || !b_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "QP data must be finite");
  }
  if ((d_ - d_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::InvalidSpec, "D is not symmetric");
  }
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d_, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 1e-10)) throw Error(ErrorCode::InvalidSpec, "D is not positive definite");
  }
  if (int_idx_.size() != int_bounds_.size()) {
    throw Error(ErrorCode::DimMismatch, "one bound per integer variable required");
  }
  for (auto j : int_idx_) {
    if (j >= static_cast<std::size_t>(n)) throw Error(ErrorCode::OutOfRange, "integer index out of range");
  }
  check_bounds(int_bounds_);
}

Solution solve_qp(const Eigen::MatrixXd& d, const Eigen::VectorXd& q, const Eigen::MatrixXd& a_in,
                  const Eigen::VectorXd& b) {
  const auto n = q.size();
  const Eigen::MatrixXd a = constraint_matrix(a_in, n);
  check_qp_dims(d, q, a, b);
  const Eigen::MatrixXd g_mat = 2.0 * d;
  const auto m = a.rows();

  Eigen::VectorXd y = g_mat.llt().solve(-q);
  auto finish = [&](const Eigen::VectorXd& pt) {
    Solution s = make_status(SolveStatus::Optimal);
    s.point = pt;
    s.value = quad_value(d, q, pt);
    return s;
  };
  if (m == 0 || ((a * y - b).array() <= 1e-12 * (1.0 + b.cwiseAbs().array())).all()) return finish(y);

  LinearProgram phase1;
  phase1.objective = Eigen::VectorXd::Zero(n);
  phase1.matrix = a;
  phase1.rhs = b;
  phase1.senses.assign(static_cast<std::size_t>(m), RowSense::LessEqual);
  phase1.lower = Eigen::VectorXd::Constant(n, -kInf);
  phase1.upper = Eigen::VectorXd::Constant(n, kInf);
  const Solution start = solve_lp(phase1);
  if (!start.optimal()) return make_status(SolveStatus::Infeasible);
  y = start.point;

  std::vector<std::size_t> work;
  std::vector<char> in_work(static_cast<std::size_t>(m), 0);
  const std::size_t cap = 50 * static_cast<std::size_t>(m + n) + 100;
  // After a full step, or with n constraints in the working set, y already
  // minimizes over the working face; the solved p is then only rounding noise.
  bool on_face_min = false;
  for (std::size_t it = 0; it < cap; ++it) {
    const Eigen::VectorXd g = g_mat * y + q;
    Eigen::VectorXd p;
    Eigen::VectorXd mu;
    if (!solve_eqp(g_mat, g, a, work, p, mu)) {
      throw Error(ErrorCode::NumericalFailure, "singular working set in active-set QP");
    }
    on_face_min = on_face_min || work.size() == static_cast<std::size_t>(n);
    if (on_face_min || p.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + y.lpNorm<Eigen::Infinity>())) {
      on_face_min = false;
      Eigen::Index worst = -1;
      double most_negative = -1e-10;
      for (Eigen::Index k = 0; k < mu.size(); ++k) {
        if (mu[k] < most_negative) {
          most_negative = mu[k];
          worst = k;
        }
      }
      if (worst < 0) return finish(y);
      in_work[work[static_cast<std::size_t>(worst)]] = 0;
      work.erase(work.begin() + worst);
      continue;
    }
    double step = 1.0;
    Eigen::Index blocking = -1;
    const double pnorm = p.norm();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_work[static_cast<std::size_t>(i)]) continue;
      const double ap = a.row(i).dot(p);
      if (ap <= 1e-12 * a.row(i).norm() * pnorm) continue;
      const double t = std::max(0.0, (b[i] - a.row(i).dot(y)) / ap);
      if (t < step) {
        step = t;
        blocking = i;
      }
    }
    y += step * p;
    if (blocking >= 0) {
      work.push_back(static_cast<std::size_t>(blocking));
      in_work[static_cast<std::size_t>(blocking)] = 1;
    } else {
      on_face_min = true;
    }
  }
  throw Error(ErrorCode::NumericalFailure, "active-set QP iteration cap exceeded");
}

Solution solve_qp_kkt_enumeration(const Eigen::MatrixXd& d, const Eigen::VectorXd& q,
                                  const Eigen::MatrixXd& a_in, const Eigen::VectorXd& b) {
  const auto n = q.size();
  const Eigen::MatrixXd a = constraint_matrix(a_in, n);
  check_qp_dims(d, q, a, b);
  const auto m = static_cast<std::size_t>(a.rows());
  if (m > 20) throw Error(ErrorCode::ConstraintLimitExceeded, "KKT enumeration limited to 20 constraints");
  const Eigen::MatrixXd g_mat = 2.0 * d;
  const double tol = row_tolerance(b);
  const std::size_t max_size = std::min(m, static_cast<std::size_t>(n));
  for (std::size_t k = 0; k <= max_size; ++k) {
    std::vector<std::size_t> comb(k);
    for (std::size_t i = 0; i < k; ++i) comb[i] = i;
    while (true) {
      {
        const auto kk = static_cast<Eigen::Index>(k);
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + kk, n + kk);
        kkt.topLeftCorner(n, n) = g_mat;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + kk);
        rhs.head(n) = -q;
        for (std::size_t r = 0; r < k; ++r) {
          const auto row = a.row(static_cast<Eigen::Index>(comb[r]));
          const auto rr = n + static_cast<Eigen::Index>(r);
          kkt.block(rr, 0, 1, n) = row;
          kkt.block(0, rr, n, 1) = row.transpose();
          rhs[rr] = b[static_cast<Eigen::Index>(comb[r])];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible()) goto next;
        const Eigen::VectorXd sol = lu.solve(rhs);
        const Eigen::VectorXd y = sol.head(n);
        const Eigen::VectorXd lam = sol.tail(static_cast<Eigen::Index>(k));
        const bool dual_ok = k == 0 || lam.minCoeff() >= -1e-9;
        if (dual_ok && (m == 0 || ((a * y - b).array() <= tol).all())) {
          Solution s = make_status(SolveStatus::Optimal);
          s.point = y;
          s.value = quad_value(d, q, y);
          return s;
        }
      }
    next:
      std::size_t i = k;
      while (i > 0 && comb[i - 1] == m - k + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  return make_status(SolveStatus::Infeasible);
}

Solution solve_miqp(const QuadraticMixedProgram& qmp) {
  const auto& idx = qmp.integer_indices();
  if (idx.empty()) return solve_qp(qmp.quadratic(), qmp.linear(), qmp.matrix(), qmp.rhs());
  const auto n = static_cast<Eigen::Index>(qmp.num_vars());
  const auto m = qmp.matrix().rows();
  const auto k = static_cast<Eigen::Index>(idx.size());

  struct Node {
    std::vector<double> lo;
    std::vector<double> hi;
  };
  Node root;
  for (const auto& bd : qmp.integer_bounds()) {
    root.lo.push_back(static_cast<double>(bd.lo));
    root.hi.push_back(static_cast<double>(bd.hi));
  }
  Eigen::MatrixXd a(m + 2 * k, n);
  a.topRows(m) = qmp.matrix();
  a.bottomRows(2 * k).setZero();
  for (Eigen::Index r = 0; r < k; ++r) {
    a(m + 2 * r, static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)])) = 1.0;
    a(m + 2 * r + 1, static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)])) = -1.0;
  }
  Eigen::VectorXd b(m + 2 * k);
  b.head(m) = qmp.rhs();

  std::vector<Node> stack{root};
  Solution best = make_status(SolveStatus::Infeasible);
  double best_value = kInf;
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    for (Eigen::Index r = 0; r < k; ++r) {
      b[m + 2 * r] = node.hi[static_cast<std::size_t>(r)];
      b[m + 2 * r + 1] = -node.lo[static_cast<std::size_t>(r)];
    }
    const Solution s = solve_qp(qmp.quadratic(), qmp.linear(), a, b);
    if (!s.optimal() || !improves(s.value, best_value)) continue;
    const auto br = pick_branch(s.point, idx);
    if (!br) {
      std::vector<long long> fixed(idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) {
        fixed[j] = std::llround(s.point[static_cast<Eigen::Index>(idx[j])]);
      }
      Solution leaf = solve_qp_fixed(qmp, fixed);
      if (leaf.optimal() && improves(leaf.value, best_value)) {
        best_value = leaf.value;
        best = std::move(leaf);
      }
      continue;
    }
    Node up = node;
    up.lo[br->position] = std::ceil(br->value);
    Node down = std::move(node);
    down.hi[br->position] = std::floor(br->value);
    if (up.lo[br->position] <= up.hi[br->position]) stack.push_back(std::move(up));
    if (down.lo[br->position] <= down.hi[br->position]) stack.push_back(std::move(down));
  }
  return best;
}

// ---------------------------------------------------------------------------

void ConvexMixedProgram::validate() const {
  if (static_cast<std::size_t>(rhs.size()) != constraints.size()) {
    throw Error(ErrorCode::DimMismatch, "one rhs entry per constraint required");
  }
  const std::size_t nv = num_vars();
  if (objective.arity() > nv) throw Error(ErrorCode::DimMismatch, "objective uses undeclared variables");
  for (const auto& g : constraints) {
    if (g.arity() > nv) throw Error(ErrorCode::DimMismatch, "constraint uses undeclared variables");
  }
  for (const auto& iv : continuous_box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
      throw Error(ErrorCode::InvalidSpec, "continuous box must be finite with lo <= hi");
    }
  }
  if (!rhs.allFinite()) throw Error(ErrorCode::InvalidArgument, "rhs must be finite");
  check_bounds(integer_bounds);
}

Solution solve_convex_mip(const ConvexMixedProgram& cmp) {
  cmp.validate();
  check_lattice(cmp.integer_bounds);
  const std::size_t m1 = cmp.continuous_box.size();
  constexpr double kFeasTol = 1e-9;

  Solution best = make_status(SolveStatus::Infeasible);
  double best_value = kInf;
  std::vector<double> y(cmp.num_vars(), 0.0);

  auto violation = [&](const std::vector<double>& pt) {
    double h = -kInf;
    for (std::size_t i = 0; i < cmp.constraints.size(); ++i) {
      h = std::max(h, cmp.constraints[i](pt) - cmp.rhs[static_cast<Eigen::Index>(i)]);
    }
    return h;
  };

  for_each_assignment(cmp.integer_bounds, [&](const std::vector<long long>& ints) {
    for (std::size_t k = 0; k < ints.size(); ++k) y[m1 + k] = static_cast<double>(ints[k]);
    if (!cmp.constraints.empty()) {
      const double h = nested_minimize(violation, cmp.continuous_box, 0, y);
      if (h > kFeasTol) return;
    }
    std::vector<double> feasible_point = y;
    bool found = cmp.constraints.empty();
    for (double weight = 1e3; weight <= 1e9 * 1.5; weight *= 100.0) {
      auto penalized = [&](const std::vector<double>& pt) {
        return cmp.objective(pt) + weight * std::max(0.0, violation(pt));
      };
      nested_minimize(penalized, cmp.continuous_box, 0, y);
      if (cmp.constraints.empty() || violation(y) <= kFeasTol) {
        found = true;
        break;
      }
    }
    if (!found) {
      // Fall back on the most feasible point of the slice.
      y = feasible_point;
    }
    const double value = cmp.objective(y);
    if (value < best_value) {
      best_value = value;
      best = make_status(SolveStatus::Optimal);
      best.value = value;
      best.point = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    }
  });
  return best;
}

// ---------------------------------------------------------------------------

std::size_t lattice_volume(const std::vector<IntegerBound>& bounds) {
  std::size_t vol = 1;
  for (const auto& b : bounds) {
    if (b.lo > b.hi) return 0;
    const auto width = static_cast<unsigned long long>(b.hi - b.lo) + 1ULL;
    if (width > std::numeric_limits<std::size_t>::max() / vol) return std::numeric_limits<std::size_t>::max();
    vol *= static_cast<std::size_t>(width);
  }
  return vol;
}

Solution enumerate_oracle(const MixedIntegerProgram& mip) {
  mip.validate();
  if (mip.integer_indices.empty()) return solve_lp(mip.relaxation);
  check_lattice(mip.integer_bounds);
  Solution best = make_status(SolveStatus::Infeasible);
  double best_value = kInf;
  bool unbounded = false;
  for_each_assignment(mip.integer_bounds, [&](const std::vector<long long>& ints) {
    if (unbounded) return;
    Solution s = solve_lp_fixed(mip, ints);
    if (s.status == SolveStatus::Unbounded) {
      unbounded = true;
      return;
    }
    if (s.optimal() && s.value < best_value) {
      best_value = s.value;
      best = std::move(s);
    }
  });
  if (unbounded) return make_status(SolveStatus::Unbounded);
  best.duals.resize(0);
  return best;
}

Solution enumerate_oracle(const QuadraticMixedProgram& qmp) {
  if (qmp.integer_indices().empty()) {
    return solve_qp(qmp.quadratic(), qmp.linear(), qmp.matrix(), qmp.rhs());
  }
  check_lattice(qmp.integer_bounds());
  Solution best = make_status(SolveStatus::Infeasible);
  double best_value = kInf;
  for_each_assignment(qmp.integer_bounds(), [&](const std::vector<long long>& ints) {
    Solution s = solve_qp_fixed(qmp, ints);
    if (s.optimal() && s.value < best_value) {
      best_value = s.value;
      best = std::move(s);
    }
  });
  return best;
}

}  // namespace meanrisk
