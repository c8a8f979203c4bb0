#include "meanrisk/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "meanrisk/error.hpp"

namespace meanrisk {

DecisionSet::DecisionSet(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorCode::EmptySet, "decision set is empty");
  for (const auto& x : points_) {
    if (x.size() != points_.front().size()) throw Error(ErrorCode::DimMismatch, "decisions differ in dimension");
    for (double v : x) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "decision coordinates must be finite");
    }
  }
}

DecisionSet DecisionSet::grid(const Point& lo, const Point& hi, const std::vector<std::size_t>& counts) {
  if (lo.size() != hi.size() || lo.size() != counts.size()) {
    throw Error(ErrorCode::DimMismatch, "box bounds and counts must have equal length");
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (counts[i] == 0) throw Error(ErrorCode::InvalidSpec, "grid counts must be positive");
    if (!(lo[i] <= hi[i])) throw Error(ErrorCode::InvalidSpec, "grid box needs lo <= hi");
    if (total > 10000000 / counts[i]) throw Error(ErrorCode::InvalidSpec, "decision grid too large");
    total *= counts[i];
  }
  std::vector<Point> pts;
  pts.reserve(total);
  std::vector<std::size_t> idx(lo.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    Point x(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      x[i] = counts[i] == 1 ? lo[i]
                            : lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[i]) /
                                          static_cast<double>(counts[i] - 1);
    }
    pts.push_back(std::move(x));
    for (std::size_t i = lo.size(); i-- > 0;) {
      if (++idx[i] < counts[i]) break;
      idx[i] = 0;
    }
  }
  return DecisionSet(std::move(pts));
}

MeanRiskModel make_model(RecourseModel recourse, RiskSpec risk, DecisionSet decisions, std::optional<double> p,
                         std::optional<double> gamma) {
  validate(risk);
  if (decisions.dim() != recourse.decision_dim()) {
    throw Error(ErrorCode::DimMismatch, "decision dimension differs from the recourse model");
  }
  const double pv = p ? *p : integrability_order(risk);
  if (!(pv >= 1.0) || !std::isfinite(pv)) throw Error(ErrorCode::InvalidSpec, "p must be >= 1");
  const double gv = gamma ? *gamma : model_exponent(recourse);
  if (!(gv > 0.0) || !std::isfinite(gv)) throw Error(ErrorCode::InvalidSpec, "gamma must be positive");
  return MeanRiskModel{std::move(recourse), risk, std::move(decisions), pv, gv};
}

double objective(const MeanRiskModel& model, const Point& x, const DiscreteMeasure& nu) {
  if (x.size() != model.recourse.decision_dim()) throw Error(ErrorCode::DimMismatch, "decision has wrong dimension");
  if (nu.dim() != model.recourse.scenario_dim()) throw Error(ErrorCode::DimMismatch, "measure has wrong dimension");
  const auto& rec = model.recourse;
  const auto dist = pushforward(nu, x, [&rec](const Point& xx, const Point& z) { return eval_recourse(rec, xx, z); });
  return evaluate_risk(model.risk, dist);
}

std::vector<std::size_t> indices_within(const std::vector<double>& values, double tol) {
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be nonnegative");
  if (values.empty()) throw Error(ErrorCode::EmptySet, "no values");
  const double best = *std::min_element(values.begin(), values.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= best + tol) out.push_back(i);
  }
  return out;
}

double optimal_value(const MeanRiskModel& model, const DiscreteMeasure& nu) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : model.decisions.points()) best = std::min(best, objective(model, x, nu));
  return best;
}

std::vector<std::size_t> optimal_set(const MeanRiskModel& model, const DiscreteMeasure& nu, double tol) {
  std::vector<double> values;
  for (const auto& x : model.decisions.points()) values.push_back(objective(model, x, nu));
  return indices_within(values, tol);
}

MomentReport moment_feasibility(const MeanRiskModel& model, const DiscreteMeasure& nu) {
  MomentReport r;
  r.order = model.gamma * model.p;
  r.moment = moment(nu, r.order);
  return r;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

class Fnv {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void num(double v) { bytes(&v, sizeof v); }
  void num(std::uint64_t v) { bytes(&v, sizeof v); }
  void text(std::string_view s) {
    num(static_cast<std::uint64_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void matrix(const Eigen::MatrixXd& m) {
    num(static_cast<std::uint64_t>(m.rows()));
    num(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) num(m(i, j));
    }
  }
  void expr(const Expr& e) {
    num(static_cast<std::uint64_t>(e.kind()));
    num(e.value());
    num(static_cast<std::uint64_t>(e.space()));
    num(static_cast<std::uint64_t>(e.index()));
    const auto cs = e.children();
    num(static_cast<std::uint64_t>(cs.size()));
    for (const auto& c : cs) expr(c);
  }
  void param_map(const ParamMap& pm) {
    std::visit(overloaded{
                   [&](const AffineMap& m) {
                     text("affine");
                     matrix(m.x_coef);
                     matrix(m.z_coef);
                     matrix(m.constant);
                   },
                   [&](const ExpressionMap& m) {
                     text("expr");
                     for (const auto& e : m.outputs) expr(e);
                     num(m.declared_exponent.value_or(-1.0));
                   },
               },
               pm.repr());
  }
  void bounds(const std::vector<IntegerBound>& b) {
    for (const auto& iv : b) {
      num(static_cast<std::uint64_t>(iv.lo));
      num(static_cast<std::uint64_t>(iv.hi));
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t model_fingerprint(const MeanRiskModel& model) {
  Fnv f;
  f.text(describe(model.risk));
  f.num(model.p);
  f.num(model.gamma);
  for (const auto& x : model.decisions.points()) {
    for (double v : x) f.num(v);
  }
  const auto& rec = model.recourse;
  f.text(rec.kind());
  f.num(static_cast<std::uint64_t>(rec.decision_dim()));
  f.num(static_cast<std::uint64_t>(rec.scenario_dim()));
  std::visit(overloaded{
                 [&](const LinearRecourse& r) {
                   f.matrix(r.a);
                   f.param_map(r.q);
                   f.param_map(r.h);
                 },
                 [&](const MilpRecourse& r) {
                   f.matrix(r.q);
                   f.matrix(r.a);
                   f.num(static_cast<std::uint64_t>(r.m1));
                   f.param_map(r.h);
                   f.bounds(r.integer_bounds);
                 },
                 [&](const MiqpRecourse& r) {
                   f.matrix(r.d);
                   f.matrix(r.a);
                   f.num(static_cast<std::uint64_t>(r.m1));
                   f.param_map(r.q);
                   f.param_map(r.h);
                   f.bounds(r.integer_bounds);
                 },
                 [&](const ConvexMipRecourse& r) {
                   f.expr(r.v.expr());
                   for (const auto& g : r.g) f.expr(g.expr());
                   f.param_map(r.h);
                   f.num(static_cast<std::uint64_t>(r.m1));
                   f.bounds(r.integer_bounds);
                   for (const auto& iv : r.continuous_box) {
                     f.num(iv.lo);
                     f.num(iv.hi);
                   }
                   f.num(r.gamma_v.value_or(-1.0));
                   f.num(r.gamma_k.value_or(-1.0));
                 },
             },
             rec.problem());
  return f.value();
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ObjectiveEvaluator::ObjectiveEvaluator(const MeanRiskModel& model, std::size_t threads)
    : model_(model), threads_(std::max<std::size_t>(1, threads)) {}

double ObjectiveEvaluator::value(std::size_t decision, const DiscreteMeasure& nu) {
  if (decision >= model_.decisions.size()) throw Error(ErrorCode::OutOfRange, "decision index out of range");
  const auto key = std::make_pair(decision, nu.content_hash());
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const double v = objective(model_, model_.decisions[decision], nu);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(key, v);
  return v;
}

std::vector<double> ObjectiveEvaluator::values(const DiscreteMeasure& nu) {
  std::vector<double> out(model_.decisions.size());
  parallel_for(out.size(), threads_, [&](std::size_t i) { out[i] = value(i, nu); });
  return out;
}

double ObjectiveEvaluator::optimal_value(const DiscreteMeasure& nu) {
  const auto v = values(nu);
  return *std::min_element(v.begin(), v.end());
}

std::vector<std::size_t> ObjectiveEvaluator::optimal_set(const DiscreteMeasure& nu, double tol) {
  return indices_within(values(nu), tol);
}

std::size_t ObjectiveEvaluator::cache_size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

}  // namespace meanrisk
