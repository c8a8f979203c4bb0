#include "meanrisk/measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "meanrisk/error.hpp"

namespace meanrisk {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool same_point(const Point& a, const Point& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > kMergeTolerance) return false;
  }
  return true;
}

// Renormalize unless the weights already sum to one up to rounding. Skipping
// the division in that case makes canonicalization idempotent bit-for-bit.
template <typename Weights>
void normalize(Weights& weights, double total) {
  const double slack = 4.0 * static_cast<double>(weights.size() + 1) * kEps;
  if (std::abs(total - 1.0) <= slack) return;
  for (auto& w : weights) w /= total;
}

void check_weight(double w) {
  if (std::isnan(w) || !std::isfinite(w)) {
    throw Error(ErrorCode::InvalidArgument, "non-finite weight");
  }
  if (w < 0.0) {
    throw Error(ErrorCode::NegativeWeight, "weight " + std::to_string(w) + " < 0");
  }
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

double euclidean_norm(std::span<const double> v) {
  if (v.size() == 1) return std::abs(v[0]);
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure canonicalize(std::vector<Atom> raw_atoms) {
  if (raw_atoms.empty()) throw Error(ErrorCode::EmptySupport, "measure has no atoms");
  const std::size_t dim = raw_atoms.front().point.size();
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "points must have dimension >= 1");
  for (const auto& atom : raw_atoms) {
    if (atom.point.size() != dim) {
      throw Error(ErrorCode::DimMismatch, "atoms of differing dimension");
    }
    for (double c : atom.point) {
      if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite coordinate");
    }
    check_weight(atom.weight);
  }

  std::sort(raw_atoms.begin(), raw_atoms.end(), [](const Atom& a, const Atom& b) {
    if (a.point != b.point) return a.point < b.point;
    return a.weight < b.weight;
  });

  std::vector<Atom> merged;
  merged.reserve(raw_atoms.size());
  for (auto& atom : raw_atoms) {
    bool absorbed = false;
    // Sorted by first coordinate, so only a short tail can be within tolerance.
    for (std::size_t k = merged.size(); k-- > 0;) {
      if (merged[k].point[0] < atom.point[0] - kMergeTolerance) break;
      if (same_point(merged[k].point, atom.point)) {
        merged[k].weight += atom.weight;
        absorbed = true;
        break;
      }
    }
    if (!absorbed) merged.push_back(std::move(atom));
  }
  std::erase_if(merged, [](const Atom& a) { return a.weight == 0.0; });
  if (merged.empty()) throw Error(ErrorCode::EmptySupport, "total weight is zero");

  double total = 0.0;
  for (const auto& a : merged) total += a.weight;
  std::vector<double> weights;
  weights.reserve(merged.size());
  for (const auto& a : merged) weights.push_back(a.weight);
  normalize(weights, total);
  for (std::size_t i = 0; i < merged.size(); ++i) merged[i].weight = weights[i];
  return DiscreteMeasure(dim, std::move(merged));
}

DiscreteMeasure dirac(Point point) {
  return canonicalize({Atom{std::move(point), 1.0}});
}

std::uint64_t DiscreteMeasure::content_hash() const noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xFFu;
      h *= 0x100000001B3ULL;
    }
  };
  feed(dim_);
  for (const auto& atom : atoms_) {
    for (double c : atom.point) feed(std::bit_cast<std::uint64_t>(c));
    feed(std::bit_cast<std::uint64_t>(atom.weight));
  }
  return h;
}

// ---------------------------------------------------------------------------
// ScalarDistribution

ScalarDistribution ScalarDistribution::from_atoms(std::vector<ScalarAtom> raw) {
  if (raw.empty()) throw Error(ErrorCode::EmptySupport, "distribution has no atoms");
  for (const auto& a : raw) {
    if (!std::isfinite(a.value)) throw Error(ErrorCode::InvalidArgument, "non-finite value");
    check_weight(a.weight);
  }
  std::sort(raw.begin(), raw.end(), [](const ScalarAtom& a, const ScalarAtom& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.weight < b.weight;
  });

  ScalarDistribution d;
  for (const auto& a : raw) {
    if (!d.values_.empty() && a.value - d.values_.back() <= kMergeTolerance) {
      d.weights_.back() += a.weight;
    } else {
      d.values_.push_back(a.value);
      d.weights_.push_back(a.weight);
    }
  }
  for (std::size_t i = d.values_.size(); i-- > 0;) {
    if (d.weights_[i] == 0.0) {
      d.values_.erase(d.values_.begin() + static_cast<std::ptrdiff_t>(i));
      d.weights_.erase(d.weights_.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  if (d.values_.empty()) throw Error(ErrorCode::EmptySupport, "total weight is zero");

  double total = 0.0;
  for (double w : d.weights_) total += w;
  normalize(d.weights_, total);

  d.cumulative_.resize(d.weights_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d.weights_.size(); ++i) {
    acc += d.weights_[i];
    d.cumulative_[i] = acc;
  }
  d.cumulative_.back() = 1.0;
  return d;
}

ScalarDistribution ScalarDistribution::from_measure(const DiscreteMeasure& measure) {
  if (measure.dim() != 1) {
    throw Error(ErrorCode::DimMismatch, "scalar distribution needs a one-dimensional measure");
  }
  std::vector<ScalarAtom> raw;
  raw.reserve(measure.size());
  for (const auto& a : measure.atoms()) raw.push_back({a.point[0], a.weight});
  return from_atoms(std::move(raw));
}

double ScalarDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) m += weights_[i] * values_[i];
  return m;
}

ScalarDistribution ScalarDistribution::shifted(double t) const {
  std::vector<ScalarAtom> raw;
  raw.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) raw.push_back({values_[i] + t, weights_[i]});
  return from_atoms(std::move(raw));
}

GaugeSpec::GaugeSpec(double exponent) : exponent_(exponent) {
  if (!(exponent > 0.0) || !std::isfinite(exponent)) {
    throw Error(ErrorCode::InvalidArgument, "gauge exponent must be positive");
  }
}

double GaugeSpec::operator()(std::span<const double> z) const {
  const double r = euclidean_norm(z);
  if (exponent_ == 1.0) return r;
  if (exponent_ == 2.0) return r * r;
  return std::pow(r, exponent_);
}

// ---------------------------------------------------------------------------
// Operations

double quantile(const ScalarDistribution& dist, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "quantile level must lie in (0,1)");
  }
  const auto cum = dist.cumulative();
  const auto it = std::lower_bound(cum.begin(), cum.end(), beta);
  return dist.values()[static_cast<std::size_t>(it - cum.begin())];
}

ScalarDistribution pushforward(const DiscreteMeasure& nu, const Point& x,
                               const RecourseFn& f) {
  std::vector<ScalarAtom> image;
  image.reserve(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    try {
      image.push_back({f(x, nu[i].point), nu[i].weight});
    } catch (const Error& e) {
      throw e.with_context("(atom " + std::to_string(i) + ")");
    }
  }
  return ScalarDistribution::from_atoms(std::move(image));
}

double moment(const DiscreteMeasure& mu, double q) {
  const GaugeSpec psi(q);
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.weight * psi(a.point);
  return s;
}

double tail_functional(const DiscreteMeasure& mu, double q, double a) {
  if (!(a >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be nonnegative");
  const GaugeSpec psi(q);
  double s = 0.0;
  for (const auto& atom : mu.atoms()) {
    const double g = psi(atom.point);
    if (g > a) s += atom.weight * g;
  }
  return s;
}

DiscreteMeasure mix(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t) {
  if (mu.dim() != nu.dim()) throw Error(ErrorCode::DimMismatch, "mix of measures on different spaces");
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::OutOfRange, "mixing weight must lie in [0,1]");
  if (t == 0.0) return mu;
  if (t == 1.0) return nu;
  std::vector<Atom> raw;
  raw.reserve(mu.size() + nu.size());
  for (const auto& a : mu.atoms()) raw.push_back({a.point, (1.0 - t) * a.weight});
  for (const auto& a : nu.atoms()) raw.push_back({a.point, t * a.weight});
  return canonicalize(std::move(raw));
}

// ---------------------------------------------------------------------------
// Sampling

CounterRng::result_type CounterRng::operator()() noexcept {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ (index * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
}

double uniform01(CounterRng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(CounterRng& rng) noexcept {
  const double u1 = 1.0 - uniform01(rng);  // (0,1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Sampler constant_sampler(Point point) {
  return [point = std::move(point)](CounterRng&) { return point; };
}

Sampler uniform_box_sampler(Point lo, Point hi) {
  if (lo.size() != hi.size()) throw Error(ErrorCode::DimMismatch, "box bounds differ in dimension");
  return [lo = std::move(lo), hi = std::move(hi)](CounterRng& rng) {
    Point p(lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) p[k] = lo[k] + (hi[k] - lo[k]) * uniform01(rng);
    return p;
  };
}

Sampler measure_sampler(const DiscreteMeasure& measure) {
  std::vector<double> cum(measure.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    acc += measure[i].weight;
    cum[i] = acc;
  }
  cum.back() = 1.0;
  return [measure, cum = std::move(cum)](CounterRng& rng) {
    const double u = uniform01(rng);
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    return measure[static_cast<std::size_t>(it - cum.begin())].point;
  };
}

DiscreteMeasure empirical(const Sampler& sampler, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be positive");
  const double w = 1.0 / static_cast<double>(n);
  std::vector<Atom> raw;
  raw.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(derive_seed(seed, i));
    raw.push_back({sampler(rng), w});
  }
  return canonicalize(std::move(raw));
}

}  // namespace meanrisk
