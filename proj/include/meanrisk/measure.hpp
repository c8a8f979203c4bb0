#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace meanrisk {

using Point = std::vector<double>;

/// Points closer than this in every coordinate are the same atom.
inline constexpr double kMergeTolerance = 1e-12;

double euclidean_norm(std::span<const double> v);

struct Atom {
  Point point;
  double weight = 0.0;
  bool operator==(const Atom&) const = default;
};

/// Finitely supported Borel probability measure on R^d.
///
/// Only reachable through canonicalize(): atoms are sorted lexicographically,
/// coincident points are merged, zero-weight atoms dropped and the weights
/// renormalized. Instances are immutable.
class DiscreteMeasure {
 public:
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  /// FNV-1a over the bit patterns of the canonical content.
  std::uint64_t content_hash() const noexcept;

  bool operator==(const DiscreteMeasure&) const = default;

 private:
  DiscreteMeasure(std::size_t dim, std::vector<Atom> atoms)
      : dim_(dim), atoms_(std::move(atoms)) {}
  friend DiscreteMeasure canonicalize(std::vector<Atom> raw_atoms);

  std::size_t dim_ = 0;
  std::vector<Atom> atoms_;
};

DiscreteMeasure canonicalize(std::vector<Atom> raw_atoms);
DiscreteMeasure dirac(Point point);

struct ScalarAtom {
  double value = 0.0;
  double weight = 0.0;
};

/// Distribution on the real line with values sorted strictly ascending and
/// precomputed cumulative weights (the last one is exactly 1).
class ScalarDistribution {
 public:
  static ScalarDistribution from_atoms(std::vector<ScalarAtom> raw);
  /// Requires a one-dimensional measure.
  static ScalarDistribution from_measure(const DiscreteMeasure& measure);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> cumulative() const noexcept { return cumulative_; }

  double min() const { return values_.front(); }
  double max() const { return values_.back(); }
  double mean() const;

  /// Distribution of Y + t.
  ScalarDistribution shifted(double t) const;

  bool operator==(const ScalarDistribution&) const = default;

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Gauge function psi(z) = ||z||^q.
class GaugeSpec {
 public:
  explicit GaugeSpec(double exponent);
  double exponent() const noexcept { return exponent_; }
  double operator()(std::span<const double> z) const;

 private:
  double exponent_;
};

/// Left-continuous quantile inf{t : F(t) >= beta} for beta in (0,1).
double quantile(const ScalarDistribution& dist, double beta);

using RecourseFn = std::function<double(const Point& x, const Point& z)>;

/// Image of delta_x (x) nu under f.
ScalarDistribution pushforward(const DiscreteMeasure& nu, const Point& x,
                               const RecourseFn& f);

double moment(const DiscreteMeasure& mu, double q);

/// sum_i w_i ||z_i||^q 1{||z_i||^q > a}
double tail_functional(const DiscreteMeasure& mu, double q, double a);

/// (1-t) mu + t nu
DiscreteMeasure mix(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t);

// ---------------------------------------------------------------------------
// Sampling

/// SplitMix64. Cheap to construct, so every draw gets its own generator
/// seeded from (seed, draw index).
class CounterRng {
 public:
  using result_type = std::uint64_t;
  explicit CounterRng(std::uint64_t seed) noexcept : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

 private:
  std::uint64_t state_;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Uniform on [0,1) with 53 random bits.
double uniform01(CounterRng& rng) noexcept;
double standard_normal(CounterRng& rng) noexcept;

using Sampler = std::function<Point(CounterRng&)>;

Sampler constant_sampler(Point point);
Sampler uniform_box_sampler(Point lo, Point hi);
/// Draws atoms of `measure` with their weights (inverse-CDF on the atom order).
Sampler measure_sampler(const DiscreteMeasure& measure);

/// n i.i.d. draws with weight 1/n each. Draw i uses derive_seed(seed, i), so
/// the result does not depend on evaluation order.
DiscreteMeasure empirical(const Sampler& sampler, std::size_t n, std::uint64_t seed);

}  // namespace meanrisk
