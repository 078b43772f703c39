#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace fkc::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

/// log(e^a + e^b) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// log(1 + e^x).
inline double softplus(double x) {
  if (x > 35.0) return x + std::exp(-x);
  return std::log1p(std::exp(x));
}

/// log(e^y - 1) for y > 0.
inline double log_expm1(double y) {
  if (y > 35.0) return y + std::log1p(-std::exp(-y));
  return std::log(std::expm1(y));
}

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);
/// log |B(0, e^log_t)| in R^d.
double log_ball_volume(int d, double log_t);
/// Surface area of the unit sphere S^{d-1}.
double sphere_area(int d);

/// Pairwise (cascade) summation; result independent of scheduling.
double pairwise_sum(std::span<const double> v);

/// Worker count: FKC_THREADS if set, else hardware concurrency (at least 1).
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index is
/// visited exactly once; the body must only write to index-owned state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Ordinary least squares slope/intercept of y on x with coefficient of
/// determination.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Geometric grid of `count` points from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

/// SplitMix64 step, used to derive independent per-path seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Portable random source: the raw std::mt19937_64 stream is fully specified
/// by the standard, and the transforms below are our own, so draws do not
/// depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  /// Uniform on (0, 1).
  double uniform();
  double normal();
  double exponential();
  /// Poisson by inversion (sequential search), fine for moderate means.
  std::uint64_t poisson(double mean);
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov test. Inputs need not be sorted.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace fkc::numeric
