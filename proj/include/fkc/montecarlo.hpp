#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fkc/kernels.hpp"
#include "fkc/numeric.hpp"
#include "fkc/potential.hpp"

namespace fkc::montecarlo {

using kernels::JumpKernelSpec;
using kernels::PotentialSpec;

/// Path simulation settings. The process generated by the form has Levy
/// measure 2 rho(|z|) dz.
struct PathConfig {
  double t = 1.0;
  double dt = 0.01;
  std::int64_t paths = 10000;
  std::uint64_t seed = 1;
  double eps = 1e-3;  // small-jump cutoff for tempered / truncated kernels
  int dim = 1;

  void validate() const;
  int steps() const;
};

struct FKEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
  std::vector<std::string> bias_notes;

  double lower(double z = 1.959963984540054) const { return value - z * stderr_; }
  double upper(double z = 1.959963984540054) const { return value + z * stderr_; }
};

/// Seed of path number `index` in a run seeded by `seed`.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

/// Scale sigma of the stable increment over dt: characteristic function
/// exp(-dt (2 cnorm / c(1, alpha)) |xi|^alpha) = exp(-|sigma xi|^alpha).
double stable_scale(const JumpKernelSpec& spec, double dt);

/// One increment of the process over dt. Stable: Chambers-Mallows-Stuck.
/// Tempered / truncated: Gaussian surrogate below eps, compound Poisson for
/// eps < |z| <= 1 and (tempered only) for |z| > 1.
double sample_increment(const JumpKernelSpec& spec, double dt, numeric::Rng& rng, double eps = 1e-3);

/// Intensity (per unit time) of jumps with |z| > 1 and eps < |z| <= 1.
double big_jump_rate(const JumpKernelSpec& spec);
double mid_jump_rate(const JumpKernelSpec& spec, double eps);
/// Variance per unit time of the Gaussian small-jump surrogate.
double small_jump_variance(const JumpKernelSpec& spec, double eps);

/// E^x[exp(-sum V(X_{k dt}) dt) f(X_t)], left-endpoint rule; cfg.t is ignored
/// in favour of the explicit t.
FKEstimate feynman_kac(const JumpKernelSpec& spec, const PotentialSpec& pot, double x, double t,
                       const std::function<double(double)>& f, const PathConfig& cfg);

/// P^x(tau_{B(x, r)} >= t), exit detected at step resolution.
FKEstimate exit_time_prob(const JumpKernelSpec& spec, double x, double r, double t, const PathConfig& cfg);

/// Exit times of B(x, r) (censored at t_max: such samples equal t_max).
std::vector<double> exit_time_samples(const JumpKernelSpec& spec, double x, double r, double t_max,
                                      const PathConfig& cfg);

/// Median of the exit time of B(0, r), the root of P(tau >= t) = 1/2.
double median_exit_time(const JumpKernelSpec& spec, double r, double t_max, const PathConfig& cfg);

enum class EventEstimator { crude, forced_jump };

/// P^x(X_{tau_B} in B(0, r0/2), t1 <= tau_B < t2) with B = B(x, r0).
/// The forced-jump estimator integrates the jump intensity into the target
/// along paths killed on leaving B (Levy system formula).
FKEstimate exit_event_prob(const JumpKernelSpec& spec, double x, double r0, double t1, double t2,
                           const PathConfig& cfg, EventEstimator method = EventEstimator::forced_jump);

struct ExitEventWindow {
  double t1 = 0.0, t2 = 0.0;
  FKEstimate estimate;
  double quotient = 0.0;  // estimate / ((t2 - t1) J*(x))
  double quotient_stderr = 0.0;
  bool too_rare = false;
};
struct ExitEventReport {
  std::vector<ExitEventWindow> windows;
  bool bounded_below = false;  // every quotient positive beyond 3 stderr
  bool consistent = false;     // quotients agree within 3 combined stderr
};
ExitEventReport exit_event_report(const JumpKernelSpec& spec, double x, double r0, double t0, const PathConfig& cfg,
                                  EventEstimator method = EventEstimator::forced_jump);

/// P^x(X_t in B(0, 1)) for the free process (no killing). Stable kernels use
/// the Fourier representation (closed form for alpha = 1).
double free_ball_probability(const JumpKernelSpec& spec, double x, double t);

struct RatioPoint {
  double x = 0.0;
  FKEstimate numerator;     // T_t^V 1_{B(x,1)}(x)
  double numerator_lcb = 0.0;
  double denominator = 0.0;  // bound on T_t^V 1_{B(0,1)}(x)
  double denominator_rel_stderr = 0.0;
  bool analytic_denominator = true;
  double ratio = 0.0;
  bool inconclusive = false;
};
struct RatioReport {
  std::vector<RatioPoint> points;
  double growth = 0.0;  // max over later points of ratio / first ratio
  bool monotone = false;
  bool diverging(double factor = 10.0) const { return monotone && growth > factor; }
  bool bounded(double factor = 10.0) const { return growth <= factor; }
};
/// Ratio T_t^V 1_{B(x,1)}(x) / T_t^V 1_{B(0,1)}(x) along |x| growing: the
/// numerator is a Monte Carlo lower confidence bound, the denominator the
/// free-process probability (an upper bound since V >= 0). Non-stable
/// kernels get a forced-first-jump estimate of that probability instead.
RatioReport iu_ratio_test(const JumpKernelSpec& spec, const PotentialSpec& pot, const std::vector<double>& xs,
                          double t, const PathConfig& cfg);

struct ScalingTest {
  double statistic = 0.0;
  double p_value = 1.0;
  bool passed = true;
};
/// KS test of X_{dt2} against (dt2/dt1)^{1/alpha} X_{dt1}.
ScalingTest stable_scaling_test(const JumpKernelSpec& spec, double dt1, double dt2, std::int64_t n,
                                std::uint64_t seed, double level = 0.01);
/// KS test of tau_{B(0,r)} / r^alpha against tau_{B(0,1)}, grids scaled alike.
ScalingTest exit_scaling_test(const JumpKernelSpec& spec, double r, double t_max, const PathConfig& cfg,
                              double level = 0.01);

}  // namespace fkc::montecarlo
