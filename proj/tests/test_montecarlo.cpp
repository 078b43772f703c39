#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "fkc/errors.hpp"
#include "fkc/montecarlo.hpp"

using namespace fkc;
using namespace fkc::montecarlo;

namespace {

PathConfig config(std::int64_t paths, double dt = 0.01, std::uint64_t seed = 1) {
  PathConfig c;
  c.paths = paths;
  c.dt = dt;
  c.seed = seed;
  return c;
}

double one(double) { return 1.0; }

}  // namespace

TEST(PathConfig, Validation) {
  PathConfig c;
  c.t = 1.0;
  c.dt = 0.3;
  EXPECT_THROW(c.validate(), DomainError);
  c.dt = 0.25;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.steps(), 4);
  c.eps = 2.0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Increment, CauchyQuartiles) {
  // Scale (2 dt c / c(1,1))^1 = 1 at dt = 1/2: quartiles are -1, 0, 1.
  const auto k = kernels::stable_kernel(1, 1.0);
  const int n = 100000;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    numeric::Rng r(path_seed(17, static_cast<std::uint64_t>(i)));
    v[i] = sample_increment(k, 0.5, r);
  }
  std::sort(v.begin(), v.end());
  // Quantile stderr sqrt(p(1-p)/n) / density.
  const double se_q = std::sqrt(0.1875 / n) * 2.0 * numeric::kPi;
  const double se_m = std::sqrt(0.25 / n) * numeric::kPi;
  EXPECT_NEAR(v[n / 4], -1.0, 3 * se_q);
  EXPECT_NEAR(v[n / 2], 0.0, 3 * se_m);
  EXPECT_NEAR(v[3 * n / 4], 1.0, 3 * se_q);
}

TEST(Increment, StableScalingKs) {
  for (double a : {0.5, 1.0, 1.5}) {
    const auto k = kernels::stable_kernel(1, a);
    EXPECT_TRUE(stable_scaling_test(k, 0.1, 1.0, 50000, 3).passed) << "alpha " << a;
  }
}

TEST(Increment, TemperedBigJumpRate) {
  // 2 sides * 2 (process Levy measure) * int_1^inf e^-u du.
  EXPECT_NEAR(big_jump_rate(kernels::tempered_kernel(1, 1.0, 1.0)), 4.0 / std::exp(1.0), 1e-12);
  EXPECT_DOUBLE_EQ(big_jump_rate(kernels::truncated_kernel(1, 1.0)), 0.0);
}

TEST(Increment, TemperedVarianceMatchesLevyMeasure) {
  // Var X_dt = dt * int z^2 nu(dz) = 4 dt int_0^inf u^2 rho.
  const auto k = kernels::tempered_kernel(1, 1.0, 1.0);
  const double dt = 0.05;
  const double second = 4.0 * kernels::truncated_second_moment(k, 60.0);
  const int n = 100000;
  double s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    numeric::Rng r(path_seed(23, static_cast<std::uint64_t>(i)));
    const double x = sample_increment(k, dt, r, 1e-3);
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double var = s2 / n;
  const double se = std::sqrt((s4 / n - var * var) / n);
  EXPECT_NEAR(var, dt * second, 4 * se);
}

TEST(Increment, RejectsCustomKernels) {
  kernels::RadialProfile prof;
  prof.radius = {0.1, 1.0, 10.0};
  prof.value = {100.0, 1.0, 1e-3};
  numeric::Rng r(1);
  EXPECT_THROW(sample_increment(kernels::custom_kernel(1, prof, 1.0, 1.0, 0.5, 2.0), 0.1, r), NotAvailable);
}

TEST(FeynmanKac, ZeroPotentialIsExact) {
  const auto e = feynman_kac(kernels::stable_kernel(1, 1.0), kernels::constant_potential(0.0), 0.0, 1.0, one,
                             config(20000));
  EXPECT_EQ(e.value, 1.0);
  EXPECT_EQ(e.stderr_, 0.0);
  EXPECT_FALSE(e.bias_notes.empty());
}

TEST(FeynmanKac, ConstantPotential) {
  const auto e = feynman_kac(kernels::stable_kernel(1, 1.0), kernels::constant_potential(0.7), 2.0, 1.0, one,
                             config(20000));
  EXPECT_NEAR(e.value, std::exp(-0.7), 3 * e.stderr_ + 1e-12);
}

TEST(FeynmanKac, WeightsInUnitInterval) {
  const auto e = feynman_kac(kernels::stable_kernel(1, 1.0), kernels::logpower_potential(2.0), 3.0, 1.0, one,
                             config(5000));
  EXPECT_GT(e.value, 0.0);
  EXPECT_LE(e.value, 1.0);
}

TEST(FeynmanKac, DeterministicAcrossThreadCounts) {
  const auto k = kernels::stable_kernel(1, 1.5);
  const auto pot = kernels::logpower_potential(1.0);
  setenv("FKC_THREADS", "1", 1);
  const auto a = feynman_kac(k, pot, 1.0, 1.0, one, config(3000, 0.01, 8));
  setenv("FKC_THREADS", "3", 1);
  const auto b = feynman_kac(k, pot, 1.0, 1.0, one, config(3000, 0.01, 8));
  unsetenv("FKC_THREADS");
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(FeynmanKac, TimeStepRichardson) {
  const auto k = kernels::stable_kernel(1, 1.0);
  const auto pot = kernels::logpower_potential(1.0);
  auto bump = [](double y) { return std::abs(y) < 3.0 ? std::exp(1.0 - 1.0 / (1.0 - y * y / 9.0)) : 0.0; };
  const auto a = feynman_kac(k, pot, 0.0, 1.0, bump, config(40000, 0.02, 5));
  const auto b = feynman_kac(k, pot, 0.0, 1.0, bump, config(40000, 0.01, 6));
  EXPECT_NEAR(a.value, b.value, 3 * std::hypot(a.stderr_, b.stderr_));
}

TEST(ExitTime, ZeroTimeSurvivesSurely) {
  const auto e = exit_time_prob(kernels::stable_kernel(1, 1.0), 0.0, 1.0, 0.0, config(100));
  EXPECT_EQ(e.value, 1.0);
}

TEST(ExitTime, ScalingAcrossRadii) {
  const auto k = kernels::stable_kernel(1, 1.0);
  for (double r : {0.5, 2.0}) EXPECT_TRUE(exit_scaling_test(k, r, 1.0, config(20000, 0.002, 3)).passed) << "r " << r;
}

TEST(ExitTime, MedianGivesHalfSurvival) {
  const auto k = kernels::stable_kernel(1, 1.0);
  const auto cfg = config(20000, 0.002, 4);
  const double tstar = median_exit_time(k, 1.0, 2.0, cfg);
  auto c2 = cfg;
  c2.seed = 99;
  const auto p = exit_time_prob(k, 0.0, 1.0, tstar, c2);
  EXPECT_NEAR(p.value, 0.5, 3 * p.stderr_ + 0.01);
}

TEST(ExitEvent, EmptyWindowIsZero) {
  const auto e = exit_event_prob(kernels::stable_kernel(1, 1.0), 5.0, 1.0, 0.2, 0.2, config(100));
  EXPECT_EQ(e.value, 0.0);
}

TEST(ExitEvent, ForcedJumpAgreesWithCrude) {
  const auto k = kernels::stable_kernel(1, 1.0);
  const auto cfg = config(40000, 0.002, 12);
  const auto crude = exit_event_prob(k, 4.0, 1.0, 0.0, 0.4, cfg, EventEstimator::crude);
  const auto forced = exit_event_prob(k, 4.0, 1.0, 0.0, 0.4, cfg, EventEstimator::forced_jump);
  EXPECT_GT(crude.value, 0.0);
  EXPECT_LT(forced.stderr_, crude.stderr_);
  EXPECT_NEAR(crude.value, forced.value, 3 * std::hypot(crude.stderr_, forced.stderr_));
}

TEST(ExitEvent, TemperedFarStartIsPositive) {
  const auto k = kernels::tempered_kernel(1, 1.0, 1.0);
  const auto e = exit_event_prob(k, 10.0, 1.0, 0.0, 0.2, config(20000, 0.01, 2));
  EXPECT_GT(e.value - 3 * e.stderr_, 0.0);
}

TEST(ExitEvent, QuotientBoundedBelow) {
  const auto k = kernels::stable_kernel(1, 1.0);
  const auto rep = exit_event_report(k, 5.0, 1.0, 0.38, config(20000, 0.002, 3));
  EXPECT_TRUE(rep.bounded_below);
  const double q0 = rep.windows[0].quotient, q1 = rep.windows[1].quotient;
  EXPECT_LT(std::max(q0, q1) / std::min(q0, q1), 2.0);
}

TEST(FreeBall, CauchyClosedFormAndFourierAgree) {
  const auto k = kernels::stable_kernel(1, 1.0);
  const auto near = kernels::stable_kernel(1, 1.0 - 1e-7);
  for (double x : {0.0, 3.0, 10.0, 100.0}) {
    const double a = free_ball_probability(k, x, 1.0);
    EXPECT_NEAR(free_ball_probability(near, x, 1.0), a, 1e-5 * a + 1e-12) << "x " << x;
  }
  // Scale 2: P(|X| < 1) = (2/pi) atan(1/2).
  EXPECT_NEAR(free_ball_probability(k, 0.0, 1.0), 2.0 / numeric::kPi * std::atan(0.5), 1e-15);
}

TEST(FreeBall, AgreesWithSimulation) {
  const auto k = kernels::stable_kernel(1, 1.5);
  const int n = 100000;
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    numeric::Rng r(path_seed(31, static_cast<std::uint64_t>(i)));
    inside += std::abs(3.0 + sample_increment(k, 1.0, r)) < 1.0;
  }
  const double p = free_ball_probability(k, 3.0, 1.0);
  EXPECT_NEAR(static_cast<double>(inside) / n, p, 4 * std::sqrt(p * (1 - p) / n));
}

TEST(RatioTest, DivergesForWeakPotential) {
  const auto rep = iu_ratio_test(kernels::stable_kernel(1, 1.0), kernels::logpower_potential(0.5), {10.0, 100.0},
                                 1.0, config(5000));
  EXPECT_TRUE(rep.diverging());
}

TEST(RatioTest, TimeOutsideRangeRejected) {
  EXPECT_THROW(iu_ratio_test(kernels::stable_kernel(1, 1.0), kernels::logpower_potential(0.5), {10.0}, 2.5,
                             config(10)),
               DomainError);
}
