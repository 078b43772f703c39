#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fkc/criteria.hpp"
#include "fkc/errors.hpp"
#include "fkc/numeric.hpp"

using namespace fkc;
using namespace fkc::criteria;
using kernels::PotentialFamily;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Direct scan of the defining infimum over 1e5 log-spaced jump scales t <= r.
double brute_log_alpha(const kernels::JumpKernelSpec& spec, const Weight& w, double r, double s) {
  const int n = 100000;
  const double hi = std::log(r), lo = hi - 60.0;
  double best = kInf;
  for (int k = 0; k < n; ++k) {
    const double lt = lo + (hi - lo) * k / (n - 1);
    const double t = std::exp(lt);
    const double ball = 2.0 * t;
    const double rho = kernels::radial_density(spec, t);
    if (2.0 / (rho * ball) > s) continue;
    best = std::min(best, std::log(2.0 / ball) - 2.0 * w.log_inf(std::log(r + t)));
  }
  return best;
}

RateFunction exp_rate(double p) {
  // beta(s) = exp(s^-p), log beta at log s is exp(-p log s).
  return RateFunction("exp(s^-p)", Monotonicity::non_increasing, [p](double ls) { return std::exp(-p * ls); });
}

}  // namespace

TEST(AlphaRs, ConstantWeightClosedForm) {
  // Stable, d = 1: feasibility t^alpha / c <= s, objective 1 / (t w^2)
  // decreasing in t, so t* = min(r, (c s)^(1/alpha)).
  const auto spec = kernels::stable_kernel(1, 1.0);
  const double c = spec.cnorm, w = 0.3;
  for (double r : {0.5, 2.0, 40.0})
    for (double s : {1e-3, 0.1, 10.0}) {
      const double t = std::min(r, c * s);
      EXPECT_NEAR(log_alpha_rs(spec, constant_weight(w), std::log(r), s), std::log(1.0 / (t * w * w)), 1e-9)
          << "r " << r << " s " << s;
    }
}

TEST(AlphaRs, MatchesBruteForceScan) {
  struct Case {
    kernels::JumpKernelSpec k;
    kernels::PotentialSpec p;
  };
  const Case cases[] = {{kernels::stable_kernel(1, 1.0), kernels::logpower_potential(2.0)},
                        {kernels::stable_kernel(1, 0.5), kernels::power_potential(1.0)},
                        {kernels::tempered_kernel(1, 1.0, 0.5), kernels::power_potential(2.0)}};
  for (const auto& cs : cases) {
    const auto w = phi_weight(cs.k, cs.p);
    for (double r : {1.0, 4.0, 1e3})
      for (double s : {1e-4, 0.1, 10.0}) {
        const double ref = brute_log_alpha(cs.k, w, r, s);
        const double got = log_alpha_rs(cs.k, w, std::log(r), s);
        EXPECT_LE(got, ref + 1e-9);
        EXPECT_NEAR(got, ref, 5e-3 * std::max(1.0, std::abs(ref))) << "r " << r << " s " << s;
      }
  }
}

TEST(AlphaRs, DecreasesWithBudgetAndGrowsWithRadius) {
  const auto spec = kernels::stable_kernel(1, 1.0);
  const auto w = phi_weight(spec, kernels::logpower_potential(2.0));
  EXPECT_GE(alpha_rs(spec, w, 2.0, 0.01), alpha_rs(spec, w, 2.0, 1.0));
  EXPECT_LE(alpha_rs(spec, w, 2.0, 1.0), alpha_rs(spec, w, 20.0, 1.0));
}

TEST(GeneralizedInverse, MatchesGridScan) {
  // Non-strict f with plateaus: f(x) = floor(x) + x^2 / 100 on [0, 10].
  RateFunction f("steps", Monotonicity::non_decreasing, [](double lx) {
    const double x = std::exp(lx);
    return std::log(std::floor(x) + x * x / 100.0);
  });
  const int n = 1000000;
  for (double r : {0.005, 0.5, 1.0, 1.2, 3.7, 8.95}) {
    double scan = kInf;
    for (int k = 0; k <= n; ++k) {
      const double x = 10.0 * k / n;
      if (std::floor(x) + x * x / 100.0 >= r) {
        scan = x;
        break;
      }
    }
    EXPECT_NEAR(gen_inverse(f, r), scan, 2e-5) << "r " << r;
  }
}

TEST(GeneralizedInverse, ClosedFormIsUsed) {
  RateFunction f("x^2", Monotonicity::non_decreasing, [](double lx) { return 2.0 * lx; });
  f.with_inverse([](double lr) { return 0.5 * lr; });
  EXPECT_NEAR(gen_inverse(f, 16.0), 4.0, 1e-15);
}

TEST(BigPhi, PowerAndLogPower) {
  EXPECT_NEAR(big_phi(kernels::power_potential(2.0))(3.0), 9.0, 1e-9);
  EXPECT_NEAR(big_phi(kernels::logpower_potential(1.0))(std::exp(2.0) - 1.0), 2.0, 1e-9);
  const auto inv = gen_inverse(big_phi(kernels::power_potential(2.0)), 25.0);
  EXPECT_NEAR(inv, 5.0, 1e-8);
}

TEST(ExponentFit, SyntheticRates) {
  for (double p : {0.5, 1.0, 2.0}) EXPECT_NEAR(asymptotic_exponent(exp_rate(p)).p, p, 1e-3);
}

TEST(ContractivityTests, SyntheticDichotomy) {
  TestOptions opt;
  opt.delta_scan = false;
  auto v = contractivity_tests(exp_rate(0.5), opt);
  EXPECT_TRUE(v.iu && v.is && v.ih);
  v = contractivity_tests(exp_rate(1.0), opt);
  EXPECT_TRUE(!v.iu && !v.is && v.ih);
  v = contractivity_tests(exp_rate(2.0), opt);
  EXPECT_TRUE(!v.iu && !v.is && !v.ih);
}

TEST(ContractivityTests, PolynomialRateIsUltracontractive) {
  RateFunction f("1/s", Monotonicity::non_increasing, [](double ls) { return -ls; });
  TestOptions opt;
  opt.delta_scan = false;
  const auto v = contractivity_tests(f, opt);
  EXPECT_TRUE(v.iu && v.is && v.ih);
}

TEST(BetaRate, StableLogPowerExponent) {
  for (double lambda : {0.75, 1.0, 2.0}) {
    const auto b = beta_rate(kernels::stable_kernel(1, 1.0), kernels::logpower_potential(lambda));
    ASSERT_TRUE(b.exponent().has_value());
    EXPECT_NEAR(b.exponent()->p, 1.0 / lambda, 0.05) << "lambda " << lambda;
  }
}

TEST(BetaRate, TemperedPowerExponent) {
  const auto b = beta_rate(kernels::tempered_kernel(1, 1.0, 0.5), kernels::power_potential(1.0));
  EXPECT_NEAR(b.exponent()->p, 0.5, 0.05);
}

TEST(Classify, StableLogPowerFlags) {
  auto v = classify(kernels::stable_kernel(1, 1.0), kernels::logpower_potential(2.0));
  EXPECT_TRUE(v.iu && v.is && v.ih);
  EXPECT_EQ(v.route, "beta");
  EXPECT_TRUE(v.delta_stable);
  v = classify(kernels::stable_kernel(1, 1.0), kernels::logpower_potential(0.5));
  EXPECT_TRUE(!v.iu && !v.is && !v.ih);
}

TEST(Classify, RejectsTruncatedKernel) {
  try {
    classify(kernels::truncated_kernel(1, 1.0), kernels::logpower_potential(2.0));
    FAIL() << "expected an assumption error";
  } catch (const AssumptionError& e) {
    EXPECT_EQ(e.condition(), "(1.2)");
  }
}

TEST(Irregular, DimensionConditionAndLevelAssumption) {
  const auto set = kernels::envelope_set(1, 1.0, 2.0);
  const auto pot = kernels::irregular_potential(PotentialFamily::logpower, 2.0, set, 1.0, 1.0);
  try {
    irregular_rates(kernels::stable_kernel(1, 1.0), pot);
    FAIL() << "expected d > alpha1 failure";
  } catch (const AssumptionError& e) {
    EXPECT_EQ(e.condition(), "d>alpha1");
  }
  const auto high = kernels::irregular_potential(PotentialFamily::logpower, 2.0, set, 2.0, 1.0);
  try {
    irregular_rates(kernels::stable_kernel(1, 0.5), high);
    FAIL() << "expected (A) failure";
  } catch (const AssumptionError& e) {
    EXPECT_EQ(e.condition(), "(A)");
  }
}

TEST(Irregular, ThetaDichotomy) {
  const auto spec = kernels::stable_kernel(1, 0.5);
  auto flags = [&](double theta) {
    const auto pot =
        kernels::irregular_potential(PotentialFamily::logpower, 2.0, kernels::envelope_set(1, 1.0, theta), 1.0, 1.0);
    return classify(spec, pot);
  };
  auto below = flags(1.5), at = flags(2.0), above = flags(2.5);
  EXPECT_EQ(at.route, "beta_hat");
  EXPECT_TRUE(!below.iu && !below.ih);
  EXPECT_TRUE(!at.iu && at.ih);
  EXPECT_TRUE(above.iu && above.ih);
}

TEST(Irregular, PsiCombinesPhiAndTheta) {
  const auto spec = kernels::stable_kernel(1, 0.5);
  const auto pot =
      kernels::irregular_potential(PotentialFamily::logpower, 2.0, kernels::envelope_set(1, 1.0, 2.0), 1.0, 1.0);
  const auto r = irregular_rates(spec, pot);
  for (double R : {10.0, 1e4}) {
    const double phi = r.phi_k(R), theta = r.theta_k(R);
    const double psi = 1.0 / (1.0 / phi + std::pow(theta, 0.5));
    EXPECT_NEAR(r.psi_k(R), psi, 1e-9 * psi) << "R " << R;
  }
}
