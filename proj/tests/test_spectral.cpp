#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fkc/criteria.hpp"
#include "fkc/errors.hpp"
#include "fkc/spectral.hpp"

using namespace fkc;
using namespace fkc::spectral;

namespace {

// Cyclic Jacobi rotations: lowest eigenpair of a small symmetric matrix.
std::pair<double, Eigen::VectorXd> jacobi_lowest(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * a.squaredNorm()) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (a(i, i) < a(best, best)) best = i;
  return {a(best, best), v.col(best)};
}

DiscreteOperator small_op(double L = 10.0, int n = 101) {
  return assemble(kernels::stable_kernel(1, 1.0), kernels::logpower_potential(2.0), Grid1D(L, n));
}

}  // namespace

TEST(Grid, CellCentredNodes) {
  Grid1D g(1.0, 5);
  EXPECT_NEAR(g.spacing(), 0.4, 1e-15);
  EXPECT_NEAR(g.x(0), -0.8, 1e-15);
  EXPECT_NEAR(g.x(2), 0.0, 1e-15);
  EXPECT_THROW(Grid1D(1.0, 4), DomainError);
}

TEST(Assemble, SymmetricAndFormPositive) {
  const auto op = small_op();
  EXPECT_EQ((op.H - op.H.transpose()).cwiseAbs().maxCoeff(), 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.form_part());
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * es.eigenvalues().maxCoeff());
}

TEST(Assemble, PairWeightsAreCellMasses) {
  const auto k = kernels::stable_kernel(1, 0.7);
  const auto op = assemble(k, kernels::power_potential(2.0), Grid1D(5.0, 51));
  const double h = op.grid.spacing();
  for (int m : {2, 3, 10}) {
    // 2 h int_{(m-1/2)h}^{(m+1/2)h} rho by Simpson.
    const double a = (m - 0.5) * h, b = (m + 0.5) * h;
    const int n = 2000;
    double s = kernels::radial_density(k, a) + kernels::radial_density(k, b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * kernels::radial_density(k, a + (b - a) * i / n);
    EXPECT_NEAR(op.pair[m], 2.0 * h * s * (b - a) / (3.0 * n), 1e-10 * op.pair[m]);
  }
}

TEST(Assemble, QuadraticFormOfOneNodeIndicator) {
  const auto op = small_op();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(op.size());
  e(50) = 1.0;
  EXPECT_NEAR(op.quadratic_form(e), op.H(50, 50), 1e-14);
}

TEST(GroundState, AgreesWithDenseJacobi) {
  for (int n : {61, 151}) {
    const auto op = small_op(8.0, n);
    const auto gs = ground_state(op);
    const double h = op.grid.spacing();
    auto [lam, v] = jacobi_lowest(op.H / h);
    if (v.sum() < 0) v = -v;
    v /= std::sqrt(h);
    EXPECT_NEAR(gs.lambda1(), lam, 1e-8 * std::abs(lam));
    EXPECT_LT((gs.phi1() - v).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(GroundState, PositiveAndNormalized) {
  const auto op = small_op();
  const auto gs = ground_state(op);
  EXPECT_GT(gs.phi1().minCoeff(), 0.0);
  EXPECT_NEAR(gs.phi1().squaredNorm() * op.grid.spacing(), 1.0, 1e-12);
}

TEST(GroundState, GaugeShift) {
  const auto op = small_op(20.0, 401);
  const auto a = ground_state(op);
  const auto b = ground_state(shift_potential(op, 3.0));
  EXPECT_NEAR(b.lambda1() - a.lambda1(), 3.0, 1e-8);
  EXPECT_LT((a.phi1() - b.phi1()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Eigenpairs, LowestModeMatchesInverseIteration) {
  const auto op = small_op(10.0, 201);
  const auto all = eigenpairs(op, 5);
  const auto gs = ground_state(op);
  EXPECT_EQ(all.modes(), 5);
  EXPECT_NEAR(all.lambda1(), gs.lambda1(), 1e-9);
  EXPECT_LT((all.phi1() - gs.phi1()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE(std::is_sorted(all.lambda.data(), all.lambda.data() + all.modes()));
}

TEST(HeatKernel, SymmetryChapmanKolmogorovTrace) {
  const auto op = small_op(10.0, 201);
  const auto sol = eigenpairs(op);
  const double h = op.grid.spacing();
  const auto p1 = heat_kernel(sol, 0.5);
  const auto p2 = heat_kernel(sol, 1.0);
  EXPECT_EQ((p1.p - p1.p.transpose()).cwiseAbs().maxCoeff(), 0.0);
  const Eigen::MatrixXd ck = p1.p * p1.p * h;
  EXPECT_LE((ck - p2.p).cwiseAbs().maxCoeff(), p2.error() + 2.0 * p1.error() * p1.p.rowwise().sum().maxCoeff() * h);
  double trace_modes = 0.0;
  for (int k = 0; k < sol.modes(); ++k) trace_modes += std::exp(-sol.lambda(k));
  EXPECT_NEAR(p2.p.trace() * h, trace_modes, op.size() * p2.error() * h + 1e-12 * trace_modes);
}

TEST(HeatKernel, RefusesTooFewModes) {
  const auto op = small_op(10.0, 201);
  const auto sol = eigenpairs(op, 3);
  EXPECT_THROW(heat_kernel(sol, 0.01), DomainError);
}

TEST(HeatKernel, TruncatedHeatKernelWithinItsBound) {
  const auto op = small_op(10.0, 201);
  const auto all = eigenpairs(op);
  const auto few = eigenpairs(op, 64);
  const auto exact = heat_kernel(all, 1.0);
  const auto cut = heat_kernel(few, 1.0);
  EXPECT_LE((exact.p - cut.p).cwiseAbs().maxCoeff(), cut.error() + exact.error());
}

TEST(Envelope, NotAvailableForOtherPairs) {
  EXPECT_THROW(envelope(kernels::truncated_kernel(1, 1.0), kernels::power_potential(1.0), 3.0), NotAvailable);
}

TEST(RandomTestFunction, DeterministicAndSupported) {
  Grid1D g(20.0, 401);
  const auto a = random_test_function(g, 10.0, 5);
  const auto b = random_test_function(g, 10.0, 5);
  EXPECT_EQ(a, b);
  for (int i = 0; i < g.size(); ++i)
    if (std::abs(g.x(i)) > 10.0) EXPECT_EQ(a[i], 0.0);
  EXPECT_NE(a, random_test_function(g, 10.0, 6));
}

TEST(SuperPoincare, NoViolationsWithCriteriaAlpha) {
  const auto k = kernels::stable_kernel(1, 1.0);
  const auto pot = kernels::logpower_potential(2.0);
  const auto op = assemble(k, pot, Grid1D(20.0, 401));
  const auto w = criteria::phi_weight(k, pot);
  std::vector<double> weight(op.size());
  for (int i = 0; i < op.size(); ++i) weight[i] = std::exp(w.log_inf(std::log(std::abs(op.grid.x(i)))));
  const auto rep = super_poincare_check(op, weight, 2.0, 1.0, criteria::alpha_rs(k, w, 2.0, 1.0), 50, 3);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_GT(rep.max_ratio, 0.0);
}

TEST(WeightedForm, MatchesDirectDoubleSumAndGroundStateIdentity) {
  const auto op = small_op(10.0, 201);
  const auto gs = ground_state(op);
  const auto f = random_test_function(op.grid, 5.0, 9);
  const Eigen::VectorXd phi = gs.phi1();
  double direct = 0.0;
  for (int i = 0; i < op.size(); ++i)
    for (int j = i + 1; j < op.size(); ++j) direct += op.pair[j - i] * phi(i) * phi(j) * (f[i] - f[j]) * (f[i] - f[j]);
  const double wf = weighted_form(op, gs, f);
  EXPECT_NEAR(wf, direct, 1e-10 * direct);
  Eigen::VectorXd u(op.size());
  double mass = 0.0;
  for (int i = 0; i < op.size(); ++i) {
    u(i) = f[i] * phi(i);
    mass += u(i) * u(i) * op.grid.spacing();
  }
  EXPECT_NEAR(op.quadratic_form(u) - gs.lambda1() * mass, wf, 1e-6 * wf);
}

TEST(WeightedForm, RefusesNonStableKernels) {
  const auto op = assemble(kernels::tempered_kernel(1, 1.0, 1.0), kernels::power_potential(2.0), Grid1D(10.0, 101));
  const auto gs = ground_state(op);
  EXPECT_THROW(weighted_form(op, gs, std::vector<double>(op.size(), 1.0)), NotAvailable);
}

TEST(GnProbe, MassDecaysAndBoundGrows) {
  const auto op = small_op(60.0, 601);
  const auto gs = ground_state(op);
  const auto rep = gn_probe(op, gs, 2.0, {4.0, 8.0});
  ASSERT_EQ(rep.points.size(), 2u);
  // mu(g_n^2) only sees |x| > n, so it is bounded by the ground-state mass there.
  for (const auto& p : rep.points) {
    double outer = 0.0;
    for (int i = 0; i < op.size(); ++i)
      if (std::abs(op.grid.x(i)) > p.n) outer += gs.phi(i, 0) * gs.phi(i, 0) * op.grid.spacing();
    EXPECT_LE(p.mu_g2, outer * (1.0 + 1e-12));
  }
  EXPECT_GT(rep.points[0].mu_g2, rep.points[1].mu_g2);
  EXPECT_LT(rep.points[0].bound, rep.points[1].bound);
}

TEST(Lyapunov, ConstantsAreSubharmonicUpToKilling) {
  const auto op = assemble(kernels::tempered_kernel(1, 1.0, 1.0), kernels::constant_potential(0.0), Grid1D(10.0, 201));
  const auto lv = apply_generator(op, Eigen::VectorXd::Ones(op.size()));
  EXPECT_LE(lv.maxCoeff(), 1e-12);
  for (int i = 0; i < op.size(); ++i) EXPECT_NEAR(lv(i), -op.killing[i] / op.grid.spacing(), 1e-9);
}

TEST(Lyapunov, FiniteMaxAndNegativeTail) {
  const auto k = kernels::tempered_kernel(1, 1.0, 1.0);
  const auto pot = kernels::power_potential(2.0);
  const auto op = assemble(k, pot, Grid1D(40.0, 801));
  const auto a = lyapunov_check(op, k, pot, 10.0);
  EXPECT_TRUE(std::isfinite(a.max_ratio));
  EXPECT_TRUE(a.negative_tail);
  const auto b = lyapunov_check(op, k, pot, 20.0);
  EXPECT_TRUE(std::isfinite(b.max_ratio));
  EXPECT_TRUE(b.negative_tail);
  EXPECT_LT(b.negative_from, 0.5 * b.range);
}

TEST(Sobolev, HomogeneousAndRefinementStable) {
  const auto k = kernels::stable_kernel(1, 0.5);
  const auto a = assemble(k, kernels::constant_potential(0.0), Grid1D(20.0, 1001));
  const auto f = random_test_function(a.grid, 10.0, 4);
  std::vector<double> g(f);
  for (auto& x : g) x *= 3.5;
  EXPECT_NEAR(sobolev_ratio(a, 0.5, f), sobolev_ratio(a, 0.5, g), 1e-12);
  const auto b = assemble(k, kernels::constant_potential(0.0), Grid1D(20.0, 2001));
  const double ra = sobolev_check(a, 0.5, 100).max_ratio, rb = sobolev_check(b, 0.5, 100).max_ratio;
  EXPECT_NEAR(ra / rb, 1.0, 0.2);
  EXPECT_THROW(sobolev_check(a, 1.0, 5), AssumptionError);
}
