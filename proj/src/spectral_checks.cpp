#include <algorithm>
#include <cmath>
#include <limits>

#include "fkc/errors.hpp"
#include "fkc/numeric.hpp"
#include "fkc/spectral.hpp"

namespace fkc::spectral {

using kernels::KernelFamily;
using kernels::PotentialFamily;

double envelope(const JumpKernelSpec& spec, const PotentialSpec& pot, double x) {
  const double r = std::abs(x);
  if (spec.family == KernelFamily::stable && pot.family == PotentialFamily::logpower)
    return std::pow(1.0 + r, -1.0 - spec.alpha) * std::pow(std::log1p(r), -pot.lambda);
  if (spec.family == KernelFamily::tempered && pot.family == PotentialFamily::power)
    return std::pow(1.0 + r, -pot.lambda) * std::exp(-std::pow(r, spec.gamma));
  throw NotAvailable("no closed-form ground-state envelope for this kernel/potential pair");
}

BoundReport groundstate_bounds_check(const SpectralSolution& sol, const JumpKernelSpec& spec, const PotentialSpec& pot,
                                     std::optional<double> r_lo, std::optional<double> r_hi) {
  const auto& g = sol.grid;
  const double half = 0.5 * g.half_width();
  const Eigen::VectorXd phi1 = sol.phi1();
  BoundReport rep;
  rep.r_lo = r_lo.value_or(2.0);
  rep.r_hi = r_hi.value_or(half);
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    if (std::abs(x) > half) continue;
    const double q = kernels::phi_lower(spec, pot, x).value / phi1(i);
    if (q > rep.c0) {
      rep.c0 = q;
      rep.c0_at = x;
    }
  }
  bool first = true;
  try {
    for (int i = 0; i < g.size(); ++i) {
      const double x = std::abs(g.x(i));
      if (x < rep.r_lo || x > rep.r_hi) continue;
      const double q = phi1(i) / envelope(spec, pot, x);
      rep.envelope_min = first ? q : std::min(rep.envelope_min, q);
      rep.envelope_max = first ? q : std::max(rep.envelope_max, q);
      first = false;
    }
    rep.has_envelope = !first;
  } catch (const NotAvailable&) {
    rep.has_envelope = false;
  }
  return rep;
}

std::vector<double> random_test_function(const Grid1D& grid, double support, std::uint64_t seed) {
  numeric::Rng rng(seed);
  struct Bump {
    double centre, width, amp;
  };
  std::vector<Bump> bumps;
  const int m = static_cast<int>(std::floor(support));
  for (int c = -m; c <= m; ++c) {
    const double amp = rng.normal();
    const double room = support - std::abs(static_cast<double>(c));
    const double width = std::min(0.5 + 1.5 * rng.uniform(), room);
    if (width > 0.05) bumps.push_back({static_cast<double>(c), width, amp});
  }
  std::vector<double> f(grid.size(), 0.0);
  for (int i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    for (const Bump& b : bumps) {
      const double u = (x - b.centre) / b.width;
      if (std::abs(u) < 1.0) f[i] += b.amp * std::exp(1.0 - 1.0 / (1.0 - u * u));
    }
  }
  return f;
}

InequalityReport super_poincare_check(const DiscreteOperator& op, const std::vector<double>& weight, double r,
                                      double s, double alpha_value, int trials, std::uint64_t seed) {
  const auto& g = op.grid;
  const double half = 0.5 * g.half_width();
  if (r >= half) throw DomainError("super Poincare check: r must stay below L/2");
  if (static_cast<int>(weight.size()) != g.size()) throw DomainError("super Poincare check: weight size mismatch");
  const double h = g.spacing();
  InequalityReport rep;
  rep.trials = trials;
  std::vector<double> ratios(trials);
  numeric::parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const auto f = random_test_function(g, half, numeric::splitmix64(seed + t));
    const Eigen::Map<const Eigen::VectorXd> fv(f.data(), g.size());
    double lhs = 0.0, mass = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      if (std::abs(g.x(i)) <= r) lhs += f[i] * f[i] * h;
      mass += std::abs(f[i]) * weight[i] * h;
    }
    const double rhs = s * op.quadratic_form(fv) + alpha_value * mass * mass;
    ratios[t] = lhs / rhs;
  });
  for (double q : ratios) {
    rep.max_ratio = std::max(rep.max_ratio, q);
    if (q > 1.0 + 1e-12) ++rep.violations;
  }
  return rep;
}

double weighted_form(const DiscreteOperator& op, const SpectralSolution& sol, const std::vector<double>& f) {
  if (op.kernel.family != KernelFamily::stable)
    throw NotAvailable("weighted form: the ground-state identity is only established for the stable kernel");
  const int n = op.size();
  if (static_cast<int>(f.size()) != n) throw DomainError("weighted form: function size mismatch");
  const Eigen::VectorXd phi = sol.phi1();
  std::vector<double> partial(n, 0.0);
  numeric::parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    double acc = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = f[i] - f[j];
      acc += op.pair[j - i] * phi(i) * phi(j) * d * d;
    }
    partial[i] = acc;
  });
  return numeric::pairwise_sum(partial);
}

GnReport gn_probe(const DiscreteOperator& op, const SpectralSolution& sol, double lambda,
                  const std::vector<double>& n_values) {
  const auto& g = op.grid;
  const double half = 0.5 * g.half_width();
  const double h = g.spacing();
  const Eigen::VectorXd phi = sol.phi1();
  GnReport rep;
  for (double n : n_values) {
    if (!(n > 0.0) || 2.0 * n > half) throw DomainError("g_n probe: need 0 < 2n <= L/2");
    std::vector<double> gn(g.size());
    GnPoint pt;
    pt.n = n;
    double mu_abs = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      const double x = std::abs(g.x(i));
      gn[i] = x <= n ? 0.0 : (x >= 2.0 * n ? 1.0 : (x - n) / n);
      pt.mu_g2 += gn[i] * gn[i] * phi(i) * phi(i) * h;
      mu_abs += std::abs(gn[i]) * phi(i) * phi(i) * h;
    }
    pt.mu_g_sq = mu_abs * mu_abs;
    pt.form = weighted_form(op, sol, gn);
    pt.used = pt.mu_g_sq > 1e-250;
    rep.points.push_back(pt);
  }
  double c_r = numeric::kInf;
  for (const auto& p : rep.points)
    if (p.used && p.form > 0.0) c_r = std::min(c_r, p.mu_g2 * std::pow(std::log1p(p.n), lambda) / p.form);
  rep.c_r = 0.5 * c_r;
  std::vector<double> lx, ly, lm;
  for (auto& p : rep.points) {
    p.r_n = rep.c_r / std::pow(std::log1p(p.n), lambda);
    p.bound = (p.mu_g2 - p.r_n * p.form) / p.mu_g_sq;
    if (!p.used || !(p.bound > 0.0)) {
      p.used = false;
      continue;
    }
    const double lg = 2.0 * lambda * std::log(std::log1p(p.n));
    lx.push_back(std::log(p.n));
    ly.push_back(std::log(p.bound) - lg);
    lm.push_back(std::log(p.mu_g2) + lg);
  }
  if (lx.size() < 2) throw SolverError("g_n probe: fewer than two usable points");
  rep.slope = numeric::linear_fit(lx, ly).slope;
  rep.mu_slope = numeric::linear_fit(lx, lm).slope;
  return rep;
}

Eigen::VectorXd apply_generator(const DiscreteOperator& op, const Eigen::VectorXd& psi) {
  return -(op.H * psi) / op.grid.spacing();
}

LyapunovReport lyapunov_check(const DiscreteOperator& op, const JumpKernelSpec& spec, const PotentialSpec& pot,
                              double c0) {
  if (spec.family != KernelFamily::tempered || pot.family != PotentialFamily::power)
    throw NotAvailable("Lyapunov check: defined for the tempered kernel with a power potential");
  if (!(c0 > 0.0)) throw DomainError("Lyapunov check: C0 must be positive");
  const auto& g = op.grid;
  const int n = g.size();
  Eigen::VectorXd psi(n);
  for (int i = 0; i < n; ++i) {
    const double q = 1.0 + g.x(i) * g.x(i);
    psi(i) = std::exp(-std::pow(q, 0.5 * spec.gamma)) / (c0 + std::pow(q, 0.5 * pot.lambda));
  }
  const Eigen::VectorXd lv = apply_generator(op, psi);
  LyapunovReport rep;
  rep.range = 0.5 * g.half_width();
  // Keep away from underflow of psi.
  for (int i = 0; i < n; ++i)
    if (std::abs(g.x(i)) <= rep.range && !(psi(i) > 1e-280)) rep.range = std::min(rep.range, std::abs(g.x(i)) - g.spacing());
  rep.ratio.assign(n, std::numeric_limits<double>::quiet_NaN());
  rep.max_ratio = -numeric::kInf;
  for (int i = 0; i < n; ++i) {
    if (std::abs(g.x(i)) > rep.range) continue;
    rep.ratio[i] = lv(i) / psi(i);
    rep.max_ratio = std::max(rep.max_ratio, rep.ratio[i]);
  }
  // Walk inwards from the edge of the range while L_V psi stays non-positive.
  const int mid = (n - 1) / 2;
  double from = numeric::kInf;
  for (int k = mid; k >= 0; --k) {
    const int a = mid - k, b = mid + k;
    if (std::abs(g.x(b)) > rep.range) continue;
    if (lv(a) > 0.0 || lv(b) > 0.0) break;
    from = std::abs(g.x(b));
  }
  rep.negative_tail = std::isfinite(from) && from < rep.range;
  rep.negative_from = from;
  return rep;
}

double sobolev_ratio(const DiscreteOperator& op, double alpha1, const std::vector<double>& f) {
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw AssumptionError("d>alpha1", "Sobolev check in d = 1 needs alpha1 < 1");
  const double h = op.grid.spacing();
  const double q = 2.0 / (1.0 - alpha1);
  const Eigen::Map<const Eigen::VectorXd> fv(f.data(), op.size());
  double lq = 0.0, l2 = 0.0, vpart = 0.0;
  for (int i = 0; i < op.size(); ++i) {
    lq += std::pow(std::abs(f[i]), q) * h;
    l2 += f[i] * f[i] * h;
    vpart += op.potential[i] * f[i] * f[i] * h;
  }
  const double form = op.quadratic_form(fv) - vpart;
  return std::pow(lq, 2.0 / q) / (form + l2);
}

InequalityReport sobolev_check(const DiscreteOperator& op, double alpha1, int trials, std::uint64_t seed) {
  if (!(alpha1 > 0.0 && alpha1 < 1.0)) throw AssumptionError("d>alpha1", "Sobolev check in d = 1 needs alpha1 < 1");
  const double half = 0.5 * op.grid.half_width();
  std::vector<double> ratios(trials);
  numeric::parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    ratios[t] = sobolev_ratio(op, alpha1, random_test_function(op.grid, half, numeric::splitmix64(seed + t)));
  });
  InequalityReport rep;
  rep.trials = trials;
  for (double r : ratios) rep.max_ratio = std::max(rep.max_ratio, r);
  return rep;
}

}  // namespace fkc::spectral
