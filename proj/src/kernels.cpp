#include "fkc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fkc/errors.hpp"
#include "fkc/numeric.hpp"

namespace fkc::kernels {

using numeric::kInf;

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// One log-log linear piece of a tabulated profile: rho(u) = v (u/r)^m on [lo, hi].
struct Piece {
  double lo, hi, r, v, m;
};

std::vector<Piece> pieces(const RadialProfile& p) {
  std::vector<Piece> out;
  const std::size_t n = p.radius.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double m = std::log(p.value[k + 1] / p.value[k]) / std::log(p.radius[k + 1] / p.radius[k]);
    out.push_back({k == 0 ? 0.0 : p.radius[k], k + 2 == n ? kInf : p.radius[k + 1], p.radius[k], p.value[k], m});
  }
  return out;
}

// int_a^b u^q du for 0 <= a < b <= inf.
double power_integral(double a, double b, double q) {
  if (q == -1.0) return (a == 0.0 || b == kInf) ? kInf : std::log(b / a);
  if (b == kInf && q > -1.0) return kInf;
  if (a == 0.0 && q < -1.0) return kInf;
  const double fb = b == kInf ? 0.0 : std::pow(b, q + 1.0);
  const double fa = a == 0.0 ? 0.0 : std::pow(a, q + 1.0);
  return (fb - fa) / (q + 1.0);
}

// int_a^b u^p rho(u) du for a tabulated profile.
double profile_moment(const RadialProfile& prof, double a, double b, double p) {
  double total = 0.0;
  for (const Piece& pc : pieces(prof)) {
    const double lo = std::max(a, pc.lo);
    const double hi = std::min(b, pc.hi);
    if (!(hi > lo)) continue;
    total += pc.v * std::pow(pc.r, -pc.m) * power_integral(lo, hi, p + pc.m);
  }
  return total;
}

double profile_log_density(const RadialProfile& prof, double log_u) {
  const auto ps = pieces(prof);
  for (const Piece& pc : ps) {
    if (pc.hi == kInf || log_u <= std::log(pc.hi))
      return std::log(pc.v) + pc.m * (log_u - std::log(pc.r));
  }
  return -kInf;
}

// int_a^b u^(-e) du, used by the singular power branch.
double singular_tail(double a, double b, double e) { return power_integral(a, b, -e); }

}  // namespace

double stable_normalization(int d, double alpha) {
  if (d < 1 || !(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable normalization needs d >= 1 and alpha in (0,2)");
  return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma((d + alpha) / 2.0) /
         (std::pow(numeric::kPi, d / 2.0) * std::tgamma(1.0 - alpha / 2.0));
}

JumpKernelSpec stable_kernel(int d, double alpha, std::optional<double> cnorm) {
  JumpKernelSpec s;
  s.family = KernelFamily::stable;
  s.dim = d;
  s.alpha = s.alpha1 = s.alpha2 = alpha;
  s.cnorm = cnorm ? *cnorm : stable_normalization(d, alpha);
  s.c1 = s.c2 = s.cnorm;
  validate(s);
  return s;
}

JumpKernelSpec tempered_kernel(int d, double alpha, double gamma, double cnorm) {
  JumpKernelSpec s;
  s.family = KernelFamily::tempered;
  s.dim = d;
  s.alpha = s.alpha1 = s.alpha2 = alpha;
  s.gamma = gamma;
  s.cnorm = s.c1 = s.c2 = cnorm;
  validate(s);
  return s;
}

JumpKernelSpec truncated_kernel(int d, double alpha, double cnorm) {
  JumpKernelSpec s;
  s.family = KernelFamily::truncated;
  s.dim = d;
  s.alpha = s.alpha1 = s.alpha2 = alpha;
  s.cnorm = s.c1 = s.c2 = cnorm;
  validate(s);
  return s;
}

JumpKernelSpec custom_kernel(int d, RadialProfile profile, double alpha1, double alpha2, double c1, double c2,
                             double kappa) {
  JumpKernelSpec s;
  s.family = KernelFamily::custom_radial;
  s.dim = d;
  s.profile = std::move(profile);
  s.alpha = s.alpha1 = alpha1;
  s.alpha2 = alpha2;
  s.c1 = c1;
  s.c2 = c2;
  s.kappa = kappa;
  validate(s);
  return s;
}

void validate(const JumpKernelSpec& s) {
  auto in02 = [](double a) { return a > 0.0 && a < 2.0; };
  if (s.dim < 1) throw DomainError("kernel: dimension must be positive");
  if (!(s.kappa > 0.0)) throw DomainError("kernel: kappa must be positive");
  if (!in02(s.alpha1) || !in02(s.alpha2) || s.alpha1 > s.alpha2)
    throw DomainError("kernel: need 0 < alpha1 <= alpha2 < 2");
  if (!(s.c1 > 0.0 && s.c2 > 0.0)) throw DomainError("kernel: c1, c2 must be positive");
  if (s.family == KernelFamily::custom_radial) {
    const auto& p = s.profile;
    if (p.radius.size() < 2 || p.radius.size() != p.value.size())
      throw DomainError("kernel: profile needs at least two (radius, value) nodes");
    for (std::size_t k = 0; k < p.radius.size(); ++k) {
      if (!(p.radius[k] > 0.0) || (k > 0 && !(p.radius[k] > p.radius[k - 1])))
        throw DomainError("kernel: profile radii must be positive and increasing");
      if (!(p.value[k] > 0.0) || !std::isfinite(p.value[k]))
        throw DomainError("kernel: profile values must be positive and finite");
    }
    return;
  }
  if (!in02(s.alpha)) throw DomainError("kernel: alpha must lie in (0,2)");
  if (!(s.cnorm > 0.0)) throw DomainError("kernel: normalization must be positive");
  if (s.family == KernelFamily::tempered && !(s.gamma > 0.0 && s.gamma <= 1.0))
    throw DomainError("kernel: gamma must lie in (0,1]");
}

std::string family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::stable: return "stable";
    case KernelFamily::tempered: return "tempered";
    case KernelFamily::truncated: return "truncated";
    case KernelFamily::custom_radial: return "custom";
  }
  return "?";
}

bool has_infinite_range(const JumpKernelSpec& s) { return s.family != KernelFamily::truncated; }

bool is_radially_nonincreasing(const JumpKernelSpec& s) {
  if (s.family != KernelFamily::custom_radial) return true;
  for (const Piece& p : pieces(s.profile))
    if (p.m > 0.0) return false;
  return true;
}

double log_radial_density(const JumpKernelSpec& s, double log_u) {
  const double e = s.dim + s.alpha;
  switch (s.family) {
    case KernelFamily::stable:
      return std::log(s.cnorm) - e * log_u;
    case KernelFamily::tempered:
      if (log_u <= 0.0) return std::log(s.cnorm) - e * log_u;
      return std::log(s.cnorm) - std::exp(s.gamma * log_u);
    case KernelFamily::truncated:
      if (log_u <= 0.0) return std::log(s.cnorm) - e * log_u;
      return -kInf;
    case KernelFamily::custom_radial:
      return profile_log_density(s.profile, log_u);
  }
  return -kInf;
}

double radial_density(const JumpKernelSpec& s, double u) {
  if (!(u > 0.0)) throw DomainError("kernel: singular at zero displacement");
  if (s.family == KernelFamily::tempered && u > 1.0) return s.cnorm * std::exp(-std::pow(u, s.gamma));
  if (s.family == KernelFamily::truncated && u > 1.0) return 0.0;
  if (s.family != KernelFamily::custom_radial) return s.cnorm * std::pow(u, -s.dim - s.alpha);
  return std::exp(log_radial_density(s, std::log(u)));
}

double eval_kernel(const JumpKernelSpec& s, std::span<const double> z) {
  if (static_cast<int>(z.size()) != s.dim) throw DomainError("kernel: displacement has wrong dimension");
  return radial_density(s, norm(z));
}

double eval_kernel(const JumpKernelSpec& s, double z) { return radial_density(s, std::abs(z)); }

double one_sided_tail(const JumpKernelSpec& s, double a) {
  if (!(a > 0.0)) throw DomainError("kernel tail: radius must be positive");
  const double e = s.dim + s.alpha;
  switch (s.family) {
    case KernelFamily::stable:
      return s.cnorm * singular_tail(a, kInf, e);
    case KernelFamily::tempered: {
      const double far = std::max(a, 1.0);
      const double g = s.gamma;
      double t = s.cnorm * boost::math::tgamma(1.0 / g, std::pow(far, g)) / g;
      if (a < 1.0) t += s.cnorm * singular_tail(a, 1.0, e);
      return t;
    }
    case KernelFamily::truncated:
      return a < 1.0 ? s.cnorm * singular_tail(a, 1.0, e) : 0.0;
    case KernelFamily::custom_radial:
      return profile_moment(s.profile, a, kInf, 0.0);
  }
  return 0.0;
}

double truncated_second_moment(const JumpKernelSpec& s, double a) {
  if (!(a > 0.0)) return 0.0;
  const double e = s.dim + s.alpha;
  if (s.family == KernelFamily::custom_radial) return profile_moment(s.profile, 0.0, a, 2.0);
  if (!(e < 3.0)) throw DomainError("kernel: second moment of small jumps diverges");
  const double near = std::min(a, 1.0);
  double m = s.cnorm * std::pow(near, 3.0 - e) / (3.0 - e);
  if (a > 1.0) {
    if (s.family == KernelFamily::stable) {
      m += s.cnorm * power_integral(1.0, a, 2.0 - e);
    } else if (s.family == KernelFamily::tempered) {
      const double g = s.gamma;
      m += s.cnorm / g *
           (boost::math::tgamma_lower(3.0 / g, std::pow(a, g)) - boost::math::tgamma_lower(3.0 / g, 1.0));
    }
  }
  return m;
}

double log_inf_on_shell(const JumpKernelSpec& s, double log_a, double log_b) {
  if (log_b < log_a) std::swap(log_a, log_b);
  if (s.family != KernelFamily::custom_radial) return log_radial_density(s, log_b);
  double best = std::min(log_radial_density(s, log_a), log_radial_density(s, log_b));
  for (std::size_t k = 0; k < s.profile.radius.size(); ++k) {
    const double lr = std::log(s.profile.radius[k]);
    if (lr > log_a && lr < log_b) best = std::min(best, std::log(s.profile.value[k]));
  }
  return best;
}

double log_jstar(const JumpKernelSpec& s, double log_radius) {
  if (log_radius < std::log(3.0)) return 0.0;
  const double lo = std::log(std::exp(log_radius) - 1.5);
  const double hi = numeric::log_add_exp(log_radius, std::log(1.5));
  if (s.family == KernelFamily::custom_radial && log_radius < 700.0) return log_inf_on_shell(s, lo, hi);
  return log_radial_density(s, hi);
}

FieldValue jstar(const JumpKernelSpec& s, double radius) {
  if (radius < 0.0) throw DomainError("jstar: negative radius");
  FieldValue f;
  if (radius < 3.0) {
    f.value = 1.0;
    f.log_value = 0.0;
    return f;
  }
  if (s.family == KernelFamily::custom_radial) {
    f.log_value = log_inf_on_shell(s, std::log(radius - 1.5), std::log(radius + 1.5));
    f.value = std::exp(f.log_value);
  } else {
    f.value = radial_density(s, radius + 1.5);
    f.log_value = f.value > 0.0 ? std::log(f.value) : log_radial_density(s, std::log(radius + 1.5));
  }
  f.zero = f.value == 0.0 && !has_infinite_range(s);
  return f;
}

FieldValue jstar(const JumpKernelSpec& s, std::span<const double> x) { return jstar(s, norm(x)); }

FieldValue phi_lower(const JumpKernelSpec& s, const PotentialSpec& pot, std::span<const double> x) {
  FieldValue f = jstar(s, x);
  const double v = vstar(pot, x);
  f.value /= 1.0 + v;
  f.log_value -= std::log1p(v);
  return f;
}

FieldValue phi_lower(const JumpKernelSpec& s, const PotentialSpec& pot, double x) {
  return phi_lower(s, pot, std::span<const double>(&x, 1));
}

bool ValidationReport::all_passed() const {
  return small_jump.passed && positivity.passed && tail.passed && sublevel.passed;
}

std::vector<const ConditionCheck*> ValidationReport::checks() const {
  return {&small_jump, &positivity, &tail, &sublevel};
}

void ValidationReport::require() const {
  for (const ConditionCheck* c : checks())
    if (!c->passed) throw AssumptionError(c->condition, c->detail);
}

namespace {

ConditionCheck check_small_jumps(const JumpKernelSpec& s, const SamplingPlan& plan, double& fitted) {
  ConditionCheck c{"(1.1)", true, {}};
  const int n = std::max(plan.small_jump_samples, 2);
  const auto us = numeric::geometric_grid(plan.smallest_radius_fraction * s.kappa, s.kappa, n);
  std::vector<double> lx, ly;
  std::ostringstream msg;
  for (double u : us) {
    const double r = radial_density(s, u);
    const double lo = s.c1 * std::pow(u, -s.dim - s.alpha1);
    const double hi = s.c2 * std::pow(u, -s.dim - s.alpha2);
    const double slack = 1e-12 * r;
    if (r + slack < lo || r > hi + 1e-12 * hi) {
      if (c.passed) msg << "bound fails at |z|=" << u << " (rho=" << r << ", lower=" << lo << ", upper=" << hi << ")";
      c.passed = false;
    }
    if (r > 0.0) {
      lx.push_back(std::log(u));
      ly.push_back(std::log(r));
    }
  }
  const auto fit = numeric::linear_fit(lx, ly);
  fitted = -fit.slope - s.dim;
  if (c.passed) msg << "two-sided bound holds on " << n << " radii in (0," << s.kappa << "], fitted order " << fitted;
  c.detail = msg.str();
  return c;
}

ConditionCheck check_tail(const JumpKernelSpec& s, double& mass, double& err) {
  ConditionCheck c{"(1.3)", true, {}};
  const int d = s.dim;
  auto g = [&](double u) { return radial_density(s, u) * std::pow(u, d - 1); };
  std::vector<double> cuts{s.kappa};
  if (s.family == KernelFamily::tempered || s.family == KernelFamily::truncated) cuts.push_back(1.0);
  if (s.family == KernelFamily::custom_radial)
    for (double r : s.profile.radius) cuts.push_back(r);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double r) { return r < s.kappa; }), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  bool finite = true;
  double total = 0.0, error = 0.0;
  try {
    boost::math::quadrature::tanh_sinh<double> ts;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      double e = 0.0;
      total += ts.integrate(g, cuts[k], cuts[k + 1], 1e-12, &e);
      error += e;
    }
    if (s.family != KernelFamily::truncated || cuts.back() < 1.0) {
      boost::math::quadrature::exp_sinh<double> es;
      double e = 0.0, l1 = 0.0;
      const double part = es.integrate(g, cuts.back(), kInf, 1e-12, &e, &l1);
      total += part;
      error += e;
    }
  } catch (const std::exception&) {
    finite = false;
  }
  // The last power-law piece of a table decides integrability analytically.
  if (s.family == KernelFamily::custom_radial && pieces(s.profile).back().m + d - 1 >= -1.0) finite = false;
  if (!std::isfinite(total) || !(error <= 1e-6 * std::abs(total) + 1e-300)) finite = false;

  const double area = numeric::sphere_area(d);
  mass = finite ? area * total : kInf;
  err = area * error;
  c.passed = finite;
  std::ostringstream msg;
  if (finite)
    msg << "tail mass " << mass << " (quadrature error " << err << ")";
  else
    msg << "tail mass of the jump kernel beyond kappa diverges";
  c.detail = msg.str();
  return c;
}

// log of an upper bound on |{V <= r}|; +inf when unbounded.
double log_sublevel_measure(const PotentialSpec& pot, double r) {
  const int d = pot.family == PotentialFamily::irregular ? pot.exceptional.dim : 1;
  const double lw = std::log(numeric::unit_ball_volume(d));
  auto base_measure = [&](PotentialFamily f) -> double {
    switch (f) {
      case PotentialFamily::power:
        return r > 0.0 ? lw + d / pot.lambda * std::log(r) : -kInf;
      case PotentialFamily::logpower:
        return r > 0.0 ? lw + d * numeric::log_expm1(std::pow(r, 1.0 / pot.lambda)) : -kInf;
      case PotentialFamily::constant:
        return r >= pot.level ? kInf : -kInf;
      case PotentialFamily::custom_radial: {
        const auto& t = pot.table;
        const std::size_t n = t.radius.size();
        const double slope = n > 1 ? (t.value[n - 1] - t.value[n - 2]) / (t.radius[n - 1] - t.radius[n - 2]) : 0.0;
        if (slope < 0.0 || (slope == 0.0 && t.value.back() <= r)) return kInf;
        double rad = t.radius.back();
        if (slope > 0.0) rad = std::max(rad, rad + (r - t.value.back()) / slope);
        return lw + d * std::log(rad);
      }
      case PotentialFamily::irregular:
        break;
    }
    return kInf;
  };
  if (pot.family != PotentialFamily::irregular) return base_measure(pot.family);
  double lm = base_measure(pot.base);
  if (r >= pot.level) {
    const auto& set = pot.exceptional;
    const double a = set.kind == ExceptionalKind::envelope
                         ? numeric::unit_ball_volume(d) + envelope_value(set, 0.0)
                         : exceptional_tail_measure(set, -kInf);
    lm = numeric::log_add_exp(lm, std::log(a));
  }
  return lm;
}

}  // namespace

ValidationReport verify_assumptions(const JumpKernelSpec& s, const PotentialSpec& pot, const SamplingPlan& plan) {
  validate(s);
  validate(pot);
  ValidationReport rep;
  rep.small_jump = check_small_jumps(s, plan, rep.fitted_order);

  rep.positivity.passed = has_infinite_range(s);
  rep.positivity.detail = rep.positivity.passed ? "kernel strictly positive for all jump sizes"
                                                : "kernel vanishes for jumps longer than 1";

  rep.tail = check_tail(s, rep.tail_mass, rep.tail_error);

  std::ostringstream msg;
  for (double r : plan.sublevel_levels) {
    const double lm = log_sublevel_measure(pot, r);
    rep.log_sublevel_measure.push_back(lm);
    if (!std::isfinite(lm) && lm > 0.0) {
      if (rep.sublevel.passed) msg << "sub-level set {V <= " << r << "} has infinite measure";
      rep.sublevel.passed = false;
    }
  }
  if (rep.sublevel.passed) msg << "sub-level sets finite for " << plan.sublevel_levels.size() << " sampled levels";
  rep.sublevel.detail = msg.str();
  return rep;
}

}  // namespace fkc::kernels
