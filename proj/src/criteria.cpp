#include "fkc/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fkc/errors.hpp"
#include "fkc/numeric.hpp"

namespace fkc::criteria {

using kernels::KernelFamily;
using kernels::PotentialFamily;
using numeric::kInf;

namespace {

const double kLn2 = std::log(2.0);

std::string fmt(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

std::string describe(const PotentialSpec& pot) {
  switch (pot.family) {
    case PotentialFamily::power: return "power(lambda=" + fmt(pot.lambda) + ")";
    case PotentialFamily::logpower: return "logpower(lambda=" + fmt(pot.lambda) + ")";
    case PotentialFamily::constant: return "constant(" + fmt(pot.level) + ")";
    case PotentialFamily::custom_radial: return "custom";
    case PotentialFamily::irregular: return "irregular(lambda=" + fmt(pot.lambda) + ", K=" + fmt(pot.K) + ")";
  }
  return "?";
}

std::string describe(const JumpKernelSpec& k) {
  std::string s = kernels::family_name(k.family) + "(d=" + std::to_string(k.dim) + ", alpha=" + fmt(k.alpha);
  if (k.family == KernelFamily::tempered) s += ", gamma=" + fmt(k.gamma);
  return s + ")";
}

// log of the base branch value at |x| = exp(log_radius).
double log_base_value(PotentialFamily f, double lambda, double log_radius) {
  if (f == PotentialFamily::power) return lambda * log_radius;
  return lambda * std::log(numeric::softplus(log_radius));
}

// log of inf{R : base(R) >= exp(log_v)}.
double log_base_inverse(PotentialFamily f, double lambda, double log_v) {
  if (f == PotentialFamily::power) return log_v / lambda;
  return numeric::log_expm1(std::exp(log_v / lambda));
}

double table_min(const kernels::PotentialTable& t) { return *std::min_element(t.value.begin(), t.value.end()); }

// log(1 + sup_{|x| <= R} V*(x)).
double log1p_sup_vstar(const PotentialSpec& pot, double log_radius) {
  switch (pot.family) {
    case PotentialFamily::power:
    case PotentialFamily::logpower:
    case PotentialFamily::constant:
      return kernels::log1p_vstar_radial(pot, log_radius);
    case PotentialFamily::irregular:
      return std::max(kernels::log1p_vstar_radial(pot, log_radius), std::log1p(pot.level));
    case PotentialFamily::custom_radial: {
      double best = kernels::log1p_vstar_radial(pot, log_radius);
      const double r = log_radius < 700.0 ? std::exp(log_radius) : kInf;
      for (std::size_t k = 0; k < pot.table.radius.size(); ++k)
        if (pot.table.radius[k] <= r + 1.0) best = std::max(best, std::log1p(pot.table.value[k]));
      return std::max(best, std::log1p(pot.table.value.front()));
    }
  }
  return kInf;
}

}  // namespace

RateFunction big_phi(const PotentialSpec& pot) {
  kernels::validate(pot);
  switch (pot.family) {
    case PotentialFamily::irregular:
      throw NotAvailable("Phi undefined: liminf V is finite on the exceptional set, use irregular_rates");
    case PotentialFamily::constant:
      throw AssumptionError("lim V = inf", "constant potential does not diverge");
    case PotentialFamily::power:
    case PotentialFamily::logpower: {
      const PotentialFamily f = pot.family;
      const double lam = pot.lambda;
      RateFunction phi("Phi", Monotonicity::non_decreasing,
                       [f, lam](double lx) { return log_base_value(f, lam, lx); });
      phi.with_inverse([f, lam](double lr) { return log_base_inverse(f, lam, lr); })
          .with_provenance("Phi of " + describe(pot));
      return phi;
    }
    case PotentialFamily::custom_radial: {
      if (!kernels::diverges_at_infinity(pot))
        throw AssumptionError("lim V = inf", "tabulated potential does not diverge");
      const double vmin = std::min(table_min(pot.table), kernels::radial_value(pot, 0.0));
      RateFunction phi("Phi", Monotonicity::non_decreasing, [pot, vmin](double lx) {
        const auto& t = pot.table;
        const std::size_t n = t.radius.size();
        const double slope = (t.value[n - 1] - t.value[n - 2]) / (t.radius[n - 1] - t.radius[n - 2]);
        double inf_v;
        if (lx > 700.0) {
          inf_v = slope * std::exp(std::min(lx, 709.0));
        } else {
          const double s = std::exp(lx);
          inf_v = kernels::radial_value(pot, s);
          for (std::size_t k = 0; k < n; ++k)
            if (t.radius[k] >= s) inf_v = std::min(inf_v, t.value[k]);
        }
        const double v = inf_v - vmin;
        return v > 0.0 ? std::log(v) : -kInf;
      });
      phi.with_domain(-745.0, 709.0).with_provenance("Phi of tabulated potential (normalized to inf V = 0)");
      return phi;
    }
  }
  throw DomainError("big_phi: unknown potential family");
}

Weight phi_weight(const JumpKernelSpec& spec, const PotentialSpec& pot) {
  const double log3 = std::log(3.0);
  const double v3 = log1p_sup_vstar(pot, log3);
  return Weight{[spec, pot, log3, v3](double log_radius) {
    const double v = log1p_sup_vstar(pot, log_radius);
    if (log_radius < log3) return -v;
    double j;
    if (spec.family == KernelFamily::custom_radial)
      j = kernels::log_inf_on_shell(spec, std::log(1.5), numeric::log_add_exp(log_radius, std::log(1.5)));
    else
      j = kernels::log_jstar(spec, log_radius);
    return std::min(-v3, j - v);
  }};
}

Weight constant_weight(double value) {
  if (!(value > 0.0)) throw DomainError("constant weight must be positive");
  const double lv = std::log(value);
  return Weight{[lv](double) { return lv; }};
}

double log_alpha_rs(const JumpKernelSpec& spec, const Weight& w, double log_r, double s) {
  if (!(s > 0.0)) throw DomainError("alpha(r,s): budget s must be positive");
  if (!std::isfinite(log_r)) throw DomainError("alpha(r,s): radius must be positive and finite");
  const int d = spec.dim;
  const double ls = std::log(s);
  const bool custom = spec.family == KernelFamily::custom_radial;
  auto log_rho_inf = [&](double lt) {
    return custom ? kernels::log_inf_on_shell(spec, -700.0, lt) : kernels::log_radial_density(spec, lt);
  };
  auto feasible = [&](double lt) { return kLn2 - log_rho_inf(lt) - numeric::log_ball_volume(d, lt) <= ls; };
  auto objective = [&](double lt) {
    if (!feasible(lt)) return kInf;
    return kLn2 - numeric::log_ball_volume(d, lt) - 2.0 * w.log_inf(numeric::log_add_exp(log_r, lt));
  };
  auto boundary = [&](double a, double b) {  // a feasible, b not
    while (std::abs(b - a) > 1e-12 * std::max(1.0, std::abs(a))) {
      const double m = 0.5 * (a + b);
      (feasible(m) ? a : b) = m;
    }
    return a;
  };

  double lt_b = log_r;
  if (!feasible(log_r)) {
    double b = log_r, a = log_r, step = 1.0;
    for (;;) {
      a = log_r - step;
      if (feasible(a)) break;
      b = a;
      step *= 2.0;
      if (a < -2000.0) throw AssumptionError("(1.1)", "no feasible jump scale t in alpha(r,s)");
    }
    lt_b = boundary(a, b);
  }

  double best_lt = lt_b, best = objective(lt_b);
  const int n = 256;
  const double lo = lt_b - 50.0, hi = std::min(log_r, lt_b + 50.0);
  std::vector<double> lts(n), vals(n);
  for (int k = 0; k < n; ++k) {
    lts[k] = lo + (hi - lo) * k / (n - 1);
    vals[k] = objective(lts[k]);
    if (vals[k] < best) {
      best = vals[k];
      best_lt = lts[k];
    }
    if (k > 0 && vals[k - 1] < kInf && vals[k] == kInf) {
      const double lb = boundary(lts[k - 1], lts[k]);
      const double v = objective(lb);
      if (v < best) {
        best = v;
        best_lt = lb;
      }
    }
  }
  // Golden-section refinement around the best grid point.
  const double h = (hi - lo) / (n - 1);
  double a = std::max(lo, best_lt - h), b = std::min(hi, best_lt + h);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = objective(x2);
    }
  }
  best = std::min({best, f1, f2});
  return best;
}

double alpha_rs(const JumpKernelSpec& spec, const Weight& w, double r, double s) {
  if (!(r > 0.0)) throw DomainError("alpha(r,s): radius must be positive");
  return std::exp(log_alpha_rs(spec, w, std::log(r), s));
}

RateFunction beta_rate(const JumpKernelSpec& spec, const PotentialSpec& pot, const Deltas& deltas) {
  kernels::validate(spec);
  if (!(deltas.d1 > 0.0 && deltas.d2 > 0.0)) throw DomainError("beta: constants must be positive");
  const RateFunction phi = big_phi(pot);
  const Weight w = phi_weight(spec, pot);
  const double ld1 = std::log(deltas.d1), ld2 = std::log(deltas.d2);
  const double log4 = std::log(4.0);
  RateFunction beta("beta", Monotonicity::non_increasing, [=](double ls) {
    const double lm = std::min(ls, ld2);
    const double log_r = log_gen_inverse(phi, log4 - lm);
    return ld1 + log_alpha_rs(spec, w, log_r, std::exp(lm) / 4.0);
  });
  beta.with_domain(-700.0, 700.0)
      .with_provenance("beta for " + describe(spec) + " and " + describe(pot) + ", d1=" + fmt(deltas.d1) +
                       ", d2=" + fmt(deltas.d2))
      .with_rebuild([spec, pot](const Deltas& d) { return beta_rate(spec, pot, d); });
  beta.with_exponent(asymptotic_exponent(beta));
  return beta;
}

IrregularRates irregular_rates(const JumpKernelSpec& spec, const PotentialSpec& pot, double delta4) {
  kernels::validate(spec);
  kernels::validate(pot);
  if (!(delta4 > 0.0)) throw DomainError("irregular rates: delta4 must be positive");
  if (!(spec.dim > spec.alpha1)) throw AssumptionError("d>alpha1", "dimension must exceed the small-jump order alpha1");

  PotentialFamily base;
  kernels::ExceptionalSet set;
  double level = 0.0, K = pot.K;
  switch (pot.family) {
    case PotentialFamily::irregular:
      base = pot.base;
      set = pot.exceptional;
      level = pot.level;
      break;
    case PotentialFamily::power:
    case PotentialFamily::logpower:
      base = pot.family;
      break;
    default:
      throw AssumptionError("(A)", "Phi_K needs a diverging power or logpower branch");
  }
  if (!(K > 0.0)) throw AssumptionError("(A)", "threshold K must be positive");
  if (set.kind != kernels::ExceptionalKind::none && level > K)
    throw AssumptionError("(A)", "V equals " + fmt(level) + " > K on the exceptional set, so Phi_K stays bounded");
  const int d = set.kind != kernels::ExceptionalKind::none ? set.dim : spec.dim;
  if (d != spec.dim) throw DomainError("irregular rates: exceptional set and kernel dimensions differ");

  const double lam = pot.lambda, logK = std::log(K);
  // Phi_K shifted by inf_{V>K} V = K.
  RateFunction phi_k("Phi_K", Monotonicity::non_decreasing, [base, lam, logK](double lx) {
    const double b = log_base_value(base, lam, lx);
    if (b <= logK) return -kInf;
    return b + std::log(-std::expm1(logK - b));
  });
  phi_k.with_inverse([base, lam, logK](double lr) { return log_base_inverse(base, lam, numeric::log_add_exp(lr, logK)); })
      .with_provenance("Phi_K of " + describe(pot));

  const double log_rho_k = log_base_inverse(base, lam, logK);
  const double log_w = std::log(numeric::unit_ball_volume(d));
  const bool with_set = set.kind != kernels::ExceptionalKind::none;
  RateFunction theta_k("Theta_K", Monotonicity::non_increasing, [=](double lx) {
    double lm = -kInf;
    if (lx < log_rho_k) lm = log_w + d * log_rho_k + std::log1p(-std::exp(d * (lx - log_rho_k)));
    if (with_set) lm = numeric::log_add_exp(lm, std::log(kernels::exceptional_tail_measure(set, lx)));
    return lm;
  });
  theta_k.with_provenance("Theta_K of " + describe(pot));

  const double expo = spec.alpha1 / d, ld4 = std::log(delta4);
  RateFunction psi_k("Psi_K", Monotonicity::non_decreasing, [phi_k, theta_k, expo, ld4](double lx) {
    const double lp = phi_k.log_value(lx);
    const double lt = theta_k.log_value(lx);
    return -numeric::log_add_exp(-lp, ld4 + expo * lt);
  });
  psi_k.with_provenance("Psi_K of " + describe(pot) + ", d4=" + fmt(delta4));
  return {phi_k, theta_k, psi_k};
}

RateFunction beta_hat_rate(const JumpKernelSpec& spec, const PotentialSpec& pot, const Deltas& deltas) {
  if (!(deltas.d1 > 0.0 && deltas.d2 > 0.0 && deltas.d3 > 0.0))
    throw DomainError("beta_hat: constants must be positive");
  const IrregularRates ir = irregular_rates(spec, pot, deltas.d4);
  const RateFunction psi = ir.psi_k;
  const Weight w = phi_weight(spec, pot);
  const double ld1 = std::log(deltas.d1), ld2 = std::log(deltas.d2), ld3 = std::log(deltas.d3);
  const double log8 = std::log(8.0);
  RateFunction bh("beta_hat", Monotonicity::non_increasing, [=](double ls) {
    const double lm = std::min(ls, ld2);
    // The radius is the larger of the two: R must make both 1/Psi_K(R) <= s/8
    // and the fixed threshold small.
    const double log_r = std::max(log_gen_inverse(psi, log8 - lm), ld3);
    return ld1 + log_alpha_rs(spec, w, log_r, std::exp(lm) / 8.0);
  });
  bh.with_domain(-700.0, 700.0)
      .with_provenance("beta_hat for " + describe(spec) + " and " + describe(pot) + ", d1=" + fmt(deltas.d1) +
                       ", d2=" + fmt(deltas.d2) + ", d3=" + fmt(deltas.d3) + ", d4=" + fmt(deltas.d4))
      .with_rebuild([spec, pot](const Deltas& d) { return beta_hat_rate(spec, pot, d); });
  bh.with_exponent(asymptotic_exponent(bh));
  return bh;
}

namespace {

struct Flags {
  bool iu = false, is = false, ih = false;
};

Flags flags_from_exponent(double p, double band) {
  if (p < 1.0 - band) return {true, true, true};
  if (p <= 1.0 + band) return {false, false, true};
  return {};
}

// Fallback diagnostics sampled directly from log f on the fit grid.
void sample_diagnostics(const RateFunction& f, const FitOptions& fo, double band, ContractivityVerdict& v, Flags& fb,
                        bool& conclusive) {
  const auto grid = numeric::geometric_grid(fo.s_lo, fo.s_hi, static_cast<std::size_t>(fo.points));
  std::vector<double> y;
  for (double s : grid) y.push_back(f.log_value(std::log(s)));

  // s log f(s) at three decades for Aitken extrapolation to s = 0.
  const double s0 = fo.s_lo * 100.0, s1 = fo.s_lo * 10.0, s2 = fo.s_lo;
  const double g0 = s0 * f.log_value(std::log(s0));
  const double g1 = s1 * f.log_value(std::log(s1));
  const double g2 = s2 * f.log_value(std::log(s2));
  v.limsup_estimate = std::max({g0, g1, g2});
  const double d1 = g1 - g0, d2 = g2 - g1;
  const double ratio = d1 != 0.0 ? d2 / d1 : 0.0;
  const double denom = d2 - d1;
  v.lim_estimate = std::abs(denom) > 1e-300 ? g2 - d2 * d2 / denom : g2;
  const double scale = std::max({std::abs(g0), std::abs(g1), std::abs(g2), 1e-300});
  if (ratio > 1.05 && g2 > g1) {
    v.lim_estimate = kInf;
    fb = {};
  } else if (std::abs(v.lim_estimate) <= 0.05 * scale && ratio < 0.95) {
    fb.is = fb.ih = true;
  } else if (std::isfinite(v.lim_estimate)) {
    fb.ih = true;
  } else {
    conclusive = false;
  }

  // int beta^{-1}(u)/u du in v = log u: along the samples beta^{-1}(e^{y_i}) = s_i.
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) total += 0.5 * (grid[i] + grid[i + 1]) * std::abs(y[i] - y[i + 1]);
  // Tail beyond the sampled range from the model refitted on the two smallest
  // decades: beta^{-1}(e^v) ~ C v^{-1/p}, integrable iff 1/p > 1.
  FitOptions local = fo;
  local.s_hi = fo.s_lo * 100.0;
  local.points = 32;
  const ExponentFit lf = asymptotic_exponent(f, local);
  double remainder = kInf;
  bool converged = false;
  if (lf.bounded) {
    remainder = 0.0;
    converged = true;
  } else if (lf.curvature) {
    conclusive = false;
  } else {
    const double q = 1.0 / lf.p;
    const double vmax = y.front();
    if (q > 1.0) remainder = grid.front() * vmax / (q - 1.0);
    converged = q > 1.0 + band;
  }
  v.tail_integral = total + remainder;
  v.tail_converged = converged;
  fb.iu = v.tail_converged;
}

ContractivityVerdict single_verdict(const RateFunction& f, const TestOptions& opt) {
  ContractivityVerdict v;
  v.route = f.name();
  v.fit = f.exponent() ? *f.exponent() : asymptotic_exponent(f, opt.fit);
  Flags fl;
  if (v.fit.bounded) {
    v.path = "fit";
    fl = {true, true, true};
    v.tail_converged = true;
  } else if (!v.fit.curvature) {
    v.path = "fit";
    fl = flags_from_exponent(v.fit.p, opt.boundary_band);
    v.tail_converged = fl.iu;
    v.lim_estimate = fl.is ? 0.0 : (fl.ih ? v.fit.amplitude : kInf);
  } else {
    v.path = "fallback";
    bool conclusive = true;
    sample_diagnostics(f, opt.fit, opt.boundary_band, v, fl, conclusive);
    if (!conclusive) {
      v.inconclusive = true;
      fl = {};
      v.notes = "exponent model misfit and inconclusive direct sampling";
    }
  }
  // IU implies IS implies IH.
  fl.is = fl.is || fl.iu;
  fl.ih = fl.ih || fl.is;
  v.iu = fl.iu;
  v.is = fl.is;
  v.ih = fl.ih;
  return v;
}

}  // namespace

ContractivityVerdict contractivity_tests(const RateFunction& f, const TestOptions& opt) {
  ContractivityVerdict v = single_verdict(f, opt);
  if (!opt.delta_scan || !f.rebuild()) return v;

  const bool hat = f.name() == "beta_hat";
  const auto& dv = opt.delta_values;
  const std::size_t m = dv.size();
  const std::size_t combos = hat ? m * m * m * m : m * m;
  std::vector<Deltas> ds(combos);
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t k = c;
    Deltas d;
    d.d1 = dv[k % m];
    k /= m;
    d.d2 = dv[k % m];
    k /= m;
    if (hat) {
      d.d3 = dv[k % m];
      k /= m;
      d.d4 = dv[k % m];
    }
    ds[c] = d;
  }
  std::vector<DeltaRun> runs(combos);
  TestOptions inner = opt;
  inner.delta_scan = false;
  numeric::parallel_for(combos, [&](std::size_t c) {
    const RateFunction g = f.rebuild()(ds[c]);
    const ContractivityVerdict r = single_verdict(g, inner);
    runs[c] = {ds[c], r.fit.bounded ? 0.0 : r.fit.p, r.iu, r.is, r.ih};
  });
  bool iu = v.iu, is = v.is, ih = v.ih;
  for (const auto& r : runs) {
    if (r.iu != v.iu || r.is != v.is || r.ih != v.ih) v.delta_stable = false;
    iu = iu && r.iu;
    is = is && r.is;
    ih = ih && r.ih;
  }
  v.iu = iu;
  v.is = is || iu;
  v.ih = ih || v.is;
  v.scan = std::move(runs);
  if (!v.delta_stable) v.notes += (v.notes.empty() ? "" : "; ") + std::string("flags vary across the delta scan");
  return v;
}

ContractivityVerdict classify(const JumpKernelSpec& spec, const PotentialSpec& pot, const TestOptions& opt) {
  kernels::verify_assumptions(spec, pot).require();
  const bool irregular = pot.family == PotentialFamily::irregular;
  const RateFunction f = irregular ? beta_hat_rate(spec, pot) : beta_rate(spec, pot);
  ContractivityVerdict v = contractivity_tests(f, opt);
  v.route = irregular ? "beta_hat" : "beta";
  return v;
}

}  // namespace fkc::criteria
