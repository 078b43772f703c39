#include "fkc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fkc/errors.hpp"

namespace fkc::montecarlo {

using kernels::KernelFamily;

namespace {

constexpr double kPi = numeric::kPi;

int step_count(double t, double dt) {
  if (t == 0.0) return 0;
  const double q = t / dt;
  const double m = std::round(q);
  if (!(m >= 1.0) || std::abs(q - m) > 1e-9 * std::max(1.0, q))
    throw DomainError("path config: dt must divide the time horizon");
  return static_cast<int>(m);
}

void require_simulable(const JumpKernelSpec& spec) {
  kernels::validate(spec);
  if (spec.dim != 1) throw DomainError("monte carlo: only d = 1 is simulated");
  if (spec.family == KernelFamily::custom_radial)
    throw NotAvailable("monte carlo: custom radial kernels have no jump sampler");
}

FKEstimate summarize(const std::vector<double>& v) {
  FKEstimate e;
  e.n = static_cast<std::int64_t>(v.size());
  if (v.empty()) return e;
  const double mean = numeric::pairwise_sum(v) / static_cast<double>(v.size());
  if (v.size() > 1) {
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - mean) * (v[i] - mean);
    const double var = numeric::pairwise_sum(dev) / static_cast<double>(v.size() - 1);
    e.stderr_ = std::sqrt(var / static_cast<double>(v.size()));
  }
  e.value = mean;
  return e;
}

// Levy measure 2 rho of the displacement interval [a, b], 0 outside it.
double interval_mass(const JumpKernelSpec& spec, double a, double b) {
  if (a > b) std::swap(a, b);
  if (a >= 0.0) return 2.0 * (kernels::one_sided_tail(spec, a) - kernels::one_sided_tail(spec, b));
  if (b <= 0.0) return 2.0 * (kernels::one_sided_tail(spec, -b) - kernels::one_sided_tail(spec, -a));
  return std::numeric_limits<double>::infinity();
}

double random_sign(numeric::Rng& rng) { return (rng.bits() >> 63) ? 1.0 : -1.0; }

}  // namespace

void PathConfig::validate() const {
  if (!(dt > 0.0)) throw DomainError("path config: dt must be positive");
  if (!(t >= 0.0)) throw DomainError("path config: t must be non-negative");
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("path config: eps must lie in (0, 1]");
  if (paths < 1) throw DomainError("path config: need at least one path");
  if (dim != 1) throw DomainError("path config: only d = 1 is simulated");
  step_count(t, dt);
}

int PathConfig::steps() const { return step_count(t, dt); }

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) { return seed ^ numeric::splitmix64(index); }

double stable_scale(const JumpKernelSpec& spec, double dt) {
  const double c = kernels::stable_normalization(1, spec.alpha);
  return std::pow(2.0 * dt * spec.cnorm / c, 1.0 / spec.alpha);
}

double big_jump_rate(const JumpKernelSpec& spec) {
  if (spec.family != KernelFamily::tempered) return 0.0;
  return 4.0 * kernels::one_sided_tail(spec, 1.0);
}

double mid_jump_rate(const JumpKernelSpec& spec, double eps) {
  if (eps >= 1.0) return 0.0;
  return 4.0 * spec.cnorm * (std::pow(eps, -spec.alpha) - 1.0) / spec.alpha;
}

double small_jump_variance(const JumpKernelSpec& spec, double eps) {
  return 4.0 * kernels::truncated_second_moment(spec, eps);
}

double sample_increment(const JumpKernelSpec& spec, double dt, numeric::Rng& rng, double eps) {
  if (!(dt > 0.0)) throw DomainError("increment: dt must be positive");
  const double a = spec.alpha;
  if (spec.family == KernelFamily::stable) {
    const double u = kPi * (rng.uniform() - 0.5);
    double x;
    if (a == 1.0) {
      x = std::tan(u);
    } else {
      const double w = rng.exponential();
      x = std::sin(a * u) / std::pow(std::cos(u), 1.0 / a) * std::pow(std::cos((1.0 - a) * u) / w, (1.0 - a) / a);
    }
    return stable_scale(spec, dt) * x;
  }
  if (spec.family != KernelFamily::tempered && spec.family != KernelFamily::truncated)
    throw NotAvailable("increment: no sampler for this kernel family");
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("increment: eps must lie in (0, 1]");

  double x = std::sqrt(small_jump_variance(spec, eps) * dt) * rng.normal();
  // eps < |z| <= 1: density proportional to u^{-1-alpha}, inverted.
  const std::uint64_t mid = rng.poisson(mid_jump_rate(spec, eps) * dt);
  const double top = std::pow(eps, -a);
  for (std::uint64_t k = 0; k < mid; ++k) {
    const double u = std::pow(top - rng.uniform() * (top - 1.0), -1.0 / a);
    x += random_sign(rng) * u;
  }
  if (spec.family == KernelFamily::tempered) {
    // |z| > 1: u^gamma is Gamma(1/gamma) conditioned on exceeding 1.
    const double g = spec.gamma;
    const double q1 = boost::math::gamma_q(1.0 / g, 1.0);
    const std::uint64_t big = rng.poisson(big_jump_rate(spec) * dt);
    for (std::uint64_t k = 0; k < big; ++k) {
      const double y = boost::math::gamma_q_inv(1.0 / g, rng.uniform() * q1);
      x += random_sign(rng) * std::pow(y, 1.0 / g);
    }
  }
  return x;
}

FKEstimate feynman_kac(const JumpKernelSpec& spec, const PotentialSpec& pot, double x, double t,
                       const std::function<double(double)>& f, const PathConfig& cfg) {
  require_simulable(spec);
  PathConfig c = cfg;
  c.t = t;
  c.validate();
  const int m = c.steps();
  std::vector<double> values(static_cast<std::size_t>(c.paths));
  numeric::parallel_for(values.size(), [&](std::size_t p) {
    numeric::Rng rng(path_seed(c.seed, p));
    double pos = x, integral = 0.0;
    for (int k = 0; k < m; ++k) {
      integral += kernels::potential_value(pot, pos) * c.dt;
      pos += sample_increment(spec, c.dt, rng, c.eps);
    }
    values[p] = std::exp(-integral) * f(pos);
  });
  FKEstimate e = summarize(values);
  e.bias_notes.push_back("potential integral by left-endpoint rule at dt=" + std::to_string(c.dt));
  if (spec.family != KernelFamily::stable)
    e.bias_notes.push_back("jumps below eps=" + std::to_string(c.eps) + " replaced by a Gaussian of equal variance");
  return e;
}

std::vector<double> exit_time_samples(const JumpKernelSpec& spec, double x, double r, double t_max,
                                      const PathConfig& cfg) {
  require_simulable(spec);
  if (!(r > 0.0)) throw DomainError("exit time: radius must be positive");
  PathConfig c = cfg;
  c.t = t_max;
  c.validate();
  const int m = c.steps();
  std::vector<double> tau(static_cast<std::size_t>(c.paths), std::numeric_limits<double>::infinity());
  numeric::parallel_for(tau.size(), [&](std::size_t p) {
    numeric::Rng rng(path_seed(c.seed, p));
    double pos = x;
    for (int k = 1; k <= m; ++k) {
      pos += sample_increment(spec, c.dt, rng, c.eps);
      if (std::abs(pos - x) >= r) {
        tau[p] = k * c.dt;
        return;
      }
    }
  });
  return tau;
}

FKEstimate exit_time_prob(const JumpKernelSpec& spec, double x, double r, double t, const PathConfig& cfg) {
  const auto tau = exit_time_samples(spec, x, r, t, cfg);
  std::vector<double> alive(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) alive[i] = std::isinf(tau[i]) ? 1.0 : 0.0;
  FKEstimate e = summarize(alive);
  e.bias_notes.push_back("exit detected at step resolution; overshoot within a step ignored");
  return e;
}

double median_exit_time(const JumpKernelSpec& spec, double r, double t_max, const PathConfig& cfg) {
  auto tau = exit_time_samples(spec, 0.0, r, t_max, cfg);
  const auto mid = tau.begin() + static_cast<std::ptrdiff_t>(tau.size() / 2);
  std::nth_element(tau.begin(), mid, tau.end());
  if (std::isinf(*mid)) throw DomainError("median exit time: more than half the paths survive t_max");
  return *mid;
}

FKEstimate exit_event_prob(const JumpKernelSpec& spec, double x, double r0, double t1, double t2,
                           const PathConfig& cfg, EventEstimator method) {
  require_simulable(spec);
  if (!(r0 > 0.0)) throw DomainError("exit event: r0 must be positive");
  if (!(t2 >= t1 && t1 >= 0.0)) throw DomainError("exit event: need 0 <= t1 <= t2");
  if (!(std::abs(x) > 1.5 * r0)) throw DomainError("exit event: target B(0, r0/2) must lie outside B(x, r0)");
  PathConfig c = cfg;
  c.t = t2;
  c.validate();
  FKEstimate e;
  e.n = c.paths;
  e.bias_notes.push_back("exit detected at step resolution");
  if (t1 == t2) return e;

  const int m = c.steps();
  const double half = 0.5 * r0;
  std::vector<double> values(static_cast<std::size_t>(c.paths), 0.0);
  numeric::parallel_for(values.size(), [&](std::size_t p) {
    numeric::Rng rng(path_seed(c.seed, p));
    double pos = x, acc = 0.0;
    for (int k = 0; k < m; ++k) {
      const double s = k * c.dt;
      if (method == EventEstimator::forced_jump && s >= t1 - 1e-12 * t2)
        acc += interval_mass(spec, -half - pos, half - pos) * c.dt;
      const double next = pos + sample_increment(spec, c.dt, rng, c.eps);
      if (std::abs(next - x) >= r0) {
        const double tau = (k + 1) * c.dt;
        if (method == EventEstimator::crude && tau >= t1 && tau < t2 + 1e-12 * t2 && std::abs(next) < half) acc = 1.0;
        break;
      }
      pos = next;
    }
    values[p] = acc;
  });
  FKEstimate s = summarize(values);
  s.bias_notes = e.bias_notes;
  if (method == EventEstimator::forced_jump)
    s.bias_notes.push_back("jump intensity into the target integrated by left-endpoint rule");
  return s;
}

ExitEventReport exit_event_report(const JumpKernelSpec& spec, double x, double r0, double t0, const PathConfig& cfg,
                                  EventEstimator method) {
  ExitEventReport rep;
  const double js = kernels::jstar(spec, std::abs(x)).value;
  const double cuts[3] = {0.0, 0.5 * t0, t0};
  for (int w = 0; w < 2; ++w) {
    ExitEventWindow win;
    win.t1 = cuts[w];
    win.t2 = cuts[w + 1];
    PathConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(w);
    win.estimate = exit_event_prob(spec, x, r0, win.t1, win.t2, c, method);
    const double scale = (win.t2 - win.t1) * js;
    win.quotient = win.estimate.value / scale;
    win.quotient_stderr = win.estimate.stderr_ / scale;
    win.too_rare = win.estimate.stderr_ > win.estimate.value;
    rep.windows.push_back(win);
  }
  rep.bounded_below = std::all_of(rep.windows.begin(), rep.windows.end(),
                                  [](const ExitEventWindow& w) { return w.quotient - 3.0 * w.quotient_stderr > 0.0; });
  const auto& a = rep.windows[0];
  const auto& b = rep.windows[1];
  rep.consistent = std::abs(a.quotient - b.quotient) <=
                   3.0 * std::hypot(a.quotient_stderr, b.quotient_stderr);
  return rep;
}

double free_ball_probability(const JumpKernelSpec& spec, double x, double t) {
  if (spec.family != KernelFamily::stable) throw NotAvailable("free ball probability: stable kernels only");
  if (!(t > 0.0)) throw DomainError("free ball probability: t must be positive");
  x = std::abs(x);
  const double sigma = stable_scale(spec, t);
  if (spec.alpha == 1.0) return (std::atan((x + 1.0) / sigma) - std::atan((x - 1.0) / sigma)) / kPi;
  // (2/pi) int_0^inf exp(-(sigma xi)^alpha) sin(xi)/xi cos(x xi) dxi
  const double a = spec.alpha;
  auto g = [&](double xi) {
    const double damp = std::exp(-std::pow(sigma * xi, a));
    const double sinc = xi < 1e-8 ? 1.0 : std::sin(xi) / xi;
    return damp * sinc;
  };
  if (x == 0.0) {
    boost::math::quadrature::ooura_fourier_sin<double> sin_integrator;
    auto h = [&](double xi) { return std::exp(-std::pow(sigma * xi, a)) / xi; };
    return 2.0 / kPi * sin_integrator.integrate(h, 1.0).first;
  }
  boost::math::quadrature::ooura_fourier_cos<double> cos_integrator;
  return 2.0 / kPi * cos_integrator.integrate(g, x).first;
}

namespace {

// P^x(X_t in B(0,1)) through a forced jump landing in B(0,2) at a uniform time.
FKEstimate forced_jump_ball_probability(const JumpKernelSpec& spec, double x, double t, const PathConfig& cfg) {
  std::vector<double> values(static_cast<std::size_t>(cfg.paths));
  numeric::parallel_for(values.size(), [&](std::size_t p) {
    numeric::Rng rng(path_seed(cfg.seed ^ 0x5bd1e995u, p));
    const double s = t * rng.uniform();
    double pos = x, clock = 0.0;
    while (clock + cfg.dt <= s) {
      pos += sample_increment(spec, cfg.dt, rng, cfg.eps);
      clock += cfg.dt;
    }
    if (s > clock) pos += sample_increment(spec, s - clock, rng, cfg.eps);
    const double w = 4.0 * rng.uniform() - 2.0;
    const double weight = t * 4.0 * 2.0 * kernels::radial_density(spec, std::abs(w - pos));
    double y = w;
    clock = s;
    while (clock + cfg.dt <= t) {
      y += sample_increment(spec, cfg.dt, rng, cfg.eps);
      clock += cfg.dt;
    }
    if (t > clock) y += sample_increment(spec, t - clock, rng, cfg.eps);
    values[p] = std::abs(y) < 1.0 ? weight : 0.0;
  });
  FKEstimate e = summarize(values);
  e.bias_notes.push_back("only paths reaching B(0,2) by a single jump are counted");
  return e;
}

}  // namespace

RatioReport iu_ratio_test(const JumpKernelSpec& spec, const PotentialSpec& pot, const std::vector<double>& xs,
                          double t, const PathConfig& cfg) {
  require_simulable(spec);
  if (!(t > 0.0 && t < spec.dim + spec.alpha)) throw DomainError("ratio test: t must lie in (0, d + alpha)");
  RatioReport rep;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    RatioPoint pt;
    pt.x = xs[i];
    const double centre = xs[i];
    PathConfig c = cfg;
    c.seed = cfg.seed + i;
    pt.numerator = feynman_kac(spec, pot, centre, t, [centre](double y) { return std::abs(y - centre) < 1.0 ? 1.0 : 0.0; }, c);
    pt.numerator_lcb = std::max(0.0, pt.numerator.lower());
    if (spec.family == KernelFamily::stable) {
      pt.denominator = free_ball_probability(spec, centre, t);
    } else {
      pt.analytic_denominator = false;
      const FKEstimate d = forced_jump_ball_probability(spec, centre, t, c);
      pt.denominator = d.value;
      pt.denominator_rel_stderr = d.value > 0.0 ? d.stderr_ / d.value : std::numeric_limits<double>::infinity();
    }
    pt.inconclusive = !(pt.numerator_lcb > 0.0) || !(pt.denominator > 0.0) || pt.denominator_rel_stderr > 0.3;
    pt.ratio = pt.inconclusive ? 0.0 : pt.numerator_lcb / pt.denominator;
    rep.points.push_back(pt);
  }
  std::vector<double> ok;
  for (const auto& p : rep.points)
    if (!p.inconclusive) ok.push_back(p.ratio);
  rep.monotone = ok.size() >= 2 && std::is_sorted(ok.begin(), ok.end());
  if (!ok.empty() && !rep.points.front().inconclusive) {
    rep.growth = 0.0;
    for (std::size_t k = 1; k < ok.size(); ++k) rep.growth = std::max(rep.growth, ok[k] / ok[0]);
  }
  return rep;
}

ScalingTest stable_scaling_test(const JumpKernelSpec& spec, double dt1, double dt2, std::int64_t n,
                                std::uint64_t seed, double level) {
  if (spec.family != KernelFamily::stable) throw DomainError("scaling test: stable kernels only");
  const double factor = std::pow(dt2 / dt1, 1.0 / spec.alpha);
  std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  numeric::parallel_for(a.size(), [&](std::size_t i) {
    numeric::Rng r1(path_seed(seed, 2 * i));
    numeric::Rng r2(path_seed(seed, 2 * i + 1));
    a[i] = factor * sample_increment(spec, dt1, r1);
    b[i] = sample_increment(spec, dt2, r2);
  });
  const auto ks = numeric::ks_two_sample(std::move(a), std::move(b));
  return {ks.statistic, ks.p_value, ks.p_value >= level};
}

ScalingTest exit_scaling_test(const JumpKernelSpec& spec, double r, double t_max, const PathConfig& cfg,
                              double level) {
  if (spec.family != KernelFamily::stable) throw DomainError("scaling test: stable kernels only");
  const double scale = std::pow(r, spec.alpha);
  PathConfig c1 = cfg, cr = cfg;
  cr.dt = cfg.dt * scale;
  cr.seed = cfg.seed + 1;
  auto t1 = exit_time_samples(spec, 0.0, 1.0, t_max, c1);
  auto tr = exit_time_samples(spec, 0.0, r, t_max * scale, cr);
  // Compare step indices so that both samples live on the same lattice.
  for (auto& v : t1) v = std::isinf(v) ? v : std::round(v / c1.dt);
  for (auto& v : tr) v = std::isinf(v) ? v : std::round(v / cr.dt);
  const auto ks = numeric::ks_two_sample(std::move(t1), std::move(tr));
  return {ks.statistic, ks.p_value, ks.p_value >= level};
}

}  // namespace fkc::montecarlo
