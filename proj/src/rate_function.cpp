#include "fkc/rate_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "fkc/errors.hpp"
#include "fkc/numeric.hpp"

namespace fkc::criteria {

using numeric::kInf;

RateFunction::RateFunction(std::string name, Monotonicity mono, LogMap log_value)
    : name_(std::move(name)), mono_(mono), log_value_(std::move(log_value)) {}

double RateFunction::operator()(double x) const {
  if (!(x >= 0.0)) throw DomainError("rate function: negative argument");
  return std::exp(log_value_(std::log(x)));
}

RateFunction& RateFunction::with_inverse(LogMap inv) {
  inverse_ = std::move(inv);
  return *this;
}

RateFunction& RateFunction::with_domain(double log_lo, double log_hi) {
  lo_ = log_lo;
  hi_ = log_hi;
  return *this;
}

RateFunction& RateFunction::with_provenance(std::string p) {
  provenance_ = std::move(p);
  return *this;
}

RateFunction& RateFunction::with_exponent(ExponentFit fit) {
  exponent_ = fit;
  return *this;
}

RateFunction& RateFunction::with_rebuild(Rebuild r) {
  rebuild_ = std::move(r);
  return *this;
}

namespace {

bool close_enough(double a, double b) {
  return b - a <= std::max(1e-10, 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)));
}

// Smallest x in [lo, hi] (log scale) with pred(x) true, assuming pred is
// monotone false -> true. Returns -inf if pred(lo), +inf if never true.
template <class Pred>
double first_true(Pred pred, double lo, double hi) {
  if (pred(lo)) return -kInf;
  double x0 = std::clamp(0.0, lo, hi);
  double a, b;
  if (pred(x0)) {
    b = x0;
    double step = 1.0;
    for (;;) {
      a = std::max(lo, x0 - step);
      if (!pred(a)) break;
      b = a;
      step *= 2.0;
    }
  } else {
    a = x0;
    double step = 1.0;
    for (;;) {
      b = x0 + step;
      if (b >= hi) {
        if (!pred(hi)) return kInf;
        b = hi;
        break;
      }
      if (pred(b)) break;
      a = b;
      step *= 2.0;
    }
  }
  while (!close_enough(a, b)) {
    const double m = 0.5 * (a + b);
    if (pred(m))
      b = m;
    else
      a = m;
  }
  return b;
}

}  // namespace

double log_gen_inverse(const RateFunction& f, double log_r) {
  if (f.monotonicity() != Monotonicity::non_decreasing)
    throw DomainError("generalized inverse needs a non-decreasing function");
  if (f.closed_inverse()) return (*f.closed_inverse())(log_r);
  const double x = first_true([&](double lx) { return f.log_value(lx) >= log_r; }, f.log_domain_lo(), f.log_domain_hi());
  if (x == kInf) throw DomainError("generalized inverse unbounded: " + f.name() + " never reaches the level");
  return x;
}

double gen_inverse(const RateFunction& f, double r) {
  if (r <= 0.0) return 0.0;
  return std::exp(log_gen_inverse(f, std::log(r)));
}

double log_decreasing_inverse(const RateFunction& f, double log_u) {
  if (f.monotonicity() != Monotonicity::non_increasing)
    throw DomainError("decreasing inverse needs a non-increasing function");
  return first_true([&](double ls) { return f.log_value(ls) <= log_u; }, f.log_domain_lo(), f.log_domain_hi());
}

namespace {

struct Sample {
  std::vector<double> x;  // log(1/s)
  std::vector<double> y;  // log f(s)
  std::vector<double> w;  // residual weights
};

struct ModelFit {
  double rss = kInf;
  double a = 0.0, b = 0.0, c = 0.0;
};

ModelFit fit_at(const Sample& smp, double p) {
  const std::size_t n = smp.x.size();
  Eigen::MatrixXd m(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, 0) = smp.w[i] * std::exp(p * smp.x[i]);
    m(i, 1) = smp.w[i] * smp.x[i];
    m(i, 2) = smp.w[i];
    rhs(i) = smp.w[i] * smp.y[i];
  }
  Eigen::Vector3d scale = m.colwise().norm().transpose();
  for (int j = 0; j < 3; ++j)
    if (scale(j) > 0.0) m.col(j) /= scale(j);
  Eigen::Vector3d coef = m.colPivHouseholderQr().solve(rhs);
  ModelFit out;
  out.rss = (m * coef - rhs).squaredNorm();
  out.a = coef(0) / scale(0);
  out.b = coef(1) / scale(1);
  out.c = coef(2) / scale(2);
  return out;
}

}  // namespace

ExponentFit asymptotic_exponent(const RateFunction& f, const FitOptions& opt) {
  const auto grid = numeric::geometric_grid(opt.s_lo, opt.s_hi, static_cast<std::size_t>(opt.points));
  Sample smp;
  double ymax = 0.0;
  for (double s : grid) {
    const double y = f.log_value(std::log(s));
    if (!std::isfinite(y)) throw SolverError("exponent fit: " + f.name() + " not finite at s=" + std::to_string(s));
    smp.x.push_back(-std::log(s));
    smp.y.push_back(y);
    ymax = std::max(ymax, std::abs(y));
  }
  for (double y : smp.y) smp.w.push_back(1.0 / std::max(1.0, std::abs(y)));

  ExponentFit out;
  // Plain log-log slope on the samples where log f > 0.
  {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < smp.x.size(); ++i)
      if (smp.y[i] > 0.0) {
        lx.push_back(std::log(smp.x[i]));
        ly.push_back(std::log(smp.y[i]));
      }
    if (lx.size() >= 3) {
      // Regress against log(1/s), not log log(1/s).
      std::vector<double> xs;
      for (double v : lx) xs.push_back(std::exp(v));
      const auto lf = numeric::linear_fit(xs, ly);
      out.loglog_slope = lf.slope;
      out.r_squared = lf.r_squared;
    }
  }

  const double spread = *std::max_element(smp.y.begin(), smp.y.end()) - *std::min_element(smp.y.begin(), smp.y.end());
  if (spread <= 1e-9 * std::max(1.0, ymax)) {
    out.bounded = true;
    return out;
  }

  // Coarse scan over p then golden-section refinement.
  const int coarse = 120;
  std::vector<double> ps(coarse + 1), rss(coarse + 1);
  for (int k = 0; k <= coarse; ++k) {
    ps[k] = opt.p_lo + (opt.p_hi - opt.p_lo) * k / coarse;
    rss[k] = fit_at(smp, ps[k]).rss;
  }
  const int best = static_cast<int>(std::min_element(rss.begin(), rss.end()) - rss.begin());
  double a = ps[std::max(0, best - 1)], b = ps[std::min(coarse, best + 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = fit_at(smp, x1).rss, f2 = fit_at(smp, x2).rss;
  while (b - a > 1e-9) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = fit_at(smp, x1).rss;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = fit_at(smp, x2).rss;
    }
  }
  const double p = 0.5 * (a + b);
  const ModelFit mf = fit_at(smp, p);
  out.p = p;
  out.amplitude = mf.a;
  out.log_coefficient = mf.b;
  out.offset = mf.c;
  out.misfit = std::sqrt(mf.rss / static_cast<double>(smp.x.size()));

  // The exponential part must carry the growth; otherwise f is at most polynomial.
  const double xmax = smp.x.front();
  const double expo_part = mf.a * std::exp(p * xmax);
  const double at_edge = p <= opt.p_lo + 1e-3;
  if (std::abs(expo_part) < 1e-3 * std::abs(smp.y.front()) || (at_edge && mf.a > 0.0)) {
    out.bounded = true;
    out.p = 0.0;
  }
  out.curvature = out.misfit > opt.curvature_threshold || mf.a < 0.0 || p >= opt.p_hi - 1e-3;
  return out;
}

}  // namespace fkc::criteria
