#include "fkc/potential.hpp"

#include <algorithm>
#include <cmath>

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

double table_value(const PotentialTable& t, double u) {
  const auto& r = t.radius;
  const auto& v = t.value;
  if (r.size() == 1) return v[0];
  if (u <= r.front()) {
    return v[0];
  }
  auto it = std::upper_bound(r.begin(), r.end(), u);
  std::size_t k = (it == r.end()) ? r.size() - 1 : static_cast<std::size_t>(it - r.begin());
  const double s = (v[k] - v[k - 1]) / (r[k] - r[k - 1]);
  return std::max(0.0, v[k - 1] + s * (u - r[k - 1]));
}

double table_last_slope(const PotentialTable& t) {
  const std::size_t n = t.radius.size();
  if (n < 2) return 0.0;
  return (t.value[n - 1] - t.value[n - 2]) / (t.radius[n - 1] - t.radius[n - 2]);
}

// sup of the piecewise-linear table over [a, b].
double table_sup(const PotentialTable& t, double a, double b) {
  double best = std::max(table_value(t, a), table_value(t, b));
  for (std::size_t k = 0; k < t.radius.size(); ++k)
    if (t.radius[k] >= a && t.radius[k] <= b) best = std::max(best, t.value[k]);
  return best;
}

// Candidate ball indices whose centre lies near |x_m| = r.
std::vector<int> ball_candidates(const ExceptionalSet& set, double r) {
  std::vector<int> out{1, 2, 3};
  if (r > 1.0) {
    const double m = std::pow(std::log(r), 1.0 / set.k0);
    const int lo = std::max(1, static_cast<int>(std::floor(m)) - 1);
    for (int k = lo; k <= lo + 3; ++k)
      if (k > 3) out.push_back(k);
  }
  return out;
}

// Sum_{m >= M} m^(-s), s > 1: a few explicit terms then Euler-Maclaurin.
double power_tail_sum(double M, double s) {
  double total = 0.0;
  double m = M;
  for (int i = 0; i < 16; ++i, m += 1.0) total += std::pow(m, -s);
  total += std::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(m, -s) + s * std::pow(m, -s - 1.0) / 12.0 -
           s * (s + 1.0) * (s + 2.0) * std::pow(m, -s - 3.0) / 720.0;
  return total;
}

}  // namespace

PotentialSpec power_potential(double lambda) {
  PotentialSpec p;
  p.family = PotentialFamily::power;
  p.lambda = lambda;
  validate(p);
  return p;
}

PotentialSpec logpower_potential(double lambda) {
  PotentialSpec p;
  p.family = PotentialFamily::logpower;
  p.lambda = lambda;
  validate(p);
  return p;
}

PotentialSpec constant_potential(double value) {
  PotentialSpec p;
  p.family = PotentialFamily::constant;
  p.level = value;
  validate(p);
  return p;
}

PotentialSpec custom_potential(PotentialTable table) {
  PotentialSpec p;
  p.family = PotentialFamily::custom_radial;
  p.table = std::move(table);
  validate(p);
  return p;
}

PotentialSpec irregular_potential(PotentialFamily base, double lambda, ExceptionalSet set, double level,
                                  double K) {
  PotentialSpec p;
  p.family = PotentialFamily::irregular;
  p.base = base;
  p.lambda = lambda;
  p.exceptional = set;
  p.level = level;
  p.K = K;
  validate(p);
  return p;
}

ExceptionalSet ball_union_set(int dim, double alpha, double k0) {
  ExceptionalSet s;
  s.kind = ExceptionalKind::ball_union;
  s.dim = dim;
  s.alpha = alpha;
  s.k0 = k0;
  validate(s);
  return s;
}

ExceptionalSet envelope_set(int dim, double c, double theta) {
  ExceptionalSet s;
  s.kind = ExceptionalKind::envelope;
  s.dim = dim;
  s.has_envelope = true;
  s.envelope_c = c;
  s.envelope_theta = theta;
  validate(s);
  return s;
}

void validate(const ExceptionalSet& set) {
  if (set.dim < 1) throw DomainError("exceptional set: dimension must be positive");
  if (set.kind == ExceptionalKind::ball_union) {
    if (!(set.alpha > 0.0 && set.alpha < 2.0)) throw DomainError("exceptional set: alpha must lie in (0,2)");
    if (!(set.k0 > 0.0)) throw DomainError("exceptional set: k0 must be positive");
    if (!(set.k0 / set.alpha > 1.0 / set.dim))
      throw DomainError("exceptional set: radii increase unless k0/alpha > 1/d");
  }
  if (set.kind == ExceptionalKind::envelope && !set.has_envelope)
    throw DomainError("exceptional set: envelope representation needs an envelope");
  if (set.has_envelope && !(set.envelope_c > 0.0 && set.envelope_theta > 0.0))
    throw DomainError("exceptional set: envelope constants must be positive");
}

void validate(const PotentialSpec& pot) {
  switch (pot.family) {
    case PotentialFamily::power:
    case PotentialFamily::logpower:
      if (!(pot.lambda > 0.0)) throw DomainError("potential: lambda must be positive");
      break;
    case PotentialFamily::constant:
      if (!(pot.level >= 0.0) || !std::isfinite(pot.level))
        throw DomainError("potential: constant must be finite and non-negative");
      break;
    case PotentialFamily::custom_radial: {
      const auto& t = pot.table;
      if (t.radius.empty() || t.radius.size() != t.value.size())
        throw DomainError("potential: table needs matching non-empty radius/value columns");
      for (std::size_t k = 0; k < t.radius.size(); ++k) {
        if (!(t.value[k] >= 0.0) || !std::isfinite(t.value[k]))
          throw DomainError("potential: table values must be finite and non-negative");
        if (!(t.radius[k] >= 0.0) || (k > 0 && !(t.radius[k] > t.radius[k - 1])))
          throw DomainError("potential: table radii must be non-negative and increasing");
      }
      break;
    }
    case PotentialFamily::irregular:
      if (!(pot.lambda > 0.0)) throw DomainError("potential: lambda must be positive");
      if (pot.base != PotentialFamily::logpower && pot.base != PotentialFamily::power)
        throw DomainError("potential: irregular base must be power or logpower");
      if (!(pot.level >= 0.0) || !std::isfinite(pot.level))
        throw DomainError("potential: level must be finite and non-negative");
      if (!(pot.K >= 0.0)) throw DomainError("potential: K must be non-negative");
      if (pot.exceptional.kind == ExceptionalKind::none)
        throw DomainError("potential: irregular family needs an exceptional set");
      validate(pot.exceptional);
      break;
  }
}

bool is_radial(const PotentialSpec& pot) { return pot.family != PotentialFamily::irregular; }

bool diverges_at_infinity(const PotentialSpec& pot) {
  switch (pot.family) {
    case PotentialFamily::power:
    case PotentialFamily::logpower:
      return true;
    case PotentialFamily::constant:
    case PotentialFamily::irregular:
      return false;
    case PotentialFamily::custom_radial:
      return table_last_slope(pot.table) > 0.0;
  }
  return false;
}

double radial_value(const PotentialSpec& pot, double u) {
  if (u < 0.0) throw DomainError("potential: negative radius");
  PotentialFamily f = pot.family == PotentialFamily::irregular ? pot.base : pot.family;
  switch (f) {
    case PotentialFamily::power:
      return std::pow(u, pot.lambda);
    case PotentialFamily::logpower:
      return std::pow(std::log1p(u), pot.lambda);
    case PotentialFamily::constant:
      return pot.level;
    case PotentialFamily::custom_radial:
      return table_value(pot.table, u);
    case PotentialFamily::irregular:
      break;
  }
  throw DomainError("potential: unsupported base family");
}

double potential_value(const PotentialSpec& pot, std::span<const double> x) {
  if (pot.family == PotentialFamily::irregular) {
    if (pot.exceptional.kind == ExceptionalKind::envelope)
      throw NotAvailable("potential: envelope-only exceptional set has no membership test");
    if (contains(pot.exceptional, x)) return pot.level;
  }
  return radial_value(pot, norm(x));
}

double potential_value(const PotentialSpec& pot, double x) { return potential_value(pot, std::span<const double>(&x, 1)); }

double log1p_vstar_radial(const PotentialSpec& pot, double log_radius) {
  PotentialFamily f = pot.family == PotentialFamily::irregular ? pot.base : pot.family;
  const double log_r1 = numeric::log_add_exp(log_radius, 0.0);  // log(R + 1)
  switch (f) {
    case PotentialFamily::power:
      return numeric::softplus(pot.lambda * log_r1);
    case PotentialFamily::logpower: {
      const double log_r2 = numeric::log_add_exp(log_radius, std::log(2.0));
      return numeric::softplus(pot.lambda * std::log(log_r2));
    }
    case PotentialFamily::constant:
      return std::log1p(pot.level);
    case PotentialFamily::custom_radial: {
      if (log_radius < 600.0) {
        const double r = std::exp(log_radius);
        return std::log1p(table_sup(pot.table, std::max(0.0, r - 1.0), r + 1.0));
      }
      const double s = table_last_slope(pot.table);
      if (s <= 0.0) return std::log1p(table_sup(pot.table, pot.table.radius.back(), pot.table.radius.back()));
      return std::log(s) + log_radius;
    }
    case PotentialFamily::irregular:
      break;
  }
  throw DomainError("potential: unsupported base family");
}

double vstar(const PotentialSpec& pot, std::span<const double> x) {
  const double r = norm(x);
  double v = std::expm1(log1p_vstar_radial(pot, std::log(r)));
  if (pot.family == PotentialFamily::custom_radial)
    v = table_sup(pot.table, std::max(0.0, r - 1.0), r + 1.0);
  if (pot.family == PotentialFamily::irregular && pot.exceptional.kind == ExceptionalKind::ball_union) {
    // Exact: the level is attained iff the unit ball meets one of the balls of A.
    const auto& set = pot.exceptional;
    for (int m : ball_candidates(set, r)) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = i == 0 ? ball_union_center(set, m) : 0.0;
        d2 += (x[i] - c) * (x[i] - c);
      }
      if (std::sqrt(d2) <= 1.0 + ball_union_radius(set, m)) v = std::max(v, pot.level);
    }
    if (x.size() == 1) v = std::max(v, vstar_sampled(pot, x[0]));
  }
  return v;
}

double vstar(const PotentialSpec& pot, double x) { return vstar(pot, std::span<const double>(&x, 1)); }

double vstar_sampled(const PotentialSpec& pot, double x, int samples) {
  if (samples < 2) throw DomainError("vstar_sampled: need at least two samples");
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double y = x - 1.0 + 2.0 * i / (samples - 1);
    best = std::max(best, potential_value(pot, y));
  }
  return best;
}

double ball_union_center(const ExceptionalSet& set, double m) { return std::exp(std::pow(m, set.k0)); }

double ball_union_radius(const ExceptionalSet& set, double m) {
  return std::pow(m, -set.k0 / set.alpha + 1.0 / set.dim);
}

bool contains(const ExceptionalSet& set, std::span<const double> x) {
  if (set.kind == ExceptionalKind::none) return false;
  if (set.kind == ExceptionalKind::envelope)
    throw NotAvailable("exceptional set: envelope representation has no membership test");
  const double r = norm(x);
  for (int m : ball_candidates(set, r)) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double c = i == 0 ? ball_union_center(set, m) : 0.0;
      d2 += (x[i] - c) * (x[i] - c);
    }
    if (std::sqrt(d2) < ball_union_radius(set, m)) return true;
  }
  return false;
}

double envelope_value(const ExceptionalSet& set, double log_radius) {
  if (!set.has_envelope) throw NotAvailable("exceptional set: no envelope supplied");
  const double l = numeric::log_add_exp(log_radius, 0.0);
  return set.envelope_c * std::pow(l, -set.envelope_theta);
}

double exceptional_tail_measure(const ExceptionalSet& set, double log_radius) {
  switch (set.kind) {
    case ExceptionalKind::none:
      return 0.0;
    case ExceptionalKind::envelope:
      return envelope_value(set, log_radius);
    case ExceptionalKind::ball_union: {
      const double s = set.dim * set.k0 / set.alpha - 1.0;  // r_m^d = m^(-s)
      if (!(s > 1.0)) return kInf;
      // First ball reaching beyond R: log(e^{m^k0} + r_m) > log R.
      auto reaches = [&](double m) {
        return numeric::log_add_exp(std::pow(m, set.k0), std::log(ball_union_radius(set, m))) >
               log_radius;
      };
      double m = 1.0;
      if (log_radius > 1.0) m = std::max(1.0, std::floor(std::pow(log_radius, 1.0 / set.k0)) - 2.0);
      while (!reaches(m)) m += std::max(1.0, m * 1e-15);
      return numeric::unit_ball_volume(set.dim) * power_tail_sum(m, s);
    }
  }
  return 0.0;
}

}  // namespace fkc::kernels
