#pragma once

#include <span>
#include <vector>

namespace fkc::kernels {

enum class PotentialFamily { power, logpower, irregular, custom_radial, constant };

enum class ExceptionalKind { none, ball_union, envelope };

/// Unbounded low-potential region A.
///
/// ball_union: A = union of B(x_m, r_m), m >= 1, with |x_m| = exp(m^k0) placed
/// on the positive first axis and r_m = m^(-k0/alpha + 1/d).
/// envelope:   only an upper bound R -> c * log^(-theta)(1+R) on |A \ B(0,R)|
/// is known; membership is then undefined.
struct ExceptionalSet {
  ExceptionalKind kind = ExceptionalKind::none;
  int dim = 1;
  double alpha = 1.0;
  double k0 = 2.0;
  bool has_envelope = false;
  double envelope_c = 1.0;
  double envelope_theta = 1.0;
};

/// Tabulated radial potential, linear in |x| between nodes and extended with
/// the last slope.
struct PotentialTable {
  std::vector<double> radius;
  std::vector<double> value;
};

struct PotentialSpec {
  PotentialFamily family = PotentialFamily::power;
  double lambda = 1.0;
  PotentialFamily base = PotentialFamily::logpower;  // irregular only
  ExceptionalSet exceptional;                        // irregular only
  double level = 1.0;  // irregular: V on A; constant: the constant
  double K = 1.0;      // threshold of the low-potential assumption
  PotentialTable table;
};

PotentialSpec power_potential(double lambda);
PotentialSpec logpower_potential(double lambda);
PotentialSpec constant_potential(double value);
PotentialSpec custom_potential(PotentialTable table);
/// V = base^lambda off A, `level` on A.
PotentialSpec irregular_potential(PotentialFamily base, double lambda, ExceptionalSet set,
                                  double level = 1.0, double K = 1.0);

ExceptionalSet ball_union_set(int dim, double alpha, double k0);
ExceptionalSet envelope_set(int dim, double c, double theta);

/// Throws DomainError on inconsistent parameters.
void validate(const PotentialSpec& pot);
void validate(const ExceptionalSet& set);

bool is_radial(const PotentialSpec& pot);
/// True when V(x) -> infinity as |x| -> infinity.
bool diverges_at_infinity(const PotentialSpec& pot);

/// Radial value of the regular branch at |x| = u (base branch for irregular).
double radial_value(const PotentialSpec& pot, double u);
/// V(x) at a point; irregular-envelope potentials have no geometry and throw
/// NotAvailable.
double potential_value(const PotentialSpec& pot, std::span<const double> x);
double potential_value(const PotentialSpec& pot, double x);

/// sup of V over the closed unit ball at x.
double vstar(const PotentialSpec& pot, std::span<const double> x);
double vstar(const PotentialSpec& pot, double x);
/// Maximum of V over `samples` evenly spaced points of [x-1, x+1] (d = 1).
double vstar_sampled(const PotentialSpec& pot, double x, int samples = 200);
/// log(1 + V*(R)) for the radial branch at |x| = exp(log_radius).
double log1p_vstar_radial(const PotentialSpec& pot, double log_radius);

// Exceptional-set geometry.
double ball_union_center(const ExceptionalSet& set, double m);
double ball_union_radius(const ExceptionalSet& set, double m);
bool contains(const ExceptionalSet& set, std::span<const double> x);
/// Upper estimate of |A \ B(0,R)| for R = exp(log_radius): ball-union sums the
/// volumes of every ball reaching beyond R, envelope returns the envelope.
double exceptional_tail_measure(const ExceptionalSet& set, double log_radius);
/// Envelope value at R = exp(log_radius).
double envelope_value(const ExceptionalSet& set, double log_radius);

}  // namespace fkc::kernels
