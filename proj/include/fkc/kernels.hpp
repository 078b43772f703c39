#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fkc/potential.hpp"

namespace fkc::kernels {

enum class KernelFamily { stable, tempered, truncated, custom_radial };

/// Tabulated radial jump profile. Interpolated log-log linearly, so every
/// interval between two nodes is a monotone power-law segment; extended below
/// the first and above the last node with the adjacent segment's exponent.
struct RadialProfile {
  std::vector<double> radius;
  std::vector<double> value;
};

/// Radial jump kernel J(x,y) = rho(|x-y|).
///
/// stable:    rho(u) = cnorm * u^(-d-alpha)
/// tempered:  rho(u) = cnorm * u^(-d-alpha) for u <= 1, cnorm * exp(-u^gamma) beyond
/// truncated: rho(u) = cnorm * u^(-d-alpha) for u <= 1, 0 beyond
/// Small-jump bounds c1 u^(-d-alpha1) <= rho(u) <= c2 u^(-d-alpha2) are claimed
/// for 0 < u <= kappa.
struct JumpKernelSpec {
  KernelFamily family = KernelFamily::stable;
  int dim = 1;
  double alpha = 1.0;
  double gamma = 1.0;
  double kappa = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double cnorm = 1.0;
  RadialProfile profile;
};

/// alpha 2^(alpha-1) Gamma((d+alpha)/2) / (pi^(d/2) Gamma(1-alpha/2)).
double stable_normalization(int d, double alpha);

JumpKernelSpec stable_kernel(int d, double alpha, std::optional<double> cnorm = std::nullopt);
JumpKernelSpec tempered_kernel(int d, double alpha, double gamma, double cnorm = 1.0);
JumpKernelSpec truncated_kernel(int d, double alpha, double cnorm = 1.0);
JumpKernelSpec custom_kernel(int d, RadialProfile profile, double alpha1, double alpha2, double c1,
                             double c2, double kappa = 1.0);

void validate(const JumpKernelSpec& spec);
std::string family_name(KernelFamily f);

/// Strict positivity of J for all jump sizes.
bool has_infinite_range(const JumpKernelSpec& spec);
bool is_radially_nonincreasing(const JumpKernelSpec& spec);

double radial_density(const JumpKernelSpec& spec, double u);
double log_radial_density(const JumpKernelSpec& spec, double log_u);
/// rho(z) for a displacement z; z = 0 is a DomainError.
double eval_kernel(const JumpKernelSpec& spec, std::span<const double> z);
double eval_kernel(const JumpKernelSpec& spec, double z);

/// int_a^inf rho(u) du, the one-sided tail of the radial profile (a > 0).
double one_sided_tail(const JumpKernelSpec& spec, double a);
/// int_0^a u^2 rho(u) du.
double truncated_second_moment(const JumpKernelSpec& spec, double a);
/// log inf { rho(u) : a <= u <= b }, arguments as logs.
double log_inf_on_shell(const JumpKernelSpec& spec, double log_a, double log_b);

/// J* and the derived weight phi = J* / (1 + V*).
struct FieldValue {
  double value = 0.0;
  double log_value = 0.0;
  bool zero = false;  // degenerate: truncated kernel far from the origin
};
FieldValue jstar(const JumpKernelSpec& spec, double radius);
FieldValue jstar(const JumpKernelSpec& spec, std::span<const double> x);
/// log J* at |x| = exp(log_radius).
double log_jstar(const JumpKernelSpec& spec, double log_radius);
FieldValue phi_lower(const JumpKernelSpec& spec, const PotentialSpec& pot, std::span<const double> x);
FieldValue phi_lower(const JumpKernelSpec& spec, const PotentialSpec& pot, double x);

struct SamplingPlan {
  int small_jump_samples = 64;
  double smallest_radius_fraction = 1e-6;  // of kappa
  std::vector<double> sublevel_levels{1.0, 10.0, 100.0};
};

struct ConditionCheck {
  std::string condition;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  ConditionCheck small_jump{"(1.1)", true, {}};
  double fitted_order = 0.0;  // exponent a in rho(u) ~ u^(-d-a) on (0, kappa]
  ConditionCheck positivity{"(1.2)", true, {}};
  ConditionCheck tail{"(1.3)", true, {}};
  double tail_mass = 0.0;
  double tail_error = 0.0;
  ConditionCheck sublevel{"(1.4)", true, {}};
  std::vector<double> log_sublevel_measure;  // per plan level

  bool all_passed() const;
  /// Throws AssumptionError naming the first violated condition.
  void require() const;
  std::vector<const ConditionCheck*> checks() const;
};

ValidationReport verify_assumptions(const JumpKernelSpec& spec, const PotentialSpec& pot,
                                    const SamplingPlan& plan = {});

}  // namespace fkc::kernels
