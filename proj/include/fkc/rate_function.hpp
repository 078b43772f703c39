#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace fkc::criteria {

enum class Monotonicity { non_decreasing, non_increasing };

/// Constants of the rate formulas.
struct Deltas {
  double d1 = 1.0;
  double d2 = 1.0;
  double d3 = 1.0;
  double d4 = 1.0;
};

/// Result of fitting log f(s) = A s^(-p) + B log(1/s) + C on s in [1e-6, 1e-1].
struct ExponentFit {
  double p = 0.0;
  double amplitude = 0.0;     // A
  double log_coefficient = 0.0;  // B
  double offset = 0.0;        // C
  double misfit = 0.0;        // weighted RMS residual relative to |log f|
  double loglog_slope = 0.0;  // plain slope of log log f against log(1/s)
  double r_squared = 0.0;     // of the plain log-log regression
  bool curvature = false;     // model does not describe the samples
  bool bounded = false;       // f stays bounded (or polynomial) as s -> 0
};

class RateFunction;
using Rebuild = std::function<RateFunction(const Deltas&)>;

/// A monotone function of one positive variable, evaluated entirely in log
/// space: log_value(log x) = log f(x). Arguments as small as exp(-700) and as
/// large as exp(1e15) are representable.
class RateFunction {
 public:
  using LogMap = std::function<double(double)>;

  RateFunction() = default;
  RateFunction(std::string name, Monotonicity mono, LogMap log_value);

  const std::string& name() const { return name_; }
  Monotonicity monotonicity() const { return mono_; }

  double log_value(double log_x) const { return log_value_(log_x); }
  /// f(x); may overflow to infinity for rates like beta.
  double operator()(double x) const;

  /// Closed-form generalized inverse, log r -> log inf{x : f(x) >= r}.
  const std::optional<LogMap>& closed_inverse() const { return inverse_; }
  RateFunction& with_inverse(LogMap inv);

  /// Evaluation domain in log-argument, [lo, hi]; generalized inverses beyond
  /// hi raise DomainError.
  double log_domain_lo() const { return lo_; }
  double log_domain_hi() const { return hi_; }
  RateFunction& with_domain(double log_lo, double log_hi);

  /// Free-form description of the constants and formula that produced it.
  const std::string& provenance() const { return provenance_; }
  RateFunction& with_provenance(std::string p);

  const std::optional<ExponentFit>& exponent() const { return exponent_; }
  RateFunction& with_exponent(ExponentFit fit);

  /// Rebuilds the same rate with other constants (used by the delta scan).
  const Rebuild& rebuild() const { return rebuild_; }
  RateFunction& with_rebuild(Rebuild r);

  bool valid() const { return static_cast<bool>(log_value_); }

 private:
  std::string name_;
  Monotonicity mono_ = Monotonicity::non_decreasing;
  LogMap log_value_;
  std::optional<LogMap> inverse_;
  double lo_ = -745.0;
  double hi_ = 1e300;
  std::string provenance_;
  std::optional<ExponentFit> exponent_;
  Rebuild rebuild_;
};

/// log of inf{x >= 0 : f(x) >= r} for non-decreasing f; -inf when f(0) >= r.
/// Uses the closed form when present, else bisection in log x to relative
/// tolerance 1e-10.
double log_gen_inverse(const RateFunction& f, double log_r);
double gen_inverse(const RateFunction& f, double r);

/// log of inf{s > 0 : f(s) <= u} for non-increasing f (beta^{-1}).
double log_decreasing_inverse(const RateFunction& f, double log_u);

struct FitOptions {
  double s_lo = 1e-6;
  double s_hi = 1e-1;
  int points = 64;
  double p_lo = 0.02;
  double p_hi = 6.0;
  double curvature_threshold = 1e-3;
};

ExponentFit asymptotic_exponent(const RateFunction& f, const FitOptions& opt = {});

}  // namespace fkc::criteria
