#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fkc/kernels.hpp"
#include "fkc/rate_function.hpp"

namespace fkc::criteria {

using kernels::JumpKernelSpec;
using kernels::PotentialSpec;

/// Phi(s) = inf_{|x| >= s} V(x) - inf V for radial potentials diverging at
/// infinity. Irregular potentials raise NotAvailable (use irregular_rates).
RateFunction big_phi(const PotentialSpec& pot);

/// Lower weight used by alpha(r,s): log_inf(log R) = log inf_{|x| <= R} phi(x).
struct Weight {
  std::function<double(double)> log_inf;
};
/// phi = J* / (1 + V*) from the kernel and potential.
Weight phi_weight(const JumpKernelSpec& spec, const PotentialSpec& pot);
Weight constant_weight(double value);

/// log alpha(r, s) with r = exp(log_r): infimum over feasible t <= r of
/// 2 / (|B(0,t)| inf_{B(0,r+t)} phi^2), feasibility 2 / (rho(t) |B(0,t)|) <= s.
double log_alpha_rs(const JumpKernelSpec& spec, const Weight& w, double log_r, double s);
double alpha_rs(const JumpKernelSpec& spec, const Weight& w, double r, double s);

/// beta(s) = d1 alpha(Phi^{-1}(4/(s ^ d2)), (s ^ d2)/4), exponent fitted.
RateFunction beta_rate(const JumpKernelSpec& spec, const PotentialSpec& pot, const Deltas& deltas = {});

struct IrregularRates {
  RateFunction phi_k;    // inf over {|x| >= R, V > K} of V, shifted so inf is 0
  RateFunction theta_k;  // |{|x| >= R, V <= K}|
  RateFunction psi_k;    // [1/Phi_K + d4 Theta_K^(alpha1/d)]^{-1}
};
IrregularRates irregular_rates(const JumpKernelSpec& spec, const PotentialSpec& pot, double delta4 = 1.0);

/// beta_hat(s) = d1 alpha(Psi_K^{-1}(8/(s ^ d2)) v d3, (s ^ d2)/8), exponent fitted.
RateFunction beta_hat_rate(const JumpKernelSpec& spec, const PotentialSpec& pot, const Deltas& deltas = {});

struct DeltaRun {
  Deltas deltas;
  double p = 0.0;
  bool iu = false;
  bool is = false;
  bool ih = false;
};

struct ContractivityVerdict {
  bool iu = false;  // intrinsically ultracontractive (sufficient condition met)
  bool is = false;  // intrinsically supercontractive
  bool ih = false;  // intrinsically hypercontractive
  std::string route;   // "beta" or "beta_hat"
  std::string path;    // "fit" or "fallback"
  ExponentFit fit;
  double tail_integral = 0.0;
  bool tail_converged = false;
  double lim_estimate = 0.0;     // estimate of lim_{s->0} s log beta(s)
  double limsup_estimate = 0.0;  // max of s log beta(s) over the smallest decade
  bool inconclusive = false;
  bool delta_stable = true;
  std::vector<DeltaRun> scan;
  std::string notes;
};

struct TestOptions {
  double boundary_band = 0.02;  // |p - 1| below this is the critical case
  bool delta_scan = true;
  std::vector<double> delta_values{0.1, 1.0, 10.0};
  FitOptions fit;
};

ContractivityVerdict contractivity_tests(const RateFunction& f, const TestOptions& opt = {});

/// Verifies the standing assumptions, then routes regular potentials through
/// beta and irregular ones through beta_hat.
ContractivityVerdict classify(const JumpKernelSpec& spec, const PotentialSpec& pot, const TestOptions& opt = {});

}  // namespace fkc::criteria
