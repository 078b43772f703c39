#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fkc/kernels.hpp"

namespace fkc::spectral {

using kernels::JumpKernelSpec;
using kernels::PotentialSpec;

/// n odd cells of width h = 2L/n covering [-L, L]; node i sits at the cell
/// centre -L + (i + 1/2) h, so node (n-1)/2 is the origin.
class Grid1D {
 public:
  Grid1D(double half_width, int n);
  static Grid1D from_spacing(double h, int n);

  double half_width() const { return L_; }
  int size() const { return n_; }
  double spacing() const { return h_; }
  double x(int i) const { return -L_ + (i + 0.5) * h_; }
  std::vector<double> nodes() const;

 private:
  double L_;
  int n_;
  double h_;
};

/// Dense symmetric matrix H of the form f -> D^V(f,f) for grid functions that
/// vanish outside [-L, L]:
///   f.Hf = sum_{i<j} c_{|i-j|} (f_i - f_j)^2 + sum_i (k_i + h V_i) f_i^2.
/// c_1 = w1 is the neighbour surrogate (2/h) int_0^{3h/2} u^2 rho, c_k for
/// k >= 2 is 2h int_{(k-1/2)h}^{(k+1/2)h} rho, and k_i sums the same
/// coefficients over the virtual nodes outside the grid.
struct DiscreteOperator {
  Grid1D grid{1.0, 1};
  JumpKernelSpec kernel;
  Eigen::MatrixXd H;
  std::vector<double> pair;     // c_k, k = 0..n-1 (c_0 unused)
  std::vector<double> killing;  // k_i
  std::vector<double> potential;  // V(x_i)
  double neighbour_weight = 0.0;  // w1

  int size() const { return grid.size(); }
  /// H without the potential: the discretized D(f,f).
  Eigen::MatrixXd form_part() const;
  double quadratic_form(const Eigen::VectorXd& f) const { return f.dot(H * f); }
};

DiscreteOperator assemble(const JumpKernelSpec& spec, const PotentialSpec& pot, const Grid1D& grid);
/// Same operator with V replaced by V + c.
DiscreteOperator shift_potential(const DiscreteOperator& op, double c);

/// Eigenpairs of H phi = lambda h phi, ascending, phi normalized so that
/// sum phi^2 h = 1; the ground state is positive.
struct SpectralSolution {
  Grid1D grid{1.0, 1};
  Eigen::VectorXd lambda;
  Eigen::MatrixXd phi;  // one column per mode
  double residual = 0.0;
  int iterations = 0;

  int modes() const { return static_cast<int>(lambda.size()); }
  double lambda1() const { return lambda(0); }
  Eigen::VectorXd phi1() const { return phi.col(0); }
};

/// Smallest eigenpair by inverse iteration on a Cholesky factor of H, started
/// from the all-ones vector; stops once the residual is below 1e-10 ||H||.
SpectralSolution ground_state(const DiscreteOperator& op, int max_iterations = 500);
/// The k_max smallest pairs from a full symmetric eigendecomposition
/// (k_max <= 0: all of them).
SpectralSolution eigenpairs(const DiscreteOperator& op, int k_max = 0);

struct HeatKernelMatrix {
  double t = 0.0;
  Eigen::MatrixXd p;
  int modes_used = 0;
  double truncation_error = 0.0;  // entrywise bound from the omitted modes
  double roundoff = 0.0;          // entrywise floating-point bound
  double error() const { return truncation_error + roundoff; }
};

/// p(t, x_i, x_j) = sum_{k < k_max} exp(-lambda_k t) phi_k(x_i) phi_k(x_j).
/// Refuses (DomainError naming the k_max needed) when the truncation bound
/// exceeds 10% of the largest entry.
HeatKernelMatrix heat_kernel(const SpectralSolution& sol, double t, int k_max = 0);

struct IuRatio {
  double sup = 0.0;
  double x_at = 0.0;
  double y_at = 0.0;
  double coverage = 1.0;  // fraction of entries not dominated by the error bound
};
IuRatio iu_ratio(const HeatKernelMatrix& hk, const SpectralSolution& sol);

/// Closed-form ground-state envelope of the example families: stable with
/// logpower V gives (1+|x|)^{-1-alpha} log^{-lambda}(1+|x|), tempered with
/// power V gives (1+|x|)^{-lambda} exp(-|x|^gamma). Others: NotAvailable.
double envelope(const JumpKernelSpec& spec, const PotentialSpec& pot, double x);

struct BoundReport {
  double c0 = 0.0;  // max phi / phi_1 over |x| <= L/2
  double c0_at = 0.0;
  bool has_envelope = false;
  double envelope_min = 0.0;
  double envelope_max = 0.0;
  double envelope_spread() const { return envelope_max / envelope_min; }
  double r_lo = 0.0, r_hi = 0.0;
};
/// Envelope range defaults to 2 <= |x| <= L/2.
BoundReport groundstate_bounds_check(const SpectralSolution& sol, const JumpKernelSpec& spec, const PotentialSpec& pot,
                                     std::optional<double> r_lo = std::nullopt,
                                     std::optional<double> r_hi = std::nullopt);

/// Seeded smooth random test functions: sums of C-infinity bumps placed on a
/// unit lattice in [-support, support], independent of the grid spacing.
std::vector<double> random_test_function(const Grid1D& grid, double support, std::uint64_t seed);

struct InequalityReport {
  int trials = 0;
  int violations = 0;
  double max_ratio = 0.0;  // max LHS / RHS
};

/// Local super Poincare inequality
///   sum_{|x_i| <= r} f_i^2 h <= s f.Hf + alpha (sum |f_i| phi_i h)^2
/// on `trials` random functions supported in [-L/2, L/2].
InequalityReport super_poincare_check(const DiscreteOperator& op, const std::vector<double>& weight, double r,
                                      double s, double alpha_value, int trials, std::uint64_t seed = 1);

/// sum_{i<j} c_{|i-j|} phi_i phi_j (f_i - f_j)^2, the ground-state weighted form.
double weighted_form(const DiscreteOperator& op, const SpectralSolution& sol, const std::vector<double>& f);

struct GnPoint {
  double n = 0.0;
  double mu_g2 = 0.0;
  double mu_g_sq = 0.0;  // mu(|g|)^2
  double form = 0.0;     // D_phi1(g, g)
  double r_n = 0.0;
  double bound = 0.0;    // (mu(g^2) - r_n D) / mu(|g|)^2
  bool used = true;
};
struct GnReport {
  std::vector<GnPoint> points;
  double c_r = 0.0;
  double slope = 0.0;        // of log(bound / log^{2 lambda}(1+n)) against log n
  double mu_slope = 0.0;     // of log(mu(g^2) log^{2 lambda}(1+n)) against log n
};
GnReport gn_probe(const DiscreteOperator& op, const SpectralSolution& sol, double lambda,
                  const std::vector<double>& n_values);

/// (L_V psi)_i = -(H psi)_i / h.
Eigen::VectorXd apply_generator(const DiscreteOperator& op, const Eigen::VectorXd& psi);

struct LyapunovReport {
  double max_ratio = 0.0;  // max (L_V psi)_i / psi_i over |x_i| <= range
  double range = 0.0;
  double negative_from = 0.0;  // L_V psi <= 0 on every node with negative_from <= |x| <= range
  bool negative_tail = false;
  std::vector<double> ratio;  // per node, NaN outside the range
};
/// psi(x) = exp(-(1+x^2)^{gamma/2}) / (C0 + (1+x^2)^{lambda/2}) for a tempered
/// kernel and power potential.
LyapunovReport lyapunov_check(const DiscreteOperator& op, const JumpKernelSpec& spec, const PotentialSpec& pot,
                              double c0);

/// max over random f of ||f||_{2/(1-alpha1)}^2 / (D(f,f) + ||f||_2^2).
InequalityReport sobolev_check(const DiscreteOperator& op, double alpha1, int trials, std::uint64_t seed = 1);
double sobolev_ratio(const DiscreteOperator& op, double alpha1, const std::vector<double>& f);

}  // namespace fkc::spectral
