#include "fkc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>


#include "fkc/errors.hpp"
#include "fkc/numeric.hpp"

namespace fkc::spectral {

Grid1D::Grid1D(double half_width, int n) : L_(half_width), n_(n), h_(2.0 * half_width / n) {
  if (!(half_width > 0.0)) throw DomainError("grid: half-width must be positive");
  if (n < 1 || n % 2 == 0) throw DomainError("grid: point count must be odd so that 0 is a node");
}

Grid1D Grid1D::from_spacing(double h, int n) { return Grid1D(0.5 * n * h, n); }

std::vector<double> Grid1D::nodes() const {
  std::vector<double> x(n_);
  for (int i = 0; i < n_; ++i) x[i] = this->x(i);
  return x;
}

Eigen::MatrixXd DiscreteOperator::form_part() const {
  Eigen::MatrixXd a = H;
  const double h = grid.spacing();
  for (int i = 0; i < size(); ++i) a(i, i) -= h * potential[i];
  return a;
}

DiscreteOperator assemble(const JumpKernelSpec& spec, const PotentialSpec& pot, const Grid1D& grid) {
  kernels::validate(spec);
  kernels::validate(pot);
  if (spec.dim != 1) throw DomainError("assemble: the grid operator is one-dimensional");
  const int n = grid.size();
  const double h = grid.spacing();

  DiscreteOperator op;
  op.grid = grid;
  op.kernel = spec;
  op.neighbour_weight = 2.0 / h * kernels::truncated_second_moment(spec, 1.5 * h);

  // Tail values T((k - 1/2) h), k = 1..n+1, telescoped into the pair weights.
  std::vector<double> tail(n + 2, 0.0);
  for (int k = 1; k <= n + 1; ++k) tail[k] = kernels::one_sided_tail(spec, (k - 0.5) * h);
  op.pair.assign(n, 0.0);
  if (n > 1) op.pair[1] = op.neighbour_weight;
  for (int k = 2; k < n; ++k) op.pair[k] = 2.0 * h * (tail[k] - tail[k + 1]);

  // Virtual nodes beyond the edge: the first one sits k0 cells away.
  auto outside = [&](int k0) { return k0 == 1 ? op.neighbour_weight + 2.0 * h * tail[2] : 2.0 * h * tail[k0]; };
  op.killing.resize(n);
  op.potential.resize(n);
  for (int i = 0; i < n; ++i) {
    op.killing[i] = outside(n - i) + outside(i + 1);
    const double v = kernels::potential_value(pot, grid.x(i));
    if (!std::isfinite(v) || v < 0.0) throw DomainError("assemble: potential not finite and non-negative on the grid");
    op.potential[i] = v;
  }

  std::vector<double> prefix(n, 0.0);  // sum_{k=1}^{m} c_k
  for (int k = 1; k < n; ++k) prefix[k] = prefix[k - 1] + op.pair[k];

  op.H.resize(n, n);
  numeric::parallel_for(static_cast<std::size_t>(n), [&](std::size_t col) {
    const int j = static_cast<int>(col);
    for (int i = 0; i < n; ++i) op.H(i, j) = i == j ? 0.0 : -op.pair[std::abs(i - j)];
    op.H(j, j) = prefix[j] + prefix[n - 1 - j] + op.killing[j] + h * op.potential[j];
  });
  return op;
}

DiscreteOperator shift_potential(const DiscreteOperator& op, double c) {
  DiscreteOperator out = op;
  const double h = op.grid.spacing();
  for (int i = 0; i < op.size(); ++i) {
    out.potential[i] += c;
    out.H(i, i) += c * h;
  }
  return out;
}

namespace {

double residual_of(const DiscreteOperator& op, double lambda, const Eigen::VectorXd& v) {
  return (op.H * v - lambda * op.grid.spacing() * v).norm();
}

double matrix_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

SpectralSolution ground_state(const DiscreteOperator& op, int max_iterations) {
  const int n = op.size();
  const double h = op.grid.spacing();
  Eigen::LLT<Eigen::MatrixXd> llt(op.H);
  if (llt.info() != Eigen::Success) throw SolverError("ground state: H is not positive definite");
  const double hnorm = matrix_norm(op.H);

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  v /= std::sqrt(v.squaredNorm() * h);
  double lambda = 0.0, res = numeric::kInf;
  int it = 0;
  while (it < max_iterations) {
    ++it;
    v = llt.solve(v);
    v /= std::sqrt(v.squaredNorm() * h);
    lambda = v.dot(op.H * v) / (h * v.squaredNorm());
    res = residual_of(op, lambda, v);
    if (res < 1e-10 * hnorm * v.norm()) break;
  }
  if (!(res < 1e-10 * hnorm * v.norm())) {
    std::ostringstream msg;
    msg << "ground state: inverse iteration did not converge in " << max_iterations << " steps (residual " << res << ")";
    throw SolverError(msg.str());
  }
  if (v.sum() < 0.0) v = -v;
  SpectralSolution sol;
  sol.grid = op.grid;
  sol.lambda = Eigen::VectorXd::Constant(1, lambda);
  sol.phi = v;
  sol.residual = res;
  sol.iterations = it;
  return sol;
}

SpectralSolution eigenpairs(const DiscreteOperator& op, int k_max) {
  const int n = op.size();
  const double h = op.grid.spacing();
  const int k = (k_max <= 0 || k_max > n) ? n : k_max;
  const Eigen::MatrixXd a = op.H / h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw SolverError("eigenpairs: symmetric eigensolver failed");
  const Eigen::VectorXd w = es.eigenvalues();
  const Eigen::MatrixXd z = es.eigenvectors().leftCols(k);
  SpectralSolution sol;
  sol.grid = op.grid;
  sol.lambda = w.head(k);
  sol.phi = z / std::sqrt(h);
  if (sol.phi.col(0).sum() < 0.0) sol.phi.col(0) *= -1.0;
  sol.residual = residual_of(op, sol.lambda(0), sol.phi.col(0));
  return sol;
}

HeatKernelMatrix heat_kernel(const SpectralSolution& sol, double t, int k_max) {
  if (!(t > 0.0)) throw DomainError("heat kernel: time must be positive");
  const int n = sol.grid.size();
  const double h = sol.grid.spacing();
  const int avail = sol.modes();
  const int k = (k_max <= 0 || k_max > avail) ? avail : k_max;

  HeatKernelMatrix hk;
  hk.t = t;
  hk.modes_used = k;
  Eigen::VectorXd decay(k);
  for (int m = 0; m < k; ++m) decay(m) = std::exp(-sol.lambda(m) * t);
  const Eigen::MatrixXd phik = sol.phi.leftCols(k);
  hk.p = phik * decay.asDiagonal() * phik.transpose();
  hk.p = 0.5 * (hk.p + hk.p.transpose()).eval();

  // sum_k |phi_k(x_i) phi_k(x_j)| <= 1/h over a complete orthonormal system.
  if (k < n) {
    const double next = k < avail ? sol.lambda(k) : sol.lambda(k - 1);
    hk.truncation_error = std::exp(-next * t) / h;
  }
  hk.roundoff = 4.0 * k * std::numeric_limits<double>::epsilon() * decay(0) / h;
  const double largest = hk.p.cwiseAbs().maxCoeff();
  if (hk.truncation_error > 0.1 * largest) {
    int need = -1;
    for (int m = k; m < avail; ++m)
      if (std::exp(-sol.lambda(m) * t) / h <= 0.1 * largest) {
        need = m;
        break;
      }
    std::ostringstream msg;
    msg << "heat kernel: truncation error " << hk.truncation_error << " exceeds 10% of the largest entry at t=" << t
        << "; ";
    if (need > 0)
      msg << "k_max >= " << need << " required";
    else
      msg << "more than " << avail << " modes required";
    throw DomainError(msg.str());
  }
  return hk;
}

IuRatio iu_ratio(const HeatKernelMatrix& hk, const SpectralSolution& sol) {
  const int n = sol.grid.size();
  const Eigen::VectorXd phi = sol.phi1();
  const double err = hk.error();
  IuRatio out;
  out.sup = -numeric::kInf;
  std::size_t kept = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double p = hk.p(i, j);
      if (!(p > 10.0 * err) || !(phi(i) > 0.0) || !(phi(j) > 0.0)) continue;
      ++kept;
      const double r = p / (phi(i) * phi(j));
      if (r > out.sup) {
        out.sup = r;
        out.x_at = sol.grid.x(i);
        out.y_at = sol.grid.x(j);
      }
    }
  out.coverage = static_cast<double>(kept) / (static_cast<double>(n) * n);
  return out;
}

}  // namespace fkc::spectral
