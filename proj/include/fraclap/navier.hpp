#pragma once

#include <iosfwd>
#include <vector>

#include "fraclap/domain.hpp"

namespace fraclap {

/// Tensor sine eigenbasis of the Dirichlet Laplacian on a box:
/// phi_j(x) = prod_a h_a^{-1/2} sin(j_a pi (x_a + h_a) / (2 h_a)),
/// lambda_j = sum_a (j_a pi / (2 h_a))^2, 1 <= j_a <= J.
class SineBasis {
 public:
  SineBasis(BoxDomain domain, int max_index);
  /// Single mode on (-1, 1); placeholder for default-constructed holders.
  SineBasis() : SineBasis(BoxDomain({1.0}), 1) {}

  const BoxDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  int max_index() const { return J_; }
  std::size_t size() const { return eigenvalues_.size(); }

  /// Eigenvalues in row-major multi-index order (last axis fastest).
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  std::vector<double> sorted_eigenvalues() const;
  double first_eigenvalue() const;
  std::array<int, 3> multi_index(std::size_t flat) const;

  /// phi_j evaluated at a point.
  double evaluate(std::size_t flat, const Point& x) const;

 private:
  BoxDomain domain_;
  int J_;
  std::vector<double> eigenvalues_;
};

struct SpectralCoeffs {
  SineBasis basis;
  std::vector<double> coeffs;

  SpectralCoeffs scaled(double alpha) const;
};

/// c_j = (u, phi_j) by the lattice sine transform (exact discrete orthogonality).
SpectralCoeffs expand(const GridFunction& u, const SineBasis& basis);
/// Raw node values instead of a GridFunction (used inside iterative solvers).
std::vector<double> expand_values(std::span<const double> values, const UniformGrid& grid, const SineBasis& basis);

/// sum_j c_j phi_j sampled on the grid.
std::vector<double> reconstruct_values(const SpectralCoeffs& c, const UniformGrid& grid);
GridFunction reconstruct(const SpectralCoeffs& c, const UniformGrid& grid);

struct NavierValue {
  double value = 0.0;
  bool tail_flag = false;  // last-octave share above 0.1%
};

/// sum_j lambda_j^m c_j^2 over retained modes; strict mode turns a raised
/// tail flag into a truncation error.
NavierValue q_navier(const SpectralCoeffs& c, double m, bool strict = false);

/// Lambda_1(m, s) = inf Q^N_m / Q^N_s = lambda_1^{m - s}.
double lambda1(double m, double s, const SineBasis& basis);

/// W c with W_{jj'} = sum_i w_i phi_j(x_i) phi_j'(x_i), w the Hardy weights.
std::vector<double> hardy_gram_apply(std::span<const double> c, const SineBasis& basis, const UniformGrid& grid,
                                     std::span<const double> hardy_w);

struct HardyEigen {
  double value = 0.0;
  std::vector<double> vector;  // coefficient vector of the minimizer, W-normalized
  int iterations = 0;
};

/// Smallest mu of diag(lambda_j^m) c = mu W c by a locally optimal
/// (three-term Rayleigh-Ritz) power iteration on D^{-1/2} W D^{-1/2}.
HardyEigen lambda1_hardy_solve(double m, double s, const SineBasis& basis, const UniformGrid& grid,
                               double tol = 1e-8);
double lambda1_hardy(double m, double s, const SineBasis& basis, const UniformGrid& grid);

/// l2 norm over modes of the Euler-Lagrange residual
/// lambda_j^m c_j - lambda (s-term)_j - mu (|u|^{p-2} u, phi_j), p = 2n/(n - 2m),
/// with mu = Q^N_m - lambda P the Lagrange multiplier. Requires ||u||_p = 1
/// when the nonlinear term is included.
double el_residual(const SpectralCoeffs& c, double m, double s, double lambda, bool hardy, const UniformGrid& grid,
                   bool nonlinear = true);

/// CSV with columns j1..jn,coeff.
void write_csv(std::ostream& os, const SpectralCoeffs& c);

}  // namespace fraclap
