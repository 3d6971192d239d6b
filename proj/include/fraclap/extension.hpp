#pragma once

#include <iosfwd>
#include <vector>

#include "fraclap/domain.hpp"
#include "fraclap/fourier.hpp"

namespace fraclap {

/// Tensor mesh in (x, y), y >= 0, for one space dimension. The x-axis either
/// is the interval grid of the domain (lateral boundary at +-h) or extends it
/// to the whole line with geometrically growing cells outside the domain.
/// y-nodes are graded, y_i = Y (i / M)^gamma.
class CylinderGrid {
 public:
  /// x-nodes: the domain grid plus its right endpoint.
  static CylinderGrid bounded(const UniformGrid& omega, double sigma, int M, double Y = 0.0, double gamma = 0.0);
  /// x-nodes: domain grid, then cells growing by `growth` out to |x| = X.
  static CylinderGrid whole_line(const UniformGrid& omega, double sigma, int M, double X = 0.0, double Y = 0.0,
                                 double gamma = 0.0, double growth = 1.08);

  const UniformGrid& omega() const { return omega_; }
  double sigma() const { return sigma_; }
  bool is_bounded() const { return bounded_; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  std::size_t nx() const { return x_.size(); }
  std::size_t ny() const { return y_.size(); }
  std::size_t size() const { return x_.size() * y_.size(); }
  /// Index of the first domain node (x = -h) in x().
  std::size_t omega_offset() const { return offset_; }
  double gamma() const { return gamma_; }

  int M() const { return M_; }
  double Y() const { return Y_; }
  double X() const { return X_; }
  /// Same x-nodes with a new y-mesh; doubling M gives nested y-nodes.
  CylinderGrid with_y(int M, double Y) const;

 private:
  CylinderGrid(UniformGrid omega) : omega_(std::move(omega)) {}
  UniformGrid omega_;
  double sigma_ = 0.5;
  bool bounded_ = true;
  std::vector<double> x_, y_;
  std::size_t offset_ = 0;
  double X_ = 0.0, Y_ = 0.0, gamma_ = 2.0, growth_ = 1.08;
  int M_ = 0;
};

enum class ExtensionKind { direct, dual };

/// Nodal values, y-major: values[iy * nx + ix].
struct ExtensionField {
  CylinderGrid grid;
  std::vector<double> values;
  ExtensionKind kind = ExtensionKind::direct;

  double at(std::size_t ix, std::size_t iy) const { return values[iy * grid.nx() + ix]; }
};

/// Analytic value Gamma(sigma) / (2^{1 - 2 sigma} Gamma(1 - sigma)) of the
/// energy constant; used only as a sanity reference for calibration.
double c2_reference(double sigma);

/// Extension of the piecewise-linear interpolant of gk by the Poisson kernel
/// y^{2 sigma} / (t^2 + y^2)^{(1 + 2 sigma)/2}, normalized to unit mass.
/// Each cell is integrated in closed form.
ExtensionField poisson_direct(const GridFunction& gk, double sigma, const CylinderGrid& grid);

/// Weighted energy of the bilinear interpolant of w, integral of y^{1-2 sigma} |grad w|^2.
double energy_direct(const ExtensionField& w);

/// Mean of q_dirichlet / (extension energy) over at least three witnesses.
double calibrate_c2(double sigma, const std::vector<GridFunction>& witnesses, int M = 160);

struct CylinderSolve {
  double value = 0.0;     // scaled form value
  double energy = 0.0;    // discrete weighted energy at the optimum
  double linear = 0.0;    // linear term (dual problem only)
  double residual = 0.0;  // relative residual of the assembled system
};

/// Minimal weighted energy over bilinear fields on the bounded cylinder with
/// trace gk, zero lateral values and a free top; returns c2 * energy.
CylinderSolve cylinder_navier_solve(const GridFunction& gk, double sigma, const CylinderGrid& grid, double c2);
double cylinder_navier(const GridFunction& gk, double sigma, const CylinderGrid& grid, double c2);

/// Kernel (t^2 + y^2)^{-(1 - 2 sigma)/2} normalized so that
/// y^{1 - 2 sigma} d_y w -> -gk at y = 0; logarithmic kernel at sigma = 1/2.
ExtensionField poisson_dual(const GridFunction& gk, double sigma, const CylinderGrid& grid);

struct DualCheck {
  double value = 0.0;
  double linear = 0.0;
  double energy = 0.0;
  double fourier = 0.0;
  bool consistent = true;  // within 5% of the Fourier value
};

/// (2 int gk w(., 0) - weighted energy) / c2 with w the dual extension of
/// gk = (-Delta)^k u, k = 1, on a whole-line grid.
DualCheck q_dirichlet_dual_check(const GridFunction& u, const FormOrder& ord, const CylinderGrid& grid, double c2);
double q_dirichlet_dual(const GridFunction& u, const FormOrder& ord, const CylinderGrid& grid, double c2);

/// Maximum of 2 int gk w(., 0) - energy over bilinear fields with zero lateral
/// values; returns that maximum divided by c2.
CylinderSolve cylinder_navier_dual_solve(const GridFunction& gk, double sigma, const CylinderGrid& grid, double c2);
double cylinder_navier_dual(const GridFunction& gk, double sigma, const CylinderGrid& grid, double c2);

/// Galerkin residual of div(y^{1-2 sigma} grad w) at interior nodes,
/// relative to the diagonal-scaled field.
double harmonic_residual(const ExtensionField& w);

/// Limit of y^{1-2 sigma} d_y w at y = 0 from the first two rows, per x-node.
std::vector<double> neumann_datum(const ExtensionField& w);

/// CSV with columns x,y,value.
void write_csv(std::ostream& os, const ExtensionField& w);

}  // namespace fraclap
