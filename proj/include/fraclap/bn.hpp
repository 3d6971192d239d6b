#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fraclap/domain.hpp"
#include "fraclap/navier.hpp"

namespace fraclap {

enum class Variant { spectral_perturbation, hardy_perturbation };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Perturbed critical problem on a cube: minimize
/// (Q^N_m[u] - lambda P[u]) / ||u||^2_{2*}, P = Q^N_s or the Hardy integral.
struct BNProblem {
  Variant variant = Variant::spectral_perturbation;
  int n = 1;
  double m = 0.4;
  double s = 0.3;
  double lambda = 0.0;
  BoxDomain domain;
  SineBasis basis;
  UniformGrid grid;
  std::vector<double> hardy_w;  // node weights of |x|^{-2s} dx (Hardy variant)

  /// Cube of half-width hw with `points` nodes and J modes per axis.
  static BNProblem make(Variant variant, int n, double m, double s, double lambda, double hw = 1.0, int points = 0,
                        int J = 0);

  /// 2n / (n - 2m)
  double critical_exponent() const { return 2.0 * n / (n - 2.0 * m); }
  BNProblem with_lambda(double lambda) const;
};

/// Lambda_1(m, s) or its Hardy counterpart, whichever bounds lambda for the variant.
double lambda_bound(const BNProblem& prob);

struct RayleighParts {
  double qm = 0.0;           // Q^N_m
  double perturbation = 0.0; // P
  double norm_p = 0.0;       // ||u||_{2*}
  double value = 0.0;        // (qm - lambda P) / norm_p^2
};

RayleighParts rayleigh_parts(const SpectralCoeffs& c, const BNProblem& prob);
double rayleigh(const SpectralCoeffs& c, const BNProblem& prob);

/// Coefficient gradient of the numerator Q^N_m - lambda P.
std::vector<double> numerator_gradient(const SpectralCoeffs& c, const BNProblem& prob);
/// Coefficient gradient of the full quotient.
std::vector<double> rayleigh_gradient(const SpectralCoeffs& c, const BNProblem& prob);

struct SobolevEstimate {
  double value = 0.0;
  double uncertainty = 0.0;   // spread between the last two extrapolations
  std::vector<double> scales; // ladder scales rho = delta / eps
  std::vector<double> quotients;
};

/// Quotient Q_m[u_eps] / ||u_eps||^2_{2*} for cut-off bubbles, evaluated in
/// rescaled form (eps = 1, delta = rho) with the Fourier form, then
/// extrapolated in rho with the correction exponents n - 2m and n.
/// `spacing` is the grid step relative to eps.
SobolevEstimate sobolev_ladder(int n, double m, const std::vector<double>& scales, double spacing = 0.0);
double sobolev_constant_estimate(int n, double m, const std::vector<double>& scales);
/// Ladder defaults used by minimize when no reference is supplied.
std::vector<double> default_sobolev_scales(int n);

struct MinimizeOptions {
  int restarts = 3;
  std::uint64_t seed = 0;
  int max_iterations = 100000;
  double value_tol = 1e-9;
  double residual_tol = 1e-6;
  double sobolev_ref = 0.0;  // 0: estimate from the default ladder
  double sobolev_tol = 0.0;  // 0: use the estimate's uncertainty
};

struct RayleighReport {
  double value = 0.0;
  SpectralCoeffs minimizer;
  int iterations = 0;
  double el_residual = 0.0;
  double sobolev_ref = 0.0;
  double sobolev_tol = 0.0;
  bool below_sobolev = false;
  bool converged = false;
  /// Share of the |u|^{2*} mass within 4 grid cells of the peak.
  double concentration = 0.0;
  int restart = 0;
  std::vector<double> restart_values;  // final value per restart
  std::vector<double> seed_values;     // starting value per restart
};

/// Preconditioned normalized descent from phi_1, the bubble and seeded
/// random starts; the best run by (value, restart index) is returned.
RayleighReport minimize(const BNProblem& prob, const MinimizeOptions& opt = {});

/// Concentration diagnostic used by minimize.
double concentration(const SpectralCoeffs& c, const BNProblem& prob);

struct CurvePoint {
  double eps = 0.0;
  double quotient = 0.0;
};

/// Rayleigh quotient of the cut-off bubble u_eps (support 2 delta) in the
/// problem's basis; delta defaults to a quarter of the half-width.
std::vector<CurvePoint> bubble_curve(const BNProblem& prob, const std::vector<double>& eps_grid, double delta = 0.0);

struct ScanRow {
  int n = 1;
  double m = 0.0, s = 0.0, lambda = 0.0;
  Variant variant = Variant::spectral_perturbation;
  double value = 0.0, sobolev_ref = 0.0, el_residual = 0.0;
  bool below_sobolev = false;
  int iterations = 0;
  std::string status = "ok";  // ok, skipped, or the error message
};

struct ScanOptions {
  Variant variant = Variant::spectral_perturbation;
  double half_width = 1.0;
  int points = 0;
  int J = 0;
  MinimizeOptions minimize;
};

/// minimize over all (m, s) cells with lambda = lambda_frac * lambda_bound.
std::vector<ScanRow> critical_scan(int n, const std::vector<double>& m_grid, const std::vector<double>& s_grid,
                                   double lambda_frac, const ScanOptions& opt = {});

/// CSV columns n,m,s,lambda,variant,value,sobolev_ref,below_sobolev,el_residual,iterations.
void write_csv(std::ostream& os, const std::vector<ScanRow>& rows);

}  // namespace fraclap
