#pragma once

#include <iosfwd>
#include <vector>

#include "fraclap/domain.hpp"
#include "fraclap/fourier.hpp"

namespace fraclap {

struct GapReport {
  int n = 1;
  double m = 0.0;
  double r = 0.0;
  double R = 0.0;
  double omega_half_width = 0.0;
  double q_dirichlet = 0.0;
  double q_navier = 0.0;
  /// Q^N - Q^D when floor(m) is even, Q^D - Q^N when it is odd.
  double signed_gap = 0.0;
  /// |gap| (R - r)^{2n+2m} / (R^n ||u||_1^2)
  double bound_ratio = 0.0;
};

/// Test function for gap experiments with support radius r: the cut-off
/// bubble (eps = r, delta = r / 2) for m < n/2, the C-infinity bump otherwise.
GridFunction gap_witness(int n, double m, double r, const UniformGrid& grid);

/// Both forms of u on the cube of the given domain; the Navier form uses the
/// sine basis with J = points_per_axis / 2 on a grid of the same spacing.
GapReport gap_once(const GridFunction& u, const FormOrder& ord, const BoxDomain& omega, double r, double R);

/// gap_once on cubes of the given half-widths with R equal to the half-width.
std::vector<GapReport> gap_sweep_domain(const GridFunction& u, const FormOrder& ord,
                                        const std::vector<double>& half_widths);

struct BoundEnvelope {
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  bool violation = false;  // max / min > 10
};
BoundEnvelope bound_envelope(const std::vector<GapReport>& reports);

/// Upper bound max_ratio * R^n / (R - r)^{2n+2m} * ||u||_1^2 for one report.
double gap_bound(const GapReport& rep, double max_ratio, double l1);

struct GapFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<std::size_t> excluded;  // below the 1e-12 Q^D noise floor
  bool consistent = false;            // slope <= -(2n + 2m) + 1
};

/// Least squares of log|gap| against log(R - r).
GapFit gap_rate_fit(const std::vector<GapReport>& reports);

/// CSV columns m,n,r,R,omega,QD,QN,gap,bound_ratio.
void write_csv(std::ostream& os, const std::vector<GapReport>& reports);

}  // namespace fraclap
