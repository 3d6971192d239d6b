#pragma once

#include <complex>
#include <vector>

#include "fraclap/domain.hpp"

namespace fraclap {

enum class Parity { floor_even, floor_odd, integer };

/// Order m with its split m = 2k + sigma (floor m even) or m = 2k - sigma
/// (floor m odd); supported: m in (0, 3) \ N together with m in {1, 2}.
struct FormOrder {
  double m = 0.0;
  int k = 0;
  double sigma = 0.0;
  Parity parity = Parity::integer;

  static FormOrder from(double m);
};

/// Samples of the Fourier transform (2 pi)^{-n/2} int e^{-i xi.x} u(x) dx on
/// the lattice dual to the zero-padded box. Only the half spectrum along the
/// last axis is stored (u is real).
struct PaddedSpectrum {
  GridFunction source;
  int pad_factor = 4;
  std::vector<int> dims;  // padded lattice size per axis
  std::vector<std::complex<double>> modal_amplitudes;
  std::vector<double> frequency_step;

  /// Visits (|xi|^2, amplitude, multiplicity) for every stored entry.
  template <class F>
  void for_each(F&& f) const;

  double frequency_cell() const;
};

PaddedSpectrum transform(const GridFunction& u, int pad_factor);

struct FormValue {
  double value = 0.0;
  bool converged = true;  // false when padding has not converged
  double raw = 0.0;       // lattice sum at the largest pad factor used
};

/// Q_m[u] = int |xi|^{2m} |Fu|^2 for supp u inside the box, m in [0, 3).
/// Lattice sums at pad factors P, 2P, 4P are Richardson-extrapolated in the
/// periodization error, which scales like P^{-(n+2m)}, P^{-(n+2m+2)}, ...
FormValue q_dirichlet(const GridFunction& u, double m, int pad_factor = 8);
FormValue q_dirichlet(const GridFunction& u, const FormOrder& ord, int pad_factor = 8);

/// Raw padded lattice sum without extrapolation.
double q_dirichlet_lattice(const GridFunction& u, double m, int pad_factor);

struct GagliardoValue {
  double value = 0.0;
  bool ill_conditioned = false;
};

/// Double integral of |u(x) - u(y)|^2 / |x - y|^{n + 2 sigma} over R x R (n = 1).
/// Every cell pair is integrated exactly against the local linear model of u,
/// and pairs leaving the grid are summed in closed form.
GagliardoValue gagliardo_form(const GridFunction& u, double sigma);

struct DilationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = Q_m[u(./t)], rhs = t^{n - 2m} Q_m[u].
DilationCheck dilation_check(const GridFunction& u, const FormOrder& ord, double t, int pad_factor = 8);
DilationCheck dilation_check(const GridFunction& u, double m, double t, int pad_factor = 8);

// ---------------------------------------------------------------------------

template <class F>
void PaddedSpectrum::for_each(F&& f) const {
  const int n = static_cast<int>(dims.size());
  const int half = dims.back() / 2 + 1;
  for (std::size_t e = 0; e < modal_amplitudes.size(); ++e) {
    std::size_t rem = e;
    double xi2 = 0.0;
    int q_last = 0;
    for (int a = n - 1; a >= 0; --a) {
      const int len = (a == n - 1) ? half : dims[a];
      const int q = static_cast<int>(rem % len);
      rem /= len;
      if (a == n - 1) q_last = q;
      const int kk = q <= dims[a] / 2 ? q : q - dims[a];
      const double xi = kk * frequency_step[a];
      xi2 += xi * xi;
    }
    const int mult = (q_last == 0 || (dims.back() % 2 == 0 && q_last == dims.back() / 2)) ? 1 : 2;
    f(xi2, modal_amplitudes[e], mult);
  }
}

}  // namespace fraclap
