#include "fraclap/extension.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include "detail/fft.hpp"
#include "detail/format.hpp"
#include "detail/parallel.hpp"
#include "fraclap/error.hpp"

namespace fraclap {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_log_case(double sigma) { return std::abs(sigma - 0.5) < 1e-12; }

void check_sigma(double sigma) {
  FRACLAP_REQUIRE(sigma > 0 && sigma < 1, ErrorKind::precondition, "sigma must lie in (0, 1)");
}

void check_omega(const GridFunction& g, const CylinderGrid& grid) {
  FRACLAP_REQUIRE(g.grid().dim() == 1, ErrorKind::precondition, "extension is implemented for n = 1");
  FRACLAP_REQUIRE(g.grid() == grid.omega(), ErrorKind::precondition, "datum grid differs from the cylinder grid");
}

std::vector<double> graded_y(int M, double Y, double gamma) {
  std::vector<double> y(M + 1);
  for (int i = 0; i <= M; ++i) y[i] = Y * std::pow(static_cast<double>(i) / M, gamma);
  y[M] = Y;
  return y;
}

double default_gamma(double sigma) { return std::max(2.0, 1.5 / sigma); }

// Piecewise-linear datum on the domain nodes x_0 .. x_N (x_N = +h, value 0).
struct Datum {
  std::vector<double> s;  // node coordinates
  std::vector<double> g;  // node values
  int lo = 0, hi = -1;    // first / last node touching a nonzero cell
};

Datum make_datum(const GridFunction& gk) {
  const auto& og = gk.grid();
  const int N = og.points(0);
  Datum d;
  d.s.resize(N + 1);
  d.g.assign(N + 1, 0.0);
  for (int i = 0; i <= N; ++i) d.s[i] = og.coordinate(0, i);
  for (int i = 0; i < N; ++i) d.g[i] = gk[i];
  int first = -1, last = -1;
  for (int i = 0; i <= N; ++i)
    if (d.g[i] != 0.0) {
      if (first < 0) first = i;
      last = i;
    }
  if (first >= 0) {
    d.lo = std::max(0, first - 1);
    d.hi = std::min(N, last + 1);
  }
  return d;
}

// w(x) = int g(s) K(s - x) ds for piecewise-linear g. Cells close to the
// kernel singularity at (x, y) use the antiderivatives F0(t) = int_0^t K and
// F1(t) = int_0^t t' K(t') dt'; the rest use 6-point Gauss-Legendre.
template <class Kern, class Anti>
double convolve(const Datum& d, double x, double y, Kern&& kern, Anti&& anti) {
  if (d.hi <= d.lo) return 0.0;
  using Q = boost::math::quadrature::gauss<double, 6>;
  double acc = 0.0;
  for (int i = d.lo; i < d.hi; ++i) {
    const double ga = d.g[i], gb = d.g[i + 1];
    if (ga == 0.0 && gb == 0.0) continue;
    const double a = d.s[i], b = d.s[i + 1];
    const double H = b - a;
    const double c = 0.5 * (a + b);
    const double slope = (gb - ga) / H;
    if (std::hypot(c - x, y) >= 4.0 * H) {
      acc += 0.5 * H * Q::integrate([&](double z) {
        const double s = c + 0.5 * H * z;
        return (ga + slope * (s - a)) * kern(s - x);
      }, -1.0, 1.0);
    } else {
      const auto A0 = anti(a - x), A1 = anti(b - x);
      acc += (ga - slope * (a - x)) * (A1[0] - A0[0]) + slope * (A1[1] - A0[1]);
    }
  }
  return acc;
}

// Signed regularized incomplete beta J(t) = sign(t) I_{t^2/(t^2+y^2)}(1/2, b),
// switching to the complement for |t| > y.
double half_beta(double t, double y, double b) {
  if (t == 0.0) return 0.0;
  const double t2 = t * t, y2 = y * y;
  double v;
  if (t2 <= y2)
    v = boost::math::ibeta(0.5, b, t2 / (t2 + y2));
  else
    v = 1.0 - boost::math::ibeta(b, 0.5, y2 / (t2 + y2));
  return t > 0 ? v : -v;
}

// Antiderivatives for the normalized Poisson kernel at height y > 0.
std::array<double, 2> direct_anti(double t, double y, double sigma, double c1) {
  const double F0 = 0.5 * half_beta(t, y, sigma);
  const double q = std::log1p((t / y) * (t / y));
  double F1;
  if (is_log_case(sigma)) {
    F1 = c1 * y * 0.5 * q;
  } else {
    const double p = 1.0 - 2.0 * sigma;  // y^{2 sigma}[(t^2+y^2)^{p/2} - y^p]/p
    F1 = c1 * y * std::expm1(0.5 * p * q) / p;
  }
  return {F0, F1};
}

// Antiderivatives for the dual kernel (t^2 + y^2)^{-beta}, beta = (1 - 2 sigma)/2,
// times c3, at height y >= 0.
std::array<double, 2> dual_anti(double t, double y, double sigma, double c3) {
  if (t == 0.0) return {0.0, 0.0};
  const double r2 = t * t + y * y;
  if (is_log_case(sigma)) {
    const double lr = std::log(r2);
    double F0 = t * lr - 2.0 * t;
    double F1 = 0.5 * (r2 * lr - t * t);
    if (y > 0) {
      F0 += 2.0 * y * std::atan(t / y);
      F1 -= 0.5 * y * y * std::log(y * y);
    }
    return {c3 * F0, c3 * F1};
  }
  const double beta = 0.5 - sigma;
  // int_0^t (s^2+y^2)^{-beta} = [t r^{-2 beta} - 2 beta y^{2 sigma} (B/2) J] / (2 sigma)
  double F0 = c3 * t * std::pow(r2, -beta);
  if (y > 0) F0 -= 0.5 * std::pow(y, 2.0 * sigma) * half_beta(t, y, 1.0 - sigma);
  F0 /= 2.0 * sigma;
  const double F1 = c3 * (std::pow(r2, 1.0 - beta) - (y > 0 ? std::pow(y, 2.0 - 2.0 * beta) : 0.0)) / (2.0 * (1.0 - beta));
  return {F0, F1};
}

// Local 1D element matrices, stored as {a00, a01, a11}.
using Sym2 = std::array<double, 3>;

struct YElement {
  Sym2 K, M;
};

// Weighted P1 stiffness and mass for y^alpha on [y0, y1].
YElement y_element(double y0, double y1, double alpha) {
  const double H = y1 - y0;
  YElement e;
  double m0, maa, mab, mbb;
  if (y0 == 0.0) {
    const double p = std::pow(H, alpha + 1.0);
    m0 = p / (alpha + 1.0);
    maa = p * 2.0 / ((alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0));
    mab = p / ((alpha + 2.0) * (alpha + 3.0));
    mbb = p / (alpha + 3.0);
  } else {
    using Q = boost::math::quadrature::gauss<double, 20>;
    m0 = (std::pow(y1, alpha + 1.0) - std::pow(y0, alpha + 1.0)) / (alpha + 1.0);
    maa = Q::integrate([&](double t) { const double y = y0 + H * t; return std::pow(y, alpha) * (1 - t) * (1 - t); }, 0.0, 1.0) * H;
    mab = Q::integrate([&](double t) { const double y = y0 + H * t; return std::pow(y, alpha) * t * (1 - t); }, 0.0, 1.0) * H;
    mbb = Q::integrate([&](double t) { const double y = y0 + H * t; return std::pow(y, alpha) * t * t; }, 0.0, 1.0) * H;
  }
  e.K = {m0 / (H * H), -m0 / (H * H), m0 / (H * H)};
  e.M = {maa, mab, mbb};
  return e;
}

std::vector<YElement> y_elements(const std::vector<double>& y, double sigma) {
  std::vector<YElement> out(y.size() - 1);
  const double alpha = 1.0 - 2.0 * sigma;
  for (std::size_t e = 0; e + 1 < y.size(); ++e) out[e] = y_element(y[e], y[e + 1], alpha);
  return out;
}

double quad2(const Sym2& A, double u0, double u1) { return A[0] * u0 * u0 + 2.0 * A[1] * u0 * u1 + A[2] * u1 * u1; }

struct EnergyParts {
  double total = 0.0;
  double tail_x = 0.0;
  double tail_y = 0.0;
};

// Exact weighted energy of the bilinear interpolant on the tensor mesh.
EnergyParts bilinear_energy(const ExtensionField& w) {
  const auto& g = w.grid;
  const auto& x = g.x();
  const auto& y = g.y();
  const auto ye = y_elements(y, g.sigma());
  const std::size_t nx = g.nx();
  std::vector<double> col_total(nx - 1, 0.0), col_ytail(nx - 1, 0.0);
  detail::parallel_for(nx - 1, [&](std::size_t i) {
    const double H = x[i + 1] - x[i];
    const Sym2 Kx{1.0 / H, -1.0 / H, 1.0 / H};
    const Sym2 Mx{H / 3.0, H / 6.0, H / 3.0};
    double acc = 0.0, tail = 0.0;
    for (std::size_t j = 0; j + 1 < y.size(); ++j) {
      const double w00 = w.at(i, j), w10 = w.at(i + 1, j), w01 = w.at(i, j + 1), w11 = w.at(i + 1, j + 1);
      // x-derivative part: Kx in x, My in y; y-derivative part: Mx in x, Ky in y.
      const auto& My = ye[j].M;
      const auto& Ky = ye[j].K;
      // rows: y-node 0/1, each a 2-vector in x
      const double ex = My[0] * quad2(Kx, w00, w10) + 2.0 * My[1] * (Kx[0] * w00 * w01 + Kx[1] * (w00 * w11 + w10 * w01) + Kx[2] * w10 * w11) +
                        My[2] * quad2(Kx, w01, w11);
      const double ey = Mx[0] * quad2(Ky, w00, w01) + 2.0 * Mx[1] * (Ky[0] * w00 * w10 + Ky[1] * (w00 * w11 + w01 * w10) + Ky[2] * w01 * w11) +
                        Mx[2] * quad2(Ky, w10, w11);
      const double e = ex + ey;
      acc += e;
      if (0.5 * (y[j] + y[j + 1]) > 0.5 * g.Y()) tail += e;
    }
    col_total[i] = acc;
    col_ytail[i] = tail;
  });
  EnergyParts out;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    out.total += col_total[i];
    out.tail_y += col_ytail[i];
    const double xc = 0.5 * (x[i] + x[i + 1]);
    if (!g.is_bounded() && std::abs(xc) > 0.5 * g.X()) out.tail_x += col_total[i];
  }
  return out;
}

double checked_energy(const ExtensionField& w) {
  const auto parts = bilinear_energy(w);
  if (parts.total > 0) {
    FRACLAP_REQUIRE(parts.tail_x <= 1e-2 * parts.total, ErrorKind::truncation, "last x-octave carries more than 1% of the energy");
    FRACLAP_REQUIRE(parts.tail_y <= 1e-2 * parts.total, ErrorKind::truncation, "last y-octave carries more than 1% of the energy");
  }
  return parts.total;
}

template <class Kern, class Anti>
ExtensionField extend(const GridFunction& gk, const CylinderGrid& grid, ExtensionKind kind, Kern&& kern, Anti&& anti) {
  const auto d = make_datum(gk);
  ExtensionField w{grid, std::vector<double>(grid.size(), 0.0), kind};
  const auto& x = grid.x();
  const auto& y = grid.y();
  const std::size_t nx = grid.nx();
  detail::parallel_for(grid.size(), [&](std::size_t q) {
    const std::size_t iy = q / nx, ix = q % nx;
    const double yy = y[iy];
    w.values[q] = convolve(
        d, x[ix], yy, [&](double t) { return kern(t, yy); }, [&](double t) { return anti(t, yy); });
  });
  for (double v : w.values) FRACLAP_REQUIRE(std::isfinite(v), ErrorKind::layer_resolution, "kernel evaluation produced a non-finite value");
  return w;
}

// Discrete sine coefficients of the interior values g_1 .. g_{N-1}.
std::vector<double> sine_coefficients(const GridFunction& gk) {
  const int N = gk.grid().points(0);
  FRACLAP_REQUIRE(gk[0] == 0.0, ErrorKind::precondition, "datum must vanish on the lateral boundary");
  std::vector<double> c(N - 1);
  for (int i = 1; i < N; ++i) c[i - 1] = gk[i];
  const std::vector<int> dims{N - 1};
  detail::sine_transform(c, dims);
  for (double& v : c) v /= N;
  return c;
}

// Thomas algorithm for a symmetric tridiagonal system (diag, off) x = r.
std::vector<double> solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off, std::vector<double> r) {
  const std::size_t n = diag.size();
  std::vector<double> c(n, 0.0);
  double beta = diag[0];
  FRACLAP_REQUIRE(beta != 0.0, ErrorKind::solver, "singular tridiagonal system");
  r[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    c[i - 1] = off[i - 1] / beta;
    beta = diag[i] - off[i - 1] * c[i - 1];
    FRACLAP_REQUIRE(beta != 0.0, ErrorKind::solver, "singular tridiagonal system");
    r[i] = (r[i] - off[i - 1] * r[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) r[i] -= c[i] * r[i + 1];
  return r;
}

// Per x-mode y-problems of the bounded cylinder; dual selects the Neumann datum.
CylinderSolve cylinder_solve(const GridFunction& gk, double sigma, const CylinderGrid& grid, double c2, bool dual) {
  check_sigma(sigma);
  check_omega(gk, grid);
  FRACLAP_REQUIRE(grid.is_bounded(), ErrorKind::precondition, "cylinder solves need the bounded cylinder grid");
  FRACLAP_REQUIRE(c2 > 0 && std::isfinite(c2), ErrorKind::precondition, "c2 must be positive");
  const int N = gk.grid().points(0);
  const double h = gk.grid().spacing(0);
  const auto ghat = sine_coefficients(gk);
  const auto ye = y_elements(grid.y(), sigma);
  const std::size_t ny = grid.ny();
  const double Y = grid.Y();
  const auto& y = grid.y();

  std::vector<double> mode_energy(N - 1, 0.0), mode_tail(N - 1, 0.0), mode_lin(N - 1, 0.0), res2(N - 1, 0.0),
      rhs2(N - 1, 0.0);
  detail::parallel_for(static_cast<std::size_t>(N - 1), [&](std::size_t jm) {
    const double gj = ghat[jm];
    if (gj == 0.0) return;
    const double th = (jm + 1) * kPi / N;
    const double kappa = (2.0 / h) * (1.0 - std::cos(th));
    const double nu = (h / 3.0) * (2.0 + std::cos(th));
    std::vector<double> diag(ny, 0.0), off(ny - 1, 0.0);
    for (std::size_t e = 0; e + 1 < ny; ++e) {
      const auto& el = ye[e];
      diag[e] += kappa * el.M[0] + nu * el.K[0];
      off[e] += kappa * el.M[1] + nu * el.K[1];
      diag[e + 1] += kappa * el.M[2] + nu * el.K[2];
    }
    std::vector<double> b(ny, 0.0);
    if (!dual) {
      std::vector<double> d(diag.begin() + 1, diag.end()), o(off.begin() + 1, off.end()), r(ny - 1, 0.0);
      r[0] = -off[0] * gj;
      auto sol = solve_tridiagonal(d, o, r);
      b[0] = gj;
      std::copy(sol.begin(), sol.end(), b.begin() + 1);
    } else {
      std::vector<double> r(ny, 0.0);
      r[0] = nu * gj;
      b = solve_tridiagonal(diag, off, r);
    }
    // Residual of the rows that are equations (all rows for the dual).
    double rr = 0.0, rn = 0.0;
    for (std::size_t i = dual ? 0 : 1; i < ny; ++i) {
      double Ab = diag[i] * b[i];
      if (i > 0) Ab += off[i - 1] * b[i - 1];
      if (i + 1 < ny) Ab += off[i] * b[i + 1];
      double rhs = 0.0;
      if (dual && i == 0) rhs = nu * gj;
      if (!dual && i == 1) rhs = -off[0] * gj, Ab -= off[0] * b[0];
      rr += (Ab - rhs) * (Ab - rhs);
      rn += rhs * rhs;
    }
    double en = 0.0, tail = 0.0;
    for (std::size_t e = 0; e + 1 < ny; ++e) {
      const auto& el = ye[e];
      const Sym2 A{kappa * el.M[0] + nu * el.K[0], kappa * el.M[1] + nu * el.K[1], kappa * el.M[2] + nu * el.K[2]};
      const double v = quad2(A, b[e], b[e + 1]);
      en += v;
      if (0.5 * (y[e] + y[e + 1]) > 0.5 * Y) tail += v;
    }
    mode_energy[jm] = 0.5 * N * en;
    mode_tail[jm] = 0.5 * N * tail;
    mode_lin[jm] = 0.5 * N * nu * gj * b[0];
    res2[jm] = rr;
    rhs2[jm] = rn;
  });

  CylinderSolve out;
  double tail = 0.0, rr = 0.0, rn = 0.0;
  for (int j = 0; j < N - 1; ++j) {
    out.energy += mode_energy[j];
    tail += mode_tail[j];
    out.linear += mode_lin[j];
    rr += res2[j];
    rn += rhs2[j];
  }
  out.residual = rn > 0 ? std::sqrt(rr / rn) : 0.0;
  FRACLAP_REQUIRE(out.residual <= 1e-10, ErrorKind::solver, "cylinder solve did not reach relative residual 1e-10");
  FRACLAP_REQUIRE(tail <= 1e-2 * out.energy, ErrorKind::truncation, "last y-octave carries more than 1% of the energy");
  if (dual) {
    out.value = (2.0 * out.linear - out.energy) / c2;
  } else {
    out.value = c2 * out.energy;
  }
  return out;
}

}  // namespace

CylinderGrid CylinderGrid::bounded(const UniformGrid& omega, double sigma, int M, double Y, double gamma) {
  check_sigma(sigma);
  FRACLAP_REQUIRE(omega.dim() == 1, ErrorKind::precondition, "cylinder grids are one-dimensional in x");
  FRACLAP_REQUIRE(M >= 4, ErrorKind::precondition, "need at least 4 y-cells");
  const double diam = 2.0 * omega.domain().half_width(0);
  CylinderGrid g(omega);
  g.sigma_ = sigma;
  g.bounded_ = true;
  g.M_ = M;
  g.Y_ = Y > 0 ? Y : 10.0 * diam;
  FRACLAP_REQUIRE(g.Y_ >= 10.0 * diam - 1e-12, ErrorKind::precondition, "Y must be at least 10 diam");
  g.gamma_ = gamma > 0 ? gamma : default_gamma(sigma);
  const int N = omega.points(0);
  for (int i = 0; i <= N; ++i) g.x_.push_back(omega.coordinate(0, i));
  g.X_ = omega.domain().half_width(0);
  g.offset_ = 0;
  g.y_ = graded_y(M, g.Y_, g.gamma_);
  return g;
}

CylinderGrid CylinderGrid::whole_line(const UniformGrid& omega, double sigma, int M, double X, double Y, double gamma,
                                      double growth) {
  auto g = bounded(omega, sigma, M, Y, gamma);
  FRACLAP_REQUIRE(growth >= 1.0, ErrorKind::precondition, "cell growth factor must be >= 1");
  const double hw = omega.domain().half_width(0);
  g.bounded_ = false;
  g.growth_ = growth;
  g.X_ = X > 0 ? X : 20.0 * hw;
  FRACLAP_REQUIRE(g.X_ > hw, ErrorKind::precondition, "X must exceed the domain half-width");
  std::vector<double> right;
  double pos = hw, cell = omega.spacing(0);
  while (pos < g.X_) {
    cell *= growth;
    pos += cell;
    right.push_back(pos);
  }
  right.back() = g.X_;
  if (right.size() >= 2 && right.back() - right[right.size() - 2] < 0.5 * cell) right.erase(right.end() - 2);
  std::vector<double> xs;
  for (auto it = right.rbegin(); it != right.rend(); ++it) xs.push_back(-*it);
  g.offset_ = xs.size();
  xs.insert(xs.end(), g.x_.begin(), g.x_.end());
  xs.insert(xs.end(), right.begin(), right.end());
  g.x_ = std::move(xs);
  return g;
}

CylinderGrid CylinderGrid::with_y(int M, double Y) const {
  FRACLAP_REQUIRE(M >= 4, ErrorKind::precondition, "need at least 4 y-cells");
  CylinderGrid g = *this;
  g.M_ = M;
  g.Y_ = Y;
  g.y_ = graded_y(M, Y, gamma_);
  return g;
}

double c2_reference(double sigma) {
  check_sigma(sigma);
  return std::tgamma(sigma) / (std::pow(2.0, 1.0 - 2.0 * sigma) * std::tgamma(1.0 - sigma));
}

ExtensionField poisson_direct(const GridFunction& gk, double sigma, const CylinderGrid& grid) {
  check_sigma(sigma);
  check_omega(gk, grid);
  FRACLAP_REQUIRE(std::abs(sigma - grid.sigma()) < 1e-15, ErrorKind::precondition, "grid was graded for another sigma");
  const double c1 = 1.0 / boost::math::beta(0.5, sigma);
  const double e = -0.5 - sigma;
  auto w = extend(
      gk, grid, ExtensionKind::direct,
      [&](double t, double y) { return y == 0.0 ? 0.0 : c1 * std::pow(y, 2.0 * sigma) * std::pow(t * t + y * y, e); },
      [&](double t, double y) {
        if (y == 0.0) return std::array<double, 2>{0.0, 0.0};
        return direct_anti(t, y, sigma, c1);
      });
  // Trace row: the datum itself.
  const std::size_t nx = grid.nx(), off = grid.omega_offset();
  const int N = gk.grid().points(0);
  for (std::size_t ix = 0; ix < nx; ++ix) w.values[ix] = 0.0;
  for (int i = 0; i < N; ++i) w.values[off + i] = gk[i];
  double gmax = 0.0;
  for (int i = 0; i < N; ++i) gmax = std::max(gmax, std::abs(gk[i]));
  if (gmax > 0 && grid.ny() > 1) {
    double dev = 0.0;
    for (int i = 1; i < N; ++i) dev = std::max(dev, std::abs(w.at(off + i, 1) - gk[i]));
    FRACLAP_REQUIRE(dev <= 1e-2 * gmax, ErrorKind::layer_resolution, "first y-row does not reproduce the trace to 1%");
  }
  return w;
}

double energy_direct(const ExtensionField& w) {
  FRACLAP_REQUIRE(w.kind == ExtensionKind::direct, ErrorKind::precondition, "energy_direct expects a direct extension");
  return checked_energy(w);
}

double calibrate_c2(double sigma, const std::vector<GridFunction>& witnesses, int M) {
  check_sigma(sigma);
  FRACLAP_REQUIRE(witnesses.size() >= 3, ErrorKind::precondition, "calibration needs at least three witnesses");
  std::vector<double> ratio;
  for (const auto& u : witnesses) {
    FRACLAP_REQUIRE(u.grid().dim() == 1, ErrorKind::precondition, "calibration is implemented for n = 1");
    const auto grid = CylinderGrid::whole_line(u.grid(), sigma, M);
    const double E = energy_direct(poisson_direct(u, sigma, grid));
    FRACLAP_REQUIRE(E > 0, ErrorKind::degenerate_input, "witness with zero extension energy");
    ratio.push_back(q_dirichlet(u, sigma).value / E);
  }
  double mean = 0.0;
  for (double r : ratio) mean += r;
  mean /= ratio.size();
  double var = 0.0;
  for (double r : ratio) var += (r - mean) * (r - mean);
  const double cov = std::sqrt(var / ratio.size()) / mean;
  FRACLAP_REQUIRE(cov <= 1e-2, ErrorKind::calibration_failure, "c2 ratios vary by more than 1% across witnesses");
  return mean;
}

CylinderSolve cylinder_navier_solve(const GridFunction& gk, double sigma, const CylinderGrid& grid, double c2) {
  return cylinder_solve(gk, sigma, grid, c2, false);
}

double cylinder_navier(const GridFunction& gk, double sigma, const CylinderGrid& grid, double c2) {
  return cylinder_navier_solve(gk, sigma, grid, c2).value;
}

ExtensionField poisson_dual(const GridFunction& gk, double sigma, const CylinderGrid& grid) {
  check_sigma(sigma);
  check_omega(gk, grid);
  FRACLAP_REQUIRE(std::abs(sigma - grid.sigma()) < 1e-15, ErrorKind::precondition, "grid was graded for another sigma");
  const double c3 = is_log_case(sigma) ? -1.0 / (2.0 * kPi) : 1.0 / ((1.0 - 2.0 * sigma) * boost::math::beta(0.5, 1.0 - sigma));
  const bool log_kernel = is_log_case(sigma);
  return extend(
      gk, grid, ExtensionKind::dual,
      [&](double t, double y) {
        const double r2 = t * t + y * y;
        return log_kernel ? c3 * std::log(r2) : c3 * std::pow(r2, sigma - 0.5);
      },
      [&](double t, double y) { return dual_anti(t, y, sigma, c3); });
}

DualCheck q_dirichlet_dual_check(const GridFunction& u, const FormOrder& ord, const CylinderGrid& grid, double c2) {
  FRACLAP_REQUIRE(ord.parity == Parity::floor_odd && ord.k == 1, ErrorKind::invalid_order,
                  "dual identity needs m in (1, 2)");
  FRACLAP_REQUIRE(!grid.is_bounded(), ErrorKind::precondition, "dual identity needs a whole-line grid");
  FRACLAP_REQUIRE(c2 > 0 && std::isfinite(c2), ErrorKind::precondition, "c2 must be positive");
  const double sigma = ord.sigma;
  const auto gk = laplacian_power_k(u, 1);
  const auto w = poisson_dual(gk, sigma, grid);
  DualCheck out;
  const auto& x = grid.x();
  const std::size_t off = grid.omega_offset();
  const int N = gk.grid().points(0);
  for (int i = 0; i < N; ++i) {
    const double H = x[off + i + 1] - x[off + i];
    const double ga = gk[i], gb = (i + 1 < N) ? gk[i + 1] : 0.0;
    const double wa = w.at(off + i, 0), wb = w.at(off + i + 1, 0);
    out.linear += H / 6.0 * (2.0 * ga * wa + ga * wb + gb * wa + 2.0 * gb * wb);
  }
  out.energy = checked_energy(w);
  out.value = (2.0 * out.linear - out.energy) / c2;
  out.fourier = q_dirichlet(u, ord.m).value;
  out.consistent = std::abs(out.value - out.fourier) <= 0.05 * std::abs(out.fourier);
  return out;
}

double q_dirichlet_dual(const GridFunction& u, const FormOrder& ord, const CylinderGrid& grid, double c2) {
  return q_dirichlet_dual_check(u, ord, grid, c2).value;
}

CylinderSolve cylinder_navier_dual_solve(const GridFunction& gk, double sigma, const CylinderGrid& grid, double c2) {
  return cylinder_solve(gk, sigma, grid, c2, true);
}

double cylinder_navier_dual(const GridFunction& gk, double sigma, const CylinderGrid& grid, double c2) {
  return cylinder_navier_dual_solve(gk, sigma, grid, c2).value;
}

double harmonic_residual(const ExtensionField& w) {
  const auto& g = w.grid;
  const auto& x = g.x();
  const auto ye = y_elements(g.y(), g.sigma());
  const std::size_t nx = g.nx(), ny = g.ny();
  std::vector<double> r(g.size(), 0.0), dg(g.size(), 0.0);
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    const auto& My = ye[j].M;
    const auto& Ky = ye[j].K;
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double H = x[i + 1] - x[i];
      const Sym2 Kx{1.0 / H, -1.0 / H, 1.0 / H};
      const Sym2 Mx{H / 3.0, H / 6.0, H / 3.0};
      const std::size_t id[2][2] = {{j * nx + i, (j + 1) * nx + i}, {j * nx + i + 1, (j + 1) * nx + i + 1}};
      auto A = [](const Sym2& s, int a, int b) { return a == b ? s[2 * a] : s[1]; };
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double acc = 0.0;
          for (int a2 = 0; a2 < 2; ++a2)
            for (int b2 = 0; b2 < 2; ++b2)
              acc += (A(Kx, a, a2) * A(My, b, b2) + A(Mx, a, a2) * A(Ky, b, b2)) * w.values[id[a2][b2]];
          r[id[a][b]] += acc;
          dg[id[a][b]] += A(Kx, a, a) * A(My, b, b) + A(Mx, a, a) * A(Ky, b, b);
        }
    }
  }
  double rr = 0.0, nn = 0.0;
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t q = j * nx + i;
      rr += r[q] * r[q];
      nn += dg[q] * w.values[q] * dg[q] * w.values[q];
    }
  return nn > 0 ? std::sqrt(rr / nn) : 0.0;
}

std::vector<double> neumann_datum(const ExtensionField& w) {
  const auto& g = w.grid;
  FRACLAP_REQUIRE(g.ny() >= 2, ErrorKind::precondition, "need two y-rows");
  const double y1 = g.y()[1];
  const double s = g.sigma();
  std::vector<double> out(g.nx());
  // Near y = 0 the profile is w(x, 0) + a(x) y^{2 sigma}, so the weighted
  // derivative tends to 2 sigma a(x).
  for (std::size_t i = 0; i < g.nx(); ++i) out[i] = 2.0 * s * (w.at(i, 1) - w.at(i, 0)) / std::pow(y1, 2.0 * s);
  return out;
}

void write_csv(std::ostream& os, const ExtensionField& w) {
  os << "x,y,value\n";
  const auto& g = w.grid;
  for (std::size_t iy = 0; iy < g.ny(); ++iy)
    for (std::size_t ix = 0; ix < g.nx(); ++ix)
      os << detail::fmt_num(g.x()[ix]) << ',' << detail::fmt_num(g.y()[iy]) << ',' << detail::fmt_num(w.at(ix, iy)) << '\n';
}

}  // namespace fraclap
