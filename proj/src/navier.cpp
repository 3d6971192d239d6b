#include "fraclap/navier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "detail/fft.hpp"
#include "detail/format.hpp"
#include "fraclap/error.hpp"

namespace fraclap {

SineBasis::SineBasis(BoxDomain domain, int max_index) : domain_(std::move(domain)), J_(max_index) {
  FRACLAP_REQUIRE(J_ >= 1, ErrorKind::precondition, "basis needs at least one mode per axis");
  const int n = dim();
  std::size_t count = 1;
  for (int a = 0; a < n; ++a) count *= static_cast<std::size_t>(J_);
  eigenvalues_.resize(count);
  for (std::size_t f = 0; f < count; ++f) {
    const auto j = multi_index(f);
    double lam = 0.0;
    for (int a = 0; a < n; ++a) {
      const double k = j[a] * std::numbers::pi / (2.0 * domain_.half_width(a));
      lam += k * k;
    }
    eigenvalues_[f] = lam;
  }
}

std::array<int, 3> SineBasis::multi_index(std::size_t flat) const {
  std::array<int, 3> j{0, 0, 0};
  for (int a = dim() - 1; a >= 0; --a) {
    j[a] = static_cast<int>(flat % J_) + 1;
    flat /= J_;
  }
  return j;
}

std::vector<double> SineBasis::sorted_eigenvalues() const {
  auto v = eigenvalues_;
  std::sort(v.begin(), v.end());
  return v;
}

double SineBasis::first_eigenvalue() const { return eigenvalues_.front(); }

double SineBasis::evaluate(std::size_t flat, const Point& x) const {
  const auto j = multi_index(flat);
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) {
    const double h = domain_.half_width(a);
    v *= std::sin(j[a] * std::numbers::pi * (x[a] + h) / (2.0 * h)) / std::sqrt(h);
  }
  return v;
}

SpectralCoeffs SpectralCoeffs::scaled(double alpha) const {
  SpectralCoeffs out{basis, coeffs};
  for (double& c : out.coeffs) c *= alpha;
  return out;
}

namespace {

void check_compatible(const UniformGrid& grid, const SineBasis& basis) {
  FRACLAP_REQUIRE(grid.domain() == basis.domain(), ErrorKind::precondition, "grid and basis domains differ");
  for (int a = 0; a < grid.dim(); ++a)
    FRACLAP_REQUIRE(2 * basis.max_index() <= grid.points(a), ErrorKind::aliasing,
                    "basis index exceeds the Nyquist limit points_per_axis / 2");
}

std::vector<int> interior_dims(const UniformGrid& grid) {
  std::vector<int> d;
  for (int a = 0; a < grid.dim(); ++a) d.push_back(grid.points(a) - 1);
  return d;
}

// Visits (grid flat index, interior flat index) for nodes with every index >= 1.
template <class F>
void for_each_interior(const UniformGrid& grid, F&& f) {
  const auto d = interior_dims(grid);
  std::size_t inner_total = 1;
  for (int x : d) inner_total *= static_cast<std::size_t>(x);
  const int n = grid.dim();
  for (std::size_t q = 0; q < inner_total; ++q) {
    std::size_t rem = q;
    std::array<int, 3> idx{0, 0, 0};
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % d[a]) + 1;
      rem /= d[a];
    }
    f(grid.flat_index(std::span<const int>(idx.data(), n)), q);
  }
}

// Visits (basis flat index, interior flat index) for j_a <= J.
template <class F>
void for_each_mode(const UniformGrid& grid, const SineBasis& basis, F&& f) {
  const auto d = interior_dims(grid);
  const int n = grid.dim();
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const auto j = basis.multi_index(b);
    std::size_t q = 0;
    for (int a = 0; a < n; ++a) q = q * d[a] + (j[a] - 1);
    f(b, q);
  }
}

}  // namespace

std::vector<double> expand_values(std::span<const double> values, const UniformGrid& grid, const SineBasis& basis) {
  check_compatible(grid, basis);
  const auto d = interior_dims(grid);
  std::size_t total = 1;
  for (int x : d) total *= static_cast<std::size_t>(x);
  std::vector<double> buf(total);
  for_each_interior(grid, [&](std::size_t g, std::size_t q) { buf[q] = values[g]; });
  detail::sine_transform(buf, d);
  double scale = 1.0;
  for (int a = 0; a < grid.dim(); ++a) scale *= grid.spacing(a) / (2.0 * std::sqrt(grid.domain().half_width(a)));
  std::vector<double> c(basis.size());
  for_each_mode(grid, basis, [&](std::size_t b, std::size_t q) { c[b] = scale * buf[q]; });
  return c;
}

SpectralCoeffs expand(const GridFunction& u, const SineBasis& basis) {
  return SpectralCoeffs{basis, expand_values(u.values(), u.grid(), basis)};
}

std::vector<double> reconstruct_values(const SpectralCoeffs& c, const UniformGrid& grid) {
  const auto& basis = c.basis;
  FRACLAP_REQUIRE(grid.domain() == basis.domain(), ErrorKind::precondition, "grid and basis domains differ");
  for (int a = 0; a < grid.dim(); ++a)
    FRACLAP_REQUIRE(basis.max_index() < grid.points(a), ErrorKind::aliasing, "grid too coarse for the basis");
  const auto d = interior_dims(grid);
  std::size_t total = 1;
  for (int x : d) total *= static_cast<std::size_t>(x);
  std::vector<double> buf(total, 0.0);
  for_each_mode(grid, basis, [&](std::size_t b, std::size_t q) { buf[q] = c.coeffs[b]; });
  detail::sine_transform(buf, d);
  double scale = 1.0;
  for (int a = 0; a < grid.dim(); ++a) scale *= 0.5 / std::sqrt(grid.domain().half_width(a));
  std::vector<double> v(grid.size(), 0.0);
  for_each_interior(grid, [&](std::size_t g, std::size_t q) { v[g] = scale * buf[q]; });
  return v;
}

GridFunction reconstruct(const SpectralCoeffs& c, const UniformGrid& grid) {
  return GridFunction(grid, reconstruct_values(c, grid));
}

NavierValue q_navier(const SpectralCoeffs& c, double m, bool strict) {
  const auto& lam = c.basis.eigenvalues();
  const int J = c.basis.max_index();
  NavierValue out;
  double tail = 0.0;
  for (std::size_t b = 0; b < lam.size(); ++b) {
    const double term = std::pow(lam[b], m) * c.coeffs[b] * c.coeffs[b];
    out.value += term;
    const auto j = c.basis.multi_index(b);
    bool last_octave = false;
    for (int a = 0; a < c.basis.dim(); ++a) last_octave = last_octave || 2 * j[a] > J;
    if (last_octave) tail += term;
  }
  out.tail_flag = J >= 2 && tail > 1e-3 * std::abs(out.value);
  FRACLAP_REQUIRE(!(strict && out.tail_flag), ErrorKind::truncation, "last-octave share of Q^N exceeds 0.1%");
  return out;
}

double lambda1(double m, double s, const SineBasis& basis) {
  FRACLAP_REQUIRE(m > s, ErrorKind::invalid_order, "Lambda_1(m, s) requires m > s");
  return std::pow(basis.first_eigenvalue(), m - s);
}

std::vector<double> hardy_gram_apply(std::span<const double> c, const SineBasis& basis, const UniformGrid& grid,
                                     std::span<const double> hardy_w) {
  SpectralCoeffs sc{basis, std::vector<double>(c.begin(), c.end())};
  auto u = reconstruct_values(sc, grid);
  const double vol = grid.cell_volume();
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= hardy_w[i] / vol;
  return expand_values(u, grid, basis);
}

HardyEigen lambda1_hardy_solve(double m, double s, const SineBasis& basis, const UniformGrid& grid, double tol) {
  FRACLAP_REQUIRE(m > s && s >= 0, ErrorKind::invalid_order, "Lambda~_1(m, s) requires m > s >= 0");
  check_compatible(grid, basis);
  const auto w = hardy_weights(grid, s);
  for (double x : w) FRACLAP_REQUIRE(x > 0 && std::isfinite(x), ErrorKind::quadrature_failure, "nonpositive Hardy weight");

  const std::size_t dimn = basis.size();
  Eigen::VectorXd dinv(dimn);
  for (std::size_t b = 0; b < dimn; ++b) dinv[b] = std::pow(basis.eigenvalues()[b], -0.5 * m);
  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = dinv.cwiseProduct(x);
    auto wy = hardy_gram_apply(std::span<const double>(y.data(), dimn), basis, grid, w);
    return Eigen::VectorXd(dinv.cwiseProduct(Eigen::Map<Eigen::VectorXd>(wy.data(), dimn)));
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(dimn);
  x[0] = 1.0;
  Eigen::VectorXd p;
  double theta = 0.0;
  HardyEigen out;
  const int max_iter = 20000;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd bx = apply(x);
    theta = x.dot(bx);
    FRACLAP_REQUIRE(theta > 0 && std::isfinite(theta), ErrorKind::quadrature_failure,
                    "Hardy Gram matrix is not positive definite");
    Eigen::VectorXd r = bx - theta * x;
    out.iterations = it + 1;
    if (r.norm() <= tol * 1e-2 * theta) break;
    if (it < 5) {
      Eigen::VectorXd next = bx / bx.norm();
      p = next - x;
      x = next;
      continue;
    }
    // Rayleigh-Ritz on span{x, r, p}.
    std::vector<Eigen::VectorXd> span{x, r};
    if (p.size() == static_cast<Eigen::Index>(dimn)) span.push_back(p);
    std::vector<Eigen::VectorXd> q;
    for (auto v : span) {
      for (const auto& e : q) v -= e.dot(v) * e;
      for (const auto& e : q) v -= e.dot(v) * e;
      const double nv = v.norm();
      if (nv > 1e-14 * (1.0 + v.size())) q.push_back(v / nv);
    }
    const int k = static_cast<int>(q.size());
    std::vector<Eigen::VectorXd> bq;
    for (const auto& e : q) bq.push_back(apply(e));
    Eigen::MatrixXd H(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) H(i, j) = 0.5 * (q[i].dot(bq[j]) + q[j].dot(bq[i]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const Eigen::VectorXd y = es.eigenvectors().col(k - 1);
    Eigen::VectorXd next = Eigen::VectorXd::Zero(dimn);
    for (int i = 0; i < k; ++i) next += y[i] * q[i];
    if (next.dot(x) < 0) next = -next;
    next /= next.norm();
    p = next - x * x.dot(next);
    x = next;
  }
  out.value = 1.0 / theta;
  Eigen::VectorXd c = dinv.cwiseProduct(x);
  out.vector.assign(c.data(), c.data() + dimn);
  return out;
}

double lambda1_hardy(double m, double s, const SineBasis& basis, const UniformGrid& grid) {
  return lambda1_hardy_solve(m, s, basis, grid).value;
}

double el_residual(const SpectralCoeffs& c, double m, double s, double lambda, bool hardy, const UniformGrid& grid,
                   bool nonlinear) {
  const auto& lam = c.basis.eigenvalues();
  const std::size_t dimn = lam.size();
  std::vector<double> sterm(dimn);
  if (hardy) {
    const auto w = hardy_weights(grid, s);
    sterm = hardy_gram_apply(c.coeffs, c.basis, grid, w);
  } else {
    for (std::size_t b = 0; b < dimn; ++b) sterm[b] = std::pow(lam[b], s) * c.coeffs[b];
  }
  std::vector<double> r(dimn);
  double qm = 0.0, pert = 0.0;
  for (std::size_t b = 0; b < dimn; ++b) {
    const double a = std::pow(lam[b], m) * c.coeffs[b];
    r[b] = a - lambda * sterm[b];
    qm += a * c.coeffs[b];
    pert += sterm[b] * c.coeffs[b];
  }
  if (nonlinear) {
    const int n = grid.dim();
    FRACLAP_REQUIRE(2.0 * m < n, ErrorKind::invalid_order, "critical exponent requires m < n/2");
    const double p = 2.0 * n / (n - 2.0 * m);
    auto u = reconstruct_values(c, grid);
    double norm_p = 0.0;
    for (double& v : u) {
      const double av = std::abs(v);
      norm_p += std::pow(av, p);
      v = std::pow(av, p - 2.0) * v;
    }
    norm_p = std::pow(norm_p * grid.cell_volume(), 1.0 / p);
    FRACLAP_REQUIRE(std::abs(norm_p - 1.0) <= 1e-8, ErrorKind::precondition,
                    "el_residual expects ||u||_{2*} = 1");
    const auto nl = expand_values(u, grid, c.basis);
    const double mu = qm - lambda * pert;
    for (std::size_t b = 0; b < dimn; ++b) r[b] -= mu * nl[b];
  }
  double acc = 0.0;
  for (double x : r) acc += x * x;
  return std::sqrt(acc);
}

void write_csv(std::ostream& os, const SpectralCoeffs& c) {
  for (int a = 0; a < c.basis.dim(); ++a) os << 'j' << (a + 1) << ',';
  os << "coeff\n";
  for (std::size_t b = 0; b < c.coeffs.size(); ++b) {
    const auto j = c.basis.multi_index(b);
    for (int a = 0; a < c.basis.dim(); ++a) os << j[a] << ',';
    os << detail::fmt_num(c.coeffs[b]) << '\n';
  }
}

}  // namespace fraclap
