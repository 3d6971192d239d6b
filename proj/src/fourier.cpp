#include "fraclap/fourier.hpp"

#include <cmath>
#include <numbers>

#include "detail/fft.hpp"
#include "fraclap/error.hpp"

namespace fraclap {

FormOrder FormOrder::from(double m) {
  FRACLAP_REQUIRE(std::isfinite(m) && m > 0 && m < 3, ErrorKind::invalid_order, "supported orders are 0 < m < 3");
  FormOrder o;
  o.m = m;
  const double fl = std::floor(m);
  if (m == fl) {
    FRACLAP_REQUIRE(m == 1.0 || m == 2.0, ErrorKind::invalid_order, "integer orders limited to {1, 2}");
    o.parity = Parity::integer;
    o.k = static_cast<int>(m);
    return o;
  }
  const int f = static_cast<int>(fl);
  if (f % 2 == 0) {
    o.parity = Parity::floor_even;
    o.k = f / 2;
    o.sigma = m - 2.0 * o.k;
  } else {
    o.parity = Parity::floor_odd;
    o.k = (f + 1) / 2;
    o.sigma = 2.0 * o.k - m;
  }
  return o;
}

double PaddedSpectrum::frequency_cell() const {
  double c = 1.0;
  for (double s : frequency_step) c *= s;
  return c;
}

PaddedSpectrum transform(const GridFunction& u, int pad_factor) {
  FRACLAP_REQUIRE(pad_factor >= 4, ErrorKind::precondition, "pad_factor must be >= 4");
  const auto& g = u.grid();
  const int n = g.dim();
  // The support must stay off the lattice edge, otherwise the padded copy
  // no longer represents the compactly supported function.
  {
    const auto v = u.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0) continue;
      const auto idx = g.multi_index(i);
      for (int a = 0; a < n; ++a)
        FRACLAP_REQUIRE(idx[a] > 0 && idx[a] < g.points(a) - 1, ErrorKind::aliasing,
                        "support touches the grid boundary");
    }
  }
  auto half = detail::forward_padded(u.values(), g.points_per_axis(), pad_factor);
  PaddedSpectrum s{u, pad_factor, half.dims, std::move(half.data), {}};
  for (int a = 0; a < n; ++a) s.frequency_step.push_back(2.0 * std::numbers::pi / (s.dims[a] * g.spacing(a)));

  const double scale = g.cell_volume() * std::pow(2.0 * std::numbers::pi, -0.5 * n);
  const int half_len = s.dims.back() / 2 + 1;
  for (std::size_t e = 0; e < s.modal_amplitudes.size(); ++e) {
    std::size_t rem = e;
    double phase = 0.0;  // e^{-i xi x_0} with x_0 = -h on every axis
    for (int a = n - 1; a >= 0; --a) {
      const int len = (a == n - 1) ? half_len : s.dims[a];
      const int q = static_cast<int>(rem % len);
      rem /= len;
      phase += detail::HalfSpectrum::signed_index(q, s.dims[a]) * s.frequency_step[a] * g.domain().half_width(a);
    }
    s.modal_amplitudes[e] *= scale * std::polar(1.0, phase);
  }
  return s;
}

double q_dirichlet_lattice(const GridFunction& u, double m, int pad_factor) {
  const auto spec = transform(u, pad_factor);
  double acc = 0.0;
  spec.for_each([&](double xi2, std::complex<double> a, int mult) {
    const double w = (m == 0.0) ? 1.0 : (xi2 == 0.0 ? 0.0 : std::pow(xi2, m));
    acc += mult * w * std::norm(a);
  });
  return acc * spec.frequency_cell();
}

FormValue q_dirichlet(const GridFunction& u, double m, int pad_factor) {
  FRACLAP_REQUIRE(m >= 0 && m < 3, ErrorKind::invalid_order, "q_dirichlet supports 0 <= m < 3");
  const double a = q_dirichlet_lattice(u, m, pad_factor);
  const double b = q_dirichlet_lattice(u, m, 2 * pad_factor);
  const double c = q_dirichlet_lattice(u, m, 4 * pad_factor);
  const double p = u.grid().dim() + 2.0 * m;
  const double f1 = std::pow(2.0, p), f2 = std::pow(2.0, p + 2.0);
  const double r1 = (f1 * b - a) / (f1 - 1.0);
  const double r2 = (f1 * c - b) / (f1 - 1.0);
  FormValue out;
  out.value = (f2 * r2 - r1) / (f2 - 1.0);
  out.raw = c;
  out.converged = out.value == 0.0 || std::abs(out.value - c) <= 1e-3 * std::abs(out.value);
  return out;
}

FormValue q_dirichlet(const GridFunction& u, const FormOrder& ord, int pad_factor) {
  return q_dirichlet(u, ord.m, pad_factor);
}

GagliardoValue gagliardo_form(const GridFunction& u, double sigma) {
  FRACLAP_REQUIRE(sigma > 0 && sigma < 1, ErrorKind::precondition, "gagliardo_form requires 0 < sigma < 1");
  const auto& g = u.grid();
  FRACLAP_REQUIRE(g.dim() == 1, ErrorKind::precondition, "gagliardo_form is implemented for n = 1");
  GagliardoValue out;
  out.ill_conditioned = sigma < 1e-3 || sigma > 1.0 - 1e-3;

  const int N = g.points(0);
  const double h = g.spacing(0);
  const auto v = u.values();
  const double p = 1.0 - 2.0 * sigma;
  const double norm = (p + 1.0) * (p + 2.0);
  auto G = [&](double t) { return std::pow(t, p + 2.0); };

  // Cell pair at offset k: int int |x - y|^p = h^{p+2} F(k).
  std::vector<double> weight(N, 0.0);
  const double hp = std::pow(h, p + 2.0);
  for (int k = 1; k < N; ++k) {
    const double F = (G(k + 1.0) - 2.0 * G(k) + G(k - 1.0)) / norm;
    weight[k] = hp * F / (static_cast<double>(k) * k * h * h);
  }

  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    double row = 0.0;
    for (int j = i + 1; j < N; ++j) {
      const double d = v[i] - v[j];
      row += weight[j - i] * d * d;
    }
    acc += 2.0 * row;
  }

  // Diagonal cells with the slope from central differences.
  const double diag = hp * 2.0 / norm;
  for (int i = 1; i + 1 < N; ++i) {
    const double du = (v[i + 1] - v[i - 1]) / (2.0 * h);
    acc += diag * du * du;
  }

  // Pairs with one point outside the lattice span [a, b).
  const double a = g.coordinate(0, 0) - 0.5 * h;
  const double b = g.coordinate(0, N - 1) + 0.5 * h;
  for (int i = 0; i < N; ++i) {
    if (v[i] == 0.0) continue;
    const double x = g.coordinate(0, i);
    const double tail = (std::pow(x - a, -2.0 * sigma) + std::pow(b - x, -2.0 * sigma)) / (2.0 * sigma);
    acc += 2.0 * h * v[i] * v[i] * tail;
  }
  out.value = acc;
  return out;
}

DilationCheck dilation_check(const GridFunction& u, double m, double t, int pad_factor) {
  FRACLAP_REQUIRE(t > 0, ErrorKind::precondition, "dilation factor must be positive");
  const double base = q_dirichlet(u, m, pad_factor).value;
  DilationCheck out;
  out.rhs = std::pow(t, u.grid().dim() - 2.0 * m) * base;
  out.lhs = (t == 1.0) ? base : q_dirichlet(dilate(u, t), m, pad_factor).value;
  return out;
}

DilationCheck dilation_check(const GridFunction& u, const FormOrder& ord, double t, int pad_factor) {
  return dilation_check(u, ord.m, t, pad_factor);
}

}  // namespace fraclap
