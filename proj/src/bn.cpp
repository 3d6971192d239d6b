#include "fraclap/bn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "detail/format.hpp"
#include "detail/parallel.hpp"
#include "fraclap/error.hpp"
#include "fraclap/fourier.hpp"

namespace fraclap {

const char* to_string(Variant v) {
  return v == Variant::spectral_perturbation ? "spectral_perturbation" : "hardy_perturbation";
}

Variant variant_from_string(const std::string& s) {
  if (s == "spectral_perturbation" || s == "spectral") return Variant::spectral_perturbation;
  if (s == "hardy_perturbation" || s == "hardy") return Variant::hardy_perturbation;
  throw Error(ErrorKind::validation, "unknown variant '" + s + "'");
}

BNProblem BNProblem::make(Variant variant, int n, double m, double s, double lambda, double hw, int points, int J) {
  FRACLAP_REQUIRE(n >= 1 && n <= 3, ErrorKind::precondition, "n must be 1, 2 or 3");
  FRACLAP_REQUIRE(s >= 0 && s < m && 2.0 * m < n, ErrorKind::invalid_order, "need 0 <= s < m < n/2");
  FRACLAP_REQUIRE(std::isfinite(lambda) && lambda >= 0, ErrorKind::precondition, "lambda must be finite and >= 0");
  if (points <= 0) points = n == 1 ? 512 : (n == 2 ? 128 : 32);
  if (J <= 0) J = points / 2;
  auto domain = BoxDomain::cube(n, hw);
  auto grid = UniformGrid::cube(n, hw, points);
  SineBasis basis(domain, J);
  BNProblem p{variant, n, m, s, lambda, domain, basis, grid, {}};
  if (variant == Variant::hardy_perturbation) p.hardy_w = hardy_weights(grid, s);
  return p;
}

BNProblem BNProblem::with_lambda(double l) const {
  FRACLAP_REQUIRE(std::isfinite(l) && l >= 0, ErrorKind::precondition, "lambda must be finite and >= 0");
  BNProblem p = *this;
  p.lambda = l;
  return p;
}

double lambda_bound(const BNProblem& prob) {
  if (prob.variant == Variant::spectral_perturbation) return lambda1(prob.m, prob.s, prob.basis);
  return lambda1_hardy(prob.m, prob.s, prob.basis, prob.grid);
}

namespace {

struct Eval {
  RayleighParts parts;
  std::vector<double> grad;  // of the quotient
  std::vector<double> u;     // reconstructed values
};

double pnorm_power(const std::vector<double>& u, double p, double vol) {
  double acc = 0.0;
  for (double v : u) acc += std::pow(std::abs(v), p);
  return acc * vol;
}

double perturbation_from(const std::vector<double>& c, const std::vector<double>& u, const BNProblem& prob) {
  if (prob.variant == Variant::hardy_perturbation) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += prob.hardy_w[i] * u[i] * u[i];
    return acc;
  }
  const auto& lam = prob.basis.eigenvalues();
  double acc = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) acc += std::pow(lam[j], prob.s) * c[j] * c[j];
  return acc;
}

// S c: the perturbation's coefficient action.
std::vector<double> perturbation_apply(const std::vector<double>& c, const BNProblem& prob) {
  if (prob.variant == Variant::hardy_perturbation) return hardy_gram_apply(c, prob.basis, prob.grid, prob.hardy_w);
  const auto& lam = prob.basis.eigenvalues();
  std::vector<double> out(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) out[j] = std::pow(lam[j], prob.s) * c[j];
  return out;
}

Eval evaluate(const std::vector<double>& c, const BNProblem& prob, bool want_grad) {
  Eval e;
  SpectralCoeffs sc{prob.basis, c};
  e.u = reconstruct_values(sc, prob.grid);
  const double p = prob.critical_exponent();
  const double vol = prob.grid.cell_volume();
  const double Ip = pnorm_power(e.u, p, vol);
  e.parts.norm_p = std::pow(Ip, 1.0 / p);
  FRACLAP_REQUIRE(e.parts.norm_p >= 1e-14, ErrorKind::degenerate_input, "||u||_{2*} below 1e-14");
  const auto& lam = prob.basis.eigenvalues();
  for (std::size_t j = 0; j < c.size(); ++j) e.parts.qm += std::pow(lam[j], prob.m) * c[j] * c[j];
  e.parts.perturbation = perturbation_from(c, e.u, prob);
  const double D = e.parts.norm_p * e.parts.norm_p;
  e.parts.value = (e.parts.qm - prob.lambda * e.parts.perturbation) / D;
  if (!want_grad) return e;
  std::vector<double> nl(e.u.size());
  for (std::size_t i = 0; i < e.u.size(); ++i) nl[i] = std::pow(std::abs(e.u[i]), p - 2.0) * e.u[i];
  const auto nlc = expand_values(nl, prob.grid, prob.basis);
  const auto Sc = perturbation_apply(c, prob);
  const double dscale = std::pow(e.parts.norm_p, 2.0 - p);
  e.grad.resize(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double gN = 2.0 * (std::pow(lam[j], prob.m) * c[j] - prob.lambda * Sc[j]);
    const double gD = 2.0 * dscale * nlc[j];
    e.grad[j] = (gN - e.parts.value * gD) / D;
  }
  return e;
}

double norm2(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

RayleighParts rayleigh_parts(const SpectralCoeffs& c, const BNProblem& prob) {
  FRACLAP_REQUIRE(c.basis.domain() == prob.domain && c.coeffs.size() == prob.basis.size(), ErrorKind::precondition,
                  "coefficients do not belong to the problem basis");
  return evaluate(c.coeffs, prob, false).parts;
}

double rayleigh(const SpectralCoeffs& c, const BNProblem& prob) { return rayleigh_parts(c, prob).value; }

std::vector<double> numerator_gradient(const SpectralCoeffs& c, const BNProblem& prob) {
  const auto Sc = perturbation_apply(c.coeffs, prob);
  const auto& lam = prob.basis.eigenvalues();
  std::vector<double> g(c.coeffs.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = 2.0 * (std::pow(lam[j], prob.m) * c.coeffs[j] - prob.lambda * Sc[j]);
  return g;
}

std::vector<double> rayleigh_gradient(const SpectralCoeffs& c, const BNProblem& prob) {
  return evaluate(c.coeffs, prob, true).grad;
}

// ---------------------------------------------------------------------------
// Sobolev constant ladder

std::vector<double> default_sobolev_scales(int n) {
  if (n == 1) return {4, 8, 16, 32, 64};
  if (n == 2) return {2, 4, 8};
  return {0.75, 1, 1.5};
}

SobolevEstimate sobolev_ladder(int n, double m, const std::vector<double>& scales, double spacing) {
  FRACLAP_REQUIRE(n >= 1 && n <= 3, ErrorKind::precondition, "n must be 1, 2 or 3");
  FRACLAP_REQUIRE(m > 0 && 2.0 * m < n, ErrorKind::invalid_order, "need 0 < m < n/2");
  FRACLAP_REQUIRE(scales.size() >= 3, ErrorKind::precondition, "ladder needs at least three scales");
  if (spacing <= 0) spacing = n == 1 ? 0.125 : (n == 2 ? 0.25 : 0.5);
  const int pad = n == 1 ? 8 : 4;
  SobolevEstimate est;
  est.scales = scales;
  std::sort(est.scales.begin(), est.scales.end());
  const double p = 2.0 * n / (n - 2.0 * m);
  for (double rho : est.scales) {
    FRACLAP_REQUIRE(rho > 0, ErrorKind::precondition, "ladder scales must be positive");
    const int half = static_cast<int>(std::ceil(2.0 * rho / spacing)) + 2;
    const auto grid = UniformGrid::cube(n, half * spacing, 2 * half);
    const auto u = make_bubble(BubbleParams{n, m, 1.0, rho}, grid);
    const double np = lp_norm(u, p);
    est.quotients.push_back(q_dirichlet(u, m, pad).value / (np * np));
  }
  for (std::size_t k = 1; k < est.quotients.size(); ++k)
    FRACLAP_REQUIRE(est.quotients[k] < est.quotients[k - 1], ErrorKind::convergence,
                    "bubble ladder is not monotone; extrapolation failed");
  const double e1 = n - 2.0 * m, e2 = n;
  auto extrapolate = [&](std::size_t last) {
    Eigen::Matrix3d A;
    Eigen::Vector3d b;
    for (int i = 0; i < 3; ++i) {
      const double r = est.scales[last - 2 + i];
      A(i, 0) = 1.0;
      A(i, 1) = std::pow(r, -e1);
      A(i, 2) = std::pow(r, -e2);
      b(i) = est.quotients[last - 2 + i];
    }
    return A.colPivHouseholderQr().solve(b)(0);
  };
  const std::size_t last = est.quotients.size() - 1;
  est.value = extrapolate(last);
  est.uncertainty = last >= 3 ? std::abs(est.value - extrapolate(last - 1)) : std::abs(est.value - est.quotients[last]);
  FRACLAP_REQUIRE(std::isfinite(est.value) && est.value > 0, ErrorKind::convergence, "ladder extrapolation failed");
  return est;
}

double sobolev_constant_estimate(int n, double m, const std::vector<double>& scales) {
  return sobolev_ladder(n, m, scales).value;
}

// ---------------------------------------------------------------------------
// Minimization

double concentration(const SpectralCoeffs& c, const BNProblem& prob) {
  const auto u = reconstruct_values(c, prob.grid);
  const double p = prob.critical_exponent();
  std::size_t peak = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (std::abs(u[i]) > std::abs(u[peak])) peak = i;
  const auto x0 = prob.grid.node(peak);
  double h = 0.0;
  for (int a = 0; a < prob.n; ++a) h = std::max(h, prob.grid.spacing(a));
  double inner = 0.0, total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto x = prob.grid.node(i);
    double d2 = 0.0;
    for (int a = 0; a < prob.n; ++a) d2 += (x[a] - x0[a]) * (x[a] - x0[a]);
    const double w = std::pow(std::abs(u[i]), p);
    total += w;
    if (d2 <= 16.0 * h * h) inner += w;
  }
  return total > 0 ? inner / total : 0.0;
}

namespace {

struct RunResult {
  std::vector<double> c;
  double value = 0.0;
  double start_value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

std::vector<double> start_vector(const BNProblem& prob, int k, std::uint64_t seed) {
  const std::size_t dimn = prob.basis.size();
  std::vector<double> c(dimn, 0.0);
  if (k == 0) {
    c[0] = 1.0;
  } else if (k == 1) {
    const double hw = prob.domain.min_half_width();
    const auto u = make_bubble(BubbleParams{prob.n, prob.m, 0.1 * hw, 0.25 * hw}, prob.grid);
    c = expand(u, prob.basis).coeffs;
  } else {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> nd(0.0, 1.0);
    const auto& lam = prob.basis.eigenvalues();
    for (std::size_t j = 0; j < dimn; ++j) c[j] = nd(gen) / lam[j];
  }
  return c;
}

RunResult descend(const BNProblem& prob, std::vector<double> c, const MinimizeOptions& opt) {
  const auto& lam = prob.basis.eigenvalues();
  const std::size_t dimn = c.size();
  std::vector<double> pre(dimn);
  for (std::size_t j = 0; j < dimn; ++j) pre[j] = std::pow(lam[j], -prob.m);

  auto normalize = [&](std::vector<double>& v) {
    SpectralCoeffs sc{prob.basis, v};
    const auto u = reconstruct_values(sc, prob.grid);
    const double np = std::pow(pnorm_power(u, prob.critical_exponent(), prob.grid.cell_volume()), 1.0 / prob.critical_exponent());
    FRACLAP_REQUIRE(np >= 1e-14, ErrorKind::degenerate_input, "start vector has vanishing 2* norm");
    for (double& x : v) x /= np;
  };
  normalize(c);

  RunResult out;
  Eval e = evaluate(c, prob, true);
  out.start_value = e.parts.value;
  std::vector<double> d(dimn), z(dimn), g_old, z_old;
  int stall = 0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const auto& g = e.grad;
    for (std::size_t j = 0; j < dimn; ++j) z[j] = pre[j] * g[j];
    double beta = 0.0;
    if (!g_old.empty() && it % 50 != 0) {
      double num = 0.0;
      for (std::size_t j = 0; j < dimn; ++j) num += z[j] * (g[j] - g_old[j]);
      beta = std::max(0.0, num / dot(z_old, g_old));
    }
    for (std::size_t j = 0; j < dimn; ++j) d[j] = -z[j] + beta * d[j];
    double slope = dot(g, d);
    if (slope >= 0) {
      for (std::size_t j = 0; j < dimn; ++j) d[j] = -z[j];
      slope = dot(g, d);
    }
    // Initial step from the quadratic model of the numerator.
    double curv = 0.0;
    for (std::size_t j = 0; j < dimn; ++j) curv += std::pow(lam[j], prob.m) * d[j] * d[j];
    const auto Sd = perturbation_apply(d, prob);
    curv -= prob.lambda * dot(d, Sd);
    double t = curv > 0 ? -slope / (2.0 * curv) : 1.0;
    std::vector<double> trial(dimn);
    double vt = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      for (std::size_t j = 0; j < dimn; ++j) trial[j] = c[j] + t * d[j];
      vt = evaluate(trial, prob, false).parts.value;
      if (vt <= e.parts.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    normalize(trial);
    g_old = g;
    z_old = z;
    const double v_old = e.parts.value;
    c = std::move(trial);
    e = evaluate(c, prob, true);
    const double change = std::abs(v_old - e.parts.value);
    const double res = 0.5 * norm2(e.grad);
    if (change <= opt.value_tol * std::abs(e.parts.value) && res <= opt.residual_tol) {
      out.converged = true;
      ++it;
      break;
    }
    stall = change <= 1e-15 * std::abs(e.parts.value) ? stall + 1 : 0;
    if (stall >= 200) {
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.value = e.parts.value;
  out.residual = 0.5 * norm2(e.grad);
  out.c = std::move(c);
  return out;
}

}  // namespace

RayleighReport minimize(const BNProblem& prob, const MinimizeOptions& opt) {
  FRACLAP_REQUIRE(opt.restarts >= 3, ErrorKind::precondition, "minimize needs at least 3 restarts");
  FRACLAP_REQUIRE(opt.max_iterations >= 1, ErrorKind::precondition, "max_iterations must be positive");
  const double cap = lambda_bound(prob);
  FRACLAP_REQUIRE(prob.lambda < cap, ErrorKind::precondition, "lambda must lie below the first eigen-quotient");

  std::vector<RunResult> runs(opt.restarts);
  detail::parallel_for(static_cast<std::size_t>(opt.restarts), [&](std::size_t k) {
    runs[k] = descend(prob, start_vector(prob, static_cast<int>(k), opt.seed), opt);
  });

  RayleighReport rep;
  std::size_t best = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    rep.restart_values.push_back(runs[k].value);
    rep.seed_values.push_back(runs[k].start_value);
    if (runs[k].value < runs[best].value) best = k;
  }
  const auto& r = runs[best];
  rep.value = r.value;
  rep.minimizer = SpectralCoeffs{prob.basis, r.c};
  rep.iterations = r.iterations;
  rep.converged = r.converged;
  rep.restart = static_cast<int>(best);
  rep.el_residual = el_residual(rep.minimizer, prob.m, prob.s, prob.lambda,
                                prob.variant == Variant::hardy_perturbation, prob.grid);
  rep.concentration = concentration(rep.minimizer, prob);
  if (opt.sobolev_ref > 0) {
    rep.sobolev_ref = opt.sobolev_ref;
    rep.sobolev_tol = opt.sobolev_tol;
  } else {
    const auto est = sobolev_ladder(prob.n, prob.m, default_sobolev_scales(prob.n));
    rep.sobolev_ref = est.value;
    rep.sobolev_tol = opt.sobolev_tol > 0 ? opt.sobolev_tol : est.uncertainty;
  }
  rep.sobolev_tol = std::max(rep.sobolev_tol, 1e-6 * rep.sobolev_ref);
  rep.below_sobolev = rep.value < rep.sobolev_ref - 3.0 * rep.sobolev_tol;
  return rep;
}

std::vector<CurvePoint> bubble_curve(const BNProblem& prob, const std::vector<double>& eps_grid, double delta) {
  if (delta <= 0) delta = 0.25 * prob.domain.min_half_width();
  std::vector<CurvePoint> out(eps_grid.size());
  detail::parallel_for(eps_grid.size(), [&](std::size_t i) {
    const double eps = eps_grid[i];
    FRACLAP_REQUIRE(eps > 0, ErrorKind::precondition, "eps must be positive");
    const auto u = make_bubble(BubbleParams{prob.n, prob.m, eps, delta}, prob.grid);
    out[i] = CurvePoint{eps, rayleigh(expand(u, prob.basis), prob)};
  });
  return out;
}

std::vector<ScanRow> critical_scan(int n, const std::vector<double>& m_grid, const std::vector<double>& s_grid,
                                   double lambda_frac, const ScanOptions& opt) {
  FRACLAP_REQUIRE(lambda_frac > 0 && lambda_frac < 1, ErrorKind::precondition, "lambda_frac must lie in (0, 1)");
  std::vector<ScanRow> rows;
  for (double m : m_grid) {
    double ref = opt.minimize.sobolev_ref, tol = opt.minimize.sobolev_tol;
    std::string ref_error;
    if (ref <= 0 && m > 0 && 2.0 * m < n) {
      try {
        const auto est = sobolev_ladder(n, m, default_sobolev_scales(n));
        ref = est.value;
        tol = tol > 0 ? tol : est.uncertainty;
      } catch (const Error& e) {
        ref_error = e.what();
      }
    }
    for (double s : s_grid) {
      ScanRow row;
      row.n = n;
      row.m = m;
      row.s = s;
      row.variant = opt.variant;
      if (!(s >= 0 && s < m && 2.0 * m < n)) {
        row.status = "skipped";
        rows.push_back(row);
        continue;
      }
      if (!ref_error.empty()) {
        row.status = ref_error;
        rows.push_back(row);
        continue;
      }
      try {
        auto prob = BNProblem::make(opt.variant, n, m, s, 0.0, opt.half_width, opt.points, opt.J);
        prob.lambda = lambda_frac * lambda_bound(prob);
        row.lambda = prob.lambda;
        auto mo = opt.minimize;
        mo.sobolev_ref = ref;
        mo.sobolev_tol = tol;
        const auto rep = minimize(prob, mo);
        row.value = rep.value;
        row.sobolev_ref = rep.sobolev_ref;
        row.below_sobolev = rep.below_sobolev;
        row.el_residual = rep.el_residual;
        row.iterations = rep.iterations;
      } catch (const Error& e) {
        row.status = e.what();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  using detail::fmt_num;
  os << "n,m,s,lambda,variant,value,sobolev_ref,below_sobolev,el_residual,iterations\n";
  for (const auto& r : rows)
    os << r.n << ',' << fmt_num(r.m) << ',' << fmt_num(r.s) << ',' << fmt_num(r.lambda) << ',' << to_string(r.variant)
       << ',' << fmt_num(r.value) << ',' << fmt_num(r.sobolev_ref) << ',' << (r.below_sobolev ? "true" : "false") << ','
       << fmt_num(r.el_residual) << ',' << r.iterations << '\n';
}

}  // namespace fraclap
