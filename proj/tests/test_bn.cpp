#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <sstream>

#include "fraclap/bn.hpp"
#include "fraclap/cli_io.hpp"
#include "fraclap/domain.hpp"
#include "fraclap/error.hpp"
#include "fraclap/navier.hpp"

using namespace fraclap;

namespace {

constexpr double pi = std::numbers::pi;

// Sharp constant of the fractional Sobolev inequality on R^n.
double sharp_sobolev(int n, double m) {
  return std::pow(2.0, 2 * m) * std::pow(pi, m) * std::tgamma((n + 2 * m) / 2) / std::tgamma((n - 2 * m) / 2) *
         std::pow(std::tgamma(n / 2.0) / std::tgamma(n), 2 * m / n);
}

SpectralCoeffs bubble_coeffs(const BNProblem& prob) {
  return expand(make_bubble({prob.n, prob.m, 0.1, 0.25}, prob.grid), prob.basis);
}

const double& sobolev_ref() {
  static const double v = sobolev_constant_estimate(1, 0.4, default_sobolev_scales(1));
  return v;
}

}  // namespace

TEST(Problem, PreconditionsAndBounds) {
  EXPECT_THROW(BNProblem::make(Variant::spectral_perturbation, 1, 0.4, 0.5, 0.0), Error);
  EXPECT_THROW(BNProblem::make(Variant::spectral_perturbation, 1, 0.6, 0.3, 0.0), Error);
  auto p = BNProblem::make(Variant::spectral_perturbation, 1, 0.4, 0.3, 0.0, 1.0, 256);
  EXPECT_DOUBLE_EQ(p.critical_exponent(), 10.0);
  EXPECT_NEAR(lambda_bound(p), std::pow(pi * pi / 4, 0.1), 1e-12);
  auto h = BNProblem::make(Variant::hardy_perturbation, 1, 0.4, 0.3, 0.0, 1.0, 256);
  EXPECT_NEAR(lambda_bound(h), lambda1_hardy(0.4, 0.3, h.basis, h.grid), 1e-12);
  EXPECT_EQ(variant_from_string("hardy"), Variant::hardy_perturbation);
  EXPECT_THROW(variant_from_string("other"), Error);
}

TEST(Rayleigh, FirstModeAndHomogeneity) {
  auto p = BNProblem::make(Variant::spectral_perturbation, 1, 0.4, 0.3, 0.0, 1.0, 256);
  SpectralCoeffs c{p.basis, std::vector<double>(p.basis.size(), 0.0)};
  c.coeffs[0] = 1.0;
  auto phi = reconstruct(c, p.grid);
  const double np = lp_norm(phi, 10.0);
  EXPECT_NEAR(rayleigh(c, p), std::pow(pi * pi / 4, 0.4) / (np * np), 1e-12);

  auto q = p.with_lambda(0.1);
  auto b = bubble_coeffs(q);
  const double v = rayleigh(b, q);
  for (double a : {-3.0, 0.5, 7.0}) EXPECT_NEAR(rayleigh(b.scaled(a), q) / v, 1.0, 1e-13);
}

TEST(Rayleigh, BubbleAgainstPointwiseEvaluation) {
  for (auto variant : {Variant::spectral_perturbation, Variant::hardy_perturbation}) {
    auto p = BNProblem::make(variant, 1, 0.4, 0.3, 0.1, 1.0, 128);
    auto c = bubble_coeffs(p);
    double qm = 0.0, qs = 0.0;
    for (std::size_t j = 0; j < c.coeffs.size(); ++j) {
      qm += std::pow(p.basis.eigenvalues()[j], 0.4) * c.coeffs[j] * c.coeffs[j];
      qs += std::pow(p.basis.eigenvalues()[j], 0.3) * c.coeffs[j] * c.coeffs[j];
    }
    std::vector<double> u(p.grid.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < c.coeffs.size(); ++j) u[i] += c.coeffs[j] * p.basis.evaluate(j, p.grid.node(i));
    double sp = 0.0;
    for (double x : u) sp += std::pow(std::abs(x), 10.0);
    const double np = std::pow(sp * p.grid.cell_volume(), 0.1);
    double pert = qs;
    if (variant == Variant::hardy_perturbation) {
      const auto w = hardy_weights(p.grid, 0.3);
      pert = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) pert += w[i] * u[i] * u[i];
    }
    const double ref = (qm - 0.1 * pert) / (np * np);
    const double v = rayleigh(c, p);
    EXPECT_GT(v, 0.0);
    EXPECT_NEAR(v / ref, 1.0, 1e-8);
  }
}

TEST(Rayleigh, GradientMatchesFiniteDifferences) {
  for (auto variant : {Variant::spectral_perturbation, Variant::hardy_perturbation}) {
    auto p = BNProblem::make(variant, 1, 0.4, 0.3, 0.2, 1.0, 64);
    auto c = bubble_coeffs(p);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (std::size_t j = 0; j < c.coeffs.size(); ++j) c.coeffs[j] += 0.05 * nd(rng) / (1.0 + j);
    const auto g = rayleigh_gradient(c, p);
    for (std::size_t j : {0, 1, 5, 17, 31}) {
      const double d = 1e-6;
      auto a = c, b = c;
      a.coeffs[j] += d;
      b.coeffs[j] -= d;
      const double fd = (rayleigh(a, p) - rayleigh(b, p)) / (2 * d);
      EXPECT_NEAR(g[j], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "j = " << j;
    }
  }
}

TEST(Sobolev, LadderDecreasesAndIsScaleFree) {
  auto est = sobolev_ladder(1, 0.4, {4, 8, 16});
  EXPECT_GT(est.quotients[0], est.quotients[1]);
  EXPECT_GT(est.quotients[1], est.quotients[2]);
  // Quotient is degree-0 homogeneous in u.
  auto g = UniformGrid::cube(1, 2.0, 256);
  auto p = BNProblem::make(Variant::spectral_perturbation, 1, 0.4, 0.3, 0.0, 2.0, 256);
  auto c = expand(make_bubble({1, 0.4, 0.2, 0.4}, g), p.basis);
  EXPECT_NEAR(rayleigh(c.scaled(2.5), p) / rayleigh(c, p), 1.0, 1e-13);
}

TEST(Sobolev, TwoLaddersAgreeWithSharpConstant) {
  auto a = sobolev_ladder(1, 0.4, {4, 8, 16, 32, 64});
  auto b = sobolev_ladder(1, 0.4, {6.4, 12.8, 25.6, 51.2, 102.4});
  EXPECT_LT(std::abs(a.value - b.value) / a.value, 5e-3);
  const double exact = sharp_sobolev(1, 0.4);
  EXPECT_NEAR(exact, 0.488686, 1e-6);
  EXPECT_LT(std::abs(a.value - exact) / exact, 5e-3);
  EXPECT_LT(std::abs(b.value - exact) / exact, 5e-3);
}

TEST(Minimize, ZeroLambdaStaysAtOrAboveSobolev) {
  auto p = BNProblem::make(Variant::spectral_perturbation, 1, 0.4, 0.3, 0.0);
  MinimizeOptions opt;
  opt.sobolev_ref = sobolev_ref();
  auto rep = minimize(p, opt);
  EXPECT_TRUE(rep.converged);
  EXPECT_GE(rep.value, sobolev_ref() * (1 - 5e-3));
  EXPECT_FALSE(rep.below_sobolev);
  EXPECT_EQ(rep.restart_values.size(), 3u);
  for (double v : rep.restart_values) EXPECT_GE(v, rep.value);
}

TEST(Minimize, ResidualAndMonotoneInLambda) {
  auto p = BNProblem::make(Variant::spectral_perturbation, 1, 0.4, 0.3, 0.0);
  MinimizeOptions opt;
  opt.sobolev_ref = sobolev_ref();
  double prev = std::numeric_limits<double>::infinity();
  for (double lam : {0.0, 0.05, 0.1}) {
    auto rep = minimize(p.with_lambda(lam), opt);
    EXPECT_LE(rep.el_residual, 1e-6) << "lambda = " << lam;
    EXPECT_LE(rep.value, prev * (1 + 1e-9));
    prev = rep.value;
  }
}

TEST(Minimize, Preconditions) {
  auto p = BNProblem::make(Variant::spectral_perturbation, 1, 0.4, 0.3, 0.0, 1.0, 128);
  MinimizeOptions opt;
  opt.restarts = 2;
  EXPECT_THROW(minimize(p, opt), Error);
  EXPECT_THROW(minimize(p.with_lambda(lambda_bound(p) * 1.01), MinimizeOptions{}), Error);
}

TEST(Minimize, ThreadCountDoesNotChangeResult) {
  auto p = BNProblem::make(Variant::hardy_perturbation, 1, 0.4, 0.35, 0.0, 1.0, 256);
  p = p.with_lambda(0.1 * lambda_bound(p));
  MinimizeOptions opt;
  opt.sobolev_ref = sobolev_ref();
  opt.seed = 42;
  set_threads(1);
  auto a = minimize(p, opt);
  set_threads(4);
  auto b = minimize(p, opt);
  set_threads(1);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.minimizer.coeffs, b.minimizer.coeffs);
  EXPECT_EQ(a.restart_values, b.restart_values);
}

TEST(BubbleCurve, NoDipWithoutPerturbation) {
  auto p = BNProblem::make(Variant::spectral_perturbation, 1, 0.4, 0.35, 0.0);
  for (const auto& pt : bubble_curve(p, {0.2, 0.1, 0.05, 0.02, 0.01}))
    EXPECT_GE(pt.quotient, sobolev_ref() * (1 - 5e-3)) << "eps = " << pt.eps;
}

TEST(CriticalScan, SkipsInadmissibleCells) {
  ScanOptions opt;
  opt.points = 128;
  opt.minimize.sobolev_ref = sobolev_ref();
  auto rows = critical_scan(1, {0.4}, {0.3, 0.4, 0.45}, 0.1, opt);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_EQ(rows[1].status, "skipped");
  EXPECT_EQ(rows[2].status, "skipped");
  std::ostringstream os;
  write_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "n,m,s,lambda,variant,value,sobolev_ref,below_sobolev,el_residual,iterations");
}
