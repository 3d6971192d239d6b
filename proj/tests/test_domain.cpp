#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "fraclap/domain.hpp"
#include "fraclap/error.hpp"

using namespace fraclap;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double pi = std::numbers::pi;

// Independent closed form of the cut-off bubble in one dimension.
double bubble_1d(double x, double m, double eps, double delta) {
  const double r = std::abs(x);
  if (r >= 2 * delta) return 0.0;
  double c = 1.0;
  if (r > delta) {
    const double t = (r - delta) / delta;
    c = 1.0 - std::pow(t, 5) * (126 - 420 * t + 540 * t * t - 315 * t * t * t + 70 * t * t * t * t);
  }
  return c * std::pow(eps * eps + x * x, (2 * m - 1) / 2);
}

// Piecewise adaptive integral over [-2 delta, 2 delta], split at the cutoff knots.
template <class F>
double integrate_bubble(F f, double delta) {
  const double knots[] = {-2 * delta, -delta, 0.0, delta, 2 * delta};
  double total = 0.0;
  for (int i = 0; i < 4; ++i) total += gauss_kronrod<double, 61>::integrate(f, knots[i], knots[i + 1], 15, 1e-14);
  return total;
}

}  // namespace

TEST(Bubble, CenterValues) {
  auto g = UniformGrid::cube(1, 1.0, 64);
  auto u = make_bubble({1, 0.4, 1.0, 0.45}, g);
  EXPECT_DOUBLE_EQ(u[g.origin_index()], 1.0);
  auto v = make_bubble({1, 0.4, 0.1, 0.25}, g);
  EXPECT_NEAR(v[g.origin_index()], 1.5848931924611136, 1e-13);
}

TEST(Bubble, VanishesOutsideSupport) {
  auto g = UniformGrid::cube(2, 1.0, 32);
  auto u = make_bubble({2, 0.5, 0.3, 0.2}, g);
  ASSERT_TRUE(u.support_radius());
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.radius(i) >= 0.4) EXPECT_EQ(u[i], 0.0);
}

TEST(Bubble, Preconditions) {
  auto g = UniformGrid::cube(1, 1.0, 64);
  EXPECT_THROW(make_bubble({1, 0.4, 0.5, 0.5}, g), Error);
  try {
    make_bubble({1, 0.6, 0.5, 0.25}, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_order);
  }
}

TEST(Norms, ConstantFunction) {
  auto g = UniformGrid::cube(1, 1.0, 256);
  auto one = sample(g, [](const Point&) { return 1.0; });
  EXPECT_NEAR(l1_norm(one), 2.0, 1e-3);
  EXPECT_NEAR(lp_norm(one, 2.0), std::sqrt(2.0), 1e-3);
  auto zero = GridFunction::zeros(g);
  EXPECT_EQ(l1_norm(zero), 0.0);
  EXPECT_EQ(lp_norm(zero, 3.0), 0.0);
  EXPECT_THROW(lp_norm(one, 0.5), Error);
}

TEST(Norms, BubbleAgainstAdaptiveQuadrature) {
  auto g = UniformGrid::cube(1, 1.0, 8192);
  {
    const double m = 0.4, eps = 1.0, delta = 0.25;
    auto u = make_bubble({1, m, eps, delta}, g);
    const double ref = integrate_bubble([&](double x) { return bubble_1d(x, m, eps, delta); }, delta);
    EXPECT_NEAR(l1_norm(u) / ref, 1.0, 1e-6);
  }
  {
    const double m = 0.4, eps = 0.5, delta = 0.25, p = 10.0;
    auto u = make_bubble({1, m, eps, delta}, g);
    const double ref =
        std::pow(integrate_bubble([&](double x) { return std::pow(bubble_1d(x, m, eps, delta), p); }, delta), 1 / p);
    EXPECT_NEAR(lp_norm(u, p) / ref, 1.0, 1e-6);
  }
}

TEST(Norms, SecondOrderConvergence) {
  const double ref = integrate_bubble([](double x) { return bubble_1d(x, 0.4, 0.3, 0.25); }, 0.25);
  double err[3];
  for (int k = 0; k < 3; ++k) {
    auto g = UniformGrid::cube(1, 1.0, 64 << k);
    err[k] = std::abs(l1_norm(make_bubble({1, 0.4, 0.3, 0.25}, g)) - ref);
  }
  EXPECT_GT(err[0] / err[1], 3.5);
  EXPECT_GT(err[1] / err[2], 3.5);
}

TEST(Hardy, ReducesToL2AtZero) {
  auto g = UniformGrid::cube(1, 1.0, 256);
  auto u = make_bump(g, 0.6);
  EXPECT_NEAR(hardy_integral(u, 0.0), std::pow(lp_norm(u, 2.0), 2), 1e-14);
  EXPECT_EQ(hardy_integral(GridFunction::zeros(g), 0.3), 0.0);
  EXPECT_THROW(hardy_integral(u, 0.5), Error);
}

TEST(Hardy, BumpAgainstSingularQuadrature) {
  // Exact weight integral per cell against a fine trapezoid in the smooth factor.
  auto g = UniformGrid::cube(1, 1.0, 4096);
  const double rho = 0.6, s = 0.3;
  auto bump = [&](double x) { return std::abs(x) < rho ? std::exp(1.0 - 1.0 / (1.0 - x * x / (rho * rho))) : 0.0; };
  auto u = sample(g, [&](const Point& p) { return bump(p[0]); });
  // Substituting x = t^{1/(1-2s)} removes the singularity at the origin.
  const double a = 1.0 / (1.0 - 2 * s);
  auto f = [&](double t) {
    const double x = std::pow(t, a);
    const double b = bump(x);
    return a * b * b;
  };
  const double ref = 2.0 * gauss_kronrod<double, 61>::integrate(f, 0.0, std::pow(rho, 1 / a), 20, 1e-14);
  EXPECT_NEAR(hardy_integral(u, s) / ref, 1.0, 1e-5);
}

TEST(Hardy, MonotoneInAmplitude) {
  auto g = UniformGrid::cube(2, 1.0, 64);
  auto u = make_bump(g, 0.5);
  EXPECT_LE(hardy_integral(u, 0.4), hardy_integral(u.scaled(1.5), 0.4));
}

TEST(LaplacianPower, IdentityAndEigenfunction) {
  auto g = UniformGrid::cube(1, 1.0, 256);
  auto u = make_bump(g, 0.5);
  auto id = laplacian_power_k(u, 0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(id[i], u[i]);

  auto phi = sample(g, [](const Point& p) { return std::sin(pi * (p[0] + 1) / 2); });
  auto lap = laplacian_power_k(phi, 1);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(lap[i], pi * pi / 4 * phi[i], 1e-8);
  EXPECT_THROW(laplacian_power_k(u, 2), Error);
}

TEST(LaplacianPower, BubbleAgainstFiniteDifferences) {
  const double m = 0.4, eps = 0.5, delta = 0.25;
  auto g = UniformGrid::cube(1, 1.0, 2048);
  auto lap = laplacian_power_k(make_bubble({1, m, eps, delta}, g), 1);
  const double d = 1e-3;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(0, static_cast<int>(i));
    if (std::abs(std::abs(x) - delta) < 0.05 || std::abs(x) > 1.8 * delta) continue;
    const double fd = -(-bubble_1d(x + 2 * d, m, eps, delta) + 16 * bubble_1d(x + d, m, eps, delta) -
                        30 * bubble_1d(x, m, eps, delta) + 16 * bubble_1d(x - d, m, eps, delta) -
                        bubble_1d(x - 2 * d, m, eps, delta)) /
                      (12 * d * d);
    EXPECT_NEAR(lap[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "x = " << x;
  }
}
