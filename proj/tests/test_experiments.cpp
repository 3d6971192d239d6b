#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fraclap/domain.hpp"
#include "fraclap/error.hpp"
#include "fraclap/experiments.hpp"

using namespace fraclap;

namespace {

const UniformGrid& base() {
  static const UniformGrid g = UniformGrid::cube(1, 0.5, 512);  // spacing 1/512
  return g;
}

GapReport synthetic(double R, double r, double gap) {
  GapReport rep;
  rep.n = 1;
  rep.m = 0.4;
  rep.r = r;
  rep.R = R;
  rep.omega_half_width = R;
  rep.q_dirichlet = 1.0;
  rep.q_navier = 1.0 + gap;
  rep.signed_gap = gap;
  return rep;
}

}  // namespace

TEST(GapOnce, RejectsIntegerOrder) {
  auto u = gap_witness(1, 0.4, 0.25, base());
  EXPECT_THROW(gap_once(u, FormOrder::from(1.0), BoxDomain::cube(1, 1.0), 0.25, 1.0), Error);
}

TEST(GapOnce, OrderingForBothParities) {
  for (double m : {0.4, 1.5}) {
    auto u = gap_witness(1, m, 0.25, base());
    auto rep = gap_once(u, FormOrder::from(m), BoxDomain::cube(1, 1.0), 0.25, 1.0);
    EXPECT_GE(rep.signed_gap, -1e-6 * rep.q_dirichlet) << "m = " << m;
    EXPECT_GT(rep.signed_gap, 0.0);
  }
}

TEST(GapSweep, IdenticalDomainsGiveIdenticalReports) {
  auto u = gap_witness(1, 0.4, 0.25, base());
  auto reps = gap_sweep_domain(u, FormOrder::from(0.4), {1.0, 1.0});
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_EQ(reps[0].signed_gap, reps[1].signed_gap);
  EXPECT_EQ(reps[0].q_navier, reps[1].q_navier);
}

TEST(GapSweep, DecreasingGapAndBoundedRatio) {
  auto u = gap_witness(1, 0.4, 0.25, base());
  auto reps = gap_sweep_domain(u, FormOrder::from(0.4), {0.5, 1.0, 2.0, 4.0});
  ASSERT_EQ(reps.size(), 4u);
  for (std::size_t i = 1; i < reps.size(); ++i) EXPECT_LT(std::abs(reps[i].signed_gap), std::abs(reps[i - 1].signed_gap));
  auto env = bound_envelope(reps);
  EXPECT_LE(env.max_ratio / env.min_ratio, 10.0);
  EXPECT_FALSE(env.violation);
  const double l1 = l1_norm(u);
  for (const auto& r : reps) EXPECT_LE(r.signed_gap, gap_bound(r, env.max_ratio, l1) * (1 + 1e-12));
  auto fit = gap_rate_fit(reps);
  EXPECT_LT(fit.slope, -1.0);

  std::ostringstream os;
  write_csv(os, reps);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "m,n,r,R,omega,QD,QN,gap,bound_ratio");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(GapFit, RecoversPlantedLaw) {
  const double r = 0.25, expo = 2 + 0.8;
  std::vector<GapReport> reps;
  for (double R : {0.5, 1.0, 2.0, 4.0}) reps.push_back(synthetic(R, r, 0.3 * std::pow(R - r, -expo)));
  auto fit = gap_rate_fit(reps);
  EXPECT_NEAR(fit.slope, -expo, 1e-6);
  EXPECT_TRUE(fit.consistent);
  EXPECT_TRUE(fit.excluded.empty());
}

TEST(GapFit, ConstantGapsAreFlagged) {
  std::vector<GapReport> reps;
  for (double R : {0.5, 1.0, 2.0, 4.0}) reps.push_back(synthetic(R, 0.25, 1e-3));
  auto fit = gap_rate_fit(reps);
  EXPECT_NEAR(fit.slope, 0.0, 1e-12);
  EXPECT_FALSE(fit.consistent);
}

TEST(GapFit, NoiseFloorExcluded) {
  std::vector<GapReport> reps;
  for (double R : {0.5, 1.0, 2.0}) reps.push_back(synthetic(R, 0.25, 1e-3 * std::pow(R - 0.25, -3.0)));
  reps.push_back(synthetic(4.0, 0.25, 1e-14));
  auto fit = gap_rate_fit(reps);
  EXPECT_EQ(fit.excluded, std::vector<std::size_t>{3});
  EXPECT_NEAR(fit.slope, -3.0, 1e-9);
}

TEST(GapWitness, BumpForLargeOrders) {
  auto u = gap_witness(1, 1.5, 0.25, base());
  ASSERT_TRUE(u.support_radius());
  EXPECT_LE(*u.support_radius(), 0.25 + 1e-12);
}
