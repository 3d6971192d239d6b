#include "fraclap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "detail/format.hpp"
#include "detail/parallel.hpp"
#include "fraclap/error.hpp"
#include "fraclap/navier.hpp"

namespace fraclap {

GridFunction gap_witness(int n, double m, double r, const UniformGrid& grid) {
  FRACLAP_REQUIRE(grid.dim() == n, ErrorKind::precondition, "grid dimension differs from n");
  FRACLAP_REQUIRE(grid.domain().contains_ball(r), ErrorKind::precondition, "support ball must fit in the grid domain");
  if (2.0 * m < n) return make_bubble(BubbleParams{n, m, r, 0.5 * r}, grid);
  return make_bump(grid, r);
}

namespace {

// Grid over omega with the spacing of u's grid, holding u's nodal values.
GridFunction on_domain(const GridFunction& u, const BoxDomain& omega) {
  if (u.grid().domain() == omega) return u;
  const int n = u.grid().dim();
  std::vector<int> pts;
  for (int a = 0; a < n; ++a) {
    const double ratio = 2.0 * omega.half_width(a) / u.grid().spacing(a);
    const long k = std::lround(ratio);
    FRACLAP_REQUIRE(std::abs(ratio - k) < 1e-9 && k % 2 == 0, ErrorKind::precondition,
                    "domain width must be an even multiple of the grid spacing");
    pts.push_back(static_cast<int>(k));
  }
  return embed(u, UniformGrid(omega, pts));
}

}  // namespace

GapReport gap_once(const GridFunction& u, const FormOrder& ord, const BoxDomain& omega, double r, double R) {
  FRACLAP_REQUIRE(ord.parity != Parity::integer, ErrorKind::invalid_order, "gap experiments need a non-integer order");
  const int n = u.grid().dim();
  FRACLAP_REQUIRE(omega.dim() == n, ErrorKind::precondition, "domain dimension differs from u");
  FRACLAP_REQUIRE(r > 0 && r < R, ErrorKind::precondition, "need 0 < r < R");
  FRACLAP_REQUIRE(R <= omega.min_half_width() + 1e-12, ErrorKind::precondition, "ball B_R must lie in the domain");
  const auto& g = u.grid();
  for (std::size_t i = 0; i < g.size(); ++i)
    FRACLAP_REQUIRE(u[i] == 0.0 || g.radius(i) < r, ErrorKind::precondition, "u is not supported in B_r");

  GapReport rep;
  rep.n = n;
  rep.m = ord.m;
  rep.r = r;
  rep.R = R;
  rep.omega_half_width = omega.min_half_width();
  rep.q_dirichlet = q_dirichlet(u, ord.m).value;

  const auto v = on_domain(u, omega);
  int J = v.grid().points(0) / 2;
  for (int a = 1; a < n; ++a) J = std::min(J, v.grid().points(a) / 2);
  const SineBasis basis(omega, J);
  rep.q_navier = q_navier(expand(v, basis), ord.m).value;

  rep.signed_gap = ord.parity == Parity::floor_even ? rep.q_navier - rep.q_dirichlet : rep.q_dirichlet - rep.q_navier;
  const double l1 = l1_norm(u);
  rep.bound_ratio = std::abs(rep.signed_gap) * std::pow(R - r, 2.0 * n + 2.0 * ord.m) / (std::pow(R, n) * l1 * l1);
  return rep;
}

std::vector<GapReport> gap_sweep_domain(const GridFunction& u, const FormOrder& ord,
                                        const std::vector<double>& half_widths) {
  const auto sr = u.support_radius();
  FRACLAP_REQUIRE(sr.has_value(), ErrorKind::precondition, "gap sweep needs a support radius on u");
  const double r = *sr;
  for (double hw : half_widths) FRACLAP_REQUIRE(hw > r, ErrorKind::precondition, "every half-width must exceed r");
  std::vector<GapReport> out(half_widths.size());
  detail::parallel_for(half_widths.size(), [&](std::size_t i) {
    const double hw = half_widths[i];
    out[i] = gap_once(u, ord, BoxDomain::cube(u.grid().dim(), hw), r, hw);
  });
  return out;
}

BoundEnvelope bound_envelope(const std::vector<GapReport>& reports) {
  BoundEnvelope e;
  if (reports.empty()) return e;
  e.max_ratio = e.min_ratio = reports.front().bound_ratio;
  for (const auto& r : reports) {
    e.max_ratio = std::max(e.max_ratio, r.bound_ratio);
    e.min_ratio = std::min(e.min_ratio, r.bound_ratio);
  }
  e.violation = e.max_ratio > 10.0 * e.min_ratio;
  return e;
}

double gap_bound(const GapReport& rep, double max_ratio, double l1) {
  return max_ratio * std::pow(rep.R, rep.n) / std::pow(rep.R - rep.r, 2.0 * rep.n + 2.0 * rep.m) * l1 * l1;
}

GapFit gap_rate_fit(const std::vector<GapReport>& reports) {
  FRACLAP_REQUIRE(reports.size() >= 4, ErrorKind::precondition, "rate fit needs at least 4 reports");
  std::set<double> widths;
  for (const auto& r : reports) widths.insert(r.R - r.r);
  FRACLAP_REQUIRE(widths.size() == reports.size(), ErrorKind::precondition, "rate fit needs distinct R - r");
  GapFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (std::abs(r.signed_gap) < 1e-12 * std::abs(r.q_dirichlet) || r.signed_gap == 0.0) {
      fit.excluded.push_back(i);
      continue;
    }
    xs.push_back(std::log(r.R - r.r));
    ys.push_back(std::log(std::abs(r.signed_gap)));
  }
  FRACLAP_REQUIRE(xs.size() >= 2, ErrorKind::degenerate_input, "fewer than two gaps above the noise floor");
  const double k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const auto& r0 = reports.front();
  fit.consistent = fit.slope <= -(2.0 * r0.n + 2.0 * r0.m) + 1.0;
  return fit;
}

void write_csv(std::ostream& os, const std::vector<GapReport>& reports) {
  using detail::fmt_num;
  os << "m,n,r,R,omega,QD,QN,gap,bound_ratio\n";
  for (const auto& r : reports)
    os << fmt_num(r.m) << ',' << r.n << ',' << fmt_num(r.r) << ',' << fmt_num(r.R) << ',' << fmt_num(r.omega_half_width)
       << ',' << fmt_num(r.q_dirichlet) << ',' << fmt_num(r.q_navier) << ',' << fmt_num(r.signed_gap) << ','
       << fmt_num(r.bound_ratio) << '\n';
}

}  // namespace fraclap
