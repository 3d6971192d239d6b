#include "fraclap/domain.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "detail/fft.hpp"
#include "detail/format.hpp"
#include "fraclap/error.hpp"

namespace fraclap {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::invalid_order: return "invalid-order";
    case ErrorKind::invalid_exponent: return "invalid-exponent";
    case ErrorKind::divergent_weight: return "divergent-weight";
    case ErrorKind::unsupported_order: return "unsupported-order";
    case ErrorKind::aliasing: return "aliasing";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::quadrature_failure: return "quadrature-failure";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::calibration_failure: return "calibration-failure";
    case ErrorKind::layer_resolution: return "layer-resolution";
    case ErrorKind::solver: return "solver";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// BoxDomain / UniformGrid

BoxDomain::BoxDomain(std::vector<double> half_widths) : half_widths_(std::move(half_widths)) {
  FRACLAP_REQUIRE(dim() >= 1 && dim() <= 3, ErrorKind::precondition, "box dimension must be 1, 2 or 3");
  for (double h : half_widths_)
    FRACLAP_REQUIRE(std::isfinite(h) && h > 0, ErrorKind::precondition, "box half widths must be positive");
}

BoxDomain BoxDomain::cube(int n, double half_width) {
  FRACLAP_REQUIRE(n >= 1 && n <= 3, ErrorKind::precondition, "box dimension must be 1, 2 or 3");
  return BoxDomain(std::vector<double>(n, half_width));
}

double BoxDomain::min_half_width() const {
  return *std::min_element(half_widths_.begin(), half_widths_.end());
}

UniformGrid::UniformGrid(BoxDomain domain, std::vector<int> points_per_axis)
    : domain_(std::move(domain)), points_(std::move(points_per_axis)) {
  FRACLAP_REQUIRE(static_cast<int>(points_.size()) == domain_.dim(), ErrorKind::precondition,
                  "grid rank does not match domain dimension");
  size_ = 1;
  for (int a = 0; a < dim(); ++a) {
    FRACLAP_REQUIRE(points_[a] >= 8, ErrorKind::precondition, "points_per_axis must be >= 8");
    FRACLAP_REQUIRE(points_[a] % 2 == 0, ErrorKind::precondition, "points_per_axis must be even");
    spacing_.push_back(2.0 * domain_.half_width(a) / points_[a]);
    size_ *= static_cast<std::size_t>(points_[a]);
  }
}

UniformGrid UniformGrid::cube(int n, double half_width, int points_per_axis) {
  return UniformGrid(BoxDomain::cube(n, half_width), std::vector<int>(n, points_per_axis));
}

UniformGrid UniformGrid::with_spacing(BoxDomain domain, double spacing) {
  FRACLAP_REQUIRE(spacing > 0, ErrorKind::precondition, "spacing must be positive");
  std::vector<int> pts;
  for (double hw : domain.half_widths()) {
    const double ratio = 2.0 * hw / spacing;
    const long k = std::lround(ratio);
    FRACLAP_REQUIRE(std::abs(ratio - k) <= 1e-9 * ratio, ErrorKind::precondition,
                    "domain width is not an integer multiple of the spacing");
    pts.push_back(static_cast<int>(k));
  }
  return UniformGrid(std::move(domain), std::move(pts));
}

double UniformGrid::cell_volume() const {
  double v = 1.0;
  for (double h : spacing_) v *= h;
  return v;
}

std::size_t UniformGrid::flat_index(std::span<const int> idx) const {
  std::size_t f = 0;
  for (int a = 0; a < dim(); ++a) f = f * points_[a] + idx[a];
  return f;
}

std::array<int, 3> UniformGrid::multi_index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % points_[a]);
    flat /= points_[a];
  }
  return idx;
}

Point UniformGrid::node(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Point p{0, 0, 0};
  for (int a = 0; a < dim(); ++a) p[a] = coordinate(a, idx[a]);
  return p;
}

double UniformGrid::radius(std::size_t flat) const {
  const Point p = node(flat);
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

std::size_t UniformGrid::origin_index() const {
  std::array<int, 3> idx{};
  for (int a = 0; a < dim(); ++a) idx[a] = points_[a] / 2;
  return flat_index(std::span<const int>(idx.data(), dim()));
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(UniformGrid grid, std::vector<double> values, std::optional<double> support_radius)
    : grid_(std::move(grid)), values_(std::move(values)), support_radius_(support_radius) {
  FRACLAP_REQUIRE(values_.size() == grid_.size(), ErrorKind::precondition, "value count does not match grid");
  for (double v : values_) FRACLAP_REQUIRE(std::isfinite(v), ErrorKind::precondition, "grid values must be finite");
  if (support_radius_) {
    FRACLAP_REQUIRE(*support_radius_ >= 0, ErrorKind::precondition, "support radius must be nonnegative");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (grid_.radius(i) >= *support_radius_)
        FRACLAP_REQUIRE(std::abs(values_[i]) <= 1e-14, ErrorKind::precondition,
                        "grid function does not vanish outside its support radius");
    }
  }
}

GridFunction GridFunction::zeros(UniformGrid grid) {
  const std::size_t n = grid.size();
  return GridFunction(std::move(grid), std::vector<double>(n, 0.0), 0.0);
}

GridFunction GridFunction::scaled(double alpha) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= alpha;
  return GridFunction(grid_, std::move(v), support_radius_);
}

// ---------------------------------------------------------------------------
// Generators

double cutoff(double r, double delta) {
  if (r <= delta) return 1.0;
  if (r >= 2.0 * delta) return 0.0;
  const double t = (r - delta) / delta;
  const double t5 = t * t * t * t * t;
  return 1.0 - t5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))));
}

GridFunction make_bubble(const BubbleParams& p, const UniformGrid& grid) {
  FRACLAP_REQUIRE(p.n == grid.dim(), ErrorKind::precondition, "bubble dimension does not match grid");
  FRACLAP_REQUIRE(p.m > 0 && 2.0 * p.m < p.n, ErrorKind::invalid_order, "bubble requires 0 < m < n/2");
  FRACLAP_REQUIRE(p.eps > 0 && p.delta > 0, ErrorKind::precondition, "bubble requires eps > 0 and delta > 0");
  FRACLAP_REQUIRE(grid.domain().contains_ball(2.0 * p.delta), ErrorKind::precondition,
                  "domain does not contain the ball of radius 2*delta");
  const double expo = (2.0 * p.m - p.n) / 2.0;
  const double eps2 = p.eps * p.eps;
  const double r_supp = 2.0 * p.delta;
  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = grid.radius(i);
    if (r >= r_supp) continue;
    v[i] = cutoff(r, p.delta) * std::pow(eps2 + r * r, expo);
  }
  return GridFunction(grid, std::move(v), r_supp);
}

GridFunction make_bump(const UniformGrid& grid, double rho, double amplitude) {
  FRACLAP_REQUIRE(rho > 0 && grid.domain().contains_ball(rho), ErrorKind::precondition,
                  "bump radius must be positive and inside the domain");
  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = grid.radius(i) / rho;
    if (t < 1.0) v[i] = amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
  }
  return GridFunction(grid, std::move(v), rho);
}

GridFunction sample(const UniformGrid& grid, const std::function<double(const Point&)>& f,
                    std::optional<double> support_radius) {
  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (support_radius && grid.radius(i) >= *support_radius) continue;
    v[i] = f(grid.node(i));
  }
  return GridFunction(grid, std::move(v), support_radius);
}

// ---------------------------------------------------------------------------
// Quadrature

double l1_norm(const GridFunction& u) {
  double s = 0.0;
  for (double v : u.values()) s += std::abs(v);
  return s * u.grid().cell_volume();
}

double lp_norm(const GridFunction& u, double p) {
  FRACLAP_REQUIRE(p >= 1.0, ErrorKind::invalid_exponent, "lp_norm requires p >= 1");
  double s = 0.0;
  for (double v : u.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * u.grid().cell_volume(), 1.0 / p);
}

double origin_cell_weight_integral(std::span<const double> spacing, double s) {
  const int n = static_cast<int>(spacing.size());
  FRACLAP_REQUIRE(s >= 0 && 2.0 * s < n, ErrorKind::divergent_weight, "Hardy weight requires 0 <= 2s < n");
  // Star-shaped domain: int_box |x|^{-2s} = 1/(n-2s) * int_{boundary} |x|^{-2s} (x . nu) dS.
  using GL = boost::math::quadrature::gauss<double, 20>;
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    const double c = spacing[a] / 2.0;
    double face = 0.0;
    if (n == 1) {
      face = std::pow(c, -2.0 * s);
    } else {
      std::vector<double> other;
      for (int b = 0; b < n; ++b)
        if (b != a) other.push_back(spacing[b] / 2.0);
      if (n == 2) {
        face = GL::integrate([&](double y) { return std::pow(c * c + y * y, -s); }, -other[0], other[0]);
      } else {
        face = GL::integrate(
            [&](double y) {
              return GL::integrate([&](double z) { return std::pow(c * c + y * y + z * z, -s); }, -other[1],
                                   other[1]);
            },
            -other[0], other[0]);
      }
    }
    total += 2.0 * c * face;
  }
  return total / (n - 2.0 * s);
}

std::vector<double> hardy_weights(const UniformGrid& grid, double s) {
  FRACLAP_REQUIRE(s >= 0 && 2.0 * s < grid.dim(), ErrorKind::divergent_weight, "Hardy weight requires 0 <= 2s < n");
  const int n = grid.dim();
  const double vol = grid.cell_volume();
  std::vector<double> w(grid.size(), vol);
  if (s == 0.0) return w;
  std::vector<double> h;
  for (int a = 0; a < n; ++a) h.push_back(grid.spacing(a));
  const double e = 1.0 - 2.0 * s;
  // Cells near the origin: 8-point product rule; beyond that the midpoint
  // rule with its h^2/24 Laplacian correction.
  using GL = boost::math::quadrature::gauss<double, 8>;
  const int near = 4;
  const double lap_coef = 2.0 * s * (2.0 * s + 2.0 - n);
  const auto o = grid.multi_index(grid.origin_index());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Point x = grid.node(i);
    if (n == 1) {
      const double lo = x[0] - h[0] / 2, hi = x[0] + h[0] / 2;
      const auto F = [&](double t) { return std::copysign(std::pow(std::abs(t), e), t) / e; };
      w[i] = F(hi) - F(lo);
      continue;
    }
    const auto mi = grid.multi_index(i);
    int dist = 0;
    for (int a = 0; a < n; ++a) dist = std::max(dist, std::abs(mi[a] - o[a]));
    if (dist == 0) continue;
    if (dist <= near) {
      auto f2 = [&](double u, double v) { return std::pow(u * u + v * v, -s); };
      if (n == 2) {
        w[i] = GL::integrate(
            [&](double u) { return GL::integrate([&](double v) { return f2(u, v); }, x[1] - h[1] / 2, x[1] + h[1] / 2); },
            x[0] - h[0] / 2, x[0] + h[0] / 2);
      } else {
        w[i] = GL::integrate(
            [&](double u) {
              return GL::integrate(
                  [&](double v) {
                    return GL::integrate([&](double z) { return std::pow(u * u + v * v + z * z, -s); },
                                         x[2] - h[2] / 2, x[2] + h[2] / 2);
                  },
                  x[1] - h[1] / 2, x[1] + h[1] / 2);
            },
            x[0] - h[0] / 2, x[0] + h[0] / 2);
      }
      continue;
    }
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    double hh = 0.0;
    for (int a = 0; a < n; ++a) hh += h[a] * h[a];
    // Delta r^{-2s} = 2s (2s + 2 - n) r^{-2s-2}; the cell average picks up sum_a h_a^2/24 of each second derivative,
    // which for a cube equals h^2/24 * Delta.
    w[i] = vol * std::pow(r2, -s) * (1.0 + lap_coef * (hh / n) / 24.0 / r2);
  }
  w[grid.origin_index()] = origin_cell_weight_integral(h, s);
  return w;
}

double hardy_integral(const GridFunction& u, double s) {
  const auto w = hardy_weights(u.grid(), s);
  double acc = 0.0;
  const auto v = u.values();
  for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * v[i] * v[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Spectral differentiation, resampling

GridFunction laplacian_power_k(const GridFunction& u, int k) {
  FRACLAP_REQUIRE(k == 0 || k == 1, ErrorKind::unsupported_order, "laplacian_power_k supports k in {0, 1}");
  if (k == 0) return u;
  const auto& g = u.grid();
  const int n = g.dim();
  std::vector<int> inner(n);
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) {
    inner[a] = g.points(a) - 1;
    total *= static_cast<std::size_t>(inner[a]);
  }
  // Interior block: node index 1..N-1 on every axis.
  std::vector<double> buf(total);
  std::vector<int> idx(n);
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % inner[a]) + 1;
      rem /= inner[a];
    }
    buf[f] = u[g.flat_index(idx)];
  }
  detail::sine_transform(buf, inner);
  double norm = 1.0;
  for (int a = 0; a < n; ++a) norm *= 2.0 * g.points(a);
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    double lam = 0.0;
    for (int a = n - 1; a >= 0; --a) {
      const int j = static_cast<int>(rem % inner[a]) + 1;
      rem /= inner[a];
      const double w = j * std::numbers::pi / (2.0 * g.domain().half_width(a));
      lam += w * w;
    }
    buf[f] *= lam / norm;
  }
  detail::sine_transform(buf, inner);
  std::vector<double> v(g.size(), 0.0);
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % inner[a]) + 1;
      rem /= inner[a];
    }
    v[g.flat_index(idx)] = buf[f];
  }
  if (u.support_radius()) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (g.radius(i) >= *u.support_radius()) v[i] = 0.0;
  }
  return GridFunction(g, std::move(v), u.support_radius());
}

GridFunction embed(const GridFunction& u, const UniformGrid& target) {
  const auto& src = u.grid();
  FRACLAP_REQUIRE(src.dim() == target.dim(), ErrorKind::precondition, "embed: dimension mismatch");
  std::vector<int> offset(src.dim());
  for (int a = 0; a < src.dim(); ++a) {
    FRACLAP_REQUIRE(std::abs(src.spacing(a) - target.spacing(a)) <= 1e-12 * src.spacing(a), ErrorKind::precondition,
                    "embed: spacings differ");
    const double shift = (target.domain().half_width(a) - src.domain().half_width(a)) / src.spacing(a);
    const long k = std::lround(shift);
    FRACLAP_REQUIRE(std::abs(shift - k) <= 1e-9 * std::max(1.0, std::abs(shift)), ErrorKind::precondition,
                    "embed: grids are not node-aligned");
    offset[a] = static_cast<int>(k);
  }
  std::vector<double> v(target.size(), 0.0);
  const auto vals = u.values();
  for (std::size_t f = 0; f < vals.size(); ++f) {
    if (vals[f] == 0.0) continue;
    auto idx = src.multi_index(f);
    bool inside = true;
    for (int a = 0; a < src.dim(); ++a) {
      idx[a] += offset[a];
      inside = inside && idx[a] >= 0 && idx[a] < target.points(a);
    }
    FRACLAP_REQUIRE(inside, ErrorKind::precondition, "embed: support does not fit in the target grid");
    v[target.flat_index(std::span<const int>(idx.data(), src.dim()))] = vals[f];
  }
  return GridFunction(target, std::move(v), u.support_radius());
}

namespace {

// Trigonometric interpolation matrix (row i: weights of nodes for point y_i)
// for an even-length periodic lattice, Nyquist mode split symmetrically.
std::vector<double> interpolation_matrix(int N, double h, double lo, std::span<const double> targets) {
  std::vector<double> M(targets.size() * N, 0.0);
  const double period = N * h;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double y = targets[i];
    if (y < lo || y >= lo + period) continue;
    for (int j = 0; j < N; ++j) {
      const double z = y - (lo + j * h);
      const double a = std::numbers::pi * z / h;
      const double r = z / h;
      double w;
      if (std::abs(r - std::round(r)) < 1e-12) {
        w = (std::abs(z) < 0.5 * h) ? 1.0 : 0.0;
      } else {
        w = std::sin(a) / (N * std::tan(std::numbers::pi * z / period));
      }
      M[i * N + j] = w;
    }
  }
  return M;
}

}  // namespace

GridFunction dilate(const GridFunction& u, double t) {
  FRACLAP_REQUIRE(t > 0, ErrorKind::precondition, "dilation factor must be positive");
  const auto& g = u.grid();
  std::optional<double> r;
  if (u.support_radius()) {
    r = *u.support_radius() * t;
    FRACLAP_REQUIRE(*r < g.domain().min_half_width(), ErrorKind::precondition,
                    "dilated support exceeds the grid");
  }
  std::vector<double> cur(u.values().begin(), u.values().end());
  const int n = g.dim();
  for (int a = 0; a < n; ++a) {
    const int N = g.points(a);
    std::vector<double> targets(N);
    for (int i = 0; i < N; ++i) targets[i] = g.coordinate(a, i) / t;
    const auto M = interpolation_matrix(N, g.spacing(a), g.coordinate(a, 0), targets);
    std::size_t inner = 1, outer = 1;
    for (int b = a + 1; b < n; ++b) inner *= g.points(b);
    for (int b = 0; b < a; ++b) outer *= g.points(b);
    std::vector<double> next(cur.size(), 0.0);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * N * inner + in;
        for (int i = 0; i < N; ++i) {
          double acc = 0.0;
          for (int j = 0; j < N; ++j) acc += M[i * N + j] * cur[base + j * inner];
          next[base + i * inner] = acc;
        }
      }
    cur.swap(next);
  }
  if (r) {
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (g.radius(i) >= *r) cur[i] = 0.0;
  }
  return GridFunction(g, std::move(cur), r);
}

void write_csv(std::ostream& os, const GridFunction& u) {
  const auto& g = u.grid();
  for (int a = 0; a < g.dim(); ++a) os << 'x' << (a + 1) << ',';
  os << "value\n";
  const auto v = u.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point p = g.node(i);
    for (int a = 0; a < g.dim(); ++a) os << detail::fmt_num(p[a]) << ',';
    os << detail::fmt_num(v[i]) << '\n';
  }
}

}  // namespace fraclap
