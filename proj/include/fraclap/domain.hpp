#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace fraclap {

/// Origin-centered box (-h_1, h_1) x ... x (-h_n, h_n), n in {1, 2, 3}.
class BoxDomain {
 public:
  explicit BoxDomain(std::vector<double> half_widths);
  static BoxDomain cube(int n, double half_width);

  int dim() const { return static_cast<int>(half_widths_.size()); }
  double half_width(int axis) const { return half_widths_[axis]; }
  const std::vector<double>& half_widths() const { return half_widths_; }
  double min_half_width() const;

  /// True when the closed ball of the given radius lies strictly inside.
  bool contains_ball(double radius) const { return radius < min_half_width(); }

  bool operator==(const BoxDomain&) const = default;

 private:
  std::vector<double> half_widths_;
};

using Point = std::array<double, 3>;

/// Tensor lattice x_i = -h + i * spacing, i = 0 .. N-1 on every axis. Node 0
/// sits on the boundary; the origin is the node N/2 (N is required even).
class UniformGrid {
 public:
  UniformGrid(BoxDomain domain, std::vector<int> points_per_axis);
  static UniformGrid cube(int n, double half_width, int points_per_axis);
  /// Grid with the given spacing on every axis; 2h/spacing must be an even integer.
  static UniformGrid with_spacing(BoxDomain domain, double spacing);

  const BoxDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  int points(int axis) const { return points_[axis]; }
  const std::vector<int>& points_per_axis() const { return points_; }
  double spacing(int axis) const { return spacing_[axis]; }
  double coordinate(int axis, int i) const { return -domain_.half_width(axis) + i * spacing_[axis]; }
  std::size_t size() const { return size_; }
  double cell_volume() const;

  /// Row-major (lexicographic, last axis fastest) node numbering.
  std::size_t flat_index(std::span<const int> idx) const;
  std::array<int, 3> multi_index(std::size_t flat) const;
  Point node(std::size_t flat) const;
  double radius(std::size_t flat) const;
  std::size_t origin_index() const;

  bool operator==(const UniformGrid& o) const { return domain_ == o.domain_ && points_ == o.points_; }

 private:
  BoxDomain domain_;
  std::vector<int> points_;
  std::vector<double> spacing_;
  std::size_t size_ = 0;
};

/// Real samples on a grid, optionally tagged with a support radius r
/// (values vanish at every node with |x| >= r).
class GridFunction {
 public:
  GridFunction(UniformGrid grid, std::vector<double> values, std::optional<double> support_radius = {});
  static GridFunction zeros(UniformGrid grid);

  const UniformGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::optional<double> support_radius() const { return support_radius_; }

  GridFunction scaled(double alpha) const;

 private:
  UniformGrid grid_;
  std::vector<double> values_;
  std::optional<double> support_radius_;
};

struct BubbleParams {
  int n = 1;
  double m = 0.4;
  double eps = 0.5;
  double delta = 0.25;
};

/// Degree-9 smoothstep cutoff: 1 on r <= delta, 0 on r >= 2 delta, C^4.
double cutoff(double r, double delta);

/// phi_cut(x) * (eps^2 + |x|^2)^((2m - n)/2), support radius 2 delta.
GridFunction make_bubble(const BubbleParams& p, const UniformGrid& grid);

/// C-infinity bump exp(1 - 1/(1 - |x|^2/rho^2)) supported in |x| < rho.
GridFunction make_bump(const UniformGrid& grid, double rho, double amplitude = 1.0);

/// Samples f at the nodes; nodes with |x| >= support_radius are zeroed.
GridFunction sample(const UniformGrid& grid, const std::function<double(const Point&)>& f,
                    std::optional<double> support_radius = {});

double l1_norm(const GridFunction& u);
double lp_norm(const GridFunction& u, double p);

/// Per-node quadrature weights for |x|^{-2s} dx. The origin cell carries the
/// exact integral of the weight over the cell.
std::vector<double> hardy_weights(const UniformGrid& grid, double s);

/// Exact integral of |x|^{-2s} over the cell prod_a [-h_a/2, h_a/2].
double origin_cell_weight_integral(std::span<const double> spacing, double s);

double hardy_integral(const GridFunction& u, double s);

/// (-Delta)^k u for k in {0, 1} by spectral differentiation in the interior
/// sine basis (odd reflection across the box faces). Dirichlet eigenfunctions
/// are reproduced exactly; boundary nodes are returned as 0.
GridFunction laplacian_power_k(const GridFunction& u, int k);

/// Copies u onto another grid with identical spacing whose nodes are aligned
/// with those of u; fails if the support does not fit.
GridFunction embed(const GridFunction& u, const UniformGrid& target);

/// u(. / t) on the same grid, by trigonometric interpolation.
GridFunction dilate(const GridFunction& u, double t);

/// CSV with columns x1..xn,value; header row; lexicographic node order.
void write_csv(std::ostream& os, const GridFunction& u);

}  // namespace fraclap
