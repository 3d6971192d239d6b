#include "fraclap/cli_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "detail/format.hpp"
#include "detail/parallel.hpp"
#include "fraclap/bn.hpp"
#include "fraclap/error.hpp"
#include "fraclap/experiments.hpp"
#include "fraclap/extension.hpp"
#include "fraclap/fourier.hpp"
#include "fraclap/navier.hpp"

namespace fraclap {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* version() { return "0.1.0"; }

void set_threads(int n) { detail::set_threads(n); }

namespace {

const std::vector<std::pair<Experiment, const char*>> kNames = {
    {Experiment::forms, "forms"},
    {Experiment::gap_sweep, "gap-sweep"},
    {Experiment::bn_minimize, "bn-minimize"},
    {Experiment::bubble_curve, "bubble-curve"},
    {Experiment::cylinder_check, "cylinder-check"},
    {Experiment::calibrate, "calibrate"},
    {Experiment::critical_scan, "critical-scan"},
};

enum class Kind { integer, real, text, real_list };

struct Param {
  const char* key;
  Kind kind;
  json def;
};

using Schema = std::vector<Param>;

const Schema& schema(Experiment e) {
  static const std::map<Experiment, Schema> table = {
      {Experiment::forms,
       {{"n", Kind::integer, 1},
        {"orders", Kind::real_list, json::array({0.25, 0.4, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0})},
        {"half_width", Kind::real, 1.0},
        {"points", Kind::integer, 512},
        {"J", Kind::integer, 256},
        {"pad_factor", Kind::integer, 8},
        {"witness", Kind::text, "bubble"},
        {"bubble_m", Kind::real, 0.4},
        {"eps", Kind::real, 0.5},
        {"delta", Kind::real, 0.25},
        {"rho", Kind::real, 0.5}}},
      {Experiment::gap_sweep,
       {{"n", Kind::integer, 1},
        {"orders", Kind::real_list, json::array({0.4})},
        {"r", Kind::real, 0.25},
        {"half_widths", Kind::real_list, json::array({0.5, 1.0, 2.0, 4.0})},
        {"spacing", Kind::real, 1.0 / 512.0},
        {"pad_factor", Kind::integer, 8}}},
      {Experiment::bn_minimize,
       {{"n", Kind::integer, 1},
        {"m", Kind::real, 0.4},
        {"s", Kind::real, 0.3},
        {"lambda", Kind::real, -1.0},
        {"lambda_frac", Kind::real, 0.1},
        {"variant", Kind::text, "spectral_perturbation"},
        {"half_width", Kind::real, 1.0},
        {"points", Kind::integer, 0},
        {"J", Kind::integer, 0},
        {"restarts", Kind::integer, 3},
        {"max_iterations", Kind::integer, 100000}}},
      {Experiment::bubble_curve,
       {{"n", Kind::integer, 1},
        {"m", Kind::real, 0.4},
        {"s", Kind::real, 0.35},
        {"lambda", Kind::real, -1.0},
        {"lambda_frac", Kind::real, 0.1},
        {"variant", Kind::text, "spectral_perturbation"},
        {"half_width", Kind::real, 1.0},
        {"points", Kind::integer, 0},
        {"J", Kind::integer, 0},
        {"eps", Kind::real_list, json::array({0.2, 0.1, 0.05, 0.02, 0.01})},
        {"delta", Kind::real, 0.25}}},
      {Experiment::cylinder_check,
       {{"sigma", Kind::real, 0.4},
        {"dual_m", Kind::real, 1.5},
        {"half_width", Kind::real, 1.0},
        {"points", Kind::integer, 512},
        {"J", Kind::integer, 256},
        {"M", Kind::integer, 160},
        {"pad_factor", Kind::integer, 8},
        {"bubble_m", Kind::real, 0.4},
        {"eps", Kind::real, 0.5},
        {"delta", Kind::real, 0.25},
        {"witness_eps", Kind::real_list, json::array({0.3, 0.5, 0.7})}}},
      {Experiment::calibrate,
       {{"sigma", Kind::real, 0.4},
        {"half_width", Kind::real, 1.0},
        {"points", Kind::integer, 512},
        {"M", Kind::integer, 160},
        {"bubble_m", Kind::real, 0.4},
        {"delta", Kind::real, 0.25},
        {"witness_eps", Kind::real_list, json::array({0.3, 0.5, 0.7})}}},
      {Experiment::critical_scan,
       {{"n", Kind::integer, 1},
        {"m_grid", Kind::real_list, json::array({0.4})},
        {"s_grid", Kind::real_list, json::array({0.2, 0.3, 0.35})},
        {"lambda_frac", Kind::real, 0.1},
        {"variant", Kind::text, "spectral_perturbation"},
        {"half_width", Kind::real, 1.0},
        {"points", Kind::integer, 0},
        {"J", Kind::integer, 0},
        {"restarts", Kind::integer, 3},
        {"max_iterations", Kind::integer, 100000}}},
  };
  return table.at(e);
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::validation, msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) invalid(msg);
}

json coerce(const Param& p, const json& v) {
  const std::string key = p.key;
  switch (p.kind) {
    case Kind::integer:
      if (v.is_number_integer()) return v;
      if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) return static_cast<long long>(v.get<double>());
      invalid("parameter '" + key + "' must be an integer");
    case Kind::real:
      require(v.is_number(), "parameter '" + key + "' must be a number");
      require(std::isfinite(v.get<double>()), "parameter '" + key + "' must be finite");
      return v.get<double>();
    case Kind::text:
      require(v.is_string(), "parameter '" + key + "' must be a string");
      return v;
    case Kind::real_list: {
      json out = json::array();
      if (v.is_number()) {
        out.push_back(v.get<double>());
      } else {
        require(v.is_array() && !v.empty(), "parameter '" + key + "' must be a non-empty list of numbers");
        for (const auto& x : v) {
          require(x.is_number() && std::isfinite(x.get<double>()), "parameter '" + key + "' must hold finite numbers");
          out.push_back(x.get<double>());
        }
      }
      return out;
    }
  }
  invalid("unreachable parameter kind");
}

std::vector<double> list(const json& p, const char* key) { return p.at(key).get<std::vector<double>>(); }
double num(const json& p, const char* key) { return p.at(key).get<double>(); }
int integer(const json& p, const char* key) { return p.at(key).get<int>(); }
std::string text(const json& p, const char* key) { return p.at(key).get<std::string>(); }

bool even_multiple(double width, double spacing) {
  const double k = width / spacing;
  return std::abs(k - std::round(k)) < 1e-9 && std::lround(k) % 2 == 0;
}

void check_grid(int n, int points, int J, double hw) {
  require(n >= 1 && n <= 3, "n must be 1, 2 or 3");
  require(hw > 0, "half_width must be positive");
  require(points >= 8 && points % 2 == 0, "points must be an even integer >= 8");
  require(J >= 1 && 2 * J <= points, "J must satisfy 1 <= J <= points / 2 (Nyquist)");
  double total = 1.0;
  for (int a = 0; a < n; ++a) total *= points;
  require(total <= (1 << 24), "grid too large (points^n > 2^24)");
}

void check_order_form(double m) {
  require(m >= 0 && m < 3, "orders must lie in [0, 3)");
  if (m == std::floor(m)) require(m == 0 || m == 1 || m == 2, "integer orders limited to {0, 1, 2}");
}

void check_bn(const json& p, bool needs_lambda) {
  const int n = integer(p, "n");
  const double m = num(p, "m"), s = num(p, "s");
  require(n >= 1 && n <= 3, "n must be 1, 2 or 3");
  require(m > 0 && 2.0 * m < n, "m must satisfy 0 < m < n/2");
  require(s >= 0, "s must be >= 0");
  require(s < m, "s < m violated");
  require(2.0 * s < n, "2s < n violated");
  variant_from_string(text(p, "variant"));
  const int pts = integer(p, "points"), J = integer(p, "J");
  require(pts >= 0 && J >= 0, "points and J must be >= 0 (0 selects the default)");
  require(num(p, "half_width") > 0, "half_width must be positive");
  if (pts > 0) check_grid(n, pts, J > 0 ? J : pts / 2, num(p, "half_width"));
  if (needs_lambda) {
    const double lam = num(p, "lambda"), frac = num(p, "lambda_frac");
    if (lam >= 0) {
      require(std::isfinite(lam), "lambda must be finite");
    } else {
      require(frac >= 0 && frac < 1, "lambda_frac must lie in [0, 1)");
    }
  }
}

void validate_parameters(Experiment e, const json& p) {
  switch (e) {
    case Experiment::forms: {
      const int n = integer(p, "n");
      check_grid(n, integer(p, "points"), integer(p, "J"), num(p, "half_width"));
      require(integer(p, "pad_factor") >= 4, "pad_factor must be >= 4");
      for (double m : list(p, "orders")) check_order_form(m);
      const std::string w = text(p, "witness");
      require(w == "bubble" || w == "bump", "witness must be 'bubble' or 'bump'");
      const double hw = num(p, "half_width");
      if (w == "bubble") {
        const double bm = num(p, "bubble_m");
        require(bm > 0 && 2.0 * bm < n, "bubble_m must satisfy 0 < m < n/2");
        require(num(p, "eps") > 0 && num(p, "delta") > 0, "eps and delta must be positive");
        require(2.0 * num(p, "delta") < hw, "bubble support 2 delta must lie inside the domain");
      } else {
        require(num(p, "rho") > 0 && num(p, "rho") < hw, "bump radius must lie inside the domain");
      }
      break;
    }
    case Experiment::gap_sweep: {
      const int n = integer(p, "n");
      require(n >= 1 && n <= 3, "n must be 1, 2 or 3");
      const double r = num(p, "r"), h = num(p, "spacing");
      require(r > 0, "r must be positive");
      require(h > 0, "spacing must be positive");
      require(integer(p, "pad_factor") >= 4, "pad_factor must be >= 4");
      for (double m : list(p, "orders")) {
        require(m > 0 && m < 3, "orders must lie in (0, 3)");
        require(m != std::floor(m), "gap experiments need non-integer orders");
      }
      const auto hws = list(p, "half_widths");
      for (double hw : hws) {
        require(hw > r, "every half-width must exceed r");
        require(even_multiple(2.0 * hw, h), "2 * half_width must be an even multiple of spacing");
        double total = 1.0;
        for (int a = 0; a < n; ++a) total *= 2.0 * hw / h;
        require(total <= (1 << 24), "sweep grid too large");
      }
      break;
    }
    case Experiment::bn_minimize:
      check_bn(p, true);
      require(integer(p, "restarts") >= 3, "restarts must be >= 3");
      require(integer(p, "max_iterations") >= 1, "max_iterations must be positive");
      break;
    case Experiment::bubble_curve: {
      check_bn(p, true);
      const double hw = num(p, "half_width"), d = num(p, "delta");
      require(d > 0 && 2.0 * d < hw, "bubble support 2 delta must lie inside the domain");
      for (double e : list(p, "eps")) require(e > 0, "eps values must be positive");
      break;
    }
    case Experiment::cylinder_check: {
      const double s = num(p, "sigma"), dm = num(p, "dual_m");
      require(s > 0 && s < 1, "sigma must lie in (0, 1)");
      require(dm > 1 && dm < 2, "dual_m must lie in (1, 2)");
      check_grid(1, integer(p, "points"), integer(p, "J"), num(p, "half_width"));
      require(integer(p, "M") >= 4, "M must be >= 4");
      require(integer(p, "pad_factor") >= 4, "pad_factor must be >= 4");
      const double bm = num(p, "bubble_m");
      require(bm > 0 && bm < 0.5, "bubble_m must satisfy 0 < m < 1/2");
      require(num(p, "eps") > 0, "eps must be positive");
      const double d = num(p, "delta");
      require(d > 0 && 2.0 * d < num(p, "half_width"), "bubble support 2 delta must lie inside the domain");
      require(list(p, "witness_eps").size() >= 3, "calibration needs at least 3 witnesses");
      for (double e : list(p, "witness_eps")) require(e > 0, "witness_eps values must be positive");
      break;
    }
    case Experiment::calibrate: {
      const double s = num(p, "sigma");
      require(s > 0 && s < 1, "sigma must lie in (0, 1)");
      const double hw = num(p, "half_width");
      check_grid(1, integer(p, "points"), 1, hw);
      require(integer(p, "M") >= 4, "M must be >= 4");
      const double bm = num(p, "bubble_m");
      require(bm > 0 && bm < 0.5, "bubble_m must satisfy 0 < m < 1/2");
      const double d = num(p, "delta");
      require(d > 0 && 2.0 * d < hw, "bubble support 2 delta must lie inside the domain");
      require(list(p, "witness_eps").size() >= 3, "calibration needs at least 3 witnesses");
      for (double e : list(p, "witness_eps")) require(e > 0, "witness_eps values must be positive");
      break;
    }
    case Experiment::critical_scan: {
      const int n = integer(p, "n");
      require(n >= 1 && n <= 3, "n must be 1, 2 or 3");
      const double f = num(p, "lambda_frac");
      require(f > 0 && f < 1, "lambda_frac must lie in (0, 1)");
      variant_from_string(text(p, "variant"));
      require(num(p, "half_width") > 0, "half_width must be positive");
      const int pts = integer(p, "points"), J = integer(p, "J");
      if (pts > 0) check_grid(n, pts, J > 0 ? J : pts / 2, num(p, "half_width"));
      require(pts >= 0 && J >= 0, "points and J must be >= 0 (0 selects the default)");
      for (double s : list(p, "s_grid")) require(s >= 0, "s values must be >= 0");
      require(integer(p, "restarts") >= 3, "restarts must be >= 3");
      require(integer(p, "max_iterations") >= 1, "max_iterations must be positive");
      break;
    }
  }
}

std::string position_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// ---------------------------------------------------------------------------
// Output helpers

void write_atomic(const fs::path& path, const std::string& data) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot move " + tmp.string() + " into place: " + ec.message());
}

struct Context {
  fs::path dir;
  RunManifest* manifest;

  void emit(const std::string& name, const std::string& data) {
    write_atomic(dir / name, data);
    manifest->files.push_back(OutputFile{name, sha256_hex(data), data.size()});
  }
  void check(const std::string& name, bool ok, const std::string& detail, bool asserted = true) {
    manifest->checks.push_back(CheckResult{name, ok, asserted, detail});
  }
};

std::string g(double v) { return detail::fmt_num(v); }

template <class F>
std::string to_csv(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Experiments

void run_forms(const json& p, Context& ctx) {
  const int n = integer(p, "n");
  const double hw = num(p, "half_width");
  const auto grid = UniformGrid::cube(n, hw, integer(p, "points"));
  const GridFunction u = text(p, "witness") == "bubble"
                             ? make_bubble(BubbleParams{n, num(p, "bubble_m"), num(p, "eps"), num(p, "delta")}, grid)
                             : make_bump(grid, num(p, "rho"));
  const SineBasis basis(grid.domain(), integer(p, "J"));
  const auto c = expand(u, basis);
  const int pad = integer(p, "pad_factor");
  std::ostringstream os;
  os << "m,QD,QN,QD_converged,QN_tail_flag\n";
  for (double m : list(p, "orders")) {
    const auto qd = q_dirichlet(u, m, pad);
    const auto qn = q_navier(c, m);
    os << g(m) << ',' << g(qd.value) << ',' << g(qn.value) << ',' << (qd.converged ? "true" : "false") << ','
       << (qn.tail_flag ? "true" : "false") << '\n';
    const double rel = std::abs(qn.value - qd.value) / qd.value;
    if (m == 1.0) ctx.check("integer_order_equality_m1", rel <= 1e-4, "rel. diff " + g(rel));
    if (m == 2.0) ctx.check("integer_order_equality_m2", rel <= 1e-3, "rel. diff " + g(rel));
    if (m > 0 && m < 1) ctx.check("ordering_QD_le_QN_m" + g(m), qd.value <= qn.value + 1e-6 * qd.value, "QN - QD = " + g(qn.value - qd.value));
    if (m > 1 && m < 2) ctx.check("ordering_QN_le_QD_m" + g(m), qn.value <= qd.value + 1e-6 * qd.value, "QD - QN = " + g(qd.value - qn.value));
  }
  ctx.emit("forms.csv", os.str());
}

void run_gap_sweep(const json& p, Context& ctx) {
  const int n = integer(p, "n");
  const double r = num(p, "r"), h = num(p, "spacing");
  const auto hws = list(p, "half_widths");
  const double hw0 = *std::min_element(hws.begin(), hws.end());
  const auto grid = UniformGrid::cube(n, hw0, static_cast<int>(std::lround(2.0 * hw0 / h)));
  std::vector<GapReport> all;
  for (double m : list(p, "orders")) {
    const auto ord = FormOrder::from(m);
    const auto u = gap_witness(n, m, r, grid);
    const auto reps = gap_sweep_domain(u, ord, hws);
    const auto env = bound_envelope(reps);
    const double l1 = l1_norm(u);
    bool order_ok = true, sandwich_ok = true;
    for (const auto& rep : reps) {
      order_ok = order_ok && rep.signed_gap >= -1e-6 * rep.q_dirichlet;
      sandwich_ok = sandwich_ok && rep.signed_gap <= gap_bound(rep, env.max_ratio, l1) * (1.0 + 1e-12) + 1e-6 * rep.q_dirichlet;
    }
    const std::string tag = "_m" + g(m);
    ctx.check("parity_ordering" + tag, order_ok, "signed gap >= -1e-6 QD on every sweep point");
    ctx.check("bound_envelope" + tag, sandwich_ok, "gap <= envelope bound on every sweep point");
    ctx.check("bound_ratio_spread" + tag, !env.violation, "max/min bound_ratio = " + g(env.max_ratio / env.min_ratio));
    if (reps.size() >= 4) {
      try {
        const auto fit = gap_rate_fit(reps);
        ctx.check("rate_fit" + tag, fit.consistent,
                  "slope " + g(fit.slope) + " vs -(2n+2m)+1 = " + g(-(2.0 * n + 2.0 * m) + 1.0), false);
        ctx.manifest->findings["gap_slope" + tag] = fit.slope;
      } catch (const Error& e) {
        ctx.check("rate_fit" + tag, false, e.what(), false);
      }
    }
    bool tail = true;
    for (std::size_t i = reps.size() >= 3 ? reps.size() - 3 : 0; i + 1 < reps.size(); ++i)
      tail = tail && std::abs(reps[i + 1].signed_gap) < std::abs(reps[i].signed_gap);
    ctx.check("tail_decrease" + tag, tail, "last three |gap| decreasing", false);
    ctx.manifest->findings["bound_ratio_max" + tag] = env.max_ratio;
    all.insert(all.end(), reps.begin(), reps.end());
  }
  ctx.emit("gap.csv", to_csv([&](std::ostream& os) { write_csv(os, all); }));
}

BNProblem bn_problem(const json& p) {
  auto prob = BNProblem::make(variant_from_string(text(p, "variant")), integer(p, "n"), num(p, "m"), num(p, "s"), 0.0,
                              num(p, "half_width"), integer(p, "points"), integer(p, "J"));
  const double lam = num(p, "lambda");
  if (lam >= 0) {
    prob.lambda = lam;
  } else {
    prob.lambda = num(p, "lambda_frac") * lambda_bound(prob);
  }
  return prob;
}

void run_bn_minimize(const json& p, std::uint64_t seed, Context& ctx) {
  const auto prob = bn_problem(p);
  MinimizeOptions opt;
  opt.restarts = integer(p, "restarts");
  opt.max_iterations = integer(p, "max_iterations");
  opt.seed = seed;
  const auto rep = minimize(prob, opt);
  ScanRow row;
  row.n = prob.n;
  row.m = prob.m;
  row.s = prob.s;
  row.lambda = prob.lambda;
  row.variant = prob.variant;
  row.value = rep.value;
  row.sobolev_ref = rep.sobolev_ref;
  row.below_sobolev = rep.below_sobolev;
  row.el_residual = rep.el_residual;
  row.iterations = rep.iterations;
  ctx.emit("bn.csv", to_csv([&](std::ostream& os) { write_csv(os, std::vector<ScanRow>{row}); }));
  ctx.emit("minimizer.csv", to_csv([&](std::ostream& os) { write_csv(os, rep.minimizer); }));
  bool below_seeds = true;
  for (double v : rep.seed_values) below_seeds = below_seeds && rep.value <= v * (1.0 + 1e-12);
  ctx.check("converged", rep.converged, "iterations " + std::to_string(rep.iterations));
  ctx.check("positive_value", rep.value > 0, "value " + g(rep.value));
  ctx.check("not_above_seeds", below_seeds, "minimum <= every restart seed quotient");
  ctx.check("el_residual", rep.el_residual <= 1e-6, "residual " + g(rep.el_residual));
  ctx.check("below_sobolev", rep.below_sobolev,
            "value " + g(rep.value) + " vs S_m estimate " + g(rep.sobolev_ref) + " (tol " + g(rep.sobolev_tol) + ")", false);
  auto& f = ctx.manifest->findings;
  f["value"] = rep.value;
  f["lambda"] = prob.lambda;
  f["sobolev_ref"] = rep.sobolev_ref;
  f["sobolev_tol"] = rep.sobolev_tol;
  f["below_sobolev"] = rep.below_sobolev;
  f["el_residual"] = rep.el_residual;
  f["concentration"] = rep.concentration;
  f["restart_values"] = rep.restart_values;
}

void run_bubble_curve(const json& p, Context& ctx) {
  const auto prob = bn_problem(p);
  const auto pts = bubble_curve(prob, list(p, "eps"), num(p, "delta"));
  const auto est = sobolev_ladder(prob.n, prob.m, default_sobolev_scales(prob.n));
  std::ostringstream os;
  os << "eps,quotient,sobolev_ref\n";
  double lo = pts.empty() ? 0.0 : pts.front().quotient;
  for (const auto& q : pts) {
    os << g(q.eps) << ',' << g(q.quotient) << ',' << g(est.value) << '\n';
    lo = std::min(lo, q.quotient);
  }
  ctx.emit("curve.csv", os.str());
  ctx.check("curve_dips_below_sobolev", lo < est.value, "min quotient " + g(lo) + " vs " + g(est.value), false);
  ctx.manifest->findings["curve_min"] = lo;
  ctx.manifest->findings["sobolev_ref"] = est.value;
}

std::vector<GridFunction> witnesses(const json& p, const UniformGrid& grid) {
  std::vector<GridFunction> w;
  for (double e : list(p, "witness_eps")) w.push_back(make_bubble(BubbleParams{1, num(p, "bubble_m"), e, num(p, "delta")}, grid));
  return w;
}

void run_calibrate(const json& p, Context& ctx) {
  const double sigma = num(p, "sigma");
  const auto grid = UniformGrid::cube(1, num(p, "half_width"), integer(p, "points"));
  const int M = integer(p, "M");
  const auto ws = witnesses(p, grid);
  std::ostringstream os;
  os << "witness,QD,energy,ratio\n";
  std::vector<double> ratios;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto cg = CylinderGrid::whole_line(grid, sigma, M);
    const double E = energy_direct(poisson_direct(ws[i], sigma, cg));
    const double qd = q_dirichlet(ws[i], sigma).value;
    ratios.push_back(qd / E);
    os << i << ',' << g(qd) << ',' << g(E) << ',' << g(qd / E) << '\n';
  }
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= ratios.size();
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  const double cov = std::sqrt(var / ratios.size()) / mean;
  ctx.emit("calibrate.csv", os.str());
  ctx.check("c2_variation", cov <= 1e-2, "coefficient of variation " + g(cov));
  ctx.manifest->findings["c2"] = mean;
  ctx.manifest->findings["c2_cov"] = cov;
  ctx.manifest->findings["c2_reference"] = c2_reference(sigma);
}

void run_cylinder_check(const json& p, Context& ctx) {
  const double sigma = num(p, "sigma");
  const auto grid = UniformGrid::cube(1, num(p, "half_width"), integer(p, "points"));
  const int M = integer(p, "M");
  const int pad = integer(p, "pad_factor");
  const SineBasis basis(grid.domain(), integer(p, "J"));
  const auto u = make_bubble(BubbleParams{1, num(p, "bubble_m"), num(p, "eps"), num(p, "delta")}, grid);
  std::ostringstream os;
  os << "quantity,extension,reference,rel_error\n";
  auto row = [&](const std::string& name, double ext, double ref, double tol) {
    const double rel = std::abs(ext - ref) / std::abs(ref);
    os << name << ',' << g(ext) << ',' << g(ref) << ',' << g(rel) << '\n';
    ctx.check(name, rel <= tol, "rel. error " + g(rel) + " (tol " + g(tol) + ")");
  };

  const double c2 = calibrate_c2(sigma, witnesses(p, grid), M);
  ctx.manifest->findings["c2"] = c2;
  const double E = energy_direct(poisson_direct(u, sigma, CylinderGrid::whole_line(grid, sigma, M)));
  row("dirichlet_extension", c2 * E, q_dirichlet(u, sigma, pad).value, 1e-2);
  row("navier_cylinder", cylinder_navier(u, sigma, CylinderGrid::bounded(grid, sigma, M), c2),
      q_navier(expand(u, basis), sigma).value, 2e-2);

  const auto ord = FormOrder::from(num(p, "dual_m"));
  double c2d = c2;
  if (std::abs(ord.sigma - sigma) > 1e-15) {
    c2d = calibrate_c2(ord.sigma, witnesses(p, grid), M);
    ctx.manifest->findings["c2_dual"] = c2d;
  }
  const auto dual = q_dirichlet_dual_check(u, ord, CylinderGrid::whole_line(grid, ord.sigma, M), c2d);
  row("dirichlet_dual", dual.value, q_dirichlet(u, ord.m, pad).value, 5e-2);
  const auto gk = laplacian_power_k(u, 1);
  row("navier_cylinder_dual", cylinder_navier_dual(gk, ord.sigma, CylinderGrid::bounded(grid, ord.sigma, M), c2d),
      q_navier(expand(u, basis), ord.m).value, 2e-2);
  ctx.emit("cylinder.csv", os.str());
}

void run_critical_scan(const json& p, std::uint64_t seed, Context& ctx) {
  ScanOptions opt;
  opt.variant = variant_from_string(text(p, "variant"));
  opt.half_width = num(p, "half_width");
  opt.points = integer(p, "points");
  opt.J = integer(p, "J");
  opt.minimize.restarts = integer(p, "restarts");
  opt.minimize.max_iterations = integer(p, "max_iterations");
  opt.minimize.seed = seed;
  const int n = integer(p, "n");
  const auto rows = critical_scan(n, list(p, "m_grid"), list(p, "s_grid"), num(p, "lambda_frac"), opt);
  ctx.emit("scan.csv", to_csv([&](std::ostream& os) { write_csv(os, rows); }));
  bool region_ok = true;
  int cells = 0;
  for (const auto& r : rows) {
    if (r.status == "skipped") continue;
    if (r.s >= 2.0 * r.m - 0.5 * n - 1e-12) {
      ++cells;
      region_ok = region_ok && r.status == "ok" && r.below_sobolev;
    }
    if (r.status != "ok") ctx.check("cell_m" + g(r.m) + "_s" + g(r.s), false, r.status, false);
  }
  ctx.check("noncritical_region_below_sobolev", region_ok && cells > 0,
            std::to_string(cells) + " cells with s >= 2m - n/2");
}

}  // namespace

const char* to_string(Experiment e) {
  for (const auto& [k, v] : kNames)
    if (k == e) return v;
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  for (const auto& [k, v] : kNames)
    if (s == v) return k;
  invalid("unknown experiment '" + s + "'");
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : kNames) out.emplace_back(v);
  return out;
}

RunConfig parse_config(std::string_view text, const std::string& experiment_hint) {
  json doc;
  try {
    doc = text.find_first_not_of(" \t\r\n") == std::string_view::npos ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, "malformed config at " + position_of(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  require(doc.is_object(), "config must be a JSON object");
  for (const auto& [k, v] : doc.items())
    require(k == "experiment" || k == "seed" || k == "output_dir" || k == "parameters", "unknown key '" + k + "'");

  RunConfig cfg;
  std::string name = experiment_hint;
  if (doc.contains("experiment")) {
    require(doc["experiment"].is_string(), "'experiment' must be a string");
    const std::string in_doc = doc["experiment"].get<std::string>();
    require(experiment_hint.empty() || experiment_hint == in_doc,
            "experiment '" + experiment_hint + "' does not match config experiment '" + in_doc + "'");
    name = in_doc;
  }
  require(!name.empty(), "missing required field 'experiment'");
  cfg.experiment = experiment_from_string(name);
  if (doc.contains("seed")) {
    require(doc["seed"].is_number_unsigned() || (doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0),
            "'seed' must be a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("output_dir")) {
    require(doc["output_dir"].is_string() && !doc["output_dir"].get<std::string>().empty(),
            "'output_dir' must be a non-empty string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  json given = json::object();
  if (doc.contains("parameters")) {
    require(doc["parameters"].is_object(), "'parameters' must be an object");
    given = doc["parameters"];
  }
  const auto& sch = schema(cfg.experiment);
  for (const auto& [k, v] : given.items()) {
    const bool known = std::any_of(sch.begin(), sch.end(), [&](const Param& p) { return k == p.key; });
    require(known, "unknown parameter '" + k + "' for experiment " + name);
  }
  cfg.parameters = json::object();
  for (const auto& prm : sch) cfg.parameters[prm.key] = given.contains(prm.key) ? coerce(prm, given[prm.key]) : prm.def;
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) { validate_parameters(cfg.experiment, cfg.parameters); }

std::string serialize(const RunConfig& cfg) {
  json doc;
  doc["experiment"] = to_string(cfg.experiment);
  doc["seed"] = cfg.seed;
  doc["output_dir"] = cfg.output_dir;
  doc["parameters"] = cfg.parameters;
  return doc.dump(2) + "\n";
}

bool RunManifest::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed || !c.asserted; });
}

json RunManifest::to_json() const {
  json doc;
  doc["artifact"] = "fraclap";
  doc["version"] = version;
  doc["config"] = json::parse(serialize(config));
  doc["wall_seconds"] = wall_seconds;
  doc["passed"] = passed();
  json cs = json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name}, {"passed", c.passed}, {"asserted", c.asserted}, {"detail", c.detail}});
  doc["checks"] = cs;
  doc["findings"] = findings;
  json fs_ = json::array();
  for (const auto& f : files) fs_.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  doc["files"] = fs_;
  return doc;
}

RunManifest run(const RunConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest man;
  man.config = cfg;
  man.version = version();
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  Context ctx{dir, &man};
  const auto& p = cfg.parameters;
  try {
    switch (cfg.experiment) {
      case Experiment::forms: run_forms(p, ctx); break;
      case Experiment::gap_sweep: run_gap_sweep(p, ctx); break;
      case Experiment::bn_minimize: run_bn_minimize(p, cfg.seed, ctx); break;
      case Experiment::bubble_curve: run_bubble_curve(p, ctx); break;
      case Experiment::cylinder_check: run_cylinder_check(p, ctx); break;
      case Experiment::calibrate: run_calibrate(p, ctx); break;
      case Experiment::critical_scan: run_critical_scan(p, cfg.seed, ctx); break;
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    ctx.check(std::string("experiment_") + fraclap::to_string(e.kind()), false, e.what());
  }
  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_atomic(dir / "manifest.json", man.to_json().dump(2) + "\n");
  return man;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::io, "SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

}  // namespace fraclap
