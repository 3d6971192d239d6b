// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "fraclap/bn.hpp"
#include "fraclap/cli_io.hpp"
#include "fraclap/domain.hpp"
#include "fraclap/experiments.hpp"
#include "fraclap/extension.hpp"
#include "fraclap/fourier.hpp"
#include "fraclap/navier.hpp"

using namespace fraclap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Criterion 1 -----------------------------------------------------------------
Outcome integer_orders() {
  auto g = UniformGrid::cube(1, 1.0, 512);
  SineBasis b(g.domain(), 256);
  std::vector<GridFunction> us = {
      make_bubble({1, 0.4, 0.3, 0.25}, g), make_bubble({1, 0.25, 0.5, 0.3}, g), make_bump(g, 0.5),
      make_bump(g, 0.8, 2.0),
      sample(g, [](const Point& p) {
        const double t = p[0] - 0.1;
        return std::abs(t) < 0.5 ? p[0] * std::exp(-0.25 / (0.25 - t * t)) : 0.0;
      }, 0.6)};
  double e1 = 0.0, e2 = 0.0;
  for (const auto& u : us) {
    const auto c = expand(u, b);
    e1 = std::max(e1, rel(q_navier(c, 1.0).value, q_dirichlet(u, 1.0).value));
    e2 = std::max(e2, rel(q_navier(c, 2.0).value, q_dirichlet(u, 2.0).value));
  }
  return {e1 <= 1e-4 && e2 <= 1e-3, "max rel diff m=1 " + fmt("%.2e", e1) + " (<= 1e-4), m=2 " + fmt("%.2e", e2) + " (<= 1e-3)"};
}

// Criteria 2 and 3 ----------------------------------------------------------
const std::vector<double> kHalfWidths = {0.5, 1.0, 2.0, 4.0};

const UniformGrid& gap_grid() {
  static const UniformGrid g = UniformGrid::cube(1, 0.5, 512);
  return g;
}

Outcome parity_sandwich() {
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  for (double m : {0.25, 0.4, 0.75, 1.25, 1.5, 1.75}) {
    const auto u = gap_witness(1, m, 0.25, gap_grid());
    const auto reps = gap_sweep_domain(u, FormOrder::from(m), kHalfWidths);
    const auto env = bound_envelope(reps);
    const double l1 = l1_norm(u);
    for (const auto& r : reps) {
      const double slack = 1e-6 * r.q_dirichlet;
      // floor_even: QD <= QN <= QD + bound; floor_odd: QN <= QD <= QN + bound.
      const bool lower = r.signed_gap >= -slack;
      const bool upper = r.signed_gap <= gap_bound(r, env.max_ratio, l1) + slack;
      ok = ok && lower && upper;
      worst = std::min(worst, r.signed_gap / r.q_dirichlet);
    }
  }
  return {ok, "6 orders x 4 domains; min signed gap / QD " + fmt("%.2e", worst) + " (>= -1e-6)"};
}

Outcome gap_decay() {
  const double m = 0.4;
  const auto u = gap_witness(1, m, 0.25, gap_grid());
  const auto reps = gap_sweep_domain(u, FormOrder::from(m), kHalfWidths);
  const auto fit = gap_rate_fit(reps);
  const auto env = bound_envelope(reps);
  const double spread = env.max_ratio / env.min_ratio;
  const double target = -2.8;
  return {fit.slope <= target && spread <= 10.0,
          "slope " + fmt("%.3f", fit.slope) + " (<= -2.8), bound_ratio max/min " + fmt("%.2f", spread) + " (<= 10)"};
}

// Criterion 4 -------------------------------------------------------------------
Outcome extension_identities() {
  const double sigma = 0.4;
  const int M = 160;
  auto g = UniformGrid::cube(1, 1.0, 256);
  SineBasis b(g.domain(), 128);
  std::vector<GridFunction> ws;
  for (double e : {0.3, 0.5, 0.7}) ws.push_back(make_bubble({1, 0.4, e, 0.25}, g));
  std::vector<double> ratios;
  for (const auto& w : ws)
    ratios.push_back(q_dirichlet(w, sigma).value / energy_direct(poisson_direct(w, sigma, CylinderGrid::whole_line(g, sigma, M))));
  double mean = 0.0, var = 0.0;
  for (double r : ratios) mean += r / ratios.size();
  for (double r : ratios) var += (r - mean) * (r - mean) / ratios.size();
  const double cov = std::sqrt(var) / mean;
  const double c2 = mean;

  const auto u = make_bump(g, 0.6);
  const double qd = q_dirichlet(u, sigma).value;
  const double e_qd = rel(c2 * energy_direct(poisson_direct(u, sigma, CylinderGrid::whole_line(g, sigma, M))), qd);
  const double e_qn = rel(cylinder_navier(u, sigma, CylinderGrid::bounded(g, sigma, M), c2), q_navier(expand(u, b), sigma).value);

  const auto ord = FormOrder::from(1.5);
  const double c2h = calibrate_c2(ord.sigma, ws, M);
  const double e_dual = rel(q_dirichlet_dual(u, ord, CylinderGrid::whole_line(g, ord.sigma, M), c2h), q_dirichlet(u, 1.5).value);
  return {cov <= 1e-2 && e_qd <= 1e-2 && e_qn <= 2e-2 && e_dual <= 5e-2,
          "CoV " + fmt("%.1e", cov) + " (<= 1%), QD " + fmt("%.1e", e_qd) + " (<= 1%), QN " + fmt("%.1e", e_qn) +
              " (<= 2%), dual m=1.5 " + fmt("%.1e", e_dual) + " (<= 5%)"};
}

// Criteria 5 and 6 share the minimizations ------------------------------------
struct BnRun {
  std::string label;
  double lambda;
  RayleighReport rep;
};

const SobolevEstimate& ladder_a() {
  static const SobolevEstimate e = sobolev_ladder(1, 0.4, {4, 8, 16, 32, 64});
  return e;
}

const std::vector<BnRun>& bn_runs() {
  static const std::vector<BnRun> runs = [] {
    std::vector<BnRun> out;
    MinimizeOptions opt;
    opt.sobolev_ref = ladder_a().value;
    opt.sobolev_tol = ladder_a().uncertainty;
    for (auto v : {Variant::hardy_perturbation, Variant::spectral_perturbation}) {
      for (double s : {0.3, 0.35}) {
        auto p = BNProblem::make(v, 1, 0.4, s, 0.0);
        const double lam = 0.1 * lambda_bound(p);
        const std::string tag = std::string(to_string(v)) + " s=" + fmt("%g", s);
        out.push_back({tag, lam, minimize(p.with_lambda(lam), opt)});
        out.push_back({tag + " lambda=0", 0.0, minimize(p, opt)});
      }
    }
    return out;
  }();
  return runs;
}

Outcome sobolev_consistency() {
  const auto& a = ladder_a();
  const auto b = sobolev_ladder(1, 0.4, {6.4, 12.8, 25.6, 51.2, 102.4});
  const double spread = rel(b.value, a.value);
  double worst = 0.0;
  for (const auto& r : bn_runs()) worst = std::max(worst, r.rep.value / a.value - 1.0);
  return {spread <= 5e-3 && worst <= 5e-3,
          "S_m " + fmt("%.5f", a.value) + " vs " + fmt("%.5f", b.value) + " (rel " + fmt("%.1e", spread) +
              " <= 0.5%), max minimum / S_m - 1 = " + fmt("%.3f", worst) + " (<= 0.5%)"};
}

Outcome below_sobolev_effect() {
  bool ok = true;
  std::string detail;
  for (const auto& r : bn_runs()) {
    const bool perturbed = r.lambda > 0;
    const bool cell = perturbed ? (r.rep.below_sobolev && r.rep.el_residual <= 1e-6) : !r.rep.below_sobolev;
    ok = ok && cell;
    if (perturbed)
      detail += r.label + ": " + fmt("%.4f", r.rep.value) + (r.rep.below_sobolev ? " below" : " not below") + "; ";
    else if (!cell)
      detail += r.label + " unexpectedly below; ";
  }
  return {ok, detail + "S_m " + fmt("%.4f", ladder_a().value)};
}

// Criterion 7 ---------------------------------------------------------------------
Outcome eigen_quotients() {
  double worst = 0.0;
  SineBasis b(BoxDomain({1.0}), 64);
  const double l1 = std::pow(std::numbers::pi / 2, 2);
  for (double m : {0.25, 0.4, 1.5}) {
    for (double s : {0.0, 0.1, 0.2}) worst = std::max(worst, rel(lambda1(m, s, b), std::pow(l1, m - s)));
  }
  const double m = 0.4, s = 0.3;
  auto g = UniformGrid::cube(1, 1.0, 256);
  SineBasis bh(g.domain(), 128);
  const auto w = hardy_weights(g, s);
  const int J = static_cast<int>(bh.size());
  Eigen::MatrixXd Phi(g.size(), J);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (int j = 0; j < J; ++j) Phi(i, j) = bh.evaluate(j, g.node(i));
  Eigen::MatrixXd W = Phi.transpose() * Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()).asDiagonal() * Phi;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(J, J);
  for (int j = 0; j < J; ++j) D(j, j) = std::pow(bh.eigenvalues()[j], m);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(D, W);
  const double eh = rel(lambda1_hardy(m, s, bh, g), es.eigenvalues().minCoeff());
  return {worst <= 4 * std::numeric_limits<double>::epsilon() && eh <= 1e-8,
          "lambda1 max rel " + fmt("%.1e", worst) + " (machine precision), hardy vs dense " + fmt("%.1e", eh) + " (<= 1e-8)"};
}

// Criterion 8 ---------------------------------------------------------------------
Outcome determinism() {
  const auto root = fs::temp_directory_path() / "fraclap_acceptance";
  const std::vector<std::string> configs = {
      R"({"experiment": "gap-sweep", "parameters": {"orders": [0.25, 0.4, 0.75, 1.25, 1.5, 1.75]}})",
      R"({"experiment": "gap-sweep", "parameters": {"orders": [0.4]}})",
      R"({"experiment": "critical-scan", "parameters": {"m_grid": [0.4], "s_grid": [0.3, 0.35], "variant": "hardy_perturbation"}})",
      R"({"experiment": "critical-scan", "parameters": {"m_grid": [0.4], "s_grid": [0.3, 0.35], "variant": "spectral_perturbation"}})"};
  bool ok = true;
  int compared = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    std::vector<std::vector<OutputFile>> files;
    for (int threads : {1, 1, 4, 4}) {
      set_threads(threads);
      auto cfg = parse_config(configs[k]);
      cfg.output_dir = (root / ("c" + std::to_string(k) + "_" + std::to_string(files.size()))).string();
      files.push_back(run(cfg).files);
    }
    for (std::size_t i = 1; i < files.size(); ++i) {
      ok = ok && files[i].size() == files[0].size();
      for (std::size_t f = 0; ok && f < files[0].size(); ++f, ++compared)
        ok = ok && files[i][f].sha256 == files[0][f].sha256;
    }
  }
  set_threads(1);
  fs::remove_all(root);
  return {ok, std::to_string(compared) + " CSV hash comparisons across threads {1, 1, 4, 4}"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> f;
  };
  const std::vector<Criterion> criteria = {
      {1, "integer-order equality", 10, integer_orders},
      {2, "parity sandwich", 60, parity_sandwich},
      {3, "gap decay", 60, gap_decay},
      {4, "extension identities", 300, extension_identities},
      {6, "perturbed minimum below S_m", 600, below_sobolev_effect},
      {5, "Sobolev estimate consistency", 120, sobolev_consistency},
      {7, "eigen-quotient exactness", 30, eigen_quotients},
      {8, "determinism", 1e9, determinism},
  };
  std::vector<std::string> lines(9);
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.f();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && dt <= c.budget_s;
    failed += !pass;
    char head[160];
    std::snprintf(head, sizeof head, "%s criterion %d (%s): ", pass ? "PASS" : "FAIL", c.id, c.name);
    std::string line = head + o.detail + "; " + fmt("%.1f", dt) + " s";
    if (c.budget_s < 1e8) line += " (budget " + fmt("%g", c.budget_s) + " s)";
    lines[c.id] = line;
  }
  for (int i = 1; i <= 8; ++i) std::printf("%s\n", lines[i].c_str());
  std::printf("%d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
