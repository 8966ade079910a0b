// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Expected values come from closed forms
// and hand-written metric code below, not from the library's analysis.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "../support/convex_properties.hpp"
#include "optcon/config.hpp"
#include "optcon/harness.hpp"
#include "optcon/trace_io.hpp"

namespace {

using optcon::Vector;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

optcon::ScenarioConfig scenario(const std::string& name) {
  return optcon::load_config(std::string(OPTCON_CONFIG_DIR) + "/" + name + ".json");
}

Vector node(const Vector& x, std::size_t i, Eigen::Index m) {
  return x.segment(static_cast<Eigen::Index>(i) * m, m);
}

double diameter(const Vector& x, std::size_t n, Eigen::Index m) {
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d = std::max(d, (node(x, i, m) - node(x, j, m)).norm());
  return d;
}

struct Ball {
  Vector c;
  double r;
};

double ball_distance(const Ball& b, const Vector& x) {
  return std::max(0.0, (x - b.c).norm() - b.r);
}

std::vector<Ball> balls_of(const optcon::ScenarioConfig& cfg) {
  std::vector<Ball> out;
  for (const auto& f : cfg.objectives) {
    const auto& set = std::get<optcon::SqDist>(f.kind()).set;
    const auto& b = std::get<optcon::BallSet>(set.shape());
    out.push_back({b.center, b.radius});
  }
  return out;
}

// 1. Fixed strongly connected digraph, intersecting balls, 10 seeds.
Outcome criterion1() {
  Outcome out;
  const auto cfg = scenario("balls5_digraph");
  const auto balls = balls_of(cfg);
  for (const auto& b : balls) out.require(b.c.norm() < b.r, "origin not interior to every ball");
  double worst_diam = 0.0, worst_res = 0.0, worst_gap = 0.0;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto traj = optcon::integrate(cfg.scenario(cfg.seed + k));
    const Vector& x = traj.terminal();
    worst_diam = std::max(worst_diam, diameter(x, 5, 2));
    for (std::size_t i = 0; i < 5; ++i) {
      worst_res = std::max(worst_res, ball_distance(balls[i], node(x, i, 2)));
      // F* = 0 since the balls share a point.
      double f = 0.0;
      for (const auto& b : balls) f += 0.5 * std::pow(ball_distance(b, node(x, i, 2)), 2);
      worst_gap = std::max(worst_gap, f);
    }
  }
  out.require(worst_diam <= 1e-4, "diameter " + num(worst_diam));
  out.require(worst_res <= 1e-4, "residual " + num(worst_res));
  out.require(worst_gap <= 1e-6, "gap " + num(worst_gap));
  const auto report = optcon::run(cfg, optcon::Suite::kVerifyThm1);
  out.require(report.passed() && report.seeds.size() == 10, "verify-thm1 report failed");
  out.detail = "10 seeds: diameter " + num(worst_diam) + ", residual " + num(worst_res) +
               ", gap " + num(worst_gap) + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// 2. Empty intersection: equilibrium (1, 2) from (L + I) x = (0, 3).
Outcome criterion2() {
  Outcome out;
  const auto cfg = scenario("two_node_necessity");
  const auto traj = optcon::integrate(cfg.scenario(cfg.seed));
  const Vector& x = traj.terminal();
  const double err = std::hypot(x(0) - 1.0, x(1) - 2.0);
  const double diam = std::abs(x(1) - x(0));
  out.require(err <= 1e-6, "distance to (1,2) " + num(err));
  out.require(std::abs(diam - 1.0) <= 1e-4, "diameter " + num(diam));
  const auto report = optcon::run(cfg, optcon::Suite::kVerifyThm1);
  const auto* claim = report.find("exact-consensus-not-reached");
  out.require(report.passed() && claim != nullptr &&
                  claim->detail.find("consistent with necessity") != std::string::npos,
              "report does not state the necessity outcome");
  out.detail = "terminal (" + num(x(0)) + ", " + num(x(1)) + "), |x - (1,2)| " + num(err) +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// 3. JK gain sweep against x_K = (3K, 3K + 3) / (2K + 1).
Outcome criterion3() {
  Outcome out;
  auto cfg = scenario("two_node_gain_sweep");
  const double lambda2 = 2.0;
  const std::vector<double> grid = {1.0, 10.0, 100.0};
  // |grad F~(x_K)| = sqrt(2) 3K / (2K + 1), increasing in K.
  double l0 = 0.0;
  for (double k : grid) l0 = std::max(l0, std::sqrt(2.0) * 3.0 * k / (2.0 * k + 1.0));
  std::string per_k;
  for (double k : grid) {
    cfg.law = optcon::JK{k};
    const Vector x = optcon::integrate(cfg.scenario(cfg.seed)).terminal();
    const double x1 = 3.0 * k / (2.0 * k + 1.0), x2 = 3.0 * (k + 1.0) / (2.0 * k + 1.0);
    const double diam = std::abs(x(1) - x(0));
    const double match = std::hypot(x(0) - x1, x(1) - x2);
    const double disagreement = std::abs(x2 - x1) / std::sqrt(2.0);
    const double margin = l0 / (k * lambda2) + 1e-12 - disagreement;
    out.require(std::abs(diam - 3.0 / (2.0 * k + 1.0)) <= 1e-4, "K=" + num(k) + " diameter");
    out.require(match <= 1e-6, "K=" + num(k) + " stationary match " + num(match));
    out.require(margin >= 0.0, "K=" + num(k) + " bound margin " + num(margin));
    per_k += " K=" + num(k) + ":diam " + num(diam) + ",margin " + num(margin);
  }
  const auto report = optcon::run(scenario("two_node_gain_sweep"), optcon::Suite::kVerifyThm2);
  out.require(report.passed(), "verify-thm2 report failed");
  for (double k : grid) {
    const auto* c = report.find("disagreement-bound[K=" + optcon::format_double(k) + "]");
    out.require(c != nullptr && c->margin >= 0.0, "report bound claim missing at K=" + num(k));
  }
  out.detail = per_k.substr(1) + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// 4. Periodic switching, 3 balls, Lyapunov and reconstruction checks.
Outcome criterion4() {
  Outcome out;
  const auto cfg = scenario("switching_balls3");
  const auto balls = balls_of(cfg);
  const auto& sig = std::get<optcon::SwitchingSignal>(*cfg.topology);
  out.require(optcon::check_ujsc(sig, 1.0), "not UJSC for T=1");
  out.require(sig.dwell() == 0.5, "dwell");
  const Vector z = Vector::Zero(2);
  double worst_excess = -1.0, worst_spread = 0.0, worst_res = 0.0, worst_recon = 0.0;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto traj = optcon::integrate(cfg.scenario(cfg.seed + k));
    for (std::size_t s = 0; s + 1 < traj.size(); ++s) {
      double v0 = 0.0, v1 = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        v0 = std::max(v0, (node(traj.states[s], i, 2) - z).squaredNorm());
        v1 = std::max(v1, (node(traj.states[s + 1], i, 2) - z).squaredNorm());
      }
      const double dt = traj.times[s + 1] - traj.times[s];
      worst_excess = std::max(worst_excess, (v1 - v0) / dt - 1e-6 * std::max(1.0, v0));
    }
    const Vector& x = traj.terminal();
    double lo = 1e300, hi = -1e300;
    Vector mean = Vector::Zero(2);
    for (std::size_t i = 0; i < 3; ++i) {
      const double v = (node(x, i, 2) - z).squaredNorm();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      worst_res = std::max(worst_res, ball_distance(balls[i], node(x, i, 2)));
      mean += node(x, i, 2) / 3.0;
    }
    worst_spread = std::max(worst_spread, hi - lo);
    // All nodes near one point, which itself lies in every ball.
    for (std::size_t i = 0; i < 3; ++i)
      worst_recon = std::max(worst_recon, (node(x, i, 2) - mean).norm());
    for (const auto& b : balls) worst_recon = std::max(worst_recon, ball_distance(b, mean));
  }
  out.require(worst_excess <= 0.0, "V increased beyond slack " + num(worst_excess));
  out.require(worst_spread <= 1e-3, "V spread " + num(worst_spread));
  out.require(worst_res <= 1e-3, "residual " + num(worst_res));
  out.require(worst_recon <= 1e-3, "common point " + num(worst_recon));
  const auto report = optcon::run(cfg, optcon::Suite::kVerifyThm34);
  const auto* recon = report.find("state-reconstruction");
  out.require(report.passed() && recon != nullptr && recon->pass,
              "verify-thm34 report failed");
  out.detail = "10 seeds: V spread " + num(worst_spread) + ", residual " + num(worst_res) +
               ", distance to common point " + num(worst_recon) +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// 5. Projector and convexity inequalities on random samples.
Outcome criterion5() {
  Outcome out;
  const auto w = optcon::testing::check_convex_properties(1000, 20240601);
  out.require(w.samples >= 1000 && w.fd_samples >= 1000, "too few samples");
  out.require(w.variational <= 1e-12, "variational " + num(w.variational));
  out.require(w.nonexpansive <= 1e-12, "nonexpansive " + num(w.nonexpansive));
  out.require(w.fd_relative <= 1e-5, "finite differences " + num(w.fd_relative));
  out.require(w.convexity <= 1e-12, "convexity " + num(w.convexity));
  out.detail = std::to_string(w.samples) + " samples: variational " + num(w.variational) +
               ", nonexpansive " + num(w.nonexpansive) + ", fd rel " + num(w.fd_relative) +
               ", convexity " + num(w.convexity) + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// 6. Invariant cube [-0.5, 2.5]^3 for minima {0, 1, 2} on a path graph.
Outcome criterion6() {
  Outcome out;
  auto cfg = scenario("path3_cube");
  double worst = 0.0;
  std::size_t runs = 0;
  for (double k : {0.5, 1.0, 10.0}) {
    cfg.law = optcon::JK{k};
    for (std::size_t s = 0; s < 10; ++s) {
      const auto sc = cfg.scenario(cfg.seed + s);
      out.require(sc.x0.minCoeff() >= -0.5 && sc.x0.maxCoeff() <= 2.5, "x0 outside cube");
      for (const Vector& x : optcon::integrate(sc).states)
        worst = std::max({worst, -0.5 - x.minCoeff(), x.maxCoeff() - 2.5});
      ++runs;
    }
  }
  out.require(worst <= 1e-9, "excursion " + num(worst));
  const auto report = optcon::run(scenario("path3_cube"), optcon::Suite::kAudit);
  const auto* cube = report.find("invariant-cube");
  out.require(report.passed() && cube != nullptr, "audit report failed");
  out.detail = std::to_string(runs) + " runs over K {0.5,1,10}: max excursion " + num(worst) +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// 7. RK4 against the matrix exponential of x' = -(L + I) x + c.
Outcome criterion7() {
  Outcome out;
  const Vector x0 = (Vector(2) << 101.0, 102.0).finished();
  auto exact = [&](double t) {
    // Eigenpairs of L + I: 1 on (1,1), 3 on (1,-1); equilibrium (1, 2).
    const double a = 0.5 * (x0(0) + x0(1)) - 1.5, b = 0.5 * (x0(0) - x0(1)) + 0.5;
    const double mean = 1.5 + a * std::exp(-t), diff = -0.5 + b * std::exp(-3.0 * t);
    return (Vector(2) << mean + diff, mean - diff).finished();
  };
  auto error_at = [&](double h) {
    const optcon::Scenario s{
        optcon::ObjectiveSet(1, {optcon::ConvexComponent::isotropic(Vector::Constant(1, 0.0)),
                                 optcon::ConvexComponent::isotropic(Vector::Constant(1, 3.0))}),
        optcon::WeightedDigraph(2, {{0, 1, 1.0}, {1, 0, 1.0}}),
        optcon::JStar{}, x0, 0.0, 10.0, h, {}};
    return (optcon::integrate(s).terminal() - exact(10.0)).cwiseAbs().maxCoeff();
  };
  const double e1 = error_at(0.01), e2 = error_at(0.005);
  out.require(e1 <= 1e-8, "error " + num(e1));
  out.require(e1 / e2 >= 8.0, "order ratio " + num(e1 / e2));
  out.detail = "error(h=0.01) " + num(e1) + ", error(h=0.005) " + num(e2) + ", ratio " +
               num(e1 / e2) + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// 8. Robust consensus under a decaying disturbance on a quasi-strong signal.
Outcome criterion8() {
  Outcome out;
  const auto cfg = scenario("robust_switching3");
  out.require(cfg.tf == 50.0, "horizon");
  for (const auto& v : *cfg.disturbance) out.require(v.norm() <= 1.0, "|v_i| > 1");
  const auto& sig = std::get<optcon::SwitchingSignal>(*cfg.topology);
  out.require(optcon::check_ujqsc(sig, 1.0), "not quasi-strongly connected");
  out.require(!optcon::check_ujsc(sig, 1.0), "signal is unexpectedly strongly connected");
  double worst = 0.0;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto traj = optcon::integrate(cfg.scenario(cfg.seed + k));
    worst = std::max(worst, diameter(traj.terminal(), 3, cfg.m));
  }
  out.require(worst <= 1e-3, "diameter " + num(worst));
  out.require(optcon::run(cfg, optcon::Suite::kVerifyThm34).passed(), "report failed");
  out.detail = "10 seeds: terminal diameter " + num(worst) +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 exact optimal consensus, fixed digraph", criterion1},
      {"2 necessity on disjoint minimizers", criterion2},
      {"3 gain sweep and disagreement bound", criterion3},
      {"4 switching graphs, Lyapunov and reconstruction", criterion4},
      {"5 projector and convexity properties", criterion5},
      {"6 invariant cube", criterion6},
      {"7 integrator oracle", criterion7},
      {"8 robust consensus with disturbance", criterion8},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
