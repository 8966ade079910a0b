#include "optcon/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "optcon/analysis.hpp"
#include "optcon/errors.hpp"
#include "optcon/trace_io.hpp"

namespace optcon {
namespace {

using json = nlohmann::json;

json vec_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    out.push_back(v(k));
  }
  return out;
}

std::string fmt(double v) { return format_double(v); }

std::string gain_tag(double gain) { return "[K=" + fmt(gain) + "]"; }

ClaimResult at_most(std::string id, std::string ref, double value, double tol,
                    const std::string& what) {
  ClaimResult c;
  c.id = std::move(id);
  c.paper_ref = std::move(ref);
  c.value = value;
  c.margin = tol - value;
  c.pass = value <= tol;
  c.detail = what + " = " + fmt(value) + " (tolerance " + fmt(tol) + ")";
  return c;
}

ClaimResult boolean_claim(std::string id, std::string ref, bool pass,
                          std::string detail) {
  ClaimResult c;
  c.id = std::move(id);
  c.paper_ref = std::move(ref);
  c.pass = pass;
  c.value = pass ? 1.0 : 0.0;
  c.detail = std::move(detail);
  return c;
}

const WeightedDigraph* fixed_graph(const ScenarioConfig& cfg) {
  if (!cfg.topology) {
    throw ConfigError("topology", "missing");
  }
  return std::get_if<WeightedDigraph>(&*cfg.topology);
}

bool all_quadratic(const ScenarioConfig& cfg) {
  return std::all_of(cfg.objectives.begin(), cfg.objectives.end(), [](const auto& f) {
    return std::holds_alternative<Quadratic>(f.kind());
  });
}

std::optional<std::vector<ConvexSet>> argmin_sets(const ScenarioConfig& cfg) {
  std::vector<ConvexSet> sets;
  try {
    for (const auto& f : cfg.objectives) {
      sets.push_back(argmin_set(f));
    }
  } catch (const UnsupportedRepresentation&) {
    return std::nullopt;
  }
  return sets;
}

// Witness of the common minimizer set: the configured z_star when given
// (it must lie in every set), else the intersection test's witness.
IntersectionResult common_minimizers(const ScenarioConfig& cfg) {
  const auto sets = argmin_sets(cfg);
  if (!sets) {
    IntersectionResult r;
    r.detail = "some argmin set is not representable";
    return r;
  }
  if (cfg.analysis.z_star) {
    const Vector& z = *cfg.analysis.z_star;
    for (std::size_t i = 0; i < sets->size(); ++i) {
      if (!(*sets)[i].contains(z, 1e-9)) {
        throw ConfigError("analysis.z_star",
                          "not contained in argmin set of node " + std::to_string(i));
      }
    }
    IntersectionResult r;
    r.status = Intersection::kNonempty;
    r.witness = z;
    r.detail = "configured z_star";
    return r;
  }
  return intersection_nonempty(*sets);
}

struct TraceContext {
  std::optional<Vector> z_star;
  std::optional<double> f_star;
};

std::vector<TraceColumn> metric_columns(const ScenarioConfig& cfg, const Trajectory& traj,
                                        const TraceContext& ctx) {
  std::vector<TraceColumn> cols;
  const ObjectiveSet obj = cfg.objective_set();
  auto flatten = [&](const std::vector<MetricSeries>& series, const std::string& prefix) {
    TraceColumn col{prefix, std::vector<double>(traj.size() * traj.n_nodes)};
    for (std::size_t i = 0; i < traj.n_nodes; ++i) {
      for (std::size_t k = 0; k < traj.size(); ++k) {
        col.values[k * traj.n_nodes + i] = series[i].values[k];
      }
    }
    cols.push_back(std::move(col));
  };
  for (const auto& name : cfg.analysis.trace_metrics) {
    if (name == "lyapunov") {
      if (!ctx.z_star) {
        throw ConfigError("analysis.trace_metrics", "lyapunov column needs a z_star witness");
      }
      flatten(lyapunov_trace(traj, *ctx.z_star).per_node, "V");
    } else if (name == "gap") {
      flatten(optimality_gap(traj, obj, ctx.f_star.value_or(global_min_F(obj).value)), "gap");
    } else if (name == "residual") {
      try {
        flatten(node_optimum_residuals(traj, obj), "residual");
      } catch (const UnsupportedRepresentation& e) {
        throw ConfigError("analysis.trace_metrics", e.what());
      }
    }
  }
  return cols;
}

std::string sidecar_json(const ScenarioConfig& cfg, const Scenario& s, const Trajectory& traj,
                         std::uint64_t seed) {
  json j;
  j["scenario"] = cfg.name;
  j["fingerprint"] = traj.fingerprint;
  j["seed"] = seed;
  j["law"] = law_name(s.law);
  j["m"] = traj.m;
  j["nodes"] = traj.n_nodes;
  j["t0"] = s.t0;
  j["tf"] = s.tf;
  j["h"] = s.h;
  j["samples"] = traj.size();
  j["integrator"] = {{"method", "rk4"},
                     {"steps", traj.stats.steps},
                     {"truncated_steps", traj.stats.truncated_steps},
                     {"rhs_evaluations", traj.stats.rhs_evaluations},
                     {"segments", traj.stats.segments}};
  return j.dump(2);
}

struct SeedRun {
  std::vector<ClaimResult> claims;
  std::vector<std::string> artifacts;
  bool numerical_failure = false;
};

class TraceWriter {
 public:
  TraceWriter(const ScenarioConfig& cfg, const RunOptions& opts, Suite suite,
              std::uint64_t seed)
      : cfg_(cfg), opts_(opts), suite_(suite), seed_(seed) {}

  void write(const Scenario& s, const Trajectory& traj, const TraceContext& ctx,
             const std::string& tag, SeedRun& out) const {
    if (!opts_.out_dir) {
      return;
    }
    std::filesystem::create_directories(*opts_.out_dir);
    const std::string stem = cfg_.name + "_" + suite_name(suite_) + tag + "_seed" +
                             std::to_string(seed_);
    const auto csv = *opts_.out_dir / (stem + ".csv");
    const auto side = *opts_.out_dir / (stem + ".json");
    write_trace_csv(csv, traj, metric_columns(cfg_, traj, ctx));
    std::ofstream(side) << sidecar_json(cfg_, s, traj, seed_) << '\n';
    out.artifacts.push_back(csv.string());
    out.artifacts.push_back(side.string());
  }

 private:
  const ScenarioConfig& cfg_;
  const RunOptions& opts_;
  Suite suite_;
  std::uint64_t seed_;
};

// Integrates and records a failing "integration" claim on divergence.
std::optional<Trajectory> integrate_or_fail(const Scenario& s, const ScenarioConfig& cfg,
                                            const std::string& tag, SeedRun& out) {
  try {
    Trajectory traj = integrate(s);
    traj.fingerprint = cfg.fingerprint();
    return traj;
  } catch (const NumericalDivergence& e) {
    ClaimResult c = boolean_claim("integration" + tag, "Dynamics", false, e.what());
    c.value = e.time();
    out.claims.push_back(std::move(c));
    out.numerical_failure = true;
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// simulate

SeedRun simulate_seed(const ScenarioConfig& cfg, const RunOptions& opts, std::uint64_t seed) {
  SeedRun out;
  const Scenario s = cfg.scenario(seed);
  const auto traj = integrate_or_fail(s, cfg, "", out);
  if (!traj) {
    return out;
  }
  const ObjectiveSet obj = cfg.objective_set();
  const double diam = consensus_diameter(traj->terminal(), traj->m);
  const Convergence conv = detect_convergence(*traj, obj);
  ClaimResult c = boolean_claim(
      "integration", "Dynamics", true,
      "integrated to tf=" + fmt(s.tf) + "; terminal diameter " + fmt(diam) +
          (conv.converged ? "; converged at t=" + fmt(conv.time)
                          : "; tf reached without sustained convergence"));
  c.value = diam;
  out.claims.push_back(std::move(c));

  TraceContext ctx;
  if (!cfg.analysis.trace_metrics.empty()) {
    const auto inter = common_minimizers(cfg);
    if (inter.witness) {
      ctx.z_star = inter.witness;
    }
  }
  TraceWriter(cfg, opts, Suite::kSimulate, seed).write(s, *traj, ctx, "", out);
  return out;
}

// ---------------------------------------------------------------------------
// verify-thm1

struct Thm1Context {
  IntersectionResult inter;
  GlobalMinimum minimum;
  bool strongly_connected = false;
  std::optional<StationaryPoint> oracle;
};

Thm1Context thm1_context(const ScenarioConfig& cfg) {
  const WeightedDigraph* g = fixed_graph(cfg);
  if (g == nullptr) {
    throw ConfigError("topology", "verify-thm1 requires a fixed graph");
  }
  Thm1Context ctx;
  ctx.strongly_connected = is_strongly_connected(*g);
  ctx.inter = common_minimizers(cfg);
  ctx.minimum = global_min_F(cfg.objective_set());
  if (ctx.inter.status == Intersection::kEmpty && all_quadratic(cfg) &&
      has_symmetric_weights(*g)) {
    double gain = 1.0;
    if (const auto* k = std::get_if<JK>(&cfg.law)) {
      gain = k->gain;
    }
    if (!std::holds_alternative<CustomLaw>(cfg.law)) {
      try {
        ctx.oracle = stationary_quadratic(cfg.objective_set(), *g, gain);
      } catch (const PreconditionError&) {
        ctx.oracle.reset();
      }
    }
  }
  return ctx;
}

SeedRun thm1_seed(const ScenarioConfig& cfg, const RunOptions& opts, const Thm1Context& ctx,
                  std::uint64_t seed) {
  SeedRun out;
  const Tolerances& tol = cfg.analysis.tol;
  out.claims.push_back(boolean_claim(
      "strong-connectivity", "Theorem 1", ctx.strongly_connected,
      ctx.strongly_connected ? "graph is strongly connected" : "graph is not strongly connected"));

  const Scenario s = cfg.scenario(seed);
  const auto traj = integrate_or_fail(s, cfg, "", out);
  if (!traj) {
    return out;
  }
  const ObjectiveSet obj = cfg.objective_set();
  const double diam = consensus_diameter(traj->terminal(), traj->m);
  TraceContext tctx;
  tctx.f_star = ctx.minimum.value;

  switch (ctx.inter.status) {
    case Intersection::kNonempty: {
      tctx.z_star = ctx.inter.witness;
      out.claims.push_back(at_most("consensus-diameter", "Definition 1", diam,
                                   tol.diameter, "terminal diameter"));
      double worst_residual = 0.0;
      for (const auto& series : node_optimum_residuals(*traj, obj)) {
        worst_residual = std::max(worst_residual, series.back());
      }
      out.claims.push_back(at_most("node-optimum-residual", "Lemma 7", worst_residual,
                                   tol.residual, "max terminal dist(x_i, argmin f_i)"));
      double worst_gap = 0.0;
      double most_negative = 0.0;
      for (const auto& series : optimality_gap(*traj, obj, ctx.minimum.value)) {
        worst_gap = std::max(worst_gap, series.back());
        for (double v : series.values) {
          most_negative = std::min(most_negative, v);
        }
      }
      ClaimResult gap = at_most("optimality-gap", "Definition 1", worst_gap, tol.gap,
                                "max terminal F(x_i) - F*");
      if (most_negative < -1e-12) {
        gap.pass = false;
        gap.detail += "; gap dipped to " + fmt(most_negative) + " below F*";
      }
      out.claims.push_back(std::move(gap));
      const auto lyap = lyapunov_trace(*traj, *ctx.inter.witness);
      const DiniCheck dini = dini_nonincreasing(lyap.max, cfg.analysis.slack);
      ClaimResult mono = boolean_claim(
          "lyapunov-nonincreasing", "Lemma 5", dini.nonincreasing,
          dini.nonincreasing ? "V(t) forward differences within slack"
                             : "V(t) increased at t=" + fmt(*dini.first_violation));
      mono.value = dini.worst_excess;
      mono.margin = -dini.worst_excess;
      out.claims.push_back(std::move(mono));
      break;
    }
    case Intersection::kEmpty: {
      ClaimResult c;
      c.id = "exact-consensus-not-reached";
      c.paper_ref = "Theorem 1 (necessity)";
      c.value = diam;
      c.margin = diam - tol.diameter;
      c.pass = diam > tol.diameter;
      c.detail = c.pass ? "exact optimal consensus NOT reached; terminal diameter " + fmt(diam) +
                              "; consistent with necessity (" + ctx.inter.detail + ")"
                        : "terminal diameter " + fmt(diam) +
                              " is within tolerance although the argmin sets do not intersect";
      out.claims.push_back(std::move(c));
      if (ctx.oracle) {
        const double err = (traj->terminal() - ctx.oracle->x).norm();
        out.claims.push_back(at_most("stationary-match", "Stationary set", err, tol.stationary_match,
                                     "|x(tf) - x_K|"));
      }
      break;
    }
    case Intersection::kUndecided:
      out.claims.push_back(boolean_claim("intersection-decided", "Theorem 1", false,
                                         "intersection of argmin sets undecided: " +
                                             ctx.inter.detail));
      break;
  }
  TraceWriter(cfg, opts, Suite::kVerifyThm1, seed).write(s, *traj, tctx, "", out);
  return out;
}

// ---------------------------------------------------------------------------
// verify-thm2 / sweep

struct SweepContext {
  const WeightedDigraph* graph = nullptr;
  double lambda2 = 0.0;
  std::vector<double> gains;
  std::vector<std::optional<StationaryPoint>> oracle;
  double l0_oracle = 0.0;
};

SweepContext sweep_context(const ScenarioConfig& cfg, const std::vector<double>& k_grid) {
  SweepContext ctx;
  ctx.graph = fixed_graph(cfg);
  if (ctx.graph == nullptr || !has_symmetric_weights(*ctx.graph) || !is_connected(*ctx.graph)) {
    throw ConfigError("topology",
                      "gain sweeps need a fixed, connected graph with a_ij == a_ji");
  }
  if (k_grid.empty()) {
    throw ConfigError("analysis.k_grid", "gain sweeps need a nonempty k_grid");
  }
  ctx.lambda2 = lambda2(*ctx.graph);
  ctx.gains = k_grid;
  const bool quad = all_quadratic(cfg);
  const ObjectiveSet obj = cfg.objective_set();
  for (double gain : ctx.gains) {
    if (quad) {
      try {
        ctx.oracle.push_back(stationary_quadratic(obj, *ctx.graph, gain));
        ctx.l0_oracle = std::max(ctx.l0_oracle, separable_grad_norm(obj, ctx.oracle.back()->x));
        continue;
      } catch (const PreconditionError&) {
      }
    }
    ctx.oracle.emplace_back();
  }
  return ctx;
}

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::optional<Trajectory>> trajectories;
  std::vector<std::string> divergence;
};

SweepResult sweep_rows(const ScenarioConfig& cfg, const SweepContext& ctx, std::uint64_t seed) {
  SweepResult res;
  const ObjectiveSet obj = cfg.objective_set();
  const double f_star = global_min_F(obj).value;
  double l0_sim = 0.0;
  for (std::size_t k = 0; k < ctx.gains.size(); ++k) {
    SweepRow row;
    row.gain = ctx.gains[k];
    std::optional<Trajectory> traj;
    if (row.gain > 0.0) {
      ScenarioConfig run_cfg = cfg;
      run_cfg.law = JK{row.gain};
      try {
        traj = integrate(run_cfg.scenario(seed));
        traj->fingerprint = cfg.fingerprint();
      } catch (const NumericalDivergence& e) {
        res.divergence.push_back(gain_tag(row.gain) + " " + e.what());
      }
    }
    if (traj) {
      row.simulated = true;
      row.terminal_diameter = consensus_diameter(traj->terminal(), traj->m);
      double gap = -std::numeric_limits<double>::infinity();
      for (const auto& series : optimality_gap(*traj, obj, f_star)) {
        gap = std::max(gap, series.back());
      }
      row.optimality_gap = gap;
      l0_sim = std::max(l0_sim, separable_grad_norm(obj, traj->terminal()));
    }
    if (const auto& sp = ctx.oracle[k]) {
      row.oracle = true;
      row.oracle_diameter = consensus_diameter(sp->x, obj.dim());
      row.oracle_disagreement = sp->disagreement;
      if (traj) {
        row.stationary_error = (traj->terminal() - sp->x).norm();
      }
    }
    res.rows.push_back(row);
    res.trajectories.push_back(std::move(traj));
  }
  // The disagreement bound uses the grid supremum of |grad F~| over the
  // stationary points: exact ones when available, simulated otherwise.
  for (std::size_t k = 0; k < res.rows.size(); ++k) {
    SweepRow& row = res.rows[k];
    if (!(row.gain > 0.0)) {
      continue;
    }
    StationaryPoint sp;
    double l0 = ctx.l0_oracle;
    if (ctx.oracle[k]) {
      sp = *ctx.oracle[k];
    } else if (res.trajectories[k]) {
      sp.gain = row.gain;
      sp.x = res.trajectories[k]->terminal();
      sp.disagreement = disagreement(sp.x, obj.dim());
      l0 = l0_sim;
    } else {
      continue;
    }
    const BoundCheck b = check_disagreement_bound(sp, l0, ctx.lambda2);
    row.bound = b.bound;
    row.bound_margin = b.margin;
  }
  return res;
}

SeedRun thm2_seed(const ScenarioConfig& cfg, const RunOptions& opts, const SweepContext& ctx,
                  std::uint64_t seed) {
  SeedRun out;
  const Tolerances& tol = cfg.analysis.tol;
  SweepResult res = sweep_rows(cfg, ctx, seed);
  for (const auto& msg : res.divergence) {
    out.claims.push_back(boolean_claim("integration", "Dynamics", false, msg));
    out.numerical_failure = true;
  }
  for (std::size_t k = 0; k < res.rows.size(); ++k) {
    const SweepRow& row = res.rows[k];
    const std::string tag = gain_tag(row.gain);
    if (row.gain > 0.0 && (row.oracle || row.simulated)) {
      ClaimResult c;
      c.id = "disagreement-bound" + tag;
      c.paper_ref = "Theorem 2";
      c.value = row.oracle ? row.oracle_disagreement : 0.0;
      if (!row.oracle) {
        c.value = disagreement(res.trajectories[k]->terminal(), cfg.m);
      }
      c.margin = row.bound_margin;
      c.pass = row.bound_margin >= 0.0;
      c.detail = "|p|_M = " + fmt(c.value) + " vs L0/(K lambda2) = " + fmt(row.bound) +
                 (row.oracle ? " (stationary oracle)" : " (simulated terminal state)");
      out.claims.push_back(std::move(c));
    }
    if (!row.simulated) {
      continue;
    }
    if (row.oracle) {
      out.claims.push_back(at_most("terminal-diameter" + tag, "Theorem 2",
                                   std::abs(row.terminal_diameter - row.oracle_diameter),
                                   tol.diameter,
                                   "|terminal diameter - stationary diameter| (terminal " +
                                       fmt(row.terminal_diameter) + ")"));
      out.claims.push_back(at_most("stationary-match" + tag, "Stationary set", row.stationary_error,
                                   tol.stationary_match, "|x(tf) - x_K|"));
    }
    TraceContext tctx;
    tctx.f_star = global_min_F(cfg.objective_set()).value;
    ScenarioConfig run_cfg = cfg;
    run_cfg.law = JK{row.gain};
    TraceWriter(cfg, opts, Suite::kVerifyThm2, seed)
        .write(run_cfg.scenario(seed), *res.trajectories[k], tctx, "_K" + fmt(row.gain), out);
  }
  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    const auto path = *opts.out_dir / (cfg.name + "_sweep_seed" + std::to_string(seed) + ".csv");
    write_sweep_csv(path, res.rows);
    out.artifacts.push_back(path.string());
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify-thm34

struct Thm34Context {
  bool robust = false;
  bool connectivity = false;
  std::string connectivity_detail;
  IntersectionResult inter;
  std::vector<ConvexSet> sets;
};

Thm34Context thm34_context(const ScenarioConfig& cfg) {
  Thm34Context ctx;
  ctx.robust = cfg.disturbance.has_value();
  if (const auto* g = fixed_graph(cfg)) {
    ctx.connectivity = ctx.robust ? has_spanning_tree(*g) : is_strongly_connected(*g);
    ctx.connectivity_detail = ctx.robust ? "fixed graph; spanning tree" : "fixed graph; strongly connected";
  } else {
    const auto& sig = std::get<SwitchingSignal>(*cfg.topology);
    if (!cfg.analysis.ujsc_window) {
      throw ConfigError("analysis.ujsc_window",
                        "verify-thm34 on a switching graph needs a joint-connectivity window");
    }
    const double window = *cfg.analysis.ujsc_window;
    ctx.connectivity = ctx.robust ? check_ujqsc(sig, window) : check_ujsc(sig, window);
    ctx.connectivity_detail = std::string(ctx.robust ? "quasi-strongly" : "strongly") +
                              " connected union over every window of length " + fmt(window);
  }
  if (!ctx.connectivity) {
    ctx.connectivity_detail = "NOT " + ctx.connectivity_detail;
  }
  if (!ctx.robust) {
    ctx.inter = common_minimizers(cfg);
    if (auto sets = argmin_sets(cfg)) {
      ctx.sets = std::move(*sets);
    }
  }
  return ctx;
}

SeedRun thm34_seed(const ScenarioConfig& cfg, const RunOptions& opts, const Thm34Context& ctx,
                   std::uint64_t seed) {
  SeedRun out;
  const Tolerances& tol = cfg.analysis.tol;
  out.claims.push_back(boolean_claim(ctx.robust ? "joint-quasi-strong-connectivity"
                                                : "joint-strong-connectivity",
                                     ctx.robust ? "Lemma 9" : "Definition 3", ctx.connectivity,
                                     ctx.connectivity_detail));
  const Scenario s = cfg.scenario(seed);
  const auto traj = integrate_or_fail(s, cfg, "", out);
  if (!traj) {
    return out;
  }
  TraceContext tctx;
  const double diam = consensus_diameter(traj->terminal(), traj->m);
  if (ctx.robust) {
    out.claims.push_back(at_most("robust-consensus-diameter", "Lemma 9", diam,
                                 tol.robust_diameter, "terminal diameter under disturbance"));
    TraceWriter(cfg, opts, Suite::kVerifyThm34, seed).write(s, *traj, tctx, "", out);
    return out;
  }
  if (ctx.inter.status != Intersection::kNonempty) {
    out.claims.push_back(boolean_claim("intersection-nonempty", "Theorem 3", false,
                                       ctx.inter.detail));
    return out;
  }
  const Vector& z = *ctx.inter.witness;
  tctx.z_star = z;
  const auto lyap = lyapunov_trace(*traj, z);
  const DiniCheck dini = dini_nonincreasing(lyap.max, cfg.analysis.slack);
  ClaimResult mono = boolean_claim(
      "lyapunov-nonincreasing", "Lemma 5", dini.nonincreasing,
      dini.nonincreasing ? "V(t) forward differences within slack"
                         : "V(t) increased at t=" + fmt(*dini.first_violation));
  mono.value = dini.worst_excess;
  mono.margin = -dini.worst_excess;
  out.claims.push_back(std::move(mono));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : lyap.per_node) {
    lo = std::min(lo, v.back());
    hi = std::max(hi, v.back());
  }
  out.claims.push_back(at_most("lyapunov-common-limit", "Lemma 6", hi - lo,
                               tol.lyapunov_spread, "max |V_i(tf) - V_j(tf)|"));

  double worst_residual = 0.0;
  for (const auto& series : node_optimum_residuals(*traj, cfg.objective_set())) {
    worst_residual = std::max(worst_residual, series.back());
  }
  out.claims.push_back(at_most("node-optimum-residual", "Lemma 7", worst_residual,
                               tol.residual, "max terminal dist(x_i, argmin f_i)"));

  const auto anchors = interior_witnesses(ctx.sets, z);
  if (!anchors) {
    out.claims.push_back(boolean_claim("state-reconstruction", "Lemma 8", false,
                                       "witness is not an interior point; undecided"));
  } else {
    std::vector<double> d;
    for (const Vector& w : *anchors) {
      double acc = 0.0;
      for (std::size_t i = 0; i < traj->n_nodes; ++i) {
        acc += (traj->node_state(traj->size() - 1, i) - w).squaredNorm();
      }
      d.push_back(acc / static_cast<double>(traj->n_nodes));
    }
    try {
      const Vector y = sphere_intersection(*anchors, d, tol.reconstruction);
      double err = 0.0;
      for (std::size_t i = 0; i < traj->n_nodes; ++i) {
        err = std::max(err, (traj->node_state(traj->size() - 1, i) - y).norm());
      }
      for (const auto& set : ctx.sets) {
        err = std::max(err, distance(set, y));
      }
      out.claims.push_back(at_most("state-reconstruction", "Lemma 8, Theorem 3", err,
                                   tol.reconstruction,
                                   "max distance of terminal states (and argmin sets) to the "
                                   "reconstructed point"));
    } catch (const std::exception& e) {
      out.claims.push_back(boolean_claim("state-reconstruction", "Lemma 8", false, e.what()));
    }
  }
  TraceWriter(cfg, opts, Suite::kVerifyThm34, seed).write(s, *traj, tctx, "", out);
  return out;
}

// ---------------------------------------------------------------------------
// audit

SeedRun audit_seed(const ScenarioConfig& cfg, const RunOptions& opts, std::uint64_t seed) {
  SeedRun out;
  const Scenario s = cfg.scenario(seed);
  const AuditReport rep = audit_assumptions(s, cfg.analysis.k_grid);
  out.claims.push_back(boolean_claim("coercivity", "Proposition 1", rep.coercive,
                                     rep.coercive ? "F~ is coercive"
                                                  : "F~ is not coercive"));
  out.claims.push_back(boolean_claim("argmin-nonempty", "A5(i)", rep.argmin_nonempty,
                                     rep.minimum.method + "; F* = " + fmt(rep.minimum.value)));
  out.claims.push_back(boolean_claim("argmin-bounded", "A4", rep.a4, rep.a4_detail));
  if (rep.grid_evaluated) {
    out.claims.push_back(boolean_claim("stationary-set-bounded", "A5(ii)-(iii)",
                                       rep.grid_bounded, rep.grid_detail));
  }

  // Invariant cube for scalar objectives with bounded argmin sets.
  const WeightedDigraph* g = fixed_graph(cfg);
  if (!rep.scalar_bounded_argmins || g == nullptr || !has_symmetric_weights(*g) ||
      std::holds_alternative<CustomLaw>(cfg.law)) {
    return out;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& f : cfg.objectives) {
    const ConvexSet set = argmin_set(f);
    const Vector p_lo = project(set, Vector::Constant(1, -1e300));
    const Vector p_hi = project(set, Vector::Constant(1, 1e300));
    lo = std::min(lo, p_lo(0));
    hi = std::max(hi, p_hi(0));
  }
  const double eta = cfg.analysis.eta;
  const double cube_lo = lo - eta;
  const double cube_hi = hi + eta;

  std::vector<double> gains = cfg.analysis.k_grid;
  if (gains.empty()) {
    gains.push_back(std::holds_alternative<JK>(cfg.law) ? std::get<JK>(cfg.law).gain : 1.0);
  }
  Vector x0 = s.x0;
  if (std::holds_alternative<RandomBox>(cfg.x0)) {
    ScenarioConfig inside = cfg;
    inside.x0 = RandomBox{cube_lo, cube_hi};
    x0 = inside.initial_state(seed);
  }
  if (x0.minCoeff() < cube_lo || x0.maxCoeff() > cube_hi) {
    out.claims.push_back(boolean_claim("invariant-cube", "Proposition 2", false,
                                       "x0 lies outside the cube [" + fmt(cube_lo) + ", " +
                                           fmt(cube_hi) + "]"));
    return out;
  }
  double worst = 0.0;
  for (double gain : gains) {
    ScenarioConfig run_cfg = cfg;
    run_cfg.law = JK{gain};
    run_cfg.x0 = x0;
    const Scenario rs = run_cfg.scenario(seed);
    const auto traj = integrate_or_fail(rs, cfg, gain_tag(gain), out);
    if (!traj) {
      return out;
    }
    for (const Vector& x : traj->states) {
      worst = std::max({worst, cube_lo - x.minCoeff(), x.maxCoeff() - cube_hi});
    }
    TraceWriter(cfg, opts, Suite::kAudit, seed).write(rs, *traj, {}, "_K" + fmt(gain), out);
  }
  out.claims.push_back(at_most("invariant-cube", "Proposition 2", worst, cfg.analysis.tol.cube,
                               "max excursion outside [" + fmt(cube_lo) + ", " + fmt(cube_hi) +
                                   "] over K grid"));
  return out;
}

std::vector<ClaimResult> merge_claims(const std::vector<SeedRun>& runs,
                                      const std::vector<std::uint64_t>& seeds) {
  std::vector<ClaimResult> merged;
  std::map<std::string, std::size_t> slot;
  std::map<std::string, std::size_t> count;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const ClaimResult& c : runs[r].claims) {
      ++count[c.id];
      auto it = slot.find(c.id);
      if (it == slot.end()) {
        slot[c.id] = merged.size();
        merged.push_back(c);
        if (runs.size() > 1) {
          merged.back().detail += " [seed " + std::to_string(seeds[r]) + "]";
        }
        continue;
      }
      ClaimResult& m = merged[it->second];
      const bool worse = (!c.pass && m.pass) || (c.pass == m.pass && c.margin < m.margin);
      if (worse) {
        m = c;
        m.detail += " [seed " + std::to_string(seeds[r]) + "]";
      }
    }
  }
  for (ClaimResult& m : merged) {
    if (runs.size() > 1) {
      m.detail += "; worst of " + std::to_string(count[m.id]) + " seeds";
    }
    if (count[m.id] != runs.size()) {
      m.pass = false;
      m.detail += "; missing in some seeds";
    }
  }
  return merged;
}

}  // namespace

Suite parse_suite(const std::string& name) {
  if (name == "simulate") return Suite::kSimulate;
  if (name == "verify-thm1") return Suite::kVerifyThm1;
  if (name == "verify-thm2") return Suite::kVerifyThm2;
  if (name == "verify-thm34") return Suite::kVerifyThm34;
  if (name == "audit") return Suite::kAudit;
  throw ConfigError("suite", "unknown suite '" + name + "'");
}

std::string suite_name(Suite s) {
  switch (s) {
    case Suite::kSimulate:
      return "simulate";
    case Suite::kVerifyThm1:
      return "verify-thm1";
    case Suite::kVerifyThm2:
      return "verify-thm2";
    case Suite::kVerifyThm34:
      return "verify-thm34";
    case Suite::kAudit:
      return "audit";
  }
  return "unknown";
}

bool RunReport::passed() const {
  return !numerical_failure &&
         std::all_of(claims.begin(), claims.end(), [](const ClaimResult& c) { return c.pass; });
}

ExitCode RunReport::exit_code() const {
  if (numerical_failure) {
    return ExitCode::kNumericalFailure;
  }
  return passed() ? ExitCode::kPass : ExitCode::kClaimFailure;
}

const ClaimResult* RunReport::find(const std::string& id) const {
  for (const auto& c : claims) {
    if (c.id == id) {
      return &c;
    }
  }
  return nullptr;
}

namespace {

json claims_json(const std::vector<ClaimResult>& claims) {
  json out = json::array();
  for (const auto& c : claims) {
    out.push_back({{"id", c.id},
                   {"paper_ref", c.paper_ref},
                   {"pass", c.pass},
                   {"margin", c.margin},
                   {"value", c.value},
                   {"detail", c.detail}});
  }
  return out;
}

}  // namespace

std::string RunReport::content_hash() const {
  json j = {{"scenario", scenario},
            {"fingerprint", fingerprint},
            {"suite", suite},
            {"seeds", seeds},
            {"claims", claims_json(claims)},
            {"numerical_failure", numerical_failure}};
  return fnv1a_hex(j.dump());
}

std::string RunReport::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["fingerprint"] = fingerprint;
  j["suite"] = suite;
  j["seeds"] = seeds;
  j["pass"] = passed();
  j["exit_code"] = static_cast<int>(exit_code());
  j["claims"] = claims_json(claims);
  j["artifacts"] = artifacts;
  j["report_hash"] = content_hash();
  j["stats"] = {{"wall_seconds", wall_seconds}};
  return j.dump(2);
}

ScenarioConfig with_overrides(ScenarioConfig cfg, const RunOptions& opts) {
  if (opts.seed) {
    cfg.seed = *opts.seed;
  }
  if (opts.h) {
    if (!(*opts.h > 0.0)) {
      throw ConfigError("h", "step must be positive");
    }
    cfg.h = *opts.h;
  }
  return cfg;
}

RunReport run(const ScenarioConfig& base, Suite suite, const RunOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = with_overrides(base, opts);

  RunReport report;
  report.scenario = cfg.name;
  report.fingerprint = cfg.fingerprint();
  report.suite = suite_name(suite);
  for (std::size_t k = 0; k < cfg.analysis.seed_count; ++k) {
    report.seeds.push_back(cfg.seed + k);
  }

  std::function<SeedRun(std::uint64_t)> per_seed;
  std::optional<Thm1Context> thm1;
  std::optional<SweepContext> sweep;
  std::optional<Thm34Context> thm34;
  switch (suite) {
    case Suite::kSimulate:
      per_seed = [&](std::uint64_t seed) { return simulate_seed(cfg, opts, seed); };
      break;
    case Suite::kVerifyThm1:
      thm1 = thm1_context(cfg);
      per_seed = [&](std::uint64_t seed) { return thm1_seed(cfg, opts, *thm1, seed); };
      break;
    case Suite::kVerifyThm2:
      sweep = sweep_context(cfg, cfg.analysis.k_grid);
      per_seed = [&](std::uint64_t seed) { return thm2_seed(cfg, opts, *sweep, seed); };
      break;
    case Suite::kVerifyThm34:
      thm34 = thm34_context(cfg);
      per_seed = [&](std::uint64_t seed) { return thm34_seed(cfg, opts, *thm34, seed); };
      break;
    case Suite::kAudit:
      per_seed = [&](std::uint64_t seed) { return audit_seed(cfg, opts, seed); };
      break;
  }

  std::vector<std::future<SeedRun>> pending;
  for (std::uint64_t seed : report.seeds) {
    pending.push_back(std::async(std::launch::async, per_seed, seed));
  }
  std::vector<SeedRun> runs;
  for (auto& f : pending) {
    runs.push_back(f.get());
  }
  for (const SeedRun& r : runs) {
    report.numerical_failure = report.numerical_failure || r.numerical_failure;
    report.artifacts.insert(report.artifacts.end(), r.artifacts.begin(), r.artifacts.end());
  }
  report.claims = merge_claims(runs, report.seeds);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    const auto path = *opts.out_dir / (cfg.name + "_" + report.suite + "_report.json");
    report.artifacts.push_back(path.string());
    std::ofstream(path) << report.to_json() << '\n';
  }
  return report;
}

std::vector<SweepRow> sweep_k(const ScenarioConfig& base, const std::vector<double>& k_grid,
                              const RunOptions& opts) {
  const ScenarioConfig cfg = with_overrides(base, opts);
  const SweepContext ctx = sweep_context(cfg, k_grid);
  SweepResult res = sweep_rows(cfg, ctx, cfg.seed);
  if (!res.divergence.empty()) {
    throw NumericalDivergence(std::numeric_limits<double>::quiet_NaN(), res.divergence.front());
  }
  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    write_sweep_csv(*opts.out_dir / (cfg.name + "_sweep.csv"), res.rows);
  }
  return res.rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "K,simulated,terminal_diameter,optimality_gap,oracle,oracle_diameter,"
         "oracle_disagreement,stationary_error,bound,bound_margin\n";
  auto cell = [](bool present, double v) { return present ? fmt(v) : std::string(); };
  for (const auto& r : rows) {
    out << fmt(r.gain) << ',' << (r.simulated ? 1 : 0) << ','
        << cell(r.simulated, r.terminal_diameter) << ',' << cell(r.simulated, r.optimality_gap)
        << ',' << (r.oracle ? 1 : 0) << ',' << cell(r.oracle, r.oracle_diameter) << ','
        << cell(r.oracle, r.oracle_disagreement) << ','
        << cell(r.oracle && r.simulated, r.stationary_error) << ','
        << cell(r.gain > 0.0 && (r.oracle || r.simulated), r.bound) << ','
        << cell(r.gain > 0.0 && (r.oracle || r.simulated), r.bound_margin) << '\n';
  }
}

namespace {

json graph_json(const WeightedDigraph& g) {
  json j;
  j["nodes"] = g.size();
  j["arcs"] = g.arcs().size();
  j["strongly_connected"] = is_strongly_connected(g);
  j["bidirectional"] = is_bidirectional(g);
  j["symmetric_weights"] = has_symmetric_weights(g);
  j["spanning_tree"] = has_spanning_tree(g);
  if (g.size() > 1 && has_symmetric_weights(g) && is_connected(g)) {
    j["lambda2"] = lambda2(g);
  } else {
    j["lambda2"] = nullptr;
  }
  return j;
}

}  // namespace

std::string check_graph_json(const ScenarioConfig& cfg, std::optional<double> window) {
  json j;
  j["scenario"] = cfg.name;
  if (const auto* g = fixed_graph(cfg)) {
    j["type"] = "fixed";
    j["graph"] = graph_json(*g);
    return j.dump(2);
  }
  fixed_graph(cfg);
  const auto& sig = std::get<SwitchingSignal>(*cfg.topology);
  j["type"] = "switching";
  j["dwell"] = sig.dwell();
  if (sig.is_periodic()) {
    j["period"] = sig.period();
  } else {
    j["end"] = sig.horizon_end();
  }
  json ivs = json::array();
  for (const auto& iv : sig.intervals()) {
    json e = graph_json(iv.graph);
    e["start"] = iv.start;
    ivs.push_back(e);
  }
  j["intervals"] = ivs;
  const std::optional<double> w = window ? window : cfg.analysis.ujsc_window;
  if (w) {
    j["window"] = *w;
    j["ujsc"] = check_ujsc(sig, *w);
    j["ujqsc"] = check_ujqsc(sig, *w);
  }
  return j.dump(2);
}

std::string oracle_json(const ScenarioConfig& cfg, const std::vector<double>& k_grid) {
  const ObjectiveSet obj = cfg.objective_set();
  json j;
  j["scenario"] = cfg.name;
  const GlobalMinimum gm = global_min_F(obj);
  j["global_min"] = {{"value", gm.value},
                     {"minimizer", vec_json(gm.minimizer)},
                     {"exact", gm.exact},
                     {"tolerance", gm.tolerance},
                     {"method", gm.method}};
  if (const auto sets = argmin_sets(cfg)) {
    const IntersectionResult r = intersection_nonempty(*sets);
    j["intersection"] = {{"status", r.status == Intersection::kNonempty ? "nonempty"
                                    : r.status == Intersection::kEmpty  ? "empty"
                                                                        : "undecided"},
                         {"detail", r.detail}};
    if (r.witness) {
      j["intersection"]["witness"] = vec_json(*r.witness);
    }
  }
  if (!k_grid.empty()) {
    const SweepContext ctx = sweep_context(cfg, k_grid);
    j["lambda2"] = ctx.lambda2;
    j["L0"] = ctx.l0_oracle;
    json points = json::array();
    for (std::size_t k = 0; k < ctx.gains.size(); ++k) {
      json p;
      p["K"] = ctx.gains[k];
      if (const auto& sp = ctx.oracle[k]) {
        p["x"] = vec_json(sp->x);
        p["residual"] = sp->residual;
        p["p_ave"] = vec_json(sp->p_ave);
        p["disagreement"] = sp->disagreement;
        p["grad_norm"] = separable_grad_norm(obj, sp->x);
        if (ctx.gains[k] > 0.0) {
          const BoundCheck b = check_disagreement_bound(*sp, ctx.l0_oracle, ctx.lambda2);
          p["bound"] = b.bound;
          p["bound_margin"] = b.margin;
          p["bound_holds"] = b.holds;
        }
      } else {
        p["x"] = nullptr;
      }
      points.push_back(p);
    }
    j["stationary"] = points;
  }
  return j.dump(2);
}

}  // namespace optcon
