#include "optcon/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "optcon/errors.hpp"

namespace optcon {
namespace {

using json = nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ConfigError(path, "expected an object");
  }
  return j;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw ConfigError(join(path, key), "unknown key");
    }
  }
}

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) {
    throw ConfigError(join(path, key), "missing required field");
  }
  return obj.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (j.is_number()) {
    return j.get<double>();
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
      return -std::numeric_limits<double>::infinity();
    }
  }
  throw ConfigError(path, "expected a number");
}

double finite_number(const json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!std::isfinite(v)) {
    throw ConfigError(path, "expected a finite number");
  }
  return v;
}

double number_or(const json& obj, const std::string& path, const char* key,
                 double fallback) {
  return obj.contains(key) ? finite_number(obj.at(key), join(path, key)) : fallback;
}

std::uint64_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(path, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ConfigError(path, "expected a string");
  }
  return j.get<std::string>();
}

Vector as_vector(const json& j, const std::string& path, Eigen::Index expected,
                 bool allow_infinite = false) {
  if (!j.is_array()) {
    throw ConfigError(path, "expected an array of numbers");
  }
  if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected) {
    throw ConfigError(path, "expected " + std::to_string(expected) + " entries, got " +
                                std::to_string(j.size()));
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = allow_infinite ? as_number(j[k], index(path, k))
                                                     : finite_number(j[k], index(path, k));
  }
  return v;
}

Matrix as_matrix(const json& j, const std::string& path, Eigen::Index m) {
  if (j.is_number()) {
    return finite_number(j, path) * Matrix::Identity(m, m);
  }
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m) {
    throw ConfigError(path, "expected a scalar or an m x m array");
  }
  Matrix q(m, m);
  for (std::size_t r = 0; r < j.size(); ++r) {
    q.row(static_cast<Eigen::Index>(r)) = as_vector(j[r], index(path, r), m).transpose();
  }
  return q;
}

ConvexSet parse_set(const json& j, const std::string& path, Eigen::Index m) {
  require_object(j, path);
  const std::string type = as_string(member(j, path, "type"), join(path, "type"));
  try {
    if (type == "point") {
      reject_unknown(j, path, {"type", "c"});
      return ConvexSet::point(as_vector(member(j, path, "c"), join(path, "c"), m));
    }
    if (type == "ball") {
      reject_unknown(j, path, {"type", "center", "radius"});
      return ConvexSet::ball(
          as_vector(member(j, path, "center"), join(path, "center"), m),
          finite_number(member(j, path, "radius"), join(path, "radius")));
    }
    if (type == "box") {
      reject_unknown(j, path, {"type", "lower", "upper"});
      return ConvexSet::box(
          as_vector(member(j, path, "lower"), join(path, "lower"), m, true),
          as_vector(member(j, path, "upper"), join(path, "upper"), m, true));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "type"), "unknown set type '" + type + "'");
}

ConvexComponent parse_component(const json& j, const std::string& path,
                                Eigen::Index m) {
  require_object(j, path);
  const std::string type = as_string(member(j, path, "type"), join(path, "type"));
  try {
    if (type == "quadratic") {
      reject_unknown(j, path, {"type", "Q", "c"});
      return ConvexComponent::quadratic(
          as_matrix(member(j, path, "Q"), join(path, "Q"), m),
          as_vector(member(j, path, "c"), join(path, "c"), m));
    }
    if (type == "sqdist") {
      reject_unknown(j, path, {"type", "set"});
      return ConvexComponent::sq_dist(parse_set(member(j, path, "set"), join(path, "set"), m));
    }
    if (type == "sum") {
      reject_unknown(j, path, {"type", "terms"});
      const json& terms = member(j, path, "terms");
      if (!terms.is_array() || terms.empty()) {
        throw ConfigError(join(path, "terms"), "expected a nonempty array");
      }
      std::vector<ConvexComponent> parts;
      for (std::size_t k = 0; k < terms.size(); ++k) {
        parts.push_back(parse_component(terms[k], index(join(path, "terms"), k), m));
      }
      return ConvexComponent::sum(std::move(parts));
    }
    if (type == "zero") {
      reject_unknown(j, path, {"type"});
      return ConvexComponent::zero(m);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "type"), "unknown objective type '" + type + "'");
}

std::vector<Arc> parse_arcs(const json& j, const std::string& path,
                            std::size_t nodes) {
  if (!j.is_array()) {
    throw ConfigError(path, "expected an array of arcs");
  }
  std::vector<Arc> arcs;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = index(path, k);
    const json& a = j[k];
    if (!a.is_array() || a.size() < 2 || a.size() > 3) {
      throw ConfigError(p, "arc must be [from, to] or [from, to, weight]");
    }
    const auto from = as_count(a[0], index(p, 0));
    const auto to = as_count(a[1], index(p, 1));
    if (from >= nodes || to >= nodes) {
      throw ConfigError(p, "node index out of range");
    }
    if (from == to) {
      throw ConfigError(p, "self-loops are not allowed");
    }
    const double w = a.size() == 3 ? finite_number(a[2], index(p, 2)) : 1.0;
    if (!(w > 0.0)) {
      throw ConfigError(index(p, 2), "weights must be positive");
    }
    arcs.push_back({static_cast<NodeId>(from), static_cast<NodeId>(to), w});
  }
  return arcs;
}

std::optional<WeightBounds> parse_bounds(const json& obj, const std::string& path) {
  if (!obj.contains("weight_bounds")) {
    return std::nullopt;
  }
  const Vector b = as_vector(obj.at("weight_bounds"), join(path, "weight_bounds"), 2);
  if (!(b(0) > 0.0 && b(0) <= b(1))) {
    throw ConfigError(join(path, "weight_bounds"), "expected 0 < lower <= upper");
  }
  return WeightBounds{b(0), b(1)};
}

WeightedDigraph make_graph(std::size_t nodes, std::vector<Arc> arcs,
                           std::optional<WeightBounds> bounds,
                           const std::string& path) {
  try {
    return WeightedDigraph(nodes, std::move(arcs), bounds);
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

Topology parse_topology(const json& j, const std::string& path, std::size_t nodes) {
  require_object(j, path);
  const std::string type = as_string(member(j, path, "type"), join(path, "type"));
  if (type == "fixed") {
    reject_unknown(j, path, {"type", "arcs", "weight_bounds"});
    return make_graph(nodes,
                      parse_arcs(member(j, path, "arcs"), join(path, "arcs"), nodes),
                      parse_bounds(j, path), join(path, "arcs"));
  }
  if (type != "switching") {
    throw ConfigError(join(path, "type"), "unknown topology type '" + type + "'");
  }
  reject_unknown(j, path, {"type", "dwell", "period", "end", "intervals", "weight_bounds"});
  const double dwell = finite_number(member(j, path, "dwell"), join(path, "dwell"));
  const auto bounds = parse_bounds(j, path);
  const json& ivs = member(j, path, "intervals");
  const std::string ivs_path = join(path, "intervals");
  if (!ivs.is_array() || ivs.empty()) {
    throw ConfigError(ivs_path, "expected a nonempty array");
  }
  std::vector<SwitchInterval> intervals;
  for (std::size_t k = 0; k < ivs.size(); ++k) {
    const std::string p = index(ivs_path, k);
    require_object(ivs[k], p);
    reject_unknown(ivs[k], p, {"start", "arcs"});
    const double start = finite_number(member(ivs[k], p, "start"), join(p, "start"));
    if (k > 0) {
      const double gap = start - intervals.back().start;
      if (!(gap > 0.0)) {
        throw ConfigError(join(p, "start"), "interval starts must be strictly increasing");
      }
      if (gap < dwell) {
        std::ostringstream os;
        os << "dwell-time violation: gap " << gap << " between switches is below dwell "
           << dwell;
        throw ConfigError(join(p, "start"), os.str());
      }
    }
    intervals.push_back(
        {start, make_graph(nodes, parse_arcs(member(ivs[k], p, "arcs"), join(p, "arcs"), nodes),
                           bounds, join(p, "arcs"))});
  }
  const bool has_period = j.contains("period");
  const bool has_end = j.contains("end");
  if (has_period == has_end) {
    throw ConfigError(path, "switching topology needs exactly one of 'period' or 'end'");
  }
  try {
    if (has_period) {
      return SwitchingSignal::periodic(
          std::move(intervals), dwell,
          finite_number(j.at("period"), join(path, "period")));
    }
    return SwitchingSignal::finite(std::move(intervals), dwell,
                                   as_number(j.at("end"), join(path, "end")));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::string what = e.what();
    if (what.find("dwell") != std::string::npos) {
      what = "dwell-time violation: " + what;
    }
    throw ConfigError(path, what);
  }
}

ControlLaw parse_law(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string type = as_string(member(j, path, "type"), join(path, "type"));
  if (type == "jstar") {
    reject_unknown(j, path, {"type"});
    return JStar{};
  }
  if (type == "jk") {
    reject_unknown(j, path, {"type", "K"});
    const double k = finite_number(member(j, path, "K"), join(path, "K"));
    if (!(k >= 0.0)) {
      throw ConfigError(join(path, "K"), "gain must be nonnegative");
    }
    return JK{k};
  }
  throw ConfigError(join(path, "type"), "unknown law type '" + type + "'");
}

Tolerances parse_tolerances(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"diameter", "residual", "gap", "lyapunov_spread",
                           "reconstruction", "stationary_match", "robust_diameter",
                           "cube"});
  Tolerances t;
  t.diameter = number_or(j, path, "diameter", t.diameter);
  t.residual = number_or(j, path, "residual", t.residual);
  t.gap = number_or(j, path, "gap", t.gap);
  t.lyapunov_spread = number_or(j, path, "lyapunov_spread", t.lyapunov_spread);
  t.reconstruction = number_or(j, path, "reconstruction", t.reconstruction);
  t.stationary_match = number_or(j, path, "stationary_match", t.stationary_match);
  t.robust_diameter = number_or(j, path, "robust_diameter", t.robust_diameter);
  t.cube = number_or(j, path, "cube", t.cube);
  return t;
}

AnalysisConfig parse_analysis(const json& j, const std::string& path, Eigen::Index m) {
  require_object(j, path);
  reject_unknown(j, path, {"z_star", "k_grid", "slack", "ujsc_window", "eta",
                           "seed_count", "trace_metrics", "tolerances"});
  AnalysisConfig a;
  if (j.contains("z_star")) {
    a.z_star = as_vector(j.at("z_star"), join(path, "z_star"), m);
  }
  if (j.contains("k_grid")) {
    const Vector g = as_vector(j.at("k_grid"), join(path, "k_grid"), -1);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      if (!(g(k) >= 0.0)) {
        throw ConfigError(index(join(path, "k_grid"), static_cast<std::size_t>(k)),
                          "gains must be nonnegative");
      }
      a.k_grid.push_back(g(k));
    }
  }
  a.slack = number_or(j, path, "slack", a.slack);
  if (!(a.slack >= 0.0)) {
    throw ConfigError(join(path, "slack"), "must be nonnegative");
  }
  if (j.contains("ujsc_window")) {
    a.ujsc_window = finite_number(j.at("ujsc_window"), join(path, "ujsc_window"));
    if (!(*a.ujsc_window > 0.0)) {
      throw ConfigError(join(path, "ujsc_window"), "must be positive");
    }
  }
  a.eta = number_or(j, path, "eta", a.eta);
  if (!(a.eta > 0.0)) {
    throw ConfigError(join(path, "eta"), "must be positive");
  }
  if (j.contains("seed_count")) {
    a.seed_count = as_count(j.at("seed_count"), join(path, "seed_count"));
    if (a.seed_count == 0) {
      throw ConfigError(join(path, "seed_count"), "must be at least 1");
    }
  }
  if (j.contains("trace_metrics")) {
    const json& tm = j.at("trace_metrics");
    const std::string p = join(path, "trace_metrics");
    if (!tm.is_array()) {
      throw ConfigError(p, "expected an array of strings");
    }
    for (std::size_t k = 0; k < tm.size(); ++k) {
      const std::string name = as_string(tm[k], index(p, k));
      if (name != "lyapunov" && name != "gap" && name != "residual") {
        throw ConfigError(index(p, k), "unknown metric '" + name + "'");
      }
      a.trace_metrics.push_back(name);
    }
  }
  if (j.contains("tolerances")) {
    a.tol = parse_tolerances(j.at("tolerances"), join(path, "tolerances"));
  }
  return a;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ScenarioConfig::fingerprint() const { return fnv1a_hex(canonical); }

Vector ScenarioConfig::initial_state(std::uint64_t seed_value) const {
  if (const auto* v = std::get_if<Vector>(&x0)) {
    return *v;
  }
  const auto& box = std::get<RandomBox>(x0);
  std::mt19937_64 rng(seed_value);
  std::uniform_real_distribution<double> dist(box.lower, box.upper);
  Vector out(m * static_cast<Eigen::Index>(nodes));
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    out(k) = dist(rng);
  }
  return out;
}

Scenario ScenarioConfig::scenario(std::uint64_t seed_value) const {
  Scenario s{objective_set(), *topology, law, initial_state(seed_value), t0, tf, h, {}};
  if (disturbance) {
    const std::vector<Vector> vs = *disturbance;
    s.disturbance = [vs](NodeId node, double t) -> Vector {
      return std::exp(-t) * vs[node];
    };
  }
  s.validate();
  return s;
}

ScenarioConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("", "parse error at " + line_column(text, e.byte) + ": " + e.what());
  }
  require_object(doc, "");
  reject_unknown(doc, "", {"name", "m", "nodes", "objectives", "topology", "law",
                           "integrator", "analysis", "seed", "x0", "disturbance"});

  ScenarioConfig cfg;
  cfg.canonical = doc.dump();
  cfg.name = as_string(member(doc, "", "name"), "name");
  cfg.m = static_cast<Eigen::Index>(as_count(member(doc, "", "m"), "m"));
  cfg.nodes = as_count(member(doc, "", "nodes"), "nodes");
  if (cfg.m == 0) {
    throw ConfigError("m", "must be at least 1");
  }
  if (cfg.nodes == 0) {
    throw ConfigError("nodes", "must be at least 1");
  }

  const json& objs = member(doc, "", "objectives");
  if (!objs.is_array() || objs.size() != cfg.nodes) {
    throw ConfigError("objectives", "expected one component per node (" +
                                        std::to_string(cfg.nodes) + ")");
  }
  for (std::size_t i = 0; i < objs.size(); ++i) {
    cfg.objectives.push_back(parse_component(objs[i], index("objectives", i), cfg.m));
  }

  cfg.topology = parse_topology(member(doc, "", "topology"), "topology", cfg.nodes);
  if (doc.contains("law")) {
    cfg.law = parse_law(doc.at("law"), "law");
  }

  if (doc.contains("integrator")) {
    const json& in = require_object(doc.at("integrator"), "integrator");
    reject_unknown(in, "integrator", {"h", "t0", "tf"});
    cfg.h = number_or(in, "integrator", "h", cfg.h);
    cfg.t0 = number_or(in, "integrator", "t0", cfg.t0);
    cfg.tf = number_or(in, "integrator", "tf", cfg.tf);
  }
  if (!(cfg.h > 0.0)) {
    throw ConfigError("integrator.h", "step must be positive");
  }
  if (!(cfg.tf > cfg.t0)) {
    throw ConfigError("integrator.tf", "must exceed t0");
  }
  if (const auto* sig = std::get_if<SwitchingSignal>(&*cfg.topology)) {
    if (cfg.t0 < sig->origin() || cfg.tf > sig->horizon_end()) {
      throw ConfigError("integrator", "[t0, tf] is not covered by the switching signal");
    }
  }

  if (doc.contains("analysis")) {
    cfg.analysis = parse_analysis(doc.at("analysis"), "analysis", cfg.m);
  }
  if (doc.contains("seed")) {
    cfg.seed = as_count(doc.at("seed"), "seed");
  }

  const auto n_total = cfg.m * static_cast<Eigen::Index>(cfg.nodes);
  if (doc.contains("x0")) {
    const json& x0 = doc.at("x0");
    if (x0.is_object()) {
      reject_unknown(x0, "x0", {"random_uniform"});
      const Vector b = as_vector(member(x0, "x0", "random_uniform"), "x0.random_uniform", 2);
      if (!(b(0) < b(1))) {
        throw ConfigError("x0.random_uniform", "expected lower < upper");
      }
      cfg.x0 = RandomBox{b(0), b(1)};
    } else if (x0.is_array()) {
      Vector v(n_total);
      if (x0.size() != cfg.nodes) {
        throw ConfigError("x0", "expected one state per node");
      }
      for (std::size_t i = 0; i < cfg.nodes; ++i) {
        v.segment(static_cast<Eigen::Index>(i) * cfg.m, cfg.m) =
            as_vector(x0[i], index("x0", i), cfg.m);
      }
      cfg.x0 = v;
    } else {
      throw ConfigError("x0", "expected per-node array or {\"random_uniform\": [lo, hi]}");
    }
  }

  if (doc.contains("disturbance")) {
    const json& d = require_object(doc.at("disturbance"), "disturbance");
    reject_unknown(d, "disturbance", {"type", "vectors"});
    const std::string type = as_string(member(d, "disturbance", "type"), "disturbance.type");
    if (type != "exp_decay") {
      throw ConfigError("disturbance.type", "unknown disturbance type '" + type + "'");
    }
    const json& vs = member(d, "disturbance", "vectors");
    if (!vs.is_array() || vs.size() != cfg.nodes) {
      throw ConfigError("disturbance.vectors", "expected one vector per node");
    }
    std::vector<Vector> vectors;
    for (std::size_t i = 0; i < cfg.nodes; ++i) {
      vectors.push_back(as_vector(vs[i], index("disturbance.vectors", i), cfg.m));
    }
    cfg.disturbance = std::move(vectors);
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("", "cannot open config file " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace optcon
