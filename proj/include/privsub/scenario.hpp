#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "privsub/adversary.hpp"
#include "privsub/async_engine.hpp"
#include "privsub/errors.hpp"
#include "privsub/network.hpp"
#include "privsub/objectives.hpp"
#include "privsub/problem.hpp"
#include "privsub/projection.hpp"
#include "privsub/random.hpp"
#include "privsub/stepsize.hpp"
#include "privsub/sync_engine.hpp"

namespace privsub {

using json = nlohmann::json;

// A declarative run description. Agent ids in files are 1-based; everything
// here is already converted to 0-based ids.
struct Scenario {
  struct Graph {
    std::string kind = "complete";  // ring | complete | edges
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    bool directed = false;
  };
  struct Weights {
    std::string rule = "metropolis";  // metropolis | explicit | random
    Eigen::MatrixXd matrix;
  };
  struct Initial {
    std::string kind = "centers";  // centers | explicit | uniform | constant
    Eigen::MatrixXd values;
    double low = 0.0, high = 1.0, value = 0.0;
  };
  struct Input {
    std::string kind = "none";  // none | probe | uniform | explicit
    double bound = 1.0;
    std::vector<double> values;
  };
  struct Outputs {
    std::string trace = "trace.csv";
    std::string oracle = "oracle.csv";
    std::string report = "report.json";
  };

  Graph graph;
  Weights weights;
  std::optional<int> malicious;
  int dimension = 1;
  std::vector<ObjectiveSpec> objectives;  // one per agent
  Initial initial;
  StepsizeSchedule stepsize = StepsizeSchedule::harmonic();
  std::vector<std::optional<UpdateSchedule>> schedules;  // one slot per agent
  std::optional<long> window;
  std::optional<ProjectionSet> projection;
  Input input;
  long horizon = 0;
  std::uint64_t seed = 0;
  Outputs outputs;

  int size() const { return graph.n; }
  int malicious_index() const { return malicious.value_or(graph.n - 1); }
};

namespace scenario_detail {

inline void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigurationError(where + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
      throw ConfigurationError("unknown field '" + (where.empty() ? k : where + "." + k) + "'");
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigurationError("field '" + where + "." + key + "' is missing or has the wrong type");
  }
}

inline Eigen::VectorXd vector_of(const json& v, const std::string& where, int dim) {
  try {
    if (v.is_number()) return Eigen::VectorXd::Constant(dim, v.get<double>());
    const auto xs = v.get<std::vector<double>>();
    if (static_cast<int>(xs.size()) != dim)
      throw ConfigurationError("field '" + where + "' must have " + std::to_string(dim) + " entries");
    return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  } catch (const json::exception&) {
    throw ConfigurationError("field '" + where + "' must be a number or an array of numbers");
  }
}

inline Eigen::MatrixXd matrix_of(const json& v, const std::string& where, int rows, int cols) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    throw ConfigurationError("field '" + where + "' must have " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) m.row(r) = vector_of(v[r], where, cols).transpose();
  return m;
}

inline json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return rows;
}

inline int agent_ref(const json& v, int n, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigurationError("field '" + where + "' must be an agent id");
  const int id = v.get<int>();
  if (id < 1 || id > n)
    throw ConfigurationError("field '" + where + "' references agent " + std::to_string(id) +
                             " but the network has agents 1.." + std::to_string(n));
  return id - 1;
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const json& doc) {
  using namespace scenario_detail;
  allow_keys(doc, "", {"network", "weights", "malicious", "dimension", "objectives", "initial", "stepsize",
                       "schedules", "window", "projection", "input", "horizon", "seed", "outputs"});
  Scenario s;

  if (!doc.contains("network")) throw ConfigurationError("field 'network' is required");
  const auto& g = doc["network"];
  allow_keys(g, "network", {"kind", "n", "edges", "directed"});
  s.graph.kind = get<std::string>(g, "kind", "network");
  s.graph.n = get<int>(g, "n", "network");
  if (s.graph.n < 2) throw ConfigurationError("field 'network.n' must be >= 2");
  s.graph.directed = g.value("directed", false);
  if (s.graph.kind == "edges") {
    if (!g.contains("edges") || !g["edges"].is_array()) throw ConfigurationError("field 'network.edges' is required");
    for (const auto& e : g["edges"]) {
      if (!e.is_array() || e.size() != 2) throw ConfigurationError("field 'network.edges' entries must be [from, to]");
      s.graph.edges.emplace_back(agent_ref(e[0], s.graph.n, "network.edges"),
                                 agent_ref(e[1], s.graph.n, "network.edges"));
    }
  } else if (s.graph.kind != "ring" && s.graph.kind != "complete") {
    throw ConfigurationError("field 'network.kind' must be ring, complete or edges");
  } else if (g.contains("edges")) {
    throw ConfigurationError("field 'network.edges' only applies to kind 'edges'");
  }
  const int n = s.graph.n;

  s.dimension = doc.value("dimension", 1);
  if (s.dimension < 1) throw ConfigurationError("field 'dimension' must be >= 1");
  const int m = s.dimension;

  if (doc.contains("weights")) {
    const auto& w = doc["weights"];
    allow_keys(w, "weights", {"rule", "matrix"});
    s.weights.rule = get<std::string>(w, "rule", "weights");
    if (s.weights.rule == "explicit") {
      if (!w.contains("matrix")) throw ConfigurationError("field 'weights.matrix' is required");
      s.weights.matrix = matrix_of(w["matrix"], "weights.matrix", n, n);
    } else if (s.weights.rule != "metropolis" && s.weights.rule != "random") {
      throw ConfigurationError("field 'weights.rule' must be metropolis, explicit or random");
    }
  }

  if (doc.contains("malicious")) s.malicious = agent_ref(doc["malicious"], n, "malicious");

  s.objectives.assign(static_cast<std::size_t>(n), ObjectiveSpec::constant(0.0, m));
  if (doc.contains("objectives")) {
    std::set<int> seen;
    for (const auto& o : doc["objectives"]) {
      allow_keys(o, "objectives[]", {"agent", "kind", "center", "scale", "curvature", "value"});
      if (!o.contains("agent")) throw ConfigurationError("field 'objectives[].agent' is required");
      const int a = agent_ref(o["agent"], n, "objectives[].agent");
      if (!seen.insert(a).second) throw ConfigurationError("agent " + std::to_string(a + 1) + " has two objectives");
      const auto kind = get<std::string>(o, "kind", "objectives[]");
      try {
        if (kind == "absolute-deviation") {
          s.objectives[a] = ObjectiveSpec::absolute_deviation(vector_of(o.at("center"), "objectives[].center", m),
                                                              o.value("scale", 1.0));
        } else if (kind == "quadratic") {
          const auto c = vector_of(o.at("center"), "objectives[].center", m);
          const auto q = o.contains("curvature") ? vector_of(o["curvature"], "objectives[].curvature", m)
                                                 : Eigen::VectorXd::Ones(m).eval();
          s.objectives[a] = ObjectiveSpec::quadratic(c, q);
        } else if (kind == "constant") {
          s.objectives[a] = ObjectiveSpec::constant(o.value("value", 0.0), m);
        } else {
          throw ConfigurationError("field 'objectives[].kind' must be absolute-deviation, quadratic or constant");
        }
      } catch (const json::exception&) {
        throw ConfigurationError("field 'objectives[].center' is required");
      } catch (const DomainError& e) {
        throw ConfigurationError(std::string("objectives[]: ") + e.what());
      }
    }
  }

  if (doc.contains("initial")) {
    const auto& i = doc["initial"];
    allow_keys(i, "initial", {"kind", "values", "low", "high", "value"});
    s.initial.kind = get<std::string>(i, "kind", "initial");
    if (s.initial.kind == "explicit") {
      if (!i.contains("values")) throw ConfigurationError("field 'initial.values' is required");
      s.initial.values = matrix_of(i["values"], "initial.values", n, m);
    } else if (s.initial.kind == "uniform") {
      s.initial.low = get<double>(i, "low", "initial");
      s.initial.high = get<double>(i, "high", "initial");
      if (s.initial.low > s.initial.high) throw ConfigurationError("field 'initial.low' exceeds 'initial.high'");
    } else if (s.initial.kind == "constant") {
      s.initial.value = get<double>(i, "value", "initial");
    } else if (s.initial.kind != "centers") {
      throw ConfigurationError("field 'initial.kind' must be centers, explicit, uniform or constant");
    }
  }

  if (doc.contains("stepsize")) {
    const auto& a = doc["stepsize"];
    allow_keys(a, "stepsize", {"kind", "alpha", "alpha0", "values"});
    const auto kind = get<std::string>(a, "kind", "stepsize");
    try {
      if (kind == "harmonic") s.stepsize = StepsizeSchedule::harmonic(a.value("alpha0", 1.0));
      else if (kind == "constant") s.stepsize = StepsizeSchedule::constant(get<double>(a, "alpha", "stepsize"));
      else if (kind == "explicit") s.stepsize = StepsizeSchedule::sequence(get<std::vector<double>>(a, "values", "stepsize"));
      else throw ConfigurationError("field 'stepsize.kind' must be harmonic, constant or explicit");
    } catch (const DomainError& e) {
      throw ConfigurationError(std::string("stepsize: ") + e.what());
    }
  }

  s.schedules.assign(static_cast<std::size_t>(n), std::nullopt);
  if (doc.contains("schedules")) {
    for (const auto& e : doc["schedules"]) {
      allow_keys(e, "schedules[]", {"agent", "period", "offset", "times"});
      if (!e.contains("agent")) throw ConfigurationError("field 'schedules[].agent' is required");
      const int a = agent_ref(e["agent"], n, "schedules[].agent");
      if (s.schedules[a]) throw ConfigurationError("agent " + std::to_string(a + 1) + " has two schedules");
      try {
        if (e.contains("times")) {
          if (e.contains("period") || e.contains("offset"))
            throw ConfigurationError("schedules[]: give either 'times' or 'period'/'offset'");
          s.schedules[a] = UpdateSchedule::explicit_times(get<std::vector<long>>(e, "times", "schedules[]"));
        } else {
          s.schedules[a] = UpdateSchedule::periodic(e.value("offset", 0L), get<long>(e, "period", "schedules[]"));
        }
      } catch (const DomainError& err) {
        throw ConfigurationError(std::string("schedules[]: ") + err.what());
      }
    }
  }
  if (doc.contains("window")) {
    s.window = get<long>(doc, "window", "");
    if (*s.window < 1) throw ConfigurationError("field 'window' must be >= 1");
  }

  if (doc.contains("projection")) {
    const auto& p = doc["projection"];
    allow_keys(p, "projection", {"kind", "lower", "upper", "center", "radius"});
    const auto kind = get<std::string>(p, "kind", "projection");
    try {
      if (kind == "box")
        s.projection = ProjectionSet::box(vector_of(p.at("lower"), "projection.lower", m),
                                          vector_of(p.at("upper"), "projection.upper", m));
      else if (kind == "ball")
        s.projection = ProjectionSet::ball(vector_of(p.at("center"), "projection.center", m),
                                           get<double>(p, "radius", "projection"));
      else throw ConfigurationError("field 'projection.kind' must be box or ball");
    } catch (const json::exception&) {
      throw ConfigurationError("projection: missing bounds");
    } catch (const DomainError& e) {
      throw ConfigurationError(std::string("projection: ") + e.what());
    }
  }

  if (doc.contains("input")) {
    const auto& u = doc["input"];
    allow_keys(u, "input", {"kind", "bound", "values"});
    s.input.kind = get<std::string>(u, "kind", "input");
    if (s.input.kind == "uniform") s.input.bound = get<double>(u, "bound", "input");
    else if (s.input.kind == "explicit") s.input.values = get<std::vector<double>>(u, "values", "input");
    else if (s.input.kind != "none" && s.input.kind != "probe")
      throw ConfigurationError("field 'input.kind' must be none, probe, uniform or explicit");
  }

  s.horizon = doc.value("horizon", 0L);
  if (s.horizon < 0) throw ConfigurationError("field 'horizon' must be >= 0");
  s.seed = doc.value("seed", std::uint64_t{0});

  std::vector<UpdateSchedule> given;
  for (const auto& slot : s.schedules)
    if (slot) given.push_back(*slot);
  if (!given.empty()) {
    const long window = s.window ? *s.window : default_window(given);
    const auto reg = verify_update_regularity(given, window, s.horizon);
    if (!reg.holds)
      throw ConfigurationError("schedules violate the constant-updates-per-window condition (T=" +
                               std::to_string(window) + "): " + reg.reason);
  }

  if (doc.contains("outputs")) {
    const auto& o = doc["outputs"];
    allow_keys(o, "outputs", {"trace", "oracle", "report"});
    s.outputs.trace = o.value("trace", s.outputs.trace);
    s.outputs.oracle = o.value("oracle", s.outputs.oracle);
    s.outputs.report = o.value("report", s.outputs.report);
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open scenario file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError("scenario '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

// Canonical form: every default filled in, keys sorted, agent ids 1-based.
inline json scenario_to_json(const Scenario& s) {
  using scenario_detail::to_json;
  json doc;
  doc["network"] = {{"kind", s.graph.kind}, {"n", s.graph.n}, {"directed", s.graph.directed}};
  if (s.graph.kind == "edges") {
    json edges = json::array();
    for (const auto& [a, b] : s.graph.edges) edges.push_back({a + 1, b + 1});
    doc["network"]["edges"] = edges;
  }
  doc["weights"] = {{"rule", s.weights.rule}};
  if (s.weights.rule == "explicit") doc["weights"]["matrix"] = to_json(s.weights.matrix);
  if (s.malicious) doc["malicious"] = *s.malicious + 1;
  doc["dimension"] = s.dimension;

  json objs = json::array();
  for (std::size_t i = 0; i < s.objectives.size(); ++i) {
    const auto& o = s.objectives[i];
    json e = {{"agent", i + 1}, {"kind", to_string(o.kind)}};
    if (o.kind == ObjectiveKind::AbsoluteDeviation) {
      e["center"] = to_json(o.center);
      e["scale"] = o.scale;
    } else if (o.kind == ObjectiveKind::Quadratic) {
      e["center"] = to_json(o.center);
      e["curvature"] = to_json(o.curvature);
    } else {
      e["value"] = o.value;
    }
    objs.push_back(e);
  }
  doc["objectives"] = objs;

  json init = {{"kind", s.initial.kind}};
  if (s.initial.kind == "explicit") init["values"] = to_json(s.initial.values);
  if (s.initial.kind == "uniform") {
    init["low"] = s.initial.low;
    init["high"] = s.initial.high;
  }
  if (s.initial.kind == "constant") init["value"] = s.initial.value;
  doc["initial"] = init;

  switch (s.stepsize.kind()) {
    case StepsizeSchedule::Kind::Harmonic: doc["stepsize"] = {{"kind", "harmonic"}, {"alpha0", s.stepsize.base()}}; break;
    case StepsizeSchedule::Kind::Constant: doc["stepsize"] = {{"kind", "constant"}, {"alpha", s.stepsize.base()}}; break;
    case StepsizeSchedule::Kind::Explicit: doc["stepsize"] = {{"kind", "explicit"}, {"values", s.stepsize.values()}}; break;
  }

  json scheds = json::array();
  for (std::size_t i = 0; i < s.schedules.size(); ++i) {
    if (!s.schedules[i]) continue;
    const auto& u = *s.schedules[i];
    if (u.is_periodic()) scheds.push_back({{"agent", i + 1}, {"offset", u.offset()}, {"period", u.period()}});
    else scheds.push_back({{"agent", i + 1}, {"times", u.times()}});
  }
  doc["schedules"] = scheds;
  if (s.window) doc["window"] = *s.window;
  if (s.projection) {
    if (s.projection->is_box())
      doc["projection"] = {{"kind", "box"}, {"lower", to_json(s.projection->as_box().lower)},
                           {"upper", to_json(s.projection->as_box().upper)}};
    else
      doc["projection"] = {{"kind", "ball"}, {"center", to_json(s.projection->as_ball().center)},
                           {"radius", s.projection->as_ball().radius}};
  }
  json in = {{"kind", s.input.kind}};
  if (s.input.kind == "uniform") in["bound"] = s.input.bound;
  if (s.input.kind == "explicit") in["values"] = s.input.values;
  doc["input"] = in;
  doc["horizon"] = s.horizon;
  doc["seed"] = s.seed;
  doc["outputs"] = {{"trace", s.outputs.trace}, {"oracle", s.outputs.oracle}, {"report", s.outputs.report}};
  return doc;
}

inline std::string canonical_text(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

// Everything a run needs, with randomized parts drawn from the seed in a
// fixed order: weights, then initial estimates, then the injected input.
struct Realization {
  NetworkProblem network;
  std::optional<ProjectionSet> projection;
  Rng rng;
};

inline NetworkGraph build_graph(const Scenario& s) {
  if (s.graph.kind == "ring") return NetworkGraph::ring(s.graph.n);
  if (s.graph.kind == "complete") return NetworkGraph::complete(s.graph.n);
  NetworkGraph g(s.graph.n);
  for (const auto& [a, b] : s.graph.edges) {
    if (s.graph.directed) g.add_arc(a, b);
    else g.add_edge(a, b);
  }
  return g;
}

inline Realization realize(const Scenario& s) {
  Realization r{NetworkProblem{}, s.projection, Rng(s.seed)};
  const int n = s.graph.n, m = s.dimension;
  const NetworkGraph g = build_graph(s);
  if (!is_strongly_connected(g)) throw ConnectivityError("network graph is not strongly connected");

  if (s.weights.rule == "metropolis") {
    r.network.weights = build_metropolis_weights(g);
  } else if (s.weights.rule == "random") {
    if (s.graph.kind != "complete") throw ConfigurationError("random weights are only supported on complete graphs");
    r.network.weights = random_doubly_stochastic(n, r.rng);
  } else {
    r.network.weights = s.weights.matrix;
    if (!validate_double_stochastic(r.network.weights, 1e-9))
      throw ConfigurationError("explicit weight matrix is not doubly stochastic");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && (r.network.weights(i, j) > 0.0) != g.has_arc(j, i))
          throw ConfigurationError("weight (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                   ") does not match the graph's arcs");
  }
  r.network.objectives = s.objectives;
  r.network.malicious = s.malicious;

  Eigen::MatrixXd x0(n, m);
  if (s.initial.kind == "explicit") {
    x0 = s.initial.values;
  } else if (s.initial.kind == "constant") {
    x0.setConstant(s.initial.value);
  } else if (s.initial.kind == "uniform") {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) x0(i, j) = uniform(r.rng, s.initial.low, s.initial.high);
  } else {
    for (int i = 0; i < n; ++i) x0.row(i) = s.objectives[static_cast<std::size_t>(i)].center.transpose();
  }
  r.network.initial = x0;

  if (!r.projection) {
    // Box around the reference minimizer, half-width twice the initial spread.
    Eigen::VectorXd centre;
    try {
      centre = sum_minimizer(s.objectives, std::nullopt).point;
    } catch (const ConfigurationError&) {
      centre = x0.colwise().mean().transpose();
    }
    Eigen::VectorXd spread = (x0.colwise().maxCoeff() - x0.colwise().minCoeff()).transpose();
    for (Eigen::Index j = 0; j < spread.size(); ++j)
      if (spread(j) == 0.0) spread(j) = 0.5;
    r.projection = ProjectionSet::box(centre - 2.0 * spread, centre + 2.0 * spread);
  }
  return r;
}

// Input sequence for a horizon, or nullopt when the scenario injects nothing.
inline std::optional<InputSequence> realize_input(const Scenario::Input& in, int n, int m, long horizon, Rng& rng) {
  if (in.kind == "none") return std::nullopt;
  std::vector<double> u;
  if (in.kind == "probe") {
    const long len = 2L * n - 1;
    u = windowed_probe(n, std::max(1L, (horizon + len - 1) / len));
  } else if (in.kind == "uniform") {
    for (long k = 0; k < horizon; ++k) u.push_back(uniform(rng, -in.bound, in.bound));
  } else {
    u = in.values;
  }
  if (static_cast<long>(u.size()) < horizon)
    throw ConfigurationError("input sequence is shorter than the horizon");
  u.resize(static_cast<std::size_t>(horizon));
  return scalar_inputs(u, m);
}

inline std::vector<UpdateSchedule> required_schedules(const Scenario& s, bool with_input) {
  std::vector<UpdateSchedule> out;
  for (int i = 0; i < s.size(); ++i) {
    const auto& slot = s.schedules[static_cast<std::size_t>(i)];
    if (slot) {
      out.push_back(*slot);
    } else if (with_input && i == s.malicious_index()) {
      out.push_back(UpdateSchedule::periodic(0, 1));  // never consulted
    } else {
      throw ConfigurationError("agent " + std::to_string(i + 1) + " has no update schedule");
    }
  }
  return out;
}

}  // namespace privsub
