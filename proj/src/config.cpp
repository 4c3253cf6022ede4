#include "stochcm/config.hpp"

#include "stochcm/experiments.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace stochcm {

using nlohmann::json;

namespace {

void reject_unknown(const json& node, const std::string& section, std::set<std::string> allowed) {
  if (!node.is_object()) throw ValidationError("config section '" + section + "' must be an object");
  for (auto it = node.begin(); it != node.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ValidationError("unknown config key '" + section + "." + it.key() + "'");
    }
  }
}

template <class T>
void read(const json& node, const std::string& section, const char* key, T& target) {
  if (!node.contains(key)) return;
  try {
    target = node.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config key '" + section + "." + key + "' has the wrong type");
  }
}

void read_rate(const json& node, const std::string& section, const char* key, double& target) {
  if (!node.contains(key)) return;
  const json& value = node.at(key);
  if (value.is_null() || (value.is_string() && value.get<std::string>() == "inf")) {
    target = kInfinity;
  } else if (value.is_number()) {
    target = value.get<double>();
  } else {
    throw ValidationError("config key '" + section + "." + key + "' must be a number or \"inf\"");
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "config",
                 {"model", "noise", "trichotomy", "solver", "simulate", "attraction", "expansion",
                  "output", "threads"});
  ExperimentConfig c;
  if (doc.contains("model")) {
    const json& m = doc["model"];
    reject_unknown(m, "model", {"name", "a", "sigma", "N", "cutoff_radius", "cubic"});
    read(m, "model", "name", c.model.name);
    read(m, "model", "a", c.model.a);
    read(m, "model", "sigma", c.model.sigma);
    read(m, "model", "N", c.model.N);
    read_rate(m, "model", "cutoff_radius", c.model.cutoff_radius);
    read(m, "model", "cubic", c.model.cubic);
  }
  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    reject_unknown(n, "noise", {"mu", "seed", "dt", "paths"});
    read(n, "noise", "mu", c.noise.mu);
    read(n, "noise", "seed", c.noise.seed);
    read(n, "noise", "dt", c.noise.dt);
    read(n, "noise", "paths", c.noise.paths);
  }
  if (doc.contains("trichotomy")) {
    const json& t = doc["trichotomy"];
    reject_unknown(t, "trichotomy", {"gamma", "alpha", "beta", "eta", "k_order"});
    read(t, "trichotomy", "gamma", c.trichotomy.gamma);
    read_rate(t, "trichotomy", "alpha", c.trichotomy.alpha);
    read_rate(t, "trichotomy", "beta", c.trichotomy.beta);
    read(t, "trichotomy", "eta", c.trichotomy.eta);
    read(t, "trichotomy", "k_order", c.trichotomy.k_order);
  }
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    reject_unknown(s, "solver", {"T", "tol", "max_iter", "tail_tol", "fd_step", "samples"});
    read(s, "solver", "T", c.solver.window);
    read(s, "solver", "tol", c.solver.tol);
    read(s, "solver", "max_iter", c.solver.max_iter);
    read(s, "solver", "tail_tol", c.solver.tail_tol);
    read(s, "solver", "fd_step", c.solver.fd_step);
    read(s, "solver", "samples", c.solver.samples);
  }
  if (doc.contains("simulate")) {
    const json& s = doc["simulate"];
    reject_unknown(s, "simulate", {"horizon", "initial"});
    read(s, "simulate", "horizon", c.simulate.horizon);
    read(s, "simulate", "initial", c.simulate.initial);
  }
  if (doc.contains("attraction")) {
    const json& a = doc["attraction"];
    reject_unknown(a, "attraction",
                   {"amplitude", "offset", "offset_coordinate", "horizon", "sample_step", "floor",
                    "track_horizon", "table_step", "table_points"});
    read(a, "attraction", "amplitude", c.attraction.amplitude);
    read(a, "attraction", "offset", c.attraction.offset);
    read(a, "attraction", "offset_coordinate", c.attraction.offset_coordinate);
    read(a, "attraction", "horizon", c.attraction.horizon);
    read(a, "attraction", "sample_step", c.attraction.sample_step);
    read(a, "attraction", "floor", c.attraction.floor);
    read(a, "attraction", "track_horizon", c.attraction.track_horizon);
    read(a, "attraction", "table_step", c.attraction.table_step);
    read(a, "attraction", "table_points", c.attraction.table_points);
  }
  if (doc.contains("expansion")) {
    const json& e = doc["expansion"];
    reject_unknown(e, "expansion", {"graph", "q", "amplitudes", "dt_probes", "probe_state"});
    read(e, "expansion", "graph", c.expansion.graph);
    read(e, "expansion", "q", c.expansion.q);
    read(e, "expansion", "amplitudes", c.expansion.amplitudes);
    read(e, "expansion", "dt_probes", c.expansion.dt_probes);
    read(e, "expansion", "probe_state", c.expansion.probe_state);
  }
  read(doc, "config", "output", c.output);
  read(doc, "config", "threads", c.threads);

  c.canonical = doc.dump();
  c.hash = fnv1a(c.canonical);
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate_config(const ExperimentConfig& c) {
  require(c.noise.mu > 0.0, "OU rate mu must be positive");
  require(c.noise.dt > 0.0, "time step dt must be positive");
  require(c.noise.paths >= 1, "ensemble is empty: noise.paths must be at least 1");
  require(c.threads >= 1, "threads must be at least 1");
  const SpectralModel model = build_model(c.model);
  const TrichotomySplit split = build_split(model, c.trichotomy);
  // Rejects eta outside (gamma, min(alpha, beta) / k).
  (void)gap_condition(split, model.lipschitz_bound, c.trichotomy.eta, c.trichotomy.k_order);

  require(c.solver.window > 0.0, "solver window T must be positive");
  require(c.solver.window >= c.noise.dt, "solver window T must cover at least one step");
  require(c.solver.tol > 0.0, "solver tolerance must be positive");
  require(c.solver.max_iter >= 1, "solver max_iter must be at least 1");
  require(c.solver.tail_tol > 0.0, "solver tail_tol must be positive");
  require(c.solver.fd_step > 0.0, "solver fd_step must be positive");
  for (const auto& s : c.solver.samples) {
    require(s.size() == split.center.size(),
            "solver sample has " + std::to_string(s.size()) + " entries, center dimension is " +
                std::to_string(split.center.size()));
  }
  require(c.simulate.horizon > 0.0, "simulate horizon must be positive");
  require(c.simulate.initial.empty() || c.simulate.initial.size() == model.dim,
          "simulate initial state must have the model dimension");

  const AttractionConfig& a = c.attraction;
  require(a.offset_coordinate < model.dim, "attraction offset_coordinate outside the state");
  require(a.horizon > 0.0 && a.track_horizon > 0.0, "attraction horizons must be positive");
  require(a.sample_step >= c.noise.dt, "attraction sample_step must be at least dt");
  require(a.table_step >= c.noise.dt, "attraction table_step must be at least dt");
  require(a.table_points >= 2, "attraction table_points must be at least 2");
  require(a.floor > 0.0 && a.floor < 1.0, "attraction floor must lie in (0, 1)");

  const ExpansionConfig& e = c.expansion;
  require(e.graph == "cubic" || e.graph == "zero" || e.graph == "slow",
          "expansion graph must be cubic, zero or slow");
  require(e.q >= 2, "expansion order q must be at least 2");
  for (double dt : e.dt_probes) require(dt > 0.0, "dt_probes must be positive");
  require(e.probe_state.empty() || e.probe_state.size() == split.center.size(),
          "expansion probe_state must have the center dimension");
}

}  // namespace stochcm
