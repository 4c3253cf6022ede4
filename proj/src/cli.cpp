#include "stochcm/cli.hpp"

#include "stochcm/conjugacy.hpp"
#include "stochcm/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace stochcm {

using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<Index> threads;
};

class Writer {
 public:
  Writer(std::filesystem::path dir, const ExperimentConfig& config)
      : dir_(std::move(dir)), hash_(hash_hex(config.hash)) {
    std::filesystem::create_directories(dir_);
  }

  void json_file(const std::string& name, json doc) const {
    doc["config_hash"] = hash_;
    std::ofstream f = open(name);
    f << doc.dump(2) << '\n';
  }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir_ / name);
    if (!f) throw ValidationError("cannot write output file '" + (dir_ / name).string() + "'");
    return f;
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string hash_;
};

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json fit_json(const DecayFit& fit) {
  return {{"prefactor", fit.prefactor}, {"rate", fit.rate},   {"r_squared", fit.r_squared},
          {"t_begin", fit.t_begin},     {"t_end", fit.t_end}, {"points", fit.points}};
}

json graph_json(const ManifoldGraph& g) {
  return {{"eta", g.eta},
          {"T", g.window},
          {"tol", g.tol},
          {"tail_bound", g.tail_bound},
          {"contraction_ratio", g.contraction_ratio},
          {"theoretical_lhs", g.theoretical_lhs},
          {"lipschitz_ratio", g.lipschitz_ratio},
          {"lipschitz_ceiling", g.lipschitz_ceiling},
          {"tangency_norm", g.tangency_norm}};
}

void self_test_decay_fit() {
  Series s;
  for (int i = 0; i <= 20; ++i) {
    s.t.push_back(0.1 * i);
    s.value.push_back(2.0 * std::exp(-3.0 * 0.1 * i));
  }
  const DecayFit fit = fit_decay(s, 0.0);
  if (std::abs(fit.rate - 3.0) > 1e-9 || std::abs(fit.prefactor - 2.0) > 1e-9) {
    throw NumericalError("decay-fit self-test failed", {fit.rate, fit.prefactor});
  }
}

int cmd_gap(const ExperimentConfig& c, const Writer& w, std::ostream& out) {
  const SpectralModel model = build_model(c.model);
  const TrichotomySplit split = build_split(model, c.trichotomy);
  const GapReport r = gap_condition(split, model.lipschitz_bound, c.trichotomy.eta,
                                    c.trichotomy.k_order);
  w.json_file("gap.json", {{"eta", r.eta},
                           {"k_order", r.k_order},
                           {"lhs", r.lhs_values},
                           {"satisfied", r.satisfied},
                           {"eta_min", r.eta_min},
                           {"eta_max", r.eta_max},
                           {"lipschitz", model.lipschitz_bound},
                           {"K", split.bound_K},
                           {"gamma", split.gamma},
                           {"alpha", split.alpha},
                           {"beta", split.beta},
                           {"center_dim", split.center.size()},
                           {"stable_dim", split.stable.size()},
                           {"unstable_dim", split.unstable.size()},
                           {"eigenvalues", vec_json(model.eigenvalues())}});
  out << "admissible eta interval: (" << r.eta_min << ", " << r.eta_max << ")\n";
  for (Index i = 0; i < r.lhs_values.size(); ++i) {
    out << "lhs_" << i + 1 << " = " << r.lhs_values[i] << '\n';
  }
  out << "gap condition " << (r.satisfied ? "satisfied" : "violated") << '\n';
  return r.satisfied ? 0 : 1;
}

int cmd_simulate(const ExperimentConfig& c, const Writer& w, std::ostream& out) {
  const SpectralModel model = build_model(c.model);
  const TrichotomySplit split = build_split(model, c.trichotomy);
  const NoiseSample noise = make_noise(c, c.noise.seed, 0.0, c.simulate.horizon);
  const RandomFrame& frame = noise.frame;
  Vector u0_star;
  if (!c.simulate.initial.empty()) {
    u0_star = Eigen::Map<const Vector>(c.simulate.initial.data(),
                                       static_cast<Eigen::Index>(c.simulate.initial.size()));
  } else {
    u0_star = attraction_initial_state(c, split, model.dim);
  }
  const Vector u0 = to_random_frame(u0_star, frame.z(0), c.model.sigma);
  Trajectory traj = integrate_mild(model, frame, u0);
  for (Index i = 0; i < traj.states.size(); ++i) {
    traj.states[i] = from_random_frame(traj.states[i], frame.z(i), c.model.sigma);
  }
  {
    std::ofstream f = w.open("path.csv");
    write_path_csv(f, noise.path, frame.ou());
  }
  {
    std::ofstream f = w.open("trajectory.csv");
    write_trajectory_csv(f, traj);
  }
  w.json_file("simulate.json", {{"seed", c.noise.seed},
                                {"horizon", c.simulate.horizon},
                                {"steps", traj.states.size() - 1},
                                {"initial_norm", u0_star.norm()},
                                {"final_norm", traj.states.back().norm()}});
  out << "simulated " << traj.states.size() - 1 << " steps, final norm "
      << traj.states.back().norm() << '\n';
  return 0;
}

int cmd_manifold(const ExperimentConfig& c, const Writer& w, std::ostream& out) {
  const ManifoldRun run = run_manifold(c, c.noise.seed);
  {
    std::ofstream f = w.open("manifold.csv");
    write_graph_csv(f, run.graph);
  }
  {
    std::ofstream f = w.open("manifold_original.csv");
    write_graph_csv(f, run.original);
  }
  json doc = graph_json(run.graph);
  doc["seed"] = c.noise.seed;
  doc["sigma_z0"] = run.sigma_z0;
  doc["gap_satisfied"] = run.gap.satisfied;
  w.json_file("manifold.json", doc);
  out << "manifold: " << run.graph.samples.size() << " samples, contraction ratio "
      << run.graph.contraction_ratio << " (lhs " << run.graph.theoretical_lhs << ")\n";
  return 0;
}

int cmd_reduce(const ExperimentConfig& c, const Writer& w, std::ostream& out) {
  const TrackingRun run = tracking_run(c, c.noise.seed, c.threads);
  {
    std::ofstream f = w.open("defect.csv");
    write_series_csv(f, run.defect, "defect");
  }
  {
    std::ofstream f = w.open("center_err.csv");
    write_series_csv(f, run.errors.center_err, "center_err");
  }
  {
    std::ofstream f = w.open("stable_err.csv");
    write_series_csv(f, run.errors.stable_err, "stable_err");
  }
  w.json_file("reduce.json", {{"seed", c.noise.seed},
                              {"fit", fit_json(run.fit)},
                              {"floor", run.floor},
                              {"worst_ratio", run.worst_ratio}});
  out << "tracking: worst center_err / envelope = " << run.worst_ratio << '\n';
  return 0;
}

int cmd_attract(const ExperimentConfig& c, const Writer& w, std::ostream& out) {
  self_test_decay_fit();
  const AttractionEnsemble ens = attraction_ensemble(c, c.noise.paths, c.threads);
  json paths = json::array();
  for (Index k = 0; k < ens.runs.size(); ++k) {
    const AttractionRun& run = ens.runs[k];
    std::ostringstream name;
    name << "defect_" << std::setw(4) << std::setfill('0') << k << ".csv";
    std::ofstream f = w.open(name.str());
    write_series_csv(f, run.defect, "defect");
    json entry = {{"path", k},
                  {"seed", path_seed(c, k)},
                  {"initial_defect", run.initial_defect},
                  {"floor", run.floor}};
    if (run.fit) {
      entry["fit"] = fit_json(*run.fit);
    } else {
      entry["error"] = run.error;
    }
    paths.push_back(entry);
  }
  w.json_file("attraction.json", {{"paths", paths},
                                  {"median_rate", ens.median_rate},
                                  {"failures", ens.failures},
                                  {"beta", c.trichotomy.beta}});
  out << "attraction: median rate " << ens.median_rate << " over " << ens.rates.size()
      << " paths\n";
  return 0;
}

int cmd_residual(const ExperimentConfig& c, const Writer& w, std::ostream& out) {
  if (c.expansion.graph == "slow") {
    const ResidualDecay r = residual_run(c, c.noise.seed);
    w.json_file("residual.json", {{"graph", c.expansion.graph},
                                  {"dt_probes", r.dt_probes},
                                  {"residuals", r.residuals},
                                  {"slope", r.slope},
                                  {"state_norm", r.state_norm}});
    out << "residual slope " << r.slope << '\n';
    return 0;
  }
  const OrderFitReport r = order_fit_run(c, c.noise.seed);
  w.json_file("residual.json", {{"graph", c.expansion.graph},
                                {"amplitudes", r.amplitudes},
                                {"differences", r.differences},
                                {"fitted_amplitudes", r.fitted_amplitudes},
                                {"slope", r.slope},
                                {"target_q", r.target_q},
                                {"degenerate", r.degenerate},
                                {"passed", r.passed},
                                {"message", r.message}});
  out << "order fit: " << r.message << ", slope " << r.slope << " (target " << r.target_q
      << ")\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic center manifolds: gap check, simulation, manifold, reduction"};
  app.require_subcommand(1);
  Options opt;
  using Handler = int (*)(const ExperimentConfig&, const Writer&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands = {
      {"gap", "check the spectral-gap condition", cmd_gap},
      {"simulate", "integrate one path in the original variables", cmd_simulate},
      {"manifold", "compute the center-manifold graph", cmd_manifold},
      {"reduce", "compare full and reduced dynamics", cmd_reduce},
      {"attract", "fit attraction rates over the ensemble", cmd_attract},
      {"residual", "invariance residual or order fit of an expansion", cmd_residual},
  };
  std::uint64_t seed = 0;
  Index threads = 1;
  std::vector<CLI::Option*> seed_opts, thread_opts;
  for (const auto& [name, help, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "config file (JSON)")->required();
    seed_opts.push_back(sub->add_option("--seed", seed, "noise seed"));
    sub->add_option("--out", opt.out, "output directory");
    thread_opts.push_back(sub->add_option("--threads", threads, "worker threads"));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  for (const CLI::Option* o : seed_opts) {
    if (o->count() > 0) opt.seed = seed;
  }
  for (const CLI::Option* o : thread_opts) {
    if (o->count() > 0) opt.threads = threads;
  }

  try {
    ExperimentConfig config = load_config(opt.config);
    if (opt.seed) config.noise.seed = *opt.seed;
    if (opt.threads) config.threads = *opt.threads;
    if (!opt.out.empty()) config.output = opt.out;
    validate_config(config);
    for (const auto& [name, help, handler] : commands) {
      if (app.got_subcommand(name)) return handler(config, Writer(config.output, config), out);
    }
    return 1;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what();
    if (!e.diagnostics().empty()) {
      err << " [";
      for (Index i = 0; i < e.diagnostics().size(); ++i) {
        err << (i ? ", " : "") << e.diagnostics()[i];
      }
      err << ']';
    }
    err << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "validation error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace stochcm
