#include "stochcm/experiments.hpp"

#include "stochcm/conjugacy.hpp"
#include "stochcm/fit.hpp"
#include "stochcm/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace stochcm {

namespace {

Index cells(double duration, double dt) {
  return static_cast<Index>(std::llround(duration / dt));
}

std::vector<Index> lattice(Index first, Index last, Index step) {
  std::vector<Index> out;
  for (Index i = first; i <= last; i += step) out.push_back(i);
  if (out.back() != last) out.push_back(last);
  return out;
}

double stable_distance(const TrichotomySplit& split, const Vector& u, const Vector& h) {
  return (stable_part(split, u) - stable_part(split, h)).norm();
}

}  // namespace

SpectralModel build_model(const ModelConfig& c) {
  if (c.N < 1) throw ValidationError("number of modes N must be at least 1");
  if (c.name == "reaction_diffusion") {
    return builtin_reaction_diffusion(c.a, c.sigma, c.N, c.cutoff_radius);
  }
  if (c.name == "damped_wave") return builtin_damped_wave(c.sigma, c.N, c.cubic, c.cutoff_radius);
  if (c.name == "coupled_slow") return builtin_coupled_slow(c.a, c.sigma, c.N, c.cutoff_radius);
  throw ValidationError("unknown model '" + c.name +
                        "' (expected reaction_diffusion, damped_wave or coupled_slow)");
}

TrichotomySplit build_split(const SpectralModel& model, const TrichotomyConfig& c) {
  return split_spectrum(model, c.gamma, c.alpha, c.beta);
}

LPOptions lp_options(const ExperimentConfig& c) {
  LPOptions o;
  o.eta = c.trichotomy.eta;
  o.window = c.solver.window;
  o.tol = c.solver.tol;
  o.max_iter = c.solver.max_iter;
  o.tail_tol = c.solver.tail_tol;
  return o;
}

std::uint64_t path_seed(const ExperimentConfig& c, Index k) {
  return k == 0 ? c.noise.seed : ensemble_seed(c.noise.seed, k);
}

NoiseSample make_noise(const ExperimentConfig& c, std::uint64_t seed, double back,
                       double forward) {
  BrownianPath path = sample_brownian(TimeGrid::two_sided(back, forward, c.noise.dt), seed);
  RandomFrame frame(ou_stationary(path, c.noise.mu), c.model.sigma);
  return {std::move(path), std::move(frame)};
}

ManifoldRun run_manifold(const ExperimentConfig& c, std::uint64_t seed) {
  const SpectralModel model = build_model(c.model);
  const TrichotomySplit split = build_split(model, c.trichotomy);
  ManifoldRun run;
  run.gap = gap_condition(split, model.lipschitz_bound, c.trichotomy.eta, c.trichotomy.k_order);
  const NoiseSample noise = make_noise(c, seed, c.solver.window, c.solver.window);
  const LyapunovPerronSolver solver(model, split, noise.frame, lp_options(c));
  std::vector<Vector> samples;
  for (const auto& s : c.solver.samples) {
    samples.push_back(Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size())));
  }
  GraphOptions options;
  options.fd_step = c.solver.fd_step;
  options.threads = c.threads;
  run.graph = manifold_graph(solver, samples, options);
  run.sigma_z0 = noise.frame.sigma_z(noise.frame.origin());
  run.original = pull_back_manifold(run.graph, run.sigma_z0);
  return run;
}

CoefficientSample rd_coefficient(const ExperimentConfig& c, std::uint64_t seed, double s) {
  if (c.model.name != "reaction_diffusion" || c.model.N < 3) {
    throw ValidationError("the sin 3x coefficient needs the reaction-diffusion model with N >= 3");
  }
  if (!(s != 0.0)) throw ValidationError("coefficient amplitude must be nonzero");
  const SpectralModel model = build_model(c.model);
  const TrichotomySplit split = build_split(model, c.trichotomy);
  const NoiseSample noise = make_noise(c, seed, c.solver.window, c.solver.window);
  const RandomFrame& frame = noise.frame;
  const Index o = frame.origin();
  const LyapunovPerronSolver solver(model, split, frame, lp_options(c));

  CoefficientSample out;
  out.z0 = frame.z(o);
  const double scale = std::exp(frame.sigma_z(o));
  Vector v(1);
  v(0) = s / scale;
  const LPSolution sol = solver.solve(v);
  const Vector& u0 = sol.trajectory.states[o - sol.trajectory.frame_offset];
  out.coefficient = scale * u0(2) / (s * s * s);
  out.contraction_ratio = sol.report.contraction_ratio;
  out.phi3 = ou_convolution(noise.path, 8.0).values[o];
  return out;
}

CoefficientEnsemble coefficient_ensemble(const ExperimentConfig& c, double s, Index paths,
                                         Index threads) {
  if (paths < 2) throw ValidationError("coefficient ensemble needs at least two paths");
  CoefficientEnsemble out;
  out.samples.resize(paths);
  parallel_for(paths, threads,
               [&](Index k) { out.samples[k] = rd_coefficient(c, path_seed(c, k), s); });
  std::vector<double> x, y;
  for (const auto& sample : out.samples) {
    x.push_back(sample.phi3);
    y.push_back(sample.coefficient);
  }
  double sum = 0.0;
  for (double v : y) sum += v;
  out.mean = sum / static_cast<double>(paths);
  double ss = 0.0;
  for (double v : y) ss += (v - out.mean) * (v - out.mean);
  out.standard_error = std::sqrt(ss / static_cast<double>(paths - 1) / static_cast<double>(paths));
  out.regression = fit_line(x, y);
  return out;
}

Vector attraction_initial_state(const ExperimentConfig& c, const TrichotomySplit& split,
                                Index dim) {
  if (split.center.empty()) throw ValidationError("attraction needs a nonempty center space");
  Vector u0 = Vector::Zero(static_cast<Eigen::Index>(dim));
  u0(static_cast<Eigen::Index>(split.center.front())) = c.attraction.amplitude;
  u0(static_cast<Eigen::Index>(c.attraction.offset_coordinate)) += c.attraction.offset;
  return u0;
}

AttractionRun attraction_run(const ExperimentConfig& c, std::uint64_t seed) {
  const SpectralModel model = build_model(c.model);
  const TrichotomySplit split = build_split(model, c.trichotomy);
  const AttractionConfig& a = c.attraction;
  const NoiseSample noise = make_noise(c, seed, c.solver.window, a.horizon + c.solver.window);
  const RandomFrame& frame = noise.frame;
  const Index o = frame.origin();
  const Index n = cells(a.horizon, c.noise.dt);

  const Vector u0 = attraction_initial_state(c, split, model.dim);
  const Trajectory full = integrate_mild(model, frame, u0, o, o + n);
  const SolverGraphProvider graph(model, split, frame, lp_options(c));

  AttractionRun run;
  run.initial_defect = stable_distance(split, u0, graph.evaluate(center_part(split, u0), o));
  run.floor = a.floor * run.initial_defect;
  run.defect = stable_defect(full, graph, split, frame,
                             lattice(o, o + n, std::max<Index>(1, cells(a.sample_step, c.noise.dt))),
                             run.floor);
  try {
    run.fit = fit_decay(run.defect, run.floor);
  } catch (const NumericalError& e) {
    run.error = e.what();
  }
  return run;
}

AttractionEnsemble attraction_ensemble(const ExperimentConfig& c, Index paths, Index threads) {
  if (paths == 0) throw ValidationError("attraction ensemble is empty");
  AttractionEnsemble out;
  out.runs.resize(paths);
  parallel_for(paths, threads, [&](Index k) { out.runs[k] = attraction_run(c, path_seed(c, k)); });
  for (const auto& run : out.runs) {
    if (run.fit) {
      out.rates.push_back(run.fit->rate);
    } else {
      ++out.failures;
    }
  }
  if (out.rates.empty()) throw NumericalError("no path produced a decay fit");
  out.median_rate = median(out.rates);
  return out;
}

TrackingRun tracking_run(const ExperimentConfig& c, std::uint64_t seed, Index threads) {
  const SpectralModel model = build_model(c.model);
  const TrichotomySplit split = build_split(model, c.trichotomy);
  if (split.center.size() != 1) throw ValidationError("tracking needs a one-dimensional center");
  const AttractionConfig& a = c.attraction;
  const NoiseSample noise =
      make_noise(c, seed, c.solver.window, a.track_horizon + c.solver.window);
  const RandomFrame& frame = noise.frame;
  const Index o = frame.origin();
  const Index n = cells(a.track_horizon, c.noise.dt);

  const Vector u0 = attraction_initial_state(c, split, model.dim);
  const Trajectory full = integrate_mild(model, frame, u0, o, o + n);

  // Center samples bracketing the realized center coordinate.
  double lo = kInfinity, hi = -kInfinity;
  for (const Vector& u : full.states) {
    const double v = center_part(split, u)(0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double pad = 0.1 * (hi - lo) + 0.05 * std::max(std::abs(lo), std::abs(hi));
  lo -= pad;
  hi += pad;
  std::vector<double> amplitudes;
  for (Index k = 0; k < a.table_points; ++k) {
    amplitudes.push_back(lo + (hi - lo) * static_cast<double>(k) /
                                  static_cast<double>(a.table_points - 1));
  }
  const SolverGraphProvider solver(model, split, frame, lp_options(c));
  const TabulatedGraphProvider graph = tabulate_graph(
      solver, lattice(o, o + n, std::max<Index>(1, cells(a.table_step, c.noise.dt))), amplitudes,
      threads);

  TrackingRun run;
  const std::vector<Index> samples =
      lattice(o, o + n, std::max<Index>(1, cells(a.sample_step, c.noise.dt)));
  const double x0 = stable_distance(split, u0, graph.evaluate(center_part(split, u0), o));
  run.floor = a.floor * x0;
  run.defect = stable_defect(full, graph, split, frame, samples, run.floor);
  run.fit = fit_decay(run.defect, run.floor);

  const Trajectory reduced = asymptotic_phase(model, split, graph, frame, full, o + n, o);
  std::vector<Index> late;
  for (Index i : samples) {
    if (frame.time(i) >= 1.0 - 1e-9) late.push_back(i);
  }
  run.errors = tracking_errors(full, reduced, graph, split, frame, late);
  for (Index k = 0; k < run.errors.center_err.t.size(); ++k) {
    const double t = run.errors.center_err.t[k];
    run.worst_ratio = std::max(run.worst_ratio, run.errors.center_err.value[k] /
                                                    decay_envelope(run.fit, run.floor, t));
  }
  return run;
}

namespace {

ExpansionGraph configured_expansion(const ExperimentConfig& c, const SpectralModel& model,
                                    const TrichotomySplit& split, const BrownianPath& path) {
  const ExpansionConfig& e = c.expansion;
  if (e.graph == "cubic") {
    if (c.model.name != "reaction_diffusion") {
      throw ValidationError("the cubic expansion belongs to the reaction-diffusion model");
    }
    ExpansionGraph g = reaction_diffusion_expansion(c.model.a, c.model.sigma,
                                                    ou_convolution(path, 8.0), c.model.N);
    g.order_q = e.q;
    return g;
  }
  if (e.graph == "slow") {
    if (c.model.name != "coupled_slow" || c.model.a != 0.0) {
      throw ValidationError("the exact slow manifold needs the coupled model with a = 0");
    }
    ExpansionGraph g = coupled_slow_manifold(c.model.sigma, c.model.N);
    g.order_q = e.q;
    return g;
  }
  return zero_expansion(model.dim, split.center, e.q);
}

Vector probe_state(const ExperimentConfig& c, const TrichotomySplit& split) {
  if (!c.expansion.probe_state.empty()) {
    return Eigen::Map<const Vector>(c.expansion.probe_state.data(),
                                    static_cast<Eigen::Index>(c.expansion.probe_state.size()));
  }
  Vector v = Vector::Zero(static_cast<Eigen::Index>(split.center.size()));
  v(0) = c.attraction.amplitude;
  return v;
}

}  // namespace

ResidualDecay residual_run(const ExperimentConfig& c, std::uint64_t seed) {
  const SpectralModel model = build_model(c.model);
  const TrichotomySplit split = build_split(model, c.trichotomy);
  if (c.expansion.dt_probes.empty()) throw ValidationError("no dt_probes configured");
  const double longest = *std::max_element(c.expansion.dt_probes.begin(),
                                           c.expansion.dt_probes.end());
  const double shortest = *std::min_element(c.expansion.dt_probes.begin(),
                                            c.expansion.dt_probes.end());
  // The probe grid is resolved at the shortest probe rather than at noise.dt.
  ExperimentConfig fine = c;
  fine.noise.dt = shortest;
  const NoiseSample noise = make_noise(fine, seed, 0.0, longest);
  const ExpansionProvider g(configured_expansion(c, model, split, noise.path), noise.frame);
  return residual_decay(g, model, split, noise.frame, probe_state(c, split), c.expansion.dt_probes);
}

OrderFitReport order_fit_run(const ExperimentConfig& c, std::uint64_t seed) {
  const SpectralModel model = build_model(c.model);
  const TrichotomySplit split = build_split(model, c.trichotomy);
  const NoiseSample noise = make_noise(c, seed, c.solver.window, c.solver.window);
  const ExpansionProvider g(configured_expansion(c, model, split, noise.path), noise.frame);
  const SolverGraphProvider h(model, split, noise.frame, lp_options(c));
  Vector direction = Vector::Zero(static_cast<Eigen::Index>(split.center.size()));
  direction(0) = 1.0;
  return order_fit(g, h, noise.frame.origin(), direction, c.expansion.amplitudes, c.expansion.q,
                   c.solver.tol);
}

}  // namespace stochcm
