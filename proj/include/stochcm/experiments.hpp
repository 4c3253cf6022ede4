#pragma once

// Experiment pipelines shared by the command-line front-end and the
// acceptance runner. Each function takes a validated configuration and a
// path seed and is deterministic in both.

#include "stochcm/attraction.hpp"
#include "stochcm/config.hpp"
#include "stochcm/expansion.hpp"
#include "stochcm/fit.hpp"
#include "stochcm/lyapunov_perron.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stochcm {

SpectralModel build_model(const ModelConfig& config);
TrichotomySplit build_split(const SpectralModel& model, const TrichotomyConfig& config);
LPOptions lp_options(const ExperimentConfig& config);

/// Seed of ensemble member k (k = 0 is the configured seed itself).
std::uint64_t path_seed(const ExperimentConfig& config, Index k);

struct NoiseSample {
  BrownianPath path;
  RandomFrame frame;
};

/// Brownian path and random frame on [-back, forward] with the configured
/// dt and OU rate.
NoiseSample make_noise(const ExperimentConfig& config, std::uint64_t seed, double back,
                       double forward);

struct ManifoldRun {
  ManifoldGraph graph;     ///< random-frame graph h^c(v, omega)
  ManifoldGraph original;  ///< graph in the original variables
  double sigma_z0 = 0.0;
  GapReport gap;
};

/// Manifold graph at t = 0 on the configured samples.
ManifoldRun run_manifold(const ExperimentConfig& config, std::uint64_t seed);

struct CoefficientSample {
  double coefficient = 0.0;  ///< sin 3x coefficient of the original-frame graph divided by s^3
  double phi3 = 0.0;         ///< phi_3(0) of the realized path
  double z0 = 0.0;
  double contraction_ratio = 0.0;
};

/// Reaction-diffusion manifold at center amplitude s in the original
/// variables: the random-frame solve is done at e^{-sigma z(0)} s and mapped
/// back.
CoefficientSample rd_coefficient(const ExperimentConfig& config, std::uint64_t seed, double s);

struct CoefficientEnsemble {
  std::vector<CoefficientSample> samples;
  double mean = 0.0;
  double standard_error = 0.0;
  LineFit regression;  ///< coefficient against phi3
};

CoefficientEnsemble coefficient_ensemble(const ExperimentConfig& config, double s, Index paths,
                                         Index threads);

/// Off-manifold initial state: amplitude on the first center coordinate plus
/// the offset on `offset_coordinate`.
Vector attraction_initial_state(const ExperimentConfig& config, const TrichotomySplit& split,
                                Index dim);

struct AttractionRun {
  Series defect;
  double initial_defect = 0.0;
  double floor = 0.0;  ///< absolute floor
  std::optional<DecayFit> fit;
  std::string error;   ///< fit failure message when fit is empty
};

/// Stable defect of one path sampled with a fresh Lyapunov-Perron solve at
/// every sample time, and its decay fit.
AttractionRun attraction_run(const ExperimentConfig& config, std::uint64_t seed);

struct AttractionEnsemble {
  std::vector<AttractionRun> runs;
  std::vector<double> rates;  ///< rates of the successful fits
  double median_rate = 0.0;
  Index failures = 0;
};

AttractionEnsemble attraction_ensemble(const ExperimentConfig& config, Index paths, Index threads);

struct TrackingRun {
  Series defect;
  DecayFit fit;
  double floor = 0.0;
  TrackingErrors errors;
  /// Largest center_err / envelope over t in [1, track_horizon].
  double worst_ratio = 0.0;
};

/// Full trajectory, tabulated manifold, asymptotic-phase reduced trajectory
/// and the tracking errors on one path.
TrackingRun tracking_run(const ExperimentConfig& config, std::uint64_t seed, Index threads);

/// Invariance-residual decay of the configured expansion graph at the
/// configured probe state.
ResidualDecay residual_run(const ExperimentConfig& config, std::uint64_t seed);

/// Order fit of the Lyapunov-Perron graph against the configured expansion
/// along the first center direction.
OrderFitReport order_fit_run(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace stochcm
