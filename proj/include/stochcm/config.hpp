#pragma once

// Experiment configuration: a JSON document with the sections
//   model, noise, trichotomy, solver, simulate, attraction, expansion
// plus `output` and `threads`. Every section is optional and falls back to
// the defaults below; unknown keys are rejected.

#include "stochcm/core.hpp"
#include "stochcm/spectral.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stochcm {

struct ModelConfig {
  std::string name = "reaction_diffusion";  ///< or damped_wave, coupled_slow
  double a = 0.01;
  double sigma = 0.0;
  Index N = 8;
  double cutoff_radius = 0.25;
  double cubic = 0.01;  ///< damped wave: f(u) = -cubic u^3
};

struct NoiseConfig {
  double mu = 1.0;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  Index paths = 1;
};

struct TrichotomyConfig {
  double gamma = 0.05;
  double alpha = kInfinity;
  double beta = 2.9;
  double eta = 1.0;
  int k_order = 1;
};

struct SolverConfig {
  double window = 10.0;
  double tol = 1e-13;
  Index max_iter = 200;
  double tail_tol = 1e-8;
  double fd_step = 1e-3;
  /// Center sample points of the manifold graph.
  std::vector<std::vector<double>> samples = {{-0.1}, {-0.05}, {0.05}, {0.1}};
};

struct SimulateConfig {
  double horizon = 10.0;
  /// Initial state; empty means the first manifold sample on the center axis.
  std::vector<double> initial;
};

struct AttractionConfig {
  double amplitude = 0.1;          ///< center coordinate of the initial state
  double offset = 0.01;            ///< off-manifold displacement
  Index offset_coordinate = 1;     ///< state coordinate receiving the offset
  double horizon = 6.0;            ///< decay-fit horizon
  double sample_step = 0.1;        ///< spacing of defect samples
  double floor = 1e-6;             ///< relative to the initial defect
  double track_horizon = 20.0;     ///< reduced-dynamics comparison horizon
  double table_step = 0.5;         ///< time spacing of the tabulated graph
  Index table_points = 7;          ///< center samples of the tabulated graph
};

struct ExpansionConfig {
  std::string graph = "cubic";  ///< cubic, zero or slow
  int q = 5;
  std::vector<double> amplitudes = {0.05, 0.07, 0.1, 0.14, 0.2};
  std::vector<double> dt_probes = {1e-2, 1e-3, 1e-4};
  std::vector<double> probe_state;  ///< center state for the residual probe
};

struct ExperimentConfig {
  ModelConfig model;
  NoiseConfig noise;
  TrichotomyConfig trichotomy;
  SolverConfig solver;
  SimulateConfig simulate;
  AttractionConfig attraction;
  ExpansionConfig expansion;
  std::string output = "out";
  Index threads = 1;

  /// Canonical JSON dump of the parsed document and its FNV-1a 64 hash.
  std::string canonical;
  std::uint64_t hash = 0;
};

/// Parses and validates; throws ValidationError with the offending key or
/// the module-level precondition message.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Runs every module precondition that can be checked without computing:
/// model construction, spectral split, gap-interval admissibility, grid and
/// solver parameters.
void validate_config(const ExperimentConfig& config);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a(const std::string& text);
std::string hash_hex(std::uint64_t hash);

}  // namespace stochcm
