#pragma once

// Polynomial approximations g(v, omega) of the center manifold with
// noise-dependent coefficients, their one-step invariance residual, and
// the log-log order fit of |h - g| against |v|.

#include "stochcm/evolve.hpp"
#include "stochcm/graph.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stochcm {

/// coefficient * prod_c v_c^{powers[c]} * e^{exp_power sigma z(t)}
///   * prod (process_j(t))^{power_j}, added to state coordinate `target`.
struct ExpansionTerm {
  std::vector<int> powers;
  Index target = 0;
  double coefficient = 0.0;
  int exp_power = 0;
  std::vector<std::pair<Index, int>> process_factors;
};

struct ExpansionGraph {
  Index dim = 0;
  std::vector<Index> center;
  /// Truncation order: the graph is meant to match h^c up to O(|v|^q).
  int order_q = 2;
  std::vector<ExpansionTerm> terms;
  /// Coefficient processes referenced by the terms, on the frame grid.
  std::vector<OUPath> processes;

  /// g(v) with the noise factors taken at frame index i (full length, zero
  /// center entries).
  Vector evaluate(const Vector& v, double sigma_z, Index frame_index) const;
  /// Smallest total degree among the terms (0 for the zero graph).
  int lowest_degree() const;
};

/// Random-frame version of the cubic approximation of the reaction-diffusion
/// manifold, on the sin 3x coordinate:
///   g(s) = (a/32 - (a/16) sigma phi_3(t)) e^{2 sigma z(t)} s^3,
/// phi_3 the OU convolution of the noise at rate 8. The sigma term is omitted
/// for sigma = 0. Valid up to O(s^5, a^2, sigma^2).
ExpansionGraph reaction_diffusion_expansion(double a, double sigma, const OUPath& phi3, Index N);

/// Slow manifold of the coupled system with a = 0, in the random frame:
///   v_m = e^{sigma z(t)} (u^2)_m / (1 + m^2).
/// Exact for sigma = 0. For sigma != 0 it misses the correction from the
/// time dependence of e^{sigma z(t)} and is accurate to O(sigma) relative.
ExpansionGraph coupled_slow_manifold(double sigma, Index N);

/// Zero graph of the given layout.
ExpansionGraph zero_expansion(Index dim, std::vector<Index> center, int order_q);

/// GraphProvider over an expansion on a fixed frame.
class ExpansionProvider : public GraphProvider {
 public:
  ExpansionProvider(ExpansionGraph graph, RandomFrame frame);
  Index center_dim() const override { return graph_.center.size(); }
  Vector evaluate(const Vector& v, Index frame_index) const override;

 private:
  ExpansionGraph graph_;
  RandomFrame frame_;
};

/// One-step invariance defect at the frame origin.
///
/// The full state v + g(v) and the reduced state v are advanced by a single
/// exponential-Euler step of length dt_probe (a whole number of grid cells).
/// The reduced step uses g in place of h^c, so its center value coincides
/// with the center part of the full step. Returns
///   [P^{s+u} u_full(dt_probe) - g(v_reduced(dt_probe), theta_{dt_probe} omega)] / dt_probe.
/// For an invariant graph this is the local error of the step divided by
/// dt_probe, so it vanishes to first order.
Vector invariance_residual(const GraphProvider& g, const SpectralModel& model,
                           const TrichotomySplit& split, const RandomFrame& frame, const Vector& v,
                           double dt_probe);

struct ResidualDecay {
  std::vector<double> dt_probes;
  std::vector<double> residuals;  ///< |residual| per probe
  double slope = 0.0;             ///< log |residual| against log dt_probe
  double state_norm = 0.0;        ///< |v + g(v)|
};

ResidualDecay residual_decay(const GraphProvider& g, const SpectralModel& model,
                             const TrichotomySplit& split, const RandomFrame& frame,
                             const Vector& v, const std::vector<double>& dt_probes);

struct OrderFitReport {
  std::vector<double> amplitudes;
  std::vector<double> differences;
  /// Amplitudes whose difference is above the floor and enter the fit.
  std::vector<double> fitted_amplitudes;
  double slope = 0.0;
  int target_q = 0;
  bool degenerate = false;
  bool passed = false;
  std::string message;
};

/// |h(A d) - g(A d)| at the frame origin for each amplitude A along the unit
/// direction d, then the least-squares slope of log difference against log A.
/// Differences at or below floor * A are excluded; fewer than three points
/// above the floor give a degenerate report ("indistinguishable at
/// tolerance") instead of a fit. Passes when slope >= q - 0.3.
///
/// Needs at least four distinct positive amplitudes spanning a factor >= 2.
OrderFitReport order_fit(const GraphProvider& g, const GraphProvider& h, Index origin,
                         const Vector& direction, const std::vector<double>& amplitudes, int q,
                         double floor = 1e-13);

}  // namespace stochcm
