#pragma once

// Decay of the distance to the center manifold and tracking of the full
// dynamics by the reduced dynamics on the manifold.

#include "stochcm/evolve.hpp"
#include "stochcm/graph.hpp"

#include <iosfwd>
#include <vector>

namespace stochcm {

struct Series {
  std::vector<double> t;
  std::vector<double> value;
  /// Set when the graph domain was left and the series stops early.
  bool truncated = false;
};

struct DecayFit {
  double prefactor = 0.0;  ///< U
  double rate = 0.0;       ///< decay rate, positive for decay
  double r_squared = 0.0;
  double t_begin = 0.0;
  double t_end = 0.0;
  Index points = 0;
};

/// |P^s u(t) - P^s h(P^c u(t), theta_t omega)| at the given frame indices
/// (ascending, inside the trajectory). When `floor` is positive, sampling
/// stops after the first value at or below it.
Series stable_defect(const Trajectory& traj, const GraphProvider& graph,
                     const TrichotomySplit& split, const RandomFrame& frame,
                     const std::vector<Index>& frame_indices, double floor = 0.0);

/// Least-squares fit of log X = log U - rate * t over the initial contiguous
/// run of points with X > floor. Throws NumericalError with fewer than ten
/// such points.
DecayFit fit_decay(const Series& series, double floor);

/// max(U e^{-rate t}, floor).
double decay_envelope(const DecayFit& fit, double floor, double t);

/// Exponential-Euler integration of the center equation
///   v' = A_c v + sigma mu z v + P^c G(t, v + h(v, theta_t omega))
/// from grid point `from` to `to` (backward when to < from). States are
/// center vectors in increasing time order.
Trajectory integrate_reduced(const SpectralModel& model, const TrichotomySplit& split,
                             const GraphProvider& graph, const RandomFrame& frame,
                             const Vector& v0, Index from, Index to);

/// Reduced trajectory that coincides with the projected full trajectory at
/// frame index `late`, integrated backward to `early`.
Trajectory asymptotic_phase(const SpectralModel& model, const TrichotomySplit& split,
                            const GraphProvider& graph, const RandomFrame& frame,
                            const Trajectory& full, Index late, Index early);

struct TrackingErrors {
  Series center_err;  ///< |P^c u - v|
  Series stable_err;  ///< |P^s u - P^s h(v, theta_t omega)|
};

/// Both error series at the given frame indices, which must lie in both
/// trajectories.
TrackingErrors tracking_errors(const Trajectory& full, const Trajectory& reduced,
                               const GraphProvider& graph, const TrichotomySplit& split,
                               const RandomFrame& frame, const std::vector<Index>& frame_indices);

/// CSV `t,value`, 17 significant digits.
void write_series_csv(std::ostream& out, const Series& series, const char* value_name);

}  // namespace stochcm
