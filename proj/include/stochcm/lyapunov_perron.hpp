#pragma once

// Lyapunov-Perron construction of the center manifold.
//
// The unknown is the whole trajectory u(t), t in [-T, T], through the center
// point v. The solver works with y(t) = e^{-Z(t)} u(t), Z the frame log factor,
// so that the weighted norm becomes sup e^{-eta|t|} |y(t)| and the operator is
//
//   center:   y_c(t) = e^{A t} v + int_0^t e^{A(t-s)} H(s) ds
//   stable:   y_s(t) = int_{-T}^t e^{A(t-s)} H(s) ds
//   unstable: y_u(t) = -int_t^T e^{A(t-s)} H(s) ds
//
// with H(s) = e^{-Z(s)} G(s, e^{Z(s)} y(s)). The integrals are evaluated by
// product integration: H is interpolated linearly on each cell and the
// exponential kernel is integrated exactly.

#include "stochcm/evolve.hpp"
#include "stochcm/graph.hpp"

#include <vector>

namespace stochcm {

struct WeightedTrajectory {
  TimeGrid grid;
  std::vector<Vector> states;
  double eta = 1.0;
  /// Frame index of states[0].
  Index frame_offset = 0;
};

/// sup_t e^{-eta|t| - log_factor(t)} |u(t)| over the grid points.
double weighted_norm(const WeightedTrajectory& traj, const RandomFrame& frame);

struct LPOptions {
  double eta = 1.0;
  double window = 10.0;  ///< T
  /// Picard stops once the weighted change is below tol * max(|v|, |y|).
  double tol = 1e-13;
  Index max_iter = 200;
  /// Window accepted when the analytic tail bound is below tail_tol * |v|.
  double tail_tol = 1e-8;
};

struct ConvergenceReport {
  Index iterations = 0;
  bool converged = false;
  /// Weighted norm of y_{n+1} - y_n per iteration.
  std::vector<double> increments;
  /// Largest increments[n] / increments[n-1] over iterations whose previous
  /// increment is above the rounding floor; 0 when none qualifies.
  double contraction_ratio = 0.0;
  double theoretical_lhs = 0.0;
  double tail_bound = 0.0;
};

struct LPSolution {
  WeightedTrajectory trajectory;
  ConvergenceReport report;
};

class LyapunovPerronSolver {
 public:
  /// The frame must contain [-T, T] around its origin; otherwise
  /// ValidationError. The gap condition for k = 1 must hold.
  LyapunovPerronSolver(SpectralModel model, TrichotomySplit split, RandomFrame frame,
                       LPOptions options);

  const SpectralModel& model() const noexcept { return model_; }
  const TrichotomySplit& split() const noexcept { return split_; }
  const RandomFrame& frame() const noexcept { return frame_; }
  const LPOptions& options() const noexcept { return options_; }
  double gap_lhs() const noexcept { return gap_lhs_; }
  Index center_dim() const noexcept { return split_.center.size(); }

  /// One application of J^c to a trajectory (u variables) for center point v.
  WeightedTrajectory apply(const WeightedTrajectory& u, const Vector& v) const;

  /// Picard iteration from the zero trajectory. Throws NumericalError with the
  /// increment history on non-convergence and when the window is too short.
  LPSolution solve(const Vector& v) const;

  /// h^c(v): non-center part of the fixed point at t = 0 (full length).
  Vector manifold_point(const Vector& v) const;

  /// Zero trajectory on the solver window.
  WeightedTrajectory zero_trajectory() const;

 private:
  std::vector<Vector> sweep(const std::vector<Vector>& y, const Vector& v) const;
  std::vector<Vector> to_y(const WeightedTrajectory& u) const;
  WeightedTrajectory from_y(const std::vector<Vector>& y) const;
  double y_norm(const std::vector<Vector>& y) const;

  SpectralModel model_;
  TrichotomySplit split_;
  RandomFrame frame_;
  LPOptions options_;
  double gap_lhs_ = 0.0;
  Index first_ = 0;  ///< frame index of -T
  Index zero_ = 0;   ///< index of t = 0 within the window
  Index count_ = 0;  ///< number of window points
};

/// Embeds center coordinates into a full-length state.
Vector embed_center(const TrichotomySplit& split, Index dim, const Vector& v);
/// Center coordinates of a full-length state.
Vector center_part(const TrichotomySplit& split, const Vector& u);
/// Copy of u with the center entries set to zero.
Vector non_center_part(const TrichotomySplit& split, const Vector& u);
/// Copy of u with every non-stable entry set to zero.
Vector stable_part(const TrichotomySplit& split, const Vector& u);

struct GraphOptions {
  /// Finite-difference step for Dh(0).
  double fd_step = 1e-3;
  Index threads = 1;
};

/// Solves at every sample and fills the diagnostics: contraction ratio (max
/// over samples), tail bound, Lipschitz ratio over sample pairs, the ceiling
/// K*lhs/(1 - lhs), and the central-difference tangency norm at 0.
ManifoldGraph manifold_graph(const LyapunovPerronSolver& solver, const std::vector<Vector>& samples,
                             const GraphOptions& options = {});

/// Graph lookup that runs a fresh Lyapunov-Perron solve on the recentered
/// frame theta_{t_i} omega for every query.
class SolverGraphProvider : public GraphProvider {
 public:
  SolverGraphProvider(SpectralModel model, TrichotomySplit split, RandomFrame frame,
                      LPOptions options);
  Index center_dim() const override { return split_.center.size(); }
  Vector evaluate(const Vector& v, Index frame_index) const override;
  const TrichotomySplit& split() const noexcept { return split_; }

 private:
  SpectralModel model_;
  TrichotomySplit split_;
  RandomFrame frame_;
  LPOptions options_;
};

/// Graph tabulated on a time lattice of frame indices and one-dimensional
/// center samples; lookups interpolate linearly in v and then in time.
class TabulatedGraphProvider : public GraphProvider {
 public:
  TabulatedGraphProvider(std::vector<Index> frame_indices, std::vector<ManifoldGraph> graphs);
  Index center_dim() const override { return 1; }
  Vector evaluate(const Vector& v, Index frame_index) const override;

 private:
  std::vector<Index> indices_;
  std::vector<ManifoldGraph> graphs_;
};

/// Builds a TabulatedGraphProvider by solving on the recentered frames at
/// `frame_indices` for every amplitude.
TabulatedGraphProvider tabulate_graph(const SolverGraphProvider& provider,
                                      const std::vector<Index>& frame_indices,
                                      const std::vector<double>& amplitudes, Index threads = 1);

struct InvarianceSample {
  double t = 0.0;
  double defect = 0.0;
};

/// Integrates the full system from v0 + h(v0, omega) and compares the
/// non-center part at the requested frame indices with h(P^c u(t), theta_t omega).
std::vector<InvarianceSample> invariance_check(const GraphProvider& graph,
                                               const SpectralModel& model,
                                               const TrichotomySplit& split,
                                               const RandomFrame& frame, const Vector& v0,
                                               const std::vector<Index>& frame_indices);

}  // namespace stochcm
