#pragma once

// Brownian paths and stationary Ornstein-Uhlenbeck processes on a uniform
// time grid.
//
// A path may extend to negative times. Increments on cells with t >= 0 come
// from a forward random stream, increments on cells with t < 0 from an
// independent backward stream consumed from t = 0 outward, so lengthening the
// window into the past never changes an existing increment.

#include "stochcm/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace stochcm {

class TimeGrid {
 public:
  /// Throws ValidationError unless t1 > t0 and n_steps >= 1.
  TimeGrid(double t0, double t1, Index n_steps);

  /// Grid with spacing `dt` covering [-back, forward]; both ends are rounded
  /// to whole steps so that t = 0 is a grid point.
  static TimeGrid two_sided(double back, double forward, double dt);

  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t1_; }
  Index n_steps() const noexcept { return n_steps_; }
  Index size() const noexcept { return n_steps_ + 1; }
  double dt() const noexcept { return (t1_ - t0_) / static_cast<double>(n_steps_); }
  double time(Index i) const noexcept { return t0_ + static_cast<double>(i) * dt(); }

  /// Index of the grid point at time t, if t lies on the grid (to 1e-9 dt).
  std::optional<Index> index_of(double t) const noexcept;
  /// Index of t = 0; throws ValidationError when 0 is not a grid point.
  Index zero_index() const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double t0_;
  double t1_;
  Index n_steps_;
};

/// SplitMix64 finalizer applied to (seed, stream); used to derive independent
/// sub-streams and per-path ensemble seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seed of ensemble member `path_index`.
std::uint64_t ensemble_seed(std::uint64_t seed, std::uint64_t path_index) noexcept;

struct BrownianPath {
  TimeGrid grid;
  std::vector<double> increments;  ///< one per cell, ~ N(0, dt)
  std::uint64_t seed = 0;
  /// Standard normal draw that fixes the stationary initial value of every OU
  /// process built from this path.
  double stationary_normal = 0.0;

  /// Path value W(t_i), normalized so that W = 0 at t = 0 (or at t0 when the
  /// grid starts after 0).
  std::vector<double> values() const;

  /// Path with all increments and the stationary draw equal to zero.
  static BrownianPath zero(const TimeGrid& grid);
};

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed);

/// Same path on a grid `factor` times coarser; increments are summed in
/// consecutive groups. Requires factor to divide n_steps.
BrownianPath coarsen(const BrownianPath& path, Index factor);

struct OUPath {
  TimeGrid grid;
  std::vector<double> values;
  double rate = 1.0;
};

/// Stationary solution of dz + mu z dt = dW.
///
/// Exact discretization z_{i+1} = exp(-mu dt) z_i + xi_i where the innovation
/// xi_i is the Brownian increment rescaled to the exact conditional variance
/// (1 - exp(-2 mu dt)) / (2 mu). z at the first grid point is
/// stationary_normal / sqrt(2 mu).
OUPath ou_stationary(const BrownianPath& path, double mu);

/// Coefficient process exp(-rate t) * dW/dt; identical recursion to
/// ou_stationary with mu = rate.
OUPath ou_convolution(const BrownianPath& path, double rate);

/// theta_s applied to an OU path (values from `offset` on, time rebased).
OUPath shift(const OUPath& path, Index offset);

struct ErgodicDiagnostics {
  /// max |z_i| / |t_i| over the far half of the horizon, |t_i| >= H/2 with
  /// H = max(|t0|, |t1|).
  double sublinear_ratio = 0.0;
  /// (1 / (t1 - t0)) * integral of z (trapezoid).
  double time_average = 0.0;
};

/// Requires t1 - t0 >= 1.
ErgodicDiagnostics ergodic_diagnostics(const OUPath& ou);

/// CSV with header `t,W,z` followed by one `phi_<rate>` column per extra
/// process; 17 significant digits.
void write_path_csv(std::ostream& out, const BrownianPath& path, const OUPath& z,
                    std::span<const OUPath> phis = {});

}  // namespace stochcm
