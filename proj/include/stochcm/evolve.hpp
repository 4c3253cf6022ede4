#pragma once

// The random frame (OU path plus its cumulative integral), state-transition
// operators, and exponential-Euler integration of the random equation
//
//   du/dt = A u + sigma*mu*z(t) u + G(t, u),   G(t, u) = e^{-sigma z} F^R(e^{sigma z} u).

#include "stochcm/noise.hpp"
#include "stochcm/spectral.hpp"

#include <cmath>
#include <complex>
#include <iosfwd>
#include <vector>

namespace stochcm {

/// phi_1(x) = (e^x - 1) / x with a Taylor branch near 0.
template <class T>
T phi1(T x) {
  if (std::abs(x) < 1e-2) {
    return T(1) + x * (T(1) / T(2) + x * (T(1) / T(6) + x * (T(1) / T(24) +
                                                           x * (T(1) / T(120) + x / T(720)))));
  }
  return (std::exp(x) - T(1)) / x;
}

/// phi_2(x) = (e^x - 1 - x) / x^2 with a Taylor branch near 0.
template <class T>
T phi2(T x) {
  if (std::abs(x) < 1e-2) {
    return T(1) / T(2) +
           x * (T(1) / T(6) + x * (T(1) / T(24) + x * (T(1) / T(120) +
                                                      x * (T(1) / T(720) + x / T(5040)))));
  }
  return (std::exp(x) - T(1) - x) / (x * x);
}

/// OU path seen as the noise of the random equation.
///
/// log_factor(i) = sigma * mu * integral of z from the origin to t_i, by the
/// trapezoid rule on the grid. The origin is the grid point t = 0 when the grid
/// contains it, else the first grid point.
class RandomFrame {
 public:
  RandomFrame(OUPath ou, double sigma);

  const TimeGrid& grid() const noexcept { return ou_.grid; }
  const OUPath& ou() const noexcept { return ou_; }
  double sigma() const noexcept { return sigma_; }
  double mu() const noexcept { return ou_.rate; }
  Index origin() const noexcept { return origin_; }

  double z(Index i) const { return ou_.values[i]; }
  double sigma_z(Index i) const { return sigma_ * ou_.values[i]; }
  double log_factor(Index i) const { return cumulative_[i]; }
  /// sigma * mu * integral of z over [t_from, t_to].
  double log_factor(Index to, Index from) const { return cumulative_[to] - cumulative_[from]; }
  /// Time of grid point i relative to the origin.
  double time(Index i) const { return ou_.grid.time(i); }

  /// theta_{t_i}: same path with the time origin moved to t_i.
  RandomFrame recentered(Index i) const;
  /// theta_{t_offset} with the points before `offset` dropped.
  RandomFrame shifted(Index offset) const;

 private:
  OUPath ou_;
  double sigma_;
  Index origin_ = 0;
  std::vector<double> cumulative_;
};

/// Frame with z identically zero on the grid.
RandomFrame quiet_frame(const TimeGrid& grid, double sigma = 0.0, double mu = 1.0);

enum class Subspace { All, Center, Stable, Unstable, Dichotomy };

/// Psi_A(t, s) restricted to a subspace, as a block-diagonal matrix.
/// `Dichotomy` is B(t - s): the stable part for t >= s and minus the unstable
/// part for t < s. Throws ValidationError when t or s is off the grid.
Matrix state_transition(const SpectralModel& model, const TrichotomySplit& split,
                        const RandomFrame& frame, double t, double s, Subspace which);

/// G(t_i, u) on the frame.
Vector frame_nonlinearity(const SpectralModel& model, const RandomFrame& frame, Index i,
                          const Vector& u);

/// One exponential-Euler step from grid point `from` to grid point `to`
/// (either direction, any distance) with the nonlinearity frozen at g:
///   u_to = e^{x} u + tau * phi_1(x) g,  x = A tau + log_factor(to, from).
Vector etd_step(const SpectralModel& model, const RandomFrame& frame, const Vector& u,
                const Vector& g, Index from, Index to);

struct Trajectory {
  TimeGrid grid;
  std::vector<Vector> states;
  /// Frame index of states[0].
  Index frame_offset = 0;
};

/// Mild solution by exponential Euler from grid point `from` to `to`. With
/// to < from the equation is integrated backward in time. States are stored
/// in increasing time order. Throws NumericalError when |u| exceeds the
/// ceiling (default 1e6 |u0|).
Trajectory integrate_mild(const SpectralModel& model, const RandomFrame& frame, const Vector& u0,
                          Index from, Index to, double ceiling = 0.0);

/// Forward from the frame origin to the end of the grid.
Trajectory integrate_mild(const SpectralModel& model, const RandomFrame& frame, const Vector& u0);

/// |u(t + s, u0, omega) - u(t, u(s, u0, omega), theta_s omega)| with t and s
/// in steps counted from the frame origin.
double cocycle_check(const SpectralModel& model, const RandomFrame& frame, const Vector& u0,
                     Index t_steps, Index s_steps);

/// CSV `t,mode_1,...,mode_N`, 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace stochcm
