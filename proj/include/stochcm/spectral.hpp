#pragma once

// Models that are diagonal (up to 2x2 rotation blocks) in a known eigenbasis,
// the center/stable/unstable split of their spectrum, and the spectral-gap
// condition that makes the Lyapunov-Perron operator a contraction.

#include "stochcm/core.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace stochcm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One invariant block of the linear part.
///
/// A size-1 block is a real eigenvalue `re`. A size-2 block holds the real
/// coordinates (p, q) of a complex-conjugate pair re +/- i*im, evolving as
///   p' = re*p + im*q,  q' = -im*p + re*q,
/// so the complex combination p + i*q grows at the rate re - i*im.
struct ModeBlock {
  Index first = 0;
  Index size = 1;
  double re = 0.0;
  double im = 0.0;
};

/// Homogeneous polynomial piece F_d of the nonlinearity, F_d(c*u) = c^d F_d(u).
struct PolynomialPart {
  int degree = 2;
  std::function<Vector(const Vector&)> eval;
};

/// Linear operator, nonlinearity and noise intensity in coefficient space.
///
/// The nonlinearity is F^R(u) = chi_R(|u|) * sum_d F_d(u), where chi_R is the
/// smooth cut-off (1 on |u| <= R, 0 on |u| >= 2R) and |.| is the Euclidean
/// norm of the coefficient vector. `lipschitz_bound` is a global Lipschitz
/// constant of F^R.
struct SpectralModel {
  std::string name;
  Index dim = 0;
  std::vector<ModeBlock> blocks;
  std::vector<PolynomialPart> parts;
  double sigma = 0.0;
  double cutoff_radius = kInfinity;
  double lipschitz_bound = 0.0;

  /// Real part of the eigenvalue attached to each coordinate.
  Vector eigenvalues() const;
  /// F^R(u).
  Vector nonlinearity(const Vector& u) const;
  /// sum_d F_d(u) without the cut-off.
  Vector polynomial(const Vector& u) const;
};

/// Checks the model invariants (finite spectrum, blocks tile 0..dim-1,
/// F(0) = 0, N >= 1) and throws ValidationError otherwise.
void validate_model(const SpectralModel& model);

/// Model with real eigenvalues and no nonlinearity.
SpectralModel linear_model(const Vector& eigenvalues, double sigma);

// ---------------------------------------------------------------------------
// Cut-off

/// chi_R(r): the C-infinity step built from f(x) = exp(-1/x).
double cutoff(double r, double radius);
/// d chi_R / dr; |chi_R'| <= 2 / R.
double cutoff_derivative(double r, double radius);

/// sup over r in [0, 2R] of chi_R(r) D(r) + |chi_R'(r)| V(r), where D bounds
/// |DF(u)| and V bounds |F(u)| on the sphere |u| = r. With R infinite the
/// result is 0 when D and V vanish identically and infinity otherwise.
double cutoff_lipschitz(const std::function<double(double)>& derivative_bound,
                        const std::function<double(double)>& value_bound, double radius);

// ---------------------------------------------------------------------------
// Galerkin products

/// Sine coefficients (modes 1..N) of the projection of u^3, with u given by
/// its sine coefficients c_k, k = 1..N (c(0) is the sin x coefficient).
Vector sine_cube(const Vector& c);

/// Cosine coefficients (modes 0..n_out-1) of the product of two cosine
/// series u = sum u_k cos kx, w = sum w_k cos kx.
Vector cosine_product(const Vector& u, const Vector& w, Index n_out);

// ---------------------------------------------------------------------------
// Spectral split and gap condition

struct TrichotomySplit {
  std::vector<Index> center;
  std::vector<Index> stable;
  std::vector<Index> unstable;
  double gamma = 0.0;
  double alpha = kInfinity;
  double beta = kInfinity;
  double bound_K = 1.0;

  /// Stable then unstable coordinates, each ascending.
  std::vector<Index> hyperbolic() const;
};

/// Requires alpha > gamma > 0 and beta > gamma. Blocks with |re| <= gamma go to
/// the center part, re <= -beta stable, re >= alpha unstable. A block in
/// (gamma, alpha) or (-beta, -gamma) is rejected with its eigenvalue named.
/// alpha or beta may be infinite.
TrichotomySplit split_spectrum(const SpectralModel& model, double gamma, double alpha,
                               double beta);

/// Samples the three semigroup bounds of the trichotomy with the diagonal
/// flow exp(re * t) (rotations have unit norm) on `samples` points.
bool verify_trichotomy(const TrichotomySplit& split, const SpectralModel& model,
                       double t_max, Index samples);

struct GapReport {
  double eta = 0.0;
  int k_order = 1;
  std::vector<double> lhs_values;
  bool satisfied = false;
  /// Admissible open interval (gamma, min(alpha, beta) / k) for eta.
  double eta_min = 0.0;
  double eta_max = 0.0;
};

/// lhs_i = K * lip * (1/(i*eta - gamma) + 1/(beta - i*eta) + 1/(alpha - i*eta))
/// for i = 1..k; infinite alpha or beta contribute 0.
GapReport gap_condition(const TrichotomySplit& split, double lip, double eta, int k_order);

// ---------------------------------------------------------------------------
// Built-in models

/// u_t = u_xx + u - a u^3 + sigma u o dW on (0, pi), Dirichlet, sine modes
/// 1..N. Eigenvalues 1 - k^2.
SpectralModel builtin_reaction_diffusion(double a, double sigma, Index N,
                                         double cutoff_radius = 0.25);

/// Damped wave u_tt + u_t = u_xx / 4 + u + f(u) with f(u) = -c u^3, on sine
/// modes 1..N. Mode k gives the eigenvalues -1/2 +/- sqrt(5/4 - k^2/4).
///
/// Coordinates per mode: a real pair (r, s) on the eigenvectors (1, d+) and
/// (1, d-), or a complex pair (p, q) for the eigenvector (1, -1/2) + i(0, w).
/// The displacement coefficient is r + s, respectively p.
SpectralModel builtin_damped_wave(double sigma, Index N, double cubic = 0.01,
                                  double cutoff_radius = 0.1);

/// Sine-coefficient displacement u_k of a damped-wave state.
Vector damped_wave_displacement(const Vector& x);

/// Coupled slow system on cosine modes k = 0..N-1 with state (u, v):
///   u_t = a u - u v,
///   v_t = v_zz - v + u^2 - 2 K(u^2 v),  K = (1 + 2a - d_zz)^{-1}.
/// u-eigenvalues a, v-eigenvalues -1 - k^2.
SpectralModel builtin_coupled_slow(double a, double sigma, Index N,
                                   double cutoff_radius = 1.0);

/// Symbol 1 / (1 + 2a + k^2) of K.
double coupled_kernel_symbol(double a, Index k);

}  // namespace stochcm
