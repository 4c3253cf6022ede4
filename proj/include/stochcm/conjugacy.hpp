#pragma once

// Change of variables u* = e^{sigma z} u between the stochastic equation
//   du* = (A u* + F^R(u*)) dt + sigma u* o dW
// and the random equation integrated in the random frame.

#include "stochcm/evolve.hpp"
#include "stochcm/graph.hpp"

namespace stochcm {

/// u* -> u* e^{-sigma z}.
Vector to_random_frame(const Vector& u, double z, double sigma);
/// u -> u e^{sigma z}.
Vector from_random_frame(const Vector& u_star, double z, double sigma);

/// G = e^{-sigma z} F^R(e^{sigma z} u), evaluated in closed form as
/// chi_R(e^{sigma z}|u|) * sum_d e^{(d-1) sigma z} F_d(u).
Vector conjugated_nonlinearity(const SpectralModel& model, double sigma_z, const Vector& u);
Vector conjugated_nonlinearity(const SpectralModel& model, const OUPath& ou, Index t_index,
                               const Vector& u);

/// Graph transported to the original variables:
///   v~ -> e^{sigma z} h(e^{-sigma z} v~).
/// Samples and values are mapped pairwise, so no interpolation is involved.
ManifoldGraph pull_back_manifold(const ManifoldGraph& graph, double sigma_z);
ManifoldGraph pull_back_manifold(const ManifoldGraph& graph, const RandomFrame& frame);

/// Stratonovich Heun integration of the stochastic equation in the original
/// variables from the first grid point of `path`, used as a cross-check of
/// the conjugacy.
Trajectory integrate_stratonovich_heun(const SpectralModel& model, const BrownianPath& path,
                                       const Vector& u0_star);

}  // namespace stochcm
