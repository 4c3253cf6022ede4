#include "stochcm/conjugacy.hpp"

#include <cmath>

namespace stochcm {

namespace {

Vector apply_linear(const SpectralModel& model, const Vector& u) {
  Vector out(u.size());
  for (const auto& b : model.blocks) {
    const auto i = static_cast<Eigen::Index>(b.first);
    if (b.size == 1) {
      out(i) = b.re * u(i);
    } else {
      out(i) = b.re * u(i) + b.im * u(i + 1);
      out(i + 1) = -b.im * u(i) + b.re * u(i + 1);
    }
  }
  return out;
}

}  // namespace

Vector to_random_frame(const Vector& u, double z, double sigma) {
  return u * std::exp(-sigma * z);
}

Vector from_random_frame(const Vector& u_star, double z, double sigma) {
  return u_star * std::exp(sigma * z);
}

Vector conjugated_nonlinearity(const SpectralModel& model, double sigma_z, const Vector& u) {
  Vector out = Vector::Zero(u.size());
  if (model.parts.empty()) return out;
  double chi = 1.0;
  if (std::isfinite(model.cutoff_radius)) {
    const double r = std::exp(sigma_z) * u.norm();
    if (r >= 2.0 * model.cutoff_radius) return out;
    chi = cutoff(r, model.cutoff_radius);
  }
  for (const auto& part : model.parts) {
    out += std::exp((part.degree - 1) * sigma_z) * part.eval(u);
  }
  return chi * out;
}

Vector conjugated_nonlinearity(const SpectralModel& model, const OUPath& ou, Index t_index,
                               const Vector& u) {
  if (t_index >= ou.values.size()) throw ValidationError("time index outside the OU path");
  return conjugated_nonlinearity(model, model.sigma * ou.values[t_index], u);
}

ManifoldGraph pull_back_manifold(const ManifoldGraph& graph, double sigma_z) {
  ManifoldGraph out = graph;
  const double scale = std::exp(sigma_z);
  for (auto& v : out.samples) v *= scale;
  for (auto& h : out.values) h *= scale;
  return out;
}

ManifoldGraph pull_back_manifold(const ManifoldGraph& graph, const RandomFrame& frame) {
  return pull_back_manifold(graph, frame.sigma_z(frame.origin()));
}

Trajectory integrate_stratonovich_heun(const SpectralModel& model, const BrownianPath& path,
                                       const Vector& u0_star) {
  const TimeGrid& grid = path.grid;
  const double dt = grid.dt();
  const double sigma = model.sigma;
  auto drift = [&](const Vector& u) { return Vector(apply_linear(model, u) + model.nonlinearity(u)); };

  Trajectory traj{grid, {}, 0};
  traj.states.reserve(grid.size());
  traj.states.push_back(u0_star);
  Vector u = u0_star;
  for (Index i = 0; i < grid.n_steps(); ++i) {
    const double dw = path.increments[i];
    const Vector f = drift(u);
    const Vector pred = u + f * dt + sigma * dw * u;
    u = u + 0.5 * (f + drift(pred)) * dt + 0.5 * sigma * dw * (u + pred);
    if (!u.allFinite()) {
      throw NumericalError("Heun integration produced non-finite values", {grid.time(i + 1)});
    }
    traj.states.push_back(u);
  }
  return traj;
}

}  // namespace stochcm
