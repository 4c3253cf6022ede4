#include "stochcm/evolve.hpp"

#include "stochcm/conjugacy.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace stochcm {

RandomFrame::RandomFrame(OUPath ou, double sigma) : ou_(std::move(ou)), sigma_(sigma) {
  if (ou_.values.size() != ou_.grid.size()) {
    throw ValidationError("OU path length does not match its grid");
  }
  if (!std::isfinite(sigma)) throw ValidationError("noise intensity must be finite");
  const TimeGrid& g = ou_.grid;
  if (g.t0() < 0.0 && g.t1() >= 0.0) {
    auto idx = g.index_of(0.0);
    origin_ = idx ? *idx : 0;
  }
  cumulative_.assign(g.size(), 0.0);
  const double w = 0.5 * sigma_ * ou_.rate * g.dt();
  for (Index i = origin_; i < g.n_steps(); ++i) {
    cumulative_[i + 1] = cumulative_[i] + w * (ou_.values[i] + ou_.values[i + 1]);
  }
  for (Index i = origin_; i > 0; --i) {
    cumulative_[i - 1] = cumulative_[i] - w * (ou_.values[i - 1] + ou_.values[i]);
  }
}

RandomFrame RandomFrame::recentered(Index i) const {
  const TimeGrid& g = ou_.grid;
  if (i > g.n_steps()) throw ValidationError("recentering index outside the grid");
  const double dt = g.dt();
  const double back = static_cast<double>(i) * dt;
  const double forward = static_cast<double>(g.n_steps() - i) * dt;
  OUPath ou = ou_;
  if (i == 0) {
    ou.grid = TimeGrid(0.0, forward, g.n_steps());
  } else if (i == g.n_steps()) {
    ou.grid = TimeGrid(-back, 0.0, g.n_steps());
  } else {
    ou.grid = TimeGrid(-back, forward, g.n_steps());
  }
  return RandomFrame(std::move(ou), sigma_);
}

RandomFrame RandomFrame::shifted(Index offset) const {
  return RandomFrame(shift(ou_, offset), sigma_);
}

RandomFrame quiet_frame(const TimeGrid& grid, double sigma, double mu) {
  return RandomFrame(OUPath{grid, std::vector<double>(grid.size(), 0.0), mu}, sigma);
}

namespace {

Index grid_index(const TimeGrid& grid, double t) {
  auto idx = grid.index_of(t);
  if (!idx) throw ValidationError("time is not a grid point of the frame");
  return *idx;
}

std::vector<char> subspace_mask(const TrichotomySplit& split, Index dim, Subspace which,
                                bool forward) {
  std::vector<char> mask(dim, 0);
  auto mark = [&](const std::vector<Index>& set) {
    for (Index k : set) mask[k] = 1;
  };
  switch (which) {
    case Subspace::All:
      std::fill(mask.begin(), mask.end(), 1);
      break;
    case Subspace::Center:
      mark(split.center);
      break;
    case Subspace::Stable:
      mark(split.stable);
      break;
    case Subspace::Unstable:
      mark(split.unstable);
      break;
    case Subspace::Dichotomy:
      mark(forward ? split.stable : split.unstable);
      break;
  }
  return mask;
}

}  // namespace

Matrix state_transition(const SpectralModel& model, const TrichotomySplit& split,
                        const RandomFrame& frame, double t, double s, Subspace which) {
  const double t_abs = t + frame.grid().time(frame.origin());
  const double s_abs = s + frame.grid().time(frame.origin());
  const Index it = grid_index(frame.grid(), t_abs);
  const Index is = grid_index(frame.grid(), s_abs);
  const double tau = frame.time(it) - frame.time(is);
  const double log_noise = frame.log_factor(it, is);
  const bool forward = it >= is;
  const auto mask = subspace_mask(split, model.dim, which, forward);
  const double sign = (which == Subspace::Dichotomy && !forward) ? -1.0 : 1.0;

  const auto n = static_cast<Eigen::Index>(model.dim);
  Matrix psi = Matrix::Zero(n, n);
  for (const auto& b : model.blocks) {
    if (!mask[b.first]) continue;
    const auto i = static_cast<Eigen::Index>(b.first);
    const double growth = sign * std::exp(b.re * tau + log_noise);
    if (b.size == 1) {
      psi(i, i) = growth;
    } else {
      const double c = std::cos(b.im * tau);
      const double sn = std::sin(b.im * tau);
      psi(i, i) = growth * c;
      psi(i, i + 1) = growth * sn;
      psi(i + 1, i) = -growth * sn;
      psi(i + 1, i + 1) = growth * c;
    }
  }
  return psi;
}

Vector frame_nonlinearity(const SpectralModel& model, const RandomFrame& frame, Index i,
                          const Vector& u) {
  return conjugated_nonlinearity(model, frame.sigma_z(i), u);
}

Vector etd_step(const SpectralModel& model, const RandomFrame& frame, const Vector& u,
                const Vector& g, Index from, Index to) {
  const double tau = frame.time(to) - frame.time(from);
  const double log_noise = frame.log_factor(to, from);
  Vector out(u.size());
  for (const auto& b : model.blocks) {
    const auto i = static_cast<Eigen::Index>(b.first);
    if (b.size == 1) {
      const double x = b.re * tau + log_noise;
      out(i) = std::exp(x) * u(i) + tau * phi1(x) * g(i);
    } else {
      // p + i q evolves at the complex rate re - i im.
      const std::complex<double> x(b.re * tau + log_noise, -b.im * tau);
      const std::complex<double> w(u(i), u(i + 1));
      const std::complex<double> gw(g(i), g(i + 1));
      const std::complex<double> next = std::exp(x) * w + tau * phi1(x) * gw;
      out(i) = next.real();
      out(i + 1) = next.imag();
    }
  }
  return out;
}

Trajectory integrate_mild(const SpectralModel& model, const RandomFrame& frame, const Vector& u0,
                          Index from, Index to, double ceiling) {
  const TimeGrid& g = frame.grid();
  if (from > g.n_steps() || to > g.n_steps()) {
    throw ValidationError("integration range outside the frame grid");
  }
  if (u0.size() != static_cast<Eigen::Index>(model.dim) || !u0.allFinite()) {
    throw ValidationError("initial state must be finite with the model dimension");
  }
  if (ceiling <= 0.0) ceiling = u0.norm() > 0.0 ? 1e6 * u0.norm() : kInfinity;

  const Index lo = std::min(from, to);
  const Index hi = std::max(from, to);
  const Index n = hi - lo;
  Trajectory traj{TimeGrid(g.time(lo), g.time(lo) + (n ? n : 1) * g.dt(), n ? n : 1), {}, lo};
  if (n == 0) {
    traj.states = {u0};
    return traj;
  }
  traj.states.assign(n + 1, Vector());
  const bool forward = to >= from;
  Vector u = u0;
  traj.states[from - lo] = u;
  for (Index step = 0; step < n; ++step) {
    const Index i = forward ? from + step : from - step;
    const Index j = forward ? i + 1 : i - 1;
    u = etd_step(model, frame, u, frame_nonlinearity(model, frame, i, u), i, j);
    const double norm = u.norm();
    if (!(norm <= ceiling)) {
      throw NumericalError("solution exceeded the blow-up ceiling", {frame.time(j), norm, ceiling});
    }
    traj.states[j - lo] = u;
  }
  return traj;
}

Trajectory integrate_mild(const SpectralModel& model, const RandomFrame& frame, const Vector& u0) {
  return integrate_mild(model, frame, u0, frame.origin(), frame.grid().n_steps());
}

double cocycle_check(const SpectralModel& model, const RandomFrame& frame, const Vector& u0,
                     Index t_steps, Index s_steps) {
  const Index o = frame.origin();
  if (o + t_steps + s_steps > frame.grid().n_steps()) {
    throw ValidationError("cocycle check runs past the end of the frame");
  }
  const Vector direct =
      integrate_mild(model, frame, u0, o, o + t_steps + s_steps).states.back();
  const Vector mid = integrate_mild(model, frame, u0, o, o + s_steps).states.back();
  const RandomFrame shifted = frame.shifted(o + s_steps);
  const Vector composed = integrate_mild(model, shifted, mid, 0, t_steps).states.back();
  return (direct - composed).norm();
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Index n = traj.states.empty() ? 0 : static_cast<Index>(traj.states.front().size());
  out << 't';
  for (Index k = 1; k <= n; ++k) out << ",mode_" << k;
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < traj.states.size(); ++i) {
    out << traj.grid.time(i);
    for (Index k = 0; k < n; ++k) out << ',' << traj.states[i](static_cast<Eigen::Index>(k));
    out << '\n';
  }
}

}  // namespace stochcm
