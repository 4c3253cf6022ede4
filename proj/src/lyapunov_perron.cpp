#include "stochcm/lyapunov_perron.hpp"

#include "stochcm/conjugacy.hpp"
#include "stochcm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>

namespace stochcm {

namespace {

// Denominators below this fraction of the solution scale are rounding noise
// and do not enter the measured contraction ratio.
constexpr double kRatioFloor = 1e-11;

// Product-integration weights of one cell for the kernel e^{rate (t - s)}.
template <class T>
struct CellWeights {
  T grow;       // e^{x}, x = rate * dt
  T shrink;     // e^{-x}
  T fwd_left;   // int_{t_j}^{t_j+1} e^{rate(t_j+1 - s)} H ds = fwd_left H_j + fwd_right H_j+1
  T fwd_right;
  T back_left;  // int_{t_j}^{t_j+1} e^{rate(t_j - s)} H ds = back_left H_j + back_right H_j+1
  T back_right;
};

template <class T>
CellWeights<T> cell_weights(T rate, double dt) {
  const T x = rate * dt;
  CellWeights<T> w;
  w.grow = std::exp(x);
  w.shrink = std::exp(-x);
  w.fwd_left = dt * (phi1(x) - phi2(x));
  w.fwd_right = dt * phi2(x);
  w.back_left = dt * phi2(-x);
  w.back_right = dt * (phi1(-x) - phi2(-x));
  return w;
}

enum class Part { Center, Stable, Unstable };

// Fills out[j] for one block given the block's H values and center datum.
template <class T>
void sweep_block(Part part, T rate, double dt, Index zero, const std::vector<T>& h, T v,
                 std::vector<T>& out) {
  const Index n = h.size();
  const CellWeights<T> w = cell_weights(rate, dt);
  switch (part) {
    case Part::Stable: {
      T acc = T(0);
      out[0] = acc;
      for (Index j = 0; j + 1 < n; ++j) {
        acc = w.grow * acc + w.fwd_left * h[j] + w.fwd_right * h[j + 1];
        out[j + 1] = acc;
      }
      break;
    }
    case Part::Unstable: {
      T acc = T(0);
      out[n - 1] = acc;
      for (Index j = n - 1; j > 0; --j) {
        acc = w.shrink * acc + w.back_left * h[j - 1] + w.back_right * h[j];
        out[j - 1] = -acc;
      }
      break;
    }
    case Part::Center: {
      auto linear = [&](Index j) {
        const double t = (static_cast<double>(j) - static_cast<double>(zero)) * dt;
        return std::exp(rate * t) * v;
      };
      T acc = T(0);
      out[zero] = v;
      for (Index j = zero; j + 1 < n; ++j) {
        acc = w.grow * acc + w.fwd_left * h[j] + w.fwd_right * h[j + 1];
        out[j + 1] = linear(j + 1) + acc;
      }
      acc = T(0);
      for (Index j = zero; j > 0; --j) {
        acc = w.shrink * acc + w.back_left * h[j - 1] + w.back_right * h[j];
        out[j - 1] = linear(j - 1) - acc;
      }
      break;
    }
  }
}

Part part_of(const TrichotomySplit& split, Index coord) {
  if (std::binary_search(split.center.begin(), split.center.end(), coord)) return Part::Center;
  if (std::binary_search(split.stable.begin(), split.stable.end(), coord)) return Part::Stable;
  return Part::Unstable;
}

std::string describe(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

}  // namespace

double weighted_norm(const WeightedTrajectory& traj, const RandomFrame& frame) {
  double sup = 0.0;
  for (Index i = 0; i < traj.states.size(); ++i) {
    const Index f = traj.frame_offset + i;
    const double weight = std::exp(-traj.eta * std::abs(frame.time(f)) - frame.log_factor(f));
    sup = std::max(sup, weight * traj.states[i].norm());
  }
  return sup;
}

Vector embed_center(const TrichotomySplit& split, Index dim, const Vector& v) {
  if (v.size() != static_cast<Eigen::Index>(split.center.size())) {
    throw ValidationError("center vector has the wrong dimension");
  }
  Vector u = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (Index c = 0; c < split.center.size(); ++c) {
    u(static_cast<Eigen::Index>(split.center[c])) = v(static_cast<Eigen::Index>(c));
  }
  return u;
}

Vector center_part(const TrichotomySplit& split, const Vector& u) {
  Vector v(static_cast<Eigen::Index>(split.center.size()));
  for (Index c = 0; c < split.center.size(); ++c) {
    v(static_cast<Eigen::Index>(c)) = u(static_cast<Eigen::Index>(split.center[c]));
  }
  return v;
}

Vector non_center_part(const TrichotomySplit& split, const Vector& u) {
  Vector out = u;
  for (Index c : split.center) out(static_cast<Eigen::Index>(c)) = 0.0;
  return out;
}

Vector stable_part(const TrichotomySplit& split, const Vector& u) {
  Vector out = Vector::Zero(u.size());
  for (Index k : split.stable) out(static_cast<Eigen::Index>(k)) = u(static_cast<Eigen::Index>(k));
  return out;
}

LyapunovPerronSolver::LyapunovPerronSolver(SpectralModel model, TrichotomySplit split,
                                           RandomFrame frame, LPOptions options)
    : model_(std::move(model)),
      split_(std::move(split)),
      frame_(std::move(frame)),
      options_(options) {
  if (!(options_.window > 0.0)) throw ValidationError("window T must be positive");
  if (!(options_.tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (options_.max_iter == 0) throw ValidationError("max_iter must be at least 1");
  const TimeGrid& g = frame_.grid();
  const auto steps = static_cast<Index>(std::llround(options_.window / g.dt()));
  const Index o = frame_.origin();
  if (steps == 0 || o < steps || o + steps > g.n_steps()) {
    throw ValidationError("window [-T, T] with T = " + describe(options_.window) +
                          " does not fit inside the frame grid");
  }
  first_ = o - steps;
  zero_ = steps;
  count_ = 2 * steps + 1;

  const GapReport gap = gap_condition(split_, model_.lipschitz_bound, options_.eta, 1);
  gap_lhs_ = gap.lhs_values.front();
  if (!gap.satisfied) {
    throw ValidationError("gap condition violated: lhs = " + describe(gap_lhs_) + " >= 1");
  }
}

WeightedTrajectory LyapunovPerronSolver::zero_trajectory() const {
  const TimeGrid& g = frame_.grid();
  WeightedTrajectory w{TimeGrid(g.time(first_), g.time(first_ + count_ - 1), count_ - 1),
                       std::vector<Vector>(count_, Vector::Zero(static_cast<Eigen::Index>(model_.dim))),
                       options_.eta, first_};
  return w;
}

std::vector<Vector> LyapunovPerronSolver::to_y(const WeightedTrajectory& u) const {
  if (u.states.size() != count_ || u.frame_offset != first_) {
    throw ValidationError("trajectory does not live on the solver window");
  }
  std::vector<Vector> y(count_);
  for (Index j = 0; j < count_; ++j) y[j] = std::exp(-frame_.log_factor(first_ + j)) * u.states[j];
  return y;
}

WeightedTrajectory LyapunovPerronSolver::from_y(const std::vector<Vector>& y) const {
  WeightedTrajectory w = zero_trajectory();
  for (Index j = 0; j < count_; ++j) w.states[j] = std::exp(frame_.log_factor(first_ + j)) * y[j];
  return w;
}

double LyapunovPerronSolver::y_norm(const std::vector<Vector>& y) const {
  const double dt = frame_.grid().dt();
  double sup = 0.0;
  for (Index j = 0; j < count_; ++j) {
    const double t = (static_cast<double>(j) - static_cast<double>(zero_)) * dt;
    sup = std::max(sup, std::exp(-options_.eta * std::abs(t)) * y[j].norm());
  }
  return sup;
}

std::vector<Vector> LyapunovPerronSolver::sweep(const std::vector<Vector>& y, const Vector& v) const {
  const auto dim = static_cast<Eigen::Index>(model_.dim);
  const Vector v_full = embed_center(split_, model_.dim, v);

  std::vector<Vector> h(count_);
  for (Index j = 0; j < count_; ++j) {
    const Index f = first_ + j;
    const double z_log = frame_.log_factor(f);
    if (model_.parts.empty()) {
      h[j] = Vector::Zero(dim);
    } else {
      h[j] = std::exp(-z_log) *
             conjugated_nonlinearity(model_, frame_.sigma_z(f), std::exp(z_log) * y[j]);
    }
  }

  std::vector<Vector> out(count_, Vector(dim));
  const double dt = frame_.grid().dt();
  for (const auto& b : model_.blocks) {
    const Part part = part_of(split_, b.first);
    const auto i = static_cast<Eigen::Index>(b.first);
    if (b.size == 1) {
      std::vector<double> hb(count_), ob(count_);
      for (Index j = 0; j < count_; ++j) hb[j] = h[j](i);
      sweep_block<double>(part, b.re, dt, zero_, hb, v_full(i), ob);
      for (Index j = 0; j < count_; ++j) out[j](i) = ob[j];
    } else {
      using C = std::complex<double>;
      std::vector<C> hb(count_), ob(count_);
      for (Index j = 0; j < count_; ++j) hb[j] = C(h[j](i), h[j](i + 1));
      sweep_block<C>(part, C(b.re, -b.im), dt, zero_, hb, C(v_full(i), v_full(i + 1)), ob);
      for (Index j = 0; j < count_; ++j) {
        out[j](i) = ob[j].real();
        out[j](i + 1) = ob[j].imag();
      }
    }
  }
  return out;
}

WeightedTrajectory LyapunovPerronSolver::apply(const WeightedTrajectory& u, const Vector& v) const {
  return from_y(sweep(to_y(u), v));
}

LPSolution LyapunovPerronSolver::solve(const Vector& v) const {
  if (v.size() != static_cast<Eigen::Index>(split_.center.size()) || !v.allFinite()) {
    throw ValidationError("center vector must be finite with the center dimension");
  }
  ConvergenceReport report;
  report.theoretical_lhs = gap_lhs_;
  std::vector<Vector> y(count_, Vector::Zero(static_cast<Eigen::Index>(model_.dim)));
  const double v_norm = v.norm();
  double y_sup = 0.0;
  for (Index iter = 1; iter <= options_.max_iter; ++iter) {
    std::vector<Vector> next = sweep(y, v);
    double change = 0.0;
    const double dt = frame_.grid().dt();
    for (Index j = 0; j < count_; ++j) {
      const double t = (static_cast<double>(j) - static_cast<double>(zero_)) * dt;
      change = std::max(change, std::exp(-options_.eta * std::abs(t)) * (next[j] - y[j]).norm());
    }
    y = std::move(next);
    y_sup = y_norm(y);
    if (!std::isfinite(change) || !std::isfinite(y_sup)) {
      throw NumericalError("Picard iteration produced non-finite values", report.increments);
    }
    report.increments.push_back(change);
    report.iterations = iter;
    const double scale = std::max(v_norm, y_sup);
    if (iter >= 2) {
      const double previous = report.increments[iter - 2];
      if (previous > kRatioFloor * scale) {
        report.contraction_ratio = std::max(report.contraction_ratio, change / previous);
      }
    }
    // With no nonlinearity J^c does not depend on its argument.
    if (change <= options_.tol * scale || model_.parts.empty()) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged) {
    throw NumericalError("Picard iteration did not converge within max_iter", report.increments);
  }

  double tail = 0.0;
  if (!split_.stable.empty() && std::isfinite(split_.beta)) {
    const double gap = split_.beta - options_.eta;
    tail += std::exp(-gap * options_.window) / gap;
  }
  if (!split_.unstable.empty() && std::isfinite(split_.alpha)) {
    const double gap = split_.alpha - options_.eta;
    tail += std::exp(-gap * options_.window) / gap;
  }
  report.tail_bound = split_.bound_K * model_.lipschitz_bound * y_sup * tail;
  if (report.tail_bound > options_.tail_tol * v_norm) {
    throw NumericalError("window too short: truncation tail bound exceeds tolerance",
                         {report.tail_bound, options_.tail_tol * v_norm, options_.window});
  }
  return LPSolution{from_y(y), report};
}

Vector LyapunovPerronSolver::manifold_point(const Vector& v) const {
  const LPSolution sol = solve(v);
  // log_factor vanishes at t = 0, so u(0) = y(0).
  return non_center_part(split_, sol.trajectory.states[zero_]);
}

ManifoldGraph manifold_graph(const LyapunovPerronSolver& solver, const std::vector<Vector>& samples,
                             const GraphOptions& options) {
  const TrichotomySplit& split = solver.split();
  const Index c = split.center.size();
  ManifoldGraph graph;
  graph.dim = solver.model().dim;
  graph.center = split.center;
  graph.samples = samples;
  graph.values.assign(samples.size(), Vector());
  graph.eta = solver.options().eta;
  graph.window = solver.options().window;
  graph.tol = solver.options().tol;
  graph.theoretical_lhs = solver.gap_lhs();

  // Samples first, then the 2c finite-difference points.
  std::vector<Vector> points = samples;
  for (Index k = 0; k < c; ++k) {
    Vector e = Vector::Zero(static_cast<Eigen::Index>(c));
    e(static_cast<Eigen::Index>(k)) = options.fd_step;
    points.push_back(e);
    points.push_back(-e);
  }
  std::vector<std::optional<LPSolution>> sols(points.size());
  parallel_for(points.size(), options.threads, [&](Index i) { sols[i] = solver.solve(points[i]); });

  auto value_at = [&](Index i) {
    const auto& states = sols[i]->trajectory.states;
    return non_center_part(split, states[(states.size() - 1) / 2]);
  };
  for (Index i = 0; i < points.size(); ++i) {
    graph.contraction_ratio = std::max(graph.contraction_ratio, sols[i]->report.contraction_ratio);
    graph.tail_bound = std::max(graph.tail_bound, sols[i]->report.tail_bound);
  }
  for (Index i = 0; i < samples.size(); ++i) graph.values[i] = value_at(i);

  Matrix jac = Matrix::Zero(static_cast<Eigen::Index>(graph.dim), static_cast<Eigen::Index>(c));
  for (Index k = 0; k < c; ++k) {
    jac.col(static_cast<Eigen::Index>(k)) =
        (value_at(samples.size() + 2 * k) - value_at(samples.size() + 2 * k + 1)) /
        (2.0 * options.fd_step);
  }
  graph.tangency_norm = c ? jac.norm() : 0.0;
  graph.lipschitz_ratio = sampled_lipschitz(graph);
  const double lhs = graph.theoretical_lhs;
  graph.lipschitz_ceiling = split.bound_K * lhs / (1.0 - lhs);
  return graph;
}

SolverGraphProvider::SolverGraphProvider(SpectralModel model, TrichotomySplit split,
                                         RandomFrame frame, LPOptions options)
    : model_(std::move(model)), split_(std::move(split)), frame_(std::move(frame)), options_(options) {}

Vector SolverGraphProvider::evaluate(const Vector& v, Index frame_index) const {
  LyapunovPerronSolver solver(model_, split_, frame_.recentered(frame_index), options_);
  return solver.manifold_point(v);
}

TabulatedGraphProvider::TabulatedGraphProvider(std::vector<Index> frame_indices,
                                               std::vector<ManifoldGraph> graphs)
    : indices_(std::move(frame_indices)), graphs_(std::move(graphs)) {
  if (indices_.empty() || indices_.size() != graphs_.size()) {
    throw ValidationError("tabulated graph needs one graph per time index");
  }
  if (!std::is_sorted(indices_.begin(), indices_.end()) ||
      std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw ValidationError("tabulated graph time indices must increase strictly");
  }
  for (const auto& g : graphs_) {
    if (g.center_dim() != 1) throw ValidationError("tabulated graph needs one center dimension");
  }
}

Vector TabulatedGraphProvider::evaluate(const Vector& v, Index frame_index) const {
  if (frame_index < indices_.front() || frame_index > indices_.back()) {
    throw ValidationError("tabulated graph evaluated outside its time range");
  }
  const auto it = std::lower_bound(indices_.begin(), indices_.end(), frame_index);
  const auto k = static_cast<Index>(it - indices_.begin());
  if (*it == frame_index) return graphs_[k].evaluate(v);
  const double w = static_cast<double>(frame_index - indices_[k - 1]) /
                   static_cast<double>(indices_[k] - indices_[k - 1]);
  return (1.0 - w) * graphs_[k - 1].evaluate(v) + w * graphs_[k].evaluate(v);
}

TabulatedGraphProvider tabulate_graph(const SolverGraphProvider& provider,
                                      const std::vector<Index>& frame_indices,
                                      const std::vector<double>& amplitudes, Index threads) {
  if (provider.center_dim() != 1) throw ValidationError("tabulation needs one center dimension");
  std::vector<double> amps = amplitudes;
  std::sort(amps.begin(), amps.end());
  const Index na = amps.size();
  std::vector<Vector> values(frame_indices.size() * na);
  parallel_for(values.size(), threads, [&](Index k) {
    Vector v(1);
    v(0) = amps[k % na];
    values[k] = provider.evaluate(v, frame_indices[k / na]);
  });
  std::vector<ManifoldGraph> graphs(frame_indices.size());
  for (Index t = 0; t < frame_indices.size(); ++t) {
    ManifoldGraph& g = graphs[t];
    g.dim = static_cast<Index>(values[t * na].size());
    g.center = provider.split().center;
    for (Index a = 0; a < na; ++a) {
      Vector v(1);
      v(0) = amps[a];
      g.samples.push_back(v);
      g.values.push_back(values[t * na + a]);
    }
  }
  return TabulatedGraphProvider(frame_indices, std::move(graphs));
}

std::vector<InvarianceSample> invariance_check(const GraphProvider& graph,
                                               const SpectralModel& model,
                                               const TrichotomySplit& split,
                                               const RandomFrame& frame, const Vector& v0,
                                               const std::vector<Index>& frame_indices) {
  const Index o = frame.origin();
  Index last = o;
  for (Index i : frame_indices) {
    if (i < o) throw ValidationError("invariance check indices must not precede the origin");
    last = std::max(last, i);
  }
  const Vector u0 = embed_center(split, model.dim, v0) + graph.evaluate(v0, o);
  const Trajectory traj = integrate_mild(model, frame, u0, o, last);
  std::vector<InvarianceSample> out;
  for (Index i : frame_indices) {
    const Vector& u = traj.states[i - o];
    const Vector h = graph.evaluate(center_part(split, u), i);
    out.push_back({frame.time(i), (non_center_part(split, u) - h).norm()});
  }
  return out;
}

}  // namespace stochcm
