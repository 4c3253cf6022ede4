#include "stochcm/attraction.hpp"

#include "stochcm/fit.hpp"
#include "stochcm/lyapunov_perron.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace stochcm {

namespace {

const Vector& state_at(const Trajectory& traj, Index frame_index) {
  if (frame_index < traj.frame_offset || frame_index - traj.frame_offset >= traj.states.size()) {
    throw ValidationError("frame index outside the trajectory");
  }
  return traj.states[frame_index - traj.frame_offset];
}

}  // namespace

Series stable_defect(const Trajectory& traj, const GraphProvider& graph,
                     const TrichotomySplit& split, const RandomFrame& frame,
                     const std::vector<Index>& frame_indices, double floor) {
  Series out;
  for (Index i : frame_indices) {
    const Vector& u = state_at(traj, i);
    Vector h;
    try {
      h = graph.evaluate(center_part(split, u), i);
    } catch (const ValidationError&) {
      out.truncated = true;
      break;
    }
    const double x = (stable_part(split, u) - stable_part(split, h)).norm();
    out.t.push_back(frame.time(i));
    out.value.push_back(x);
    if (floor > 0.0 && x <= floor) break;
  }
  return out;
}

DecayFit fit_decay(const Series& series, double floor) {
  std::vector<double> t, logx;
  for (Index i = 0; i < series.value.size(); ++i) {
    if (!(series.value[i] > floor)) break;
    t.push_back(series.t[i]);
    logx.push_back(std::log(series.value[i]));
  }
  if (t.size() < 10) {
    throw NumericalError("decay fit needs at least 10 points above the floor",
                         {static_cast<double>(t.size()), floor});
  }
  const LineFit line = fit_line(t, logx);
  DecayFit fit;
  fit.prefactor = std::exp(line.intercept);
  fit.rate = -line.slope;
  fit.r_squared = line.r_squared;
  fit.t_begin = t.front();
  fit.t_end = t.back();
  fit.points = t.size();
  return fit;
}

double decay_envelope(const DecayFit& fit, double floor, double t) {
  return std::max(fit.prefactor * std::exp(-fit.rate * t), floor);
}

Trajectory integrate_reduced(const SpectralModel& model, const TrichotomySplit& split,
                             const GraphProvider& graph, const RandomFrame& frame,
                             const Vector& v0, Index from, Index to) {
  const TimeGrid& g = frame.grid();
  if (from > g.n_steps() || to > g.n_steps()) {
    throw ValidationError("integration range outside the frame grid");
  }
  const Index lo = std::min(from, to);
  const Index n = std::max(from, to) - lo;
  Trajectory traj{TimeGrid(g.time(lo), g.time(lo) + (n ? n : 1) * g.dt(), n ? n : 1), {}, lo};
  traj.states.assign(n + 1, Vector());
  const bool forward = to >= from;
  Vector v = v0;
  traj.states[from - lo] = v;
  for (Index step = 0; step < n; ++step) {
    const Index i = forward ? from + step : from - step;
    const Index j = forward ? i + 1 : i - 1;
    const Vector u = embed_center(split, model.dim, v) + graph.evaluate(v, i);
    v = center_part(split, etd_step(model, frame, u, frame_nonlinearity(model, frame, i, u), i, j));
    if (!v.allFinite()) throw NumericalError("reduced integration produced non-finite values");
    traj.states[j - lo] = v;
  }
  if (n == 0) traj.states.resize(1);
  return traj;
}

Trajectory asymptotic_phase(const SpectralModel& model, const TrichotomySplit& split,
                            const GraphProvider& graph, const RandomFrame& frame,
                            const Trajectory& full, Index late, Index early) {
  if (early > late) throw ValidationError("asymptotic phase needs early <= late");
  return integrate_reduced(model, split, graph, frame, center_part(split, state_at(full, late)),
                           late, early);
}

TrackingErrors tracking_errors(const Trajectory& full, const Trajectory& reduced,
                               const GraphProvider& graph, const TrichotomySplit& split,
                               const RandomFrame& frame, const std::vector<Index>& frame_indices) {
  TrackingErrors out;
  for (Index i : frame_indices) {
    const Vector& u = state_at(full, i);
    const Vector& v = state_at(reduced, i);
    const double t = frame.time(i);
    out.center_err.t.push_back(t);
    out.center_err.value.push_back((center_part(split, u) - v).norm());
    Vector h;
    try {
      h = graph.evaluate(v, i);
    } catch (const ValidationError&) {
      out.stable_err.truncated = true;
      continue;
    }
    out.stable_err.t.push_back(t);
    out.stable_err.value.push_back((stable_part(split, u) - stable_part(split, h)).norm());
  }
  return out;
}

void write_series_csv(std::ostream& out, const Series& series, const char* value_name) {
  out << "t," << value_name << '\n' << std::setprecision(17);
  for (Index i = 0; i < series.t.size(); ++i) out << series.t[i] << ',' << series.value[i] << '\n';
}

}  // namespace stochcm
