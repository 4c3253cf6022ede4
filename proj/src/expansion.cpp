#include "stochcm/expansion.hpp"

#include "stochcm/fit.hpp"
#include "stochcm/lyapunov_perron.hpp"

#include <algorithm>
#include <cmath>

namespace stochcm {

Vector ExpansionGraph::evaluate(const Vector& v, double sigma_z, Index frame_index) const {
  if (v.size() != static_cast<Eigen::Index>(center.size())) {
    throw ValidationError("center vector has the wrong dimension");
  }
  Vector out = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& term : terms) {
    double value = term.coefficient;
    for (Index c = 0; c < term.powers.size(); ++c) {
      if (term.powers[c] != 0) value *= std::pow(v(static_cast<Eigen::Index>(c)), term.powers[c]);
    }
    if (term.exp_power != 0) value *= std::exp(term.exp_power * sigma_z);
    for (const auto& [process, power] : term.process_factors) {
      const OUPath& p = processes.at(process);
      if (frame_index >= p.values.size()) {
        throw ValidationError("expansion evaluated outside its coefficient process");
      }
      value *= std::pow(p.values[frame_index], power);
    }
    out(static_cast<Eigen::Index>(term.target)) += value;
  }
  return out;
}

int ExpansionGraph::lowest_degree() const {
  int lowest = 0;
  for (const auto& term : terms) {
    int degree = 0;
    for (int p : term.powers) degree += p;
    lowest = lowest == 0 ? degree : std::min(lowest, degree);
  }
  return lowest;
}

ExpansionGraph reaction_diffusion_expansion(double a, double sigma, const OUPath& phi3, Index N) {
  if (N < 3) throw ValidationError("the cubic expansion needs the sin 3x mode (N >= 3)");
  ExpansionGraph g;
  g.dim = N;
  g.center = {0};
  g.order_q = 5;
  if (a == 0.0) return g;
  g.terms.push_back({{3}, 2, a / 32.0, 2, {}});
  if (sigma != 0.0) {
    g.processes.push_back(phi3);
    g.terms.push_back({{3}, 2, -a * sigma / 16.0, 2, {{0, 1}}});
  }
  return g;
}

ExpansionGraph coupled_slow_manifold(double sigma, Index N) {
  if (N < 2) throw ValidationError("coupled slow manifold needs N >= 2");
  ExpansionGraph g;
  g.dim = 2 * N;
  for (Index k = 0; k < N; ++k) g.center.push_back(k);
  g.order_q = 3;
  const int exp_power = sigma != 0.0 ? 1 : 0;
  // cos(j z) cos(k z) = (cos((j+k) z) + cos((k-j) z)) / 2.
  for (Index j = 0; j < N; ++j) {
    for (Index k = j; k < N; ++k) {
      std::vector<int> powers(N, 0);
      powers[j] += 1;
      powers[k] += 1;
      const double weight = j == k ? 0.5 : 1.0;
      for (Index m : {j + k, k - j}) {
        if (m >= N) continue;
        g.terms.push_back({powers, N + m, weight * coupled_kernel_symbol(0.0, m), exp_power, {}});
      }
    }
  }
  return g;
}

ExpansionGraph zero_expansion(Index dim, std::vector<Index> center, int order_q) {
  ExpansionGraph g;
  g.dim = dim;
  g.center = std::move(center);
  g.order_q = order_q;
  return g;
}

ExpansionProvider::ExpansionProvider(ExpansionGraph graph, RandomFrame frame)
    : graph_(std::move(graph)), frame_(std::move(frame)) {
  for (const auto& p : graph_.processes) {
    if (p.values.size() != frame_.grid().size()) {
      throw ValidationError("coefficient process does not live on the frame grid");
    }
  }
}

Vector ExpansionProvider::evaluate(const Vector& v, Index frame_index) const {
  return graph_.evaluate(v, frame_.sigma_z(frame_index), frame_index);
}

Vector invariance_residual(const GraphProvider& g, const SpectralModel& model,
                           const TrichotomySplit& split, const RandomFrame& frame, const Vector& v,
                           double dt_probe) {
  if (!(dt_probe > 0.0)) throw ValidationError("dt_probe must be positive");
  const double dt = frame.grid().dt();
  const auto cells = static_cast<Index>(std::llround(dt_probe / dt));
  if (cells == 0 || std::abs(static_cast<double>(cells) * dt - dt_probe) > 1e-9 * dt_probe) {
    throw ValidationError("dt_probe must be a whole number of frame cells");
  }
  const Index o = frame.origin();
  if (o + cells > frame.grid().n_steps()) throw ValidationError("dt_probe runs past the frame");

  const Vector state = embed_center(split, model.dim, v) + g.evaluate(v, o);
  const Vector next = etd_step(model, frame, state, frame_nonlinearity(model, frame, o, state), o,
                               o + cells);
  const Vector v_next = center_part(split, next);
  return (non_center_part(split, next) - g.evaluate(v_next, o + cells)) / dt_probe;
}

ResidualDecay residual_decay(const GraphProvider& g, const SpectralModel& model,
                             const TrichotomySplit& split, const RandomFrame& frame,
                             const Vector& v, const std::vector<double>& dt_probes) {
  if (dt_probes.size() < 2) throw ValidationError("residual decay needs at least two probes");
  ResidualDecay out;
  out.dt_probes = dt_probes;
  out.state_norm = (embed_center(split, model.dim, v) + g.evaluate(v, frame.origin())).norm();
  std::vector<double> lx, ly;
  for (double dt : dt_probes) {
    const double r = invariance_residual(g, model, split, frame, v, dt).norm();
    out.residuals.push_back(r);
    if (r > 0.0) {
      lx.push_back(std::log(dt));
      ly.push_back(std::log(r));
    }
  }
  if (lx.size() >= 2) out.slope = fit_line(lx, ly).slope;
  return out;
}

OrderFitReport order_fit(const GraphProvider& g, const GraphProvider& h, Index origin,
                         const Vector& direction, const std::vector<double>& amplitudes, int q,
                         double floor) {
  if (amplitudes.size() < 4) throw ValidationError("order fit needs at least four amplitudes");
  std::vector<double> sorted = amplitudes;
  std::sort(sorted.begin(), sorted.end());
  if (!(sorted.front() > 0.0) ||
      std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("order fit amplitudes must be distinct and positive");
  }
  if (sorted.back() < 2.0 * sorted.front()) {
    throw ValidationError("order fit amplitudes must span at least a factor of 2");
  }
  if (!(direction.norm() > 0.0)) throw ValidationError("order fit direction must be nonzero");
  const Vector d = direction / direction.norm();

  OrderFitReport report;
  report.amplitudes = amplitudes;
  report.target_q = q;
  std::vector<double> lx, ly;
  for (double A : amplitudes) {
    const Vector v = A * d;
    const double diff = (h.evaluate(v, origin) - g.evaluate(v, origin)).norm();
    report.differences.push_back(diff);
    if (diff > floor * A) {
      report.fitted_amplitudes.push_back(A);
      lx.push_back(std::log(A));
      ly.push_back(std::log(diff));
    }
  }
  if (lx.size() < 3) {
    report.degenerate = true;
    report.message = "indistinguishable at tolerance";
    return report;
  }
  report.slope = fit_line(lx, ly).slope;
  report.passed = report.slope >= q - 0.3;
  report.message = report.passed ? "order confirmed" : "slope below target";
  return report;
}

}  // namespace stochcm
