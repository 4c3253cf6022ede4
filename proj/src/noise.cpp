#include "stochcm/noise.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace stochcm {

namespace {

constexpr std::uint64_t kForwardStream = 1;
constexpr std::uint64_t kBackwardStream = 2;
constexpr std::uint64_t kStationaryStream = 3;

void require_same_grid(const TimeGrid& a, const TimeGrid& b) {
  if (!(a == b)) throw ValidationError("paths are defined on different time grids");
}

}  // namespace

TimeGrid::TimeGrid(double t0, double t1, Index n_steps) : t0_(t0), t1_(t1), n_steps_(n_steps) {
  if (!(std::isfinite(t0) && std::isfinite(t1)) || !(t1 > t0)) {
    throw ValidationError("time grid requires finite t1 > t0");
  }
  if (n_steps == 0) throw ValidationError("time grid requires n_steps >= 1");
}

TimeGrid TimeGrid::two_sided(double back, double forward, double dt) {
  if (!(dt > 0.0) || back < 0.0 || forward < 0.0) {
    throw ValidationError("two-sided grid requires dt > 0 and non-negative extents");
  }
  const auto n_back = static_cast<Index>(std::llround(back / dt));
  const auto n_forward = static_cast<Index>(std::llround(forward / dt));
  return TimeGrid(-static_cast<double>(n_back) * dt, static_cast<double>(n_forward) * dt,
                  n_back + n_forward);
}

std::optional<Index> TimeGrid::index_of(double t) const noexcept {
  const double h = dt();
  const double x = (t - t0_) / h;
  const double r = std::round(x);
  if (r < 0.0 || r > static_cast<double>(n_steps_) || std::abs(x - r) > 1e-9) return std::nullopt;
  return static_cast<Index>(r);
}

Index TimeGrid::zero_index() const {
  if (t0_ >= 0.0) {
    if (t0_ == 0.0) return 0;
    throw ValidationError("time grid does not contain t = 0");
  }
  auto idx = index_of(0.0);
  if (!idx) throw ValidationError("t = 0 is not a grid point");
  return *idx;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t ensemble_seed(std::uint64_t seed, std::uint64_t path_index) noexcept {
  return derive_seed(seed ^ path_index, 0xE45E);
}

std::vector<double> BrownianPath::values() const {
  std::vector<double> w(grid.size(), 0.0);
  const Index origin = grid.t0() < 0.0 ? grid.zero_index() : 0;
  for (Index i = origin; i < grid.n_steps(); ++i) w[i + 1] = w[i] + increments[i];
  for (Index i = origin; i > 0; --i) w[i - 1] = w[i] - increments[i - 1];
  return w;
}

BrownianPath BrownianPath::zero(const TimeGrid& grid) {
  return BrownianPath{grid, std::vector<double>(grid.n_steps(), 0.0), 0, 0.0};
}

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed) {
  BrownianPath path{grid, std::vector<double>(grid.n_steps()), seed, 0.0};
  const double scale = std::sqrt(grid.dt());
  std::normal_distribution<double> normal(0.0, 1.0);

  const Index origin = grid.t0() < 0.0 ? grid.zero_index() : 0;
  std::mt19937_64 forward(derive_seed(seed, kForwardStream));
  for (Index i = origin; i < grid.n_steps(); ++i) path.increments[i] = scale * normal(forward);
  if (origin > 0) {
    std::mt19937_64 backward(derive_seed(seed, kBackwardStream));
    normal.reset();
    for (Index i = origin; i > 0; --i) path.increments[i - 1] = scale * normal(backward);
  }
  std::mt19937_64 stationary(derive_seed(seed, kStationaryStream));
  normal.reset();
  path.stationary_normal = normal(stationary);
  return path;
}

BrownianPath coarsen(const BrownianPath& path, Index factor) {
  if (factor == 0 || path.grid.n_steps() % factor != 0) {
    throw ValidationError("coarsening factor must divide the number of steps");
  }
  BrownianPath out{TimeGrid(path.grid.t0(), path.grid.t1(), path.grid.n_steps() / factor),
                   std::vector<double>(path.grid.n_steps() / factor, 0.0), path.seed,
                   path.stationary_normal};
  for (Index i = 0; i < out.increments.size(); ++i) {
    double sum = 0.0;
    for (Index j = 0; j < factor; ++j) sum += path.increments[i * factor + j];
    out.increments[i] = sum;
  }
  return out;
}

OUPath ou_stationary(const BrownianPath& path, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("OU rate mu must be positive");
  const double dt = path.grid.dt();
  const double decay = std::exp(-mu * dt);
  const double gain = std::sqrt(-std::expm1(-2.0 * mu * dt) / (2.0 * mu * dt));

  OUPath ou{path.grid, std::vector<double>(path.grid.size()), mu};
  ou.values[0] = path.stationary_normal / std::sqrt(2.0 * mu);
  for (Index i = 0; i < path.grid.n_steps(); ++i) {
    ou.values[i + 1] = decay * ou.values[i] + gain * path.increments[i];
  }
  return ou;
}

OUPath ou_convolution(const BrownianPath& path, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ValidationError("convolution rate must be positive");
  }
  return ou_stationary(path, rate);
}

OUPath shift(const OUPath& path, Index offset) {
  if (offset >= path.grid.n_steps()) throw ValidationError("shift leaves no grid cells");
  const double t_offset = path.grid.time(offset);
  OUPath out{TimeGrid(0.0, path.grid.t1() - t_offset, path.grid.n_steps() - offset),
             std::vector<double>(path.values.begin() + static_cast<std::ptrdiff_t>(offset),
                                 path.values.end()),
             path.rate};
  return out;
}

ErgodicDiagnostics ergodic_diagnostics(const OUPath& ou) {
  const TimeGrid& g = ou.grid;
  if (g.t1() - g.t0() < 1.0) throw ValidationError("ergodic diagnostics need a horizon >= 1");
  const double horizon = std::max(std::abs(g.t0()), std::abs(g.t1()));
  ErgodicDiagnostics d;
  double integral = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    const double t = std::abs(g.time(i));
    if (t >= 0.5 * horizon && t > 0.0) {
      d.sublinear_ratio = std::max(d.sublinear_ratio, std::abs(ou.values[i]) / t);
    }
    if (i + 1 < g.size()) integral += 0.5 * (ou.values[i] + ou.values[i + 1]) * g.dt();
  }
  d.time_average = integral / (g.t1() - g.t0());
  return d;
}

void write_path_csv(std::ostream& out, const BrownianPath& path, const OUPath& z,
                    std::span<const OUPath> phis) {
  require_same_grid(path.grid, z.grid);
  for (const auto& phi : phis) require_same_grid(path.grid, phi.grid);

  out << "t,W,z";
  for (const auto& phi : phis) {
    std::ostringstream label;
    label << phi.rate;
    out << ",phi_" << label.str();
  }
  out << '\n';

  const auto w = path.values();
  out << std::setprecision(17);
  for (Index i = 0; i < path.grid.size(); ++i) {
    out << path.grid.time(i) << ',' << w[i] << ',' << z.values[i];
    for (const auto& phi : phis) out << ',' << phi.values[i];
    out << '\n';
  }
}

}  // namespace stochcm
