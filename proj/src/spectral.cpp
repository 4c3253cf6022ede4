#include "stochcm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stochcm {

namespace {

double smooth_half(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// S(x) = f(x) / (f(x) + f(1 - x)) rises from 0 at x <= 0 to 1 at x >= 1.
double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double f = smooth_half(x);
  const double g = smooth_half(1.0 - x);
  return f / (f + g);
}

double smooth_step_derivative(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double f = smooth_half(x);
  const double g = smooth_half(1.0 - x);
  const double df = f / (x * x);
  const double dg = -g / ((1.0 - x) * (1.0 - x));
  return (df * g - f * dg) / ((f + g) * (f + g));
}

void require_radius(double radius) {
  if (!(radius > 0.0)) throw ValidationError("cut-off radius must be positive");
}

std::string describe(double value) {
  std::ostringstream s;
  s << value;
  return s.str();
}

}  // namespace

Vector SpectralModel::eigenvalues() const {
  Vector lambda(static_cast<Eigen::Index>(dim));
  for (const auto& b : blocks) {
    for (Index j = 0; j < b.size; ++j) lambda(static_cast<Eigen::Index>(b.first + j)) = b.re;
  }
  return lambda;
}

Vector SpectralModel::polynomial(const Vector& u) const {
  Vector out = Vector::Zero(u.size());
  for (const auto& part : parts) out += part.eval(u);
  return out;
}

Vector SpectralModel::nonlinearity(const Vector& u) const {
  if (parts.empty()) return Vector::Zero(u.size());
  const double chi = std::isfinite(cutoff_radius) ? cutoff(u.norm(), cutoff_radius) : 1.0;
  if (chi == 0.0) return Vector::Zero(u.size());
  return chi * polynomial(u);
}

void validate_model(const SpectralModel& model) {
  if (model.dim == 0) throw ValidationError("model dimension must be at least 1");
  Index next = 0;
  for (const auto& b : model.blocks) {
    if (b.first != next || (b.size != 1 && b.size != 2)) {
      throw ValidationError("model blocks must tile the coordinates with sizes 1 or 2");
    }
    if (!std::isfinite(b.re) || !std::isfinite(b.im)) {
      throw ValidationError("model eigenvalues must be finite");
    }
    next += b.size;
  }
  if (next != model.dim) throw ValidationError("model blocks do not cover every coordinate");
  if (!std::isfinite(model.sigma)) throw ValidationError("noise intensity must be finite");
  if (!(model.lipschitz_bound >= 0.0)) throw ValidationError("Lipschitz bound must be >= 0");
  const Vector f0 = model.polynomial(Vector::Zero(static_cast<Eigen::Index>(model.dim)));
  if (f0.size() != static_cast<Eigen::Index>(model.dim) || f0.lpNorm<Eigen::Infinity>() != 0.0) {
    throw ValidationError("nonlinearity must map 0 to 0 in the model dimension");
  }
}

SpectralModel linear_model(const Vector& eigenvalues, double sigma) {
  SpectralModel m;
  m.name = "linear";
  m.dim = static_cast<Index>(eigenvalues.size());
  for (Index k = 0; k < m.dim; ++k) {
    m.blocks.push_back({k, 1, eigenvalues(static_cast<Eigen::Index>(k)), 0.0});
  }
  m.sigma = sigma;
  validate_model(m);
  return m;
}

double cutoff(double r, double radius) {
  require_radius(radius);
  return 1.0 - smooth_step((r - radius) / radius);
}

double cutoff_derivative(double r, double radius) {
  require_radius(radius);
  return -smooth_step_derivative((r - radius) / radius) / radius;
}

double cutoff_lipschitz(const std::function<double(double)>& derivative_bound,
                        const std::function<double(double)>& value_bound, double radius) {
  if (!std::isfinite(radius)) {
    return derivative_bound(1.0) == 0.0 && value_bound(1.0) == 0.0 ? 0.0 : kInfinity;
  }
  require_radius(radius);
  constexpr Index samples = 4000;
  double sup = 0.0;
  for (Index i = 0; i <= samples; ++i) {
    const double r = 2.0 * radius * static_cast<double>(i) / static_cast<double>(samples);
    const double value = cutoff(r, radius) * derivative_bound(r) +
                         std::abs(cutoff_derivative(r, radius)) * value_bound(r);
    sup = std::max(sup, value);
  }
  return sup;
}

Vector sine_cube(const Vector& c) {
  const Eigen::Index n = c.size();
  // u^2 as a cosine series d_m, m = 0..2N.
  Vector d = Vector::Zero(2 * n + 1);
  for (Eigen::Index j = 1; j <= n; ++j) {
    for (Eigen::Index k = 1; k <= n; ++k) {
      const double p = 0.5 * c(j - 1) * c(k - 1);
      d(std::abs(j - k)) += p;
      d(j + k) -= p;
    }
  }
  // cos(m x) sin(k x) = (sin((k+m) x) + sin((k-m) x)) / 2.
  Vector out = Vector::Zero(n);
  for (Eigen::Index m = 0; m <= 2 * n; ++m) {
    if (d(m) == 0.0) continue;
    for (Eigen::Index k = 1; k <= n; ++k) {
      const double p = 0.5 * d(m) * c(k - 1);
      if (k + m <= n) out(k + m - 1) += p;
      const Eigen::Index diff = k - m;
      if (diff > 0 && diff <= n) out(diff - 1) += p;
      if (diff < 0 && -diff <= n) out(-diff - 1) -= p;
    }
  }
  return out;
}

Vector cosine_product(const Vector& u, const Vector& w, Index n_out) {
  const auto n = static_cast<Eigen::Index>(n_out);
  Vector out = Vector::Zero(n);
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (u(j) == 0.0) continue;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const double p = 0.5 * u(j) * w(k);
      if (j + k < n) out(j + k) += p;
      if (std::abs(j - k) < n) out(std::abs(j - k)) += p;
    }
  }
  return out;
}

std::vector<Index> TrichotomySplit::hyperbolic() const {
  std::vector<Index> h = stable;
  h.insert(h.end(), unstable.begin(), unstable.end());
  return h;
}

TrichotomySplit split_spectrum(const SpectralModel& model, double gamma, double alpha,
                               double beta) {
  if (!(gamma > 0.0) || !(alpha > gamma) || !(beta > gamma)) {
    throw ValidationError("trichotomy exponents require alpha > gamma > 0 and beta > gamma");
  }
  TrichotomySplit split;
  split.gamma = gamma;
  split.alpha = alpha;
  split.beta = beta;
  split.bound_K = 1.0;
  for (const auto& b : model.blocks) {
    std::vector<Index>* target = nullptr;
    if (std::abs(b.re) <= gamma) {
      target = &split.center;
    } else if (b.re <= -beta) {
      target = &split.stable;
    } else if (b.re >= alpha) {
      target = &split.unstable;
    } else {
      throw ValidationError("eigenvalue " + describe(b.re) + " of coordinate " +
                            std::to_string(b.first + 1) + " lies in a spectral gap band");
    }
    for (Index j = 0; j < b.size; ++j) target->push_back(b.first + j);
  }
  for (auto* set : {&split.center, &split.stable, &split.unstable}) {
    std::sort(set->begin(), set->end());
  }
  return split;
}

bool verify_trichotomy(const TrichotomySplit& split, const SpectralModel& model, double t_max,
                       Index samples) {
  if (!(t_max > 0.0)) throw ValidationError("t_max must be positive");
  if (samples < 2) throw ValidationError("need at least two samples");
  const Vector lambda = model.eigenvalues();
  const double K = split.bound_K;
  constexpr double slack = 1e-12;
  auto within = [&](double lhs, double rhs) { return lhs <= rhs * (1.0 + slack); };

  for (Index i = 0; i < samples; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(samples - 1);
    const double t_sym = -t_max + 2.0 * t_max * frac;
    const double t_pos = t_max * frac;
    for (Index k : split.center) {
      if (!within(std::exp(lambda(static_cast<Eigen::Index>(k)) * t_sym),
                  K * std::exp(split.gamma * std::abs(t_sym)))) {
        return false;
      }
    }
    for (Index k : split.stable) {
      const double lhs = std::exp(lambda(static_cast<Eigen::Index>(k)) * t_pos);
      const double rhs = std::isfinite(split.beta) ? K * std::exp(-split.beta * t_pos)
                                                   : (t_pos == 0.0 ? K : 0.0);
      if (!within(lhs, rhs)) return false;
    }
    for (Index k : split.unstable) {
      const double lhs = std::exp(-lambda(static_cast<Eigen::Index>(k)) * t_pos);
      const double rhs = std::isfinite(split.alpha) ? K * std::exp(-split.alpha * t_pos)
                                                    : (t_pos == 0.0 ? K : 0.0);
      if (!within(lhs, rhs)) return false;
    }
  }
  return true;
}

GapReport gap_condition(const TrichotomySplit& split, double lip, double eta, int k_order) {
  if (k_order < 1) throw ValidationError("k_order must be at least 1");
  if (!(lip >= 0.0)) throw ValidationError("Lipschitz constant must be non-negative");
  GapReport r;
  r.eta = eta;
  r.k_order = k_order;
  r.eta_min = split.gamma;
  r.eta_max = std::min(split.alpha, split.beta) / static_cast<double>(k_order);
  if (!(eta > r.eta_min) || !(eta < r.eta_max)) {
    throw ValidationError("eta = " + describe(eta) + " outside the admissible interval (" +
                          describe(r.eta_min) + ", " + describe(r.eta_max) + ")");
  }
  r.satisfied = true;
  for (int i = 1; i <= k_order; ++i) {
    const double ie = i * eta;
    double sum = 1.0 / (ie - split.gamma);
    if (std::isfinite(split.beta)) sum += 1.0 / (split.beta - ie);
    if (std::isfinite(split.alpha)) sum += 1.0 / (split.alpha - ie);
    const double lhs = lip == 0.0 ? 0.0 : split.bound_K * lip * sum;
    r.lhs_values.push_back(lhs);
    if (!(lhs < 1.0)) r.satisfied = false;
  }
  return r;
}

SpectralModel builtin_reaction_diffusion(double a, double sigma, Index N, double cutoff_radius) {
  if (N < 3) throw ValidationError("reaction-diffusion model needs N >= 3");
  SpectralModel m;
  m.name = "reaction_diffusion";
  m.dim = N;
  for (Index k = 1; k <= N; ++k) {
    m.blocks.push_back({k - 1, 1, 1.0 - static_cast<double>(k * k), 0.0});
  }
  m.sigma = sigma;
  m.cutoff_radius = cutoff_radius;
  if (a != 0.0) m.parts.push_back({3, [a](const Vector& u) -> Vector { return -a * sine_cube(u); }});

  // |u|_inf <= sqrt(N) |c| and |P(g w)| <= |g|_inf |w| for sine coefficients.
  const double n = static_cast<double>(N);
  const double aa = std::abs(a);
  m.lipschitz_bound = cutoff_lipschitz([=](double r) { return 3.0 * aa * n * r * r; },
                                       [=](double r) { return aa * n * r * r * r; },
                                       cutoff_radius);
  validate_model(m);
  return m;
}

namespace {

struct WaveMode {
  bool complex = false;
  double plus = 0.0;   // d+ or the real part
  double minus = 0.0;  // d- (real pair only)
  double omega = 0.0;  // imaginary part (complex pair only)
};

WaveMode wave_mode(Index k) {
  const double disc = 1.25 - 0.25 * static_cast<double>(k * k);
  WaveMode w;
  if (disc >= 0.0) {
    w.plus = -0.5 + std::sqrt(disc);
    w.minus = -0.5 - std::sqrt(disc);
  } else {
    w.complex = true;
    w.plus = -0.5;
    w.omega = std::sqrt(-disc);
  }
  return w;
}

}  // namespace

Vector damped_wave_displacement(const Vector& x) {
  const Eigen::Index n = x.size() / 2;
  Vector u(n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    const WaveMode w = wave_mode(static_cast<Index>(k));
    u(k - 1) = w.complex ? x(2 * (k - 1)) : x(2 * (k - 1)) + x(2 * (k - 1) + 1);
  }
  return u;
}

SpectralModel builtin_damped_wave(double sigma, Index N, double cubic, double cutoff_radius) {
  if (N < 2) throw ValidationError("damped-wave model needs N >= 2");
  SpectralModel m;
  m.name = "damped_wave";
  m.dim = 2 * N;
  m.sigma = sigma;
  m.cutoff_radius = cutoff_radius;
  double gain = 0.0;  // norm of the forcing-to-coordinates map per mode
  for (Index k = 1; k <= N; ++k) {
    const WaveMode w = wave_mode(k);
    const Index first = 2 * (k - 1);
    if (w.complex) {
      m.blocks.push_back({first, 2, w.plus, w.omega});
      gain = std::max(gain, 1.0 / w.omega);
    } else {
      m.blocks.push_back({first, 1, w.plus, 0.0});
      m.blocks.push_back({first + 1, 1, w.minus, 0.0});
      gain = std::max(gain, std::sqrt(2.0) / (w.plus - w.minus));
    }
  }
  if (cubic != 0.0) {
    m.parts.push_back({3, [cubic, N](const Vector& x) -> Vector {
                         const Vector f = -cubic * sine_cube(damped_wave_displacement(x));
                         Vector out = Vector::Zero(x.size());
                         for (Index k = 1; k <= N; ++k) {
                           const WaveMode w = wave_mode(k);
                           const auto i = static_cast<Eigen::Index>(2 * (k - 1));
                           const double fk = f(static_cast<Eigen::Index>(k - 1));
                           if (w.complex) {
                             out(i + 1) = fk / w.omega;
                           } else {
                             out(i) = fk / (w.plus - w.minus);
                             out(i + 1) = -out(i);
                           }
                         }
                         return out;
                       }});
  }
  // The displacement of a state x has norm <= sqrt(2)|x|.
  const double n = static_cast<double>(N);
  const double c = std::abs(cubic);
  const double s2 = std::sqrt(2.0);
  m.lipschitz_bound = cutoff_lipschitz(
      [=](double r) { return gain * 3.0 * c * n * 2.0 * s2 * r * r; },
      [=](double r) { return gain * c * n * std::pow(s2 * r, 3); }, cutoff_radius);
  validate_model(m);
  return m;
}

double coupled_kernel_symbol(double a, Index k) {
  return 1.0 / (1.0 + 2.0 * a + static_cast<double>(k * k));
}

SpectralModel builtin_coupled_slow(double a, double sigma, Index N, double cutoff_radius) {
  if (N < 2) throw ValidationError("coupled slow model needs N >= 2");
  if (!(a > -0.5)) throw ValidationError("coupled slow model needs a > -1/2");
  SpectralModel m;
  m.name = "coupled_slow";
  m.dim = 2 * N;
  m.sigma = sigma;
  m.cutoff_radius = cutoff_radius;
  for (Index k = 0; k < N; ++k) m.blocks.push_back({k, 1, a, 0.0});
  for (Index k = 0; k < N; ++k) {
    m.blocks.push_back({N + k, 1, -1.0 - static_cast<double>(k * k), 0.0});
  }
  const auto n = static_cast<Eigen::Index>(N);
  m.parts.push_back({2, [n](const Vector& x) -> Vector {
                       const Vector u = x.head(n);
                       const Vector v = x.tail(n);
                       Vector out(2 * n);
                       out.head(n) = -cosine_product(u, v, static_cast<Index>(n));
                       out.tail(n) = cosine_product(u, u, static_cast<Index>(n));
                       return out;
                     }});
  m.parts.push_back({3, [n, a](const Vector& x) -> Vector {
                       const Vector u = x.head(n);
                       const Vector v = x.tail(n);
                       // u^2 in full (modes up to 2N-2) before multiplying by v.
                       const Vector u2 = cosine_product(u, u, static_cast<Index>(2 * n - 1));
                       Vector u2v = cosine_product(u2, v, static_cast<Index>(n));
                       for (Eigen::Index k = 0; k < n; ++k) {
                         u2v(k) *= coupled_kernel_symbol(a, static_cast<Index>(k));
                       }
                       Vector out = Vector::Zero(2 * n);
                       out.tail(n) = -2.0 * u2v;
                       return out;
                     }});
  // Cosine coefficients: |P(f w)| <= sqrt(2)|f|_inf |w| and |w|_inf <= sqrt(N)|w|.
  const double nn = static_cast<double>(N);
  const double kappa = coupled_kernel_symbol(a, 0);
  const double s2 = std::sqrt(2.0);
  const double sn = std::sqrt(nn);
  m.lipschitz_bound = cutoff_lipschitz(
      [=](double r) {
        const double du = 2.0 * sn * r;
        const double dv = 2.0 * s2 * sn * r + 2.0 * std::sqrt(10.0) * kappa * nn * r * r;
        return std::sqrt(du * du + dv * dv);
      },
      [=](double r) {
        const double fu = s2 * sn * r * r;
        const double fv = s2 * sn * r * r + 2.0 * kappa * s2 * nn * r * r * r;
        return std::sqrt(fu * fu + fv * fv);
      },
      cutoff_radius);
  validate_model(m);
  return m;
}

}  // namespace stochcm
