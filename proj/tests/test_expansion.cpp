#include "stochcm/expansion.hpp"
#include "stochcm/fit.hpp"
#include "stochcm/lyapunov_perron.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace stochcm;

namespace {

class FunctionProvider : public GraphProvider {
 public:
  FunctionProvider(Index dim, std::function<Vector(const Vector&)> f) : dim_(dim), f_(std::move(f)) {}
  Index center_dim() const override { return dim_; }
  Vector evaluate(const Vector& v, Index) const override { return f_(v); }

 private:
  Index dim_;
  std::function<Vector(const Vector&)> f_;
};

Vector scalar(double s) { return (Vector(1) << s).finished(); }

Vector odd_graph(const Vector& v, double c3, double c5) {
  Vector out = Vector::Zero(3);
  out(2) = c3 * std::pow(v(0), 3) + c5 * std::pow(v(0), 5);
  return out;
}

}  // namespace

TEST(LineFit, RecoversExactLine) {
  const LineFit f = fit_line({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  EXPECT_NEAR(f.slope, 2.0, 1e-15);
  EXPECT_NEAR(f.intercept, 1.0, 1e-15);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-15);
  EXPECT_EQ(fit_line({0.0, 1.0}, {2.0, 2.0}).r_squared, 1.0);
  EXPECT_THROW(fit_line({1.0, 1.0}, {0.0, 1.0}), ValidationError);
  EXPECT_THROW(fit_line({1.0, 2.0}, {0.0}), ValidationError);
}

TEST(Median, OddAndEvenSamples) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_THROW(median({}), ValidationError);
}

TEST(ReactionDiffusionExpansion, DeterministicCoefficient) {
  const OUPath none = ou_stationary(BrownianPath::zero(TimeGrid(0.0, 1.0, 10)), 8.0);
  const ExpansionGraph g = reaction_diffusion_expansion(0.01, 0.0, none, 8);
  EXPECT_EQ(g.lowest_degree(), 3);
  EXPECT_EQ(g.order_q, 5);
  const Vector h = g.evaluate(scalar(0.1), 0.0, 0);
  EXPECT_NEAR(h(2), 3.125e-7, 1e-20);
  EXPECT_EQ(h.norm(), std::abs(h(2)));
  EXPECT_THROW(reaction_diffusion_expansion(0.01, 0.0, none, 2), ValidationError);
  EXPECT_THROW(g.evaluate(Vector::Zero(2), 0.0, 0), ValidationError);
}

TEST(ReactionDiffusionExpansion, NoiseCorrection) {
  const double a = 0.01, sigma = 0.1, s = 0.2;
  const BrownianPath path = sample_brownian(TimeGrid(0.0, 2.0, 200), 3);
  const OUPath phi3 = ou_convolution(path, 8.0);
  const ExpansionGraph g = reaction_diffusion_expansion(a, sigma, phi3, 8);
  const double sz = 0.37;
  const Index i = 150;
  const double expected =
      (a / 32.0 - a / 16.0 * sigma * phi3.values[i]) * std::exp(2.0 * sz) * s * s * s;
  EXPECT_NEAR(g.evaluate(scalar(s), sz, i)(2), expected, 1e-15 * std::abs(expected));
  EXPECT_THROW(g.evaluate(scalar(s), sz, 201), ValidationError);
}

TEST(ReactionDiffusionExpansion, ZeroCubicIsZeroGraph) {
  const OUPath none = ou_stationary(BrownianPath::zero(TimeGrid(0.0, 1.0, 10)), 8.0);
  const ExpansionGraph g = reaction_diffusion_expansion(0.0, 0.1, none, 4);
  EXPECT_TRUE(g.terms.empty());
  EXPECT_EQ(g.lowest_degree(), 0);
  EXPECT_EQ(g.evaluate(scalar(0.3), 0.0, 0).norm(), 0.0);
}

TEST(CoupledSlowManifold, MatchesKernelOfSquare) {
  const ExpansionGraph g = coupled_slow_manifold(0.2, 4);
  EXPECT_EQ(g.lowest_degree(), 2);
  const Vector u = (Vector(4) << 0.3, 0.2, -0.1, 0.05).finished();
  const double sz = 0.4;
  const Vector out = g.evaluate(u, sz, 0);
  const Vector u2 = cosine_product(u, u, 4);
  for (Index m = 0; m < 4; ++m) {
    EXPECT_NEAR(out(static_cast<Eigen::Index>(4 + m)),
                std::exp(sz) * u2(static_cast<Eigen::Index>(m)) * coupled_kernel_symbol(0.0, m),
                1e-15)
        << "mode " << m;
  }
  EXPECT_EQ(out.head(4).norm(), 0.0);
}

TEST(CoupledSlowManifold, WorkedExamples) {
  const ExpansionGraph g = coupled_slow_manifold(0.1, 3);
  EXPECT_EQ(g.evaluate(Vector::Zero(3), 0.3, 0).norm(), 0.0);
  const Vector u = (Vector(3) << 0.4, 0.0, 0.0).finished();
  const Vector flat = g.evaluate(u, 0.0, 0);
  EXPECT_NEAR(flat(3), 0.16, 1e-16);
  const Vector doubled = g.evaluate((Vector(3) << 0.4, 0.2, 0.1).finished(), std::log(2.0), 0);
  const Vector base = g.evaluate((Vector(3) << 0.4, 0.2, 0.1).finished(), 0.0, 0);
  EXPECT_LT((doubled - 2.0 * base).norm(), 1e-15);
}

namespace {

double slow_manifold_mismatch(double sigma) {
  const SpectralModel m = builtin_coupled_slow(0.0, sigma, 4, 0.004);
  const TrichotomySplit split = split_spectrum(m, 0.05, kInfinity, 0.95);
  const RandomFrame frame(
      ou_stationary(sample_brownian(TimeGrid::two_sided(40.0, 40.0, 0.01), 11), 1.0), sigma);
  LPOptions o;
  o.eta = 0.5;
  o.window = 40.0;
  const LyapunovPerronSolver solver(m, split, frame, o);
  const ExpansionProvider closed(coupled_slow_manifold(sigma, 4), frame);
  const Vector v = (Vector(4) << 0.002, 0.001, 0.0, 0.0).finished();
  const Vector h = solver.manifold_point(v);
  const Vector g = closed.evaluate(v, frame.origin());
  return (h - g).norm() / g.norm();
}

}  // namespace

TEST(CoupledSlowManifold, ExactForDeterministicSystem) {
  EXPECT_LT(slow_manifold_mismatch(0.0), 1e-12);
}

TEST(CoupledSlowManifold, NoisyMismatchIsFirstOrderInSigma) {
  // The closed form carries no correction for the time derivative of
  // e^{sigma z(t)}, so it departs from the Lyapunov-Perron graph linearly in sigma.
  const double small = slow_manifold_mismatch(0.025);
  const double large = slow_manifold_mismatch(0.05);
  EXPECT_LT(large, 0.05);
  EXPECT_NEAR(large / small, 2.0, 0.2);
}

TEST(ExpansionProvider, UsesFrameNoise) {
  const BrownianPath path = sample_brownian(TimeGrid::two_sided(1.0, 1.0, 0.01), 9);
  const RandomFrame frame(ou_stationary(path, 1.0), 0.3);
  const ExpansionGraph g = coupled_slow_manifold(0.3, 2);
  const ExpansionProvider p(g, frame);
  const Vector u = (Vector(2) << 0.1, 0.05).finished();
  EXPECT_EQ(p.evaluate(u, 42), g.evaluate(u, frame.sigma_z(42), 42));
  EXPECT_EQ(p.center_dim(), 2u);
}

TEST(InvarianceResidual, ExactManifoldResidualDecaysLinearly) {
  const SpectralModel m = builtin_coupled_slow(0.0, 0.0, 4, 0.004);
  const TrichotomySplit split = split_spectrum(m, 0.05, kInfinity, 0.95);
  const RandomFrame frame = quiet_frame(TimeGrid(0.0, 0.01, 100));
  const ExpansionProvider exact(coupled_slow_manifold(0.0, 4), frame);
  const Vector v = (Vector(4) << 0.002, 0.001, 0.0, 0.0).finished();
  const ResidualDecay r = residual_decay(exact, m, split, frame, v, {1e-2, 1e-3, 1e-4});
  ASSERT_EQ(r.residuals.size(), 3u);
  EXPECT_GT(r.residuals[0], r.residuals[1]);
  EXPECT_GT(r.residuals[1], r.residuals[2]);
  EXPECT_NEAR(r.slope, 1.0, 0.05);
  EXPECT_LT(r.residuals[2], 1e-6 * r.state_norm);
}

TEST(InvarianceResidual, WrongGraphDoesNotDecay) {
  const SpectralModel m = builtin_coupled_slow(0.0, 0.0, 4, 0.004);
  const TrichotomySplit split = split_spectrum(m, 0.05, kInfinity, 0.95);
  const RandomFrame frame = quiet_frame(TimeGrid(0.0, 0.01, 100));
  const ExpansionProvider zero(zero_expansion(8, split.center, 2), frame);
  const Vector v = (Vector(4) << 0.002, 0.001, 0.0, 0.0).finished();
  const ResidualDecay r = residual_decay(zero, m, split, frame, v, {1e-2, 1e-3, 1e-4});
  EXPECT_LT(std::abs(r.slope), 0.05);
  EXPECT_GT(r.residuals[2], 1e-3 * r.state_norm);
}

TEST(InvarianceResidual, RejectsProbesOffTheGrid) {
  const SpectralModel m = builtin_coupled_slow(0.0, 0.0, 2, 0.004);
  const TrichotomySplit split = split_spectrum(m, 0.05, kInfinity, 0.95);
  const RandomFrame frame = quiet_frame(TimeGrid(0.0, 0.01, 10));
  const ExpansionProvider exact(coupled_slow_manifold(0.0, 2), frame);
  const Vector v = (Vector(2) << 0.002, 0.0).finished();
  EXPECT_THROW(invariance_residual(exact, m, split, frame, v, 0.0015), ValidationError);
  EXPECT_THROW(invariance_residual(exact, m, split, frame, v, 0.02), ValidationError);
  EXPECT_THROW(invariance_residual(exact, m, split, frame, v, -0.001), ValidationError);
  EXPECT_THROW(residual_decay(exact, m, split, frame, v, {0.001}), ValidationError);
}

TEST(OrderFit, RecoversLeadingOrderOfDifference) {
  const FunctionProvider h(1, [](const Vector& v) { return odd_graph(v, 1.0, 0.5); });
  const FunctionProvider g(1, [](const Vector& v) { return odd_graph(v, 1.0, 0.0); });
  const OrderFitReport r = order_fit(g, h, 0, scalar(1.0), {0.01, 0.02, 0.04, 0.08}, 5);
  EXPECT_FALSE(r.degenerate);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.slope, 5.0, 1e-9);
  EXPECT_EQ(r.fitted_amplitudes.size(), 4u);

  const FunctionProvider crude(1, [](const Vector& v) { return odd_graph(v, 1.1, 0.0); });
  const OrderFitReport low = order_fit(crude, h, 0, scalar(1.0), {0.01, 0.02, 0.04, 0.08}, 5);
  EXPECT_FALSE(low.passed);
  EXPECT_NEAR(low.slope, 3.0, 0.05);
}

TEST(OrderFit, IdenticalGraphsAreDegenerate) {
  const FunctionProvider h(1, [](const Vector& v) { return odd_graph(v, 1.0, 0.0); });
  const OrderFitReport r = order_fit(h, h, 0, scalar(2.0), {0.01, 0.02, 0.04, 0.08}, 5);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.message, "indistinguishable at tolerance");
  EXPECT_TRUE(r.fitted_amplitudes.empty());
}

TEST(OrderFit, ValidatesAmplitudes) {
  const FunctionProvider h(1, [](const Vector& v) { return odd_graph(v, 1.0, 0.0); });
  EXPECT_THROW(order_fit(h, h, 0, scalar(1.0), {0.1, 0.2, 0.3}, 5), ValidationError);
  EXPECT_THROW(order_fit(h, h, 0, scalar(1.0), {0.1, 0.11, 0.12, 0.13}, 5), ValidationError);
  EXPECT_THROW(order_fit(h, h, 0, scalar(1.0), {0.1, 0.1, 0.2, 0.3}, 5), ValidationError);
  EXPECT_THROW(order_fit(h, h, 0, scalar(1.0), {-0.1, 0.1, 0.2, 0.3}, 5), ValidationError);
  EXPECT_THROW(order_fit(h, h, 0, scalar(0.0), {0.05, 0.1, 0.2, 0.3}, 5), ValidationError);
}

TEST(OrderFit, CubicExpansionOfReactionDiffusionManifold) {
  const SpectralModel m = builtin_reaction_diffusion(0.01, 0.0, 8, 0.25);
  const TrichotomySplit split = split_spectrum(m, 0.05, kInfinity, 2.9);
  const RandomFrame frame = quiet_frame(TimeGrid::two_sided(10.0, 10.0, 1e-3));
  LPOptions o;
  o.window = 10.0;
  const LyapunovPerronSolver solver(m, split, frame, o);
  const FunctionProvider lp(1, [&](const Vector& v) { return solver.manifold_point(v); });
  const OUPath none = ou_stationary(BrownianPath::zero(frame.grid()), 8.0);
  const ExpansionProvider cubic(reaction_diffusion_expansion(0.01, 0.0, none, 8), frame);
  const OrderFitReport r =
      order_fit(cubic, lp, frame.origin(), scalar(1.0), {0.05, 0.07, 0.1, 0.14, 0.2}, 5);
  EXPECT_FALSE(r.degenerate) << r.message;
  EXPECT_GE(r.slope, 4.7);
  EXPECT_TRUE(r.passed);
}
