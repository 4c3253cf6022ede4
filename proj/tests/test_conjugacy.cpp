#include "stochcm/conjugacy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace stochcm;

namespace {

Vector original_endpoint_via_frame(const SpectralModel& model, const BrownianPath& path,
                                   const Vector& u0_star) {
  const RandomFrame frame(ou_stationary(path, 1.0), model.sigma);
  const Index o = frame.origin();
  const Vector u0 = to_random_frame(u0_star, frame.z(o), model.sigma);
  const Trajectory traj = integrate_mild(model, frame, u0);
  const Index last = frame.grid().n_steps();
  return from_random_frame(traj.states.back(), frame.z(last), model.sigma);
}

}  // namespace

TEST(Conjugacy, FrameMapsAreInverse) {
  const Vector u = (Vector(3) << 0.1, -0.2, 0.3).finished();
  const Vector back = from_random_frame(to_random_frame(u, 0.7, 0.3), 0.7, 0.3);
  EXPECT_LT((back - u).norm(), 1e-16);
  EXPECT_EQ(to_random_frame(u, 0.7, 0.0), u);
  EXPECT_NEAR(to_random_frame(u, 1.0, 1.0)(0), 0.1 / std::exp(1.0), 1e-17);
}

TEST(Conjugacy, ClosedFormMatchesDirectConjugation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const std::vector<SpectralModel> models = {builtin_reaction_diffusion(0.3, 0.2, 6, 0.25),
                                             builtin_coupled_slow(0.1, 0.2, 3, 0.3),
                                             builtin_damped_wave(0.2, 3, 0.5, 0.1)};
  for (const auto& m : models) {
    for (int trial = 0; trial < 200; ++trial) {
      Vector u(static_cast<Eigen::Index>(m.dim));
      for (auto& x : u) x = n(rng);
      u *= 0.3 * m.cutoff_radius * std::abs(n(rng));
      const double sz = 0.5 * n(rng);
      const Vector direct = std::exp(-sz) * m.nonlinearity(std::exp(sz) * u);
      const Vector closed = conjugated_nonlinearity(m, sz, u);
      EXPECT_LE((closed - direct).norm(), 1e-14 * (1.0 + direct.norm())) << m.name;
    }
  }
}

TEST(Conjugacy, ConjugatedNonlinearityVanishesBeyondCutoff) {
  const SpectralModel m = builtin_reaction_diffusion(0.3, 0.2, 4, 0.25);
  Vector u = Vector::Zero(4);
  u(0) = 0.3;
  EXPECT_NE(conjugated_nonlinearity(m, 0.0, u).norm(), 0.0);
  EXPECT_EQ(conjugated_nonlinearity(m, std::log(2.0), u).norm(), 0.0);
}

TEST(Conjugacy, PathOverloadUsesSigmaTimesZ) {
  const SpectralModel m = builtin_reaction_diffusion(0.3, 0.4, 4, 0.25);
  const OUPath z = ou_stationary(sample_brownian(TimeGrid(0.0, 1.0, 10), 8), 1.0);
  const Vector u = Vector::Constant(4, 0.02);
  EXPECT_EQ(conjugated_nonlinearity(m, z, 3, u), conjugated_nonlinearity(m, 0.4 * z.values[3], u));
  EXPECT_THROW(conjugated_nonlinearity(m, z, 11, u), ValidationError);
}

TEST(Conjugacy, PullBackScalesSamplesAndValues) {
  ManifoldGraph g;
  g.dim = 2;
  g.center = {0};
  g.samples = {(Vector(1) << 0.1).finished(), (Vector(1) << 0.2).finished()};
  g.values = {(Vector(2) << 0.0, 0.01).finished(), (Vector(2) << 0.0, 0.04).finished()};
  const ManifoldGraph p = pull_back_manifold(g, 0.5);
  const double e = std::exp(0.5);
  EXPECT_DOUBLE_EQ(p.samples[1](0), 0.2 * e);
  EXPECT_DOUBLE_EQ(p.values[1](1), 0.04 * e);
  const ManifoldGraph id = pull_back_manifold(g, 0.0);
  EXPECT_EQ(id.values[0], g.values[0]);
}

TEST(Conjugacy, LinearModelMatchesExactGeometricBrownianMotion) {
  // Without nonlinearity the original equation is solved by
  // u*(t) = exp(lambda t + sigma W(t)) u*(0).
  const double sigma = 0.3;
  const SpectralModel m = linear_model((Vector(2) << 0.0, -1.0).finished(), sigma);
  const BrownianPath path = sample_brownian(TimeGrid(0.0, 1.0, 10000), 21);
  const Vector u0 = (Vector(2) << 0.5, 0.25).finished();
  const Vector got = original_endpoint_via_frame(m, path, u0);
  const double w = path.values().back();
  EXPECT_NEAR(got(0), u0(0) * std::exp(sigma * w), 1e-4 * u0(0));
  EXPECT_NEAR(got(1), u0(1) * std::exp(-1.0 + sigma * w), 1e-4 * u0(1));
}

TEST(Conjugacy, RandomFrameAgreesWithStratonovichHeun) {
  // Both schemes are first-order pathwise, so the discrepancy at t = 1 must
  // shrink roughly tenfold when the step is refined tenfold.
  const SpectralModel m = builtin_reaction_diffusion(2.0, 0.2, 4, 1.0);
  const Vector u0 = (Vector(4) << 0.4, 0.05, -0.05, 0.02).finished();
  const BrownianPath fine = sample_brownian(TimeGrid(0.0, 1.0, 20000), 31);
  double err[2];
  int slot = 0;
  for (Index factor : {20u, 2u}) {
    const BrownianPath p = coarsen(fine, factor);
    const Vector a = original_endpoint_via_frame(m, p, u0);
    const Vector b = integrate_stratonovich_heun(m, p, u0).states.back();
    err[slot++] = (a - b).norm();
  }
  EXPECT_LT(err[0], 1e-2 * u0.norm());
  EXPECT_LT(err[1], 0.25 * err[0]);
}

TEST(Conjugacy, HeunWithZeroNoiseIsDeterministicFlow) {
  const SpectralModel m = linear_model((Vector(1) << -2.0).finished(), 0.0);
  const BrownianPath p = BrownianPath::zero(TimeGrid(0.0, 1.0, 1000));
  const Trajectory t = integrate_stratonovich_heun(m, p, (Vector(1) << 1.0).finished());
  EXPECT_NEAR(t.states.back()(0), std::exp(-2.0), 1e-5);
  EXPECT_EQ(t.states.size(), 1001u);
}
