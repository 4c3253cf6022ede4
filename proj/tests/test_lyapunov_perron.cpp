#include "stochcm/lyapunov_perron.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stochcm;

namespace {

struct RdSetup {
  SpectralModel model = builtin_reaction_diffusion(0.01, 0.0, 8, 0.25);
  TrichotomySplit split = split_spectrum(model, 0.05, kInfinity, 2.9);
  LPOptions options;

  RdSetup() {
    options.eta = 1.0;
    options.window = 10.0;
  }

  LyapunovPerronSolver quiet(double dt = 1e-3) const {
    return LyapunovPerronSolver(model, split, quiet_frame(TimeGrid::two_sided(10.0, 10.0, dt)),
                                options);
  }
};

Vector scalar(double s) { return (Vector(1) << s).finished(); }

RandomFrame noisy_frame(double back, double forward, double dt, double sigma, std::uint64_t seed) {
  return RandomFrame(ou_stationary(sample_brownian(TimeGrid::two_sided(back, forward, dt), seed), 1.0),
                     sigma);
}

}  // namespace

TEST(CenterProjections, EmbedAndExtract) {
  TrichotomySplit split;
  split.center = {1, 3};
  split.stable = {0, 2};
  const Vector v = (Vector(2) << 5.0, 7.0).finished();
  const Vector u = embed_center(split, 4, v);
  EXPECT_EQ(u, (Vector(4) << 0.0, 5.0, 0.0, 7.0).finished());
  EXPECT_EQ(center_part(split, u), v);
  const Vector w = (Vector(4) << 1.0, 2.0, 3.0, 4.0).finished();
  EXPECT_EQ(non_center_part(split, w), (Vector(4) << 1.0, 0.0, 3.0, 0.0).finished());
  EXPECT_EQ(stable_part(split, w), (Vector(4) << 1.0, 0.0, 3.0, 0.0).finished());
}

TEST(LyapunovPerron, LinearModelHasFlatManifold) {
  const SpectralModel m = linear_model((Vector(3) << 0.0, -3.0, -8.0).finished(), 0.0);
  const TrichotomySplit split = split_spectrum(m, 0.5, kInfinity, 2.0);
  LPOptions o;
  o.window = 10.0;
  const LyapunovPerronSolver solver(m, split, quiet_frame(TimeGrid::two_sided(10.0, 10.0, 0.01)), o);
  const LPSolution sol = solver.solve(scalar(0.3));
  EXPECT_TRUE(sol.report.converged);
  EXPECT_EQ(solver.manifold_point(scalar(0.3)).norm(), 0.0);
  for (const auto& u : sol.trajectory.states) EXPECT_NEAR(u(0), 0.3, 1e-16);
}

TEST(LyapunovPerron, ZeroCenterPointGivesZeroTrajectory) {
  const RdSetup rd;
  const LPSolution sol = rd.quiet(1e-2).solve(scalar(0.0));
  for (const auto& u : sol.trajectory.states) EXPECT_EQ(u.norm(), 0.0);
}

TEST(LyapunovPerron, ReactionDiffusionCubicCoefficient) {
  // h(s) has sin 3x coefficient a s^3 / 32 + O(s^5) and no even modes.
  const RdSetup rd;
  const LyapunovPerronSolver solver = rd.quiet();
  for (double s : {0.05, 0.1}) {
    const Vector h = solver.manifold_point(scalar(s));
    const double expected = 0.01 * s * s * s / 32.0;
    EXPECT_NEAR(h(2), expected, 2e-3 * expected) << "s = " << s;
    EXPECT_EQ(h(0), 0.0);
    EXPECT_EQ(h(1), 0.0);
    EXPECT_EQ(h(3), 0.0);
    EXPECT_LT(std::abs(h(4)), 1e-3 * expected);
  }
}

TEST(LyapunovPerron, GraphIsOddForOddNonlinearity) {
  const RdSetup rd;
  const LyapunovPerronSolver solver = rd.quiet(1e-2);
  const Vector plus = solver.manifold_point(scalar(0.15));
  const Vector minus = solver.manifold_point(scalar(-0.15));
  EXPECT_LT((plus + minus).norm(), 1e-15 * plus.norm() + 1e-25);
}

TEST(LyapunovPerron, FixedPointIsInvariantUnderOperator) {
  const RdSetup rd;
  const LyapunovPerronSolver solver = rd.quiet(1e-2);
  const Vector v = scalar(0.1);
  const LPSolution sol = solver.solve(v);
  const WeightedTrajectory again = solver.apply(sol.trajectory, v);
  double diff = 0.0;
  for (Index i = 0; i < again.states.size(); ++i) {
    diff = std::max(diff, (again.states[i] - sol.trajectory.states[i]).norm());
  }
  EXPECT_LT(diff, 1e-13 * 0.1);
  EXPECT_GT(sol.report.iterations, 1u);
  EXPECT_LE(sol.report.contraction_ratio, solver.gap_lhs());
  EXPECT_LT(sol.report.tail_bound, 1e-8 * 0.1);
}

TEST(LyapunovPerron, ContractionRatioBelowGapConditionOnNoisyPath) {
  RdSetup rd;
  rd.model = builtin_reaction_diffusion(0.01, 0.1, 8, 0.25);
  const LyapunovPerronSolver solver(rd.model, rd.split, noisy_frame(10.0, 10.0, 1e-2, 0.1, 17),
                                    rd.options);
  const LPSolution sol = solver.solve(scalar(0.1));
  EXPECT_TRUE(sol.report.converged);
  EXPECT_LE(sol.report.contraction_ratio, solver.gap_lhs() + 0.05);
  EXPECT_NEAR(solver.gap_lhs(), sol.report.theoretical_lhs, 1e-15);
}

TEST(LyapunovPerron, CoupledSlowSystemHasExactManifold) {
  // The slow manifold is v = K(u^2) exactly. Center data on modes 0 and 1
  // keep u^2 inside the retained cosine modes.
  const SpectralModel m = builtin_coupled_slow(0.0, 0.0, 4, 0.004);
  const TrichotomySplit split = split_spectrum(m, 0.05, kInfinity, 0.95);
  LPOptions o;
  o.eta = 0.5;
  o.window = 40.0;
  const LyapunovPerronSolver solver(m, split, quiet_frame(TimeGrid::two_sided(40.0, 40.0, 0.01)),
                                    o);
  const double p = 0.002;
  const Vector constant = solver.manifold_point((Vector(4) << p, 0.0, 0.0, 0.0).finished());
  EXPECT_NEAR(constant(4), p * p, 1e-6 * p * p);
  EXPECT_NEAR(constant.tail(3).norm(), 0.0, 1e-6 * p * p);

  const Vector cosine = solver.manifold_point((Vector(4) << 0.0, p, 0.0, 0.0).finished());
  EXPECT_NEAR(cosine(4), 0.5 * p * p, 1e-6 * p * p);
  EXPECT_NEAR(cosine(6), 0.5 * p * p / 5.0, 1e-6 * p * p);
  EXPECT_NEAR(cosine(5), 0.0, 1e-6 * p * p);
}

TEST(LyapunovPerron, RejectsShortFrameAndViolatedGap) {
  const RdSetup rd;
  EXPECT_THROW(LyapunovPerronSolver(rd.model, rd.split,
                                    quiet_frame(TimeGrid::two_sided(5.0, 10.0, 1e-2)), rd.options),
               ValidationError);
  const SpectralModel strong = builtin_reaction_diffusion(50.0, 0.0, 8, 0.25);
  EXPECT_THROW(LyapunovPerronSolver(strong, rd.split,
                                    quiet_frame(TimeGrid::two_sided(10.0, 10.0, 1e-2)), rd.options),
               ValidationError);
}

TEST(LyapunovPerron, NonConvergenceReportsHistory) {
  RdSetup rd;
  rd.options.max_iter = 2;
  const LyapunovPerronSolver solver = rd.quiet(1e-2);
  try {
    solver.solve(scalar(0.2));
    FAIL() << "expected a NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_FALSE(e.diagnostics().empty());
  }
}

TEST(LyapunovPerron, ShortWindowFailsTailBound) {
  RdSetup rd;
  rd.options.window = 1.0;
  const LyapunovPerronSolver solver(rd.model, rd.split,
                                    quiet_frame(TimeGrid::two_sided(1.0, 1.0, 1e-2)), rd.options);
  EXPECT_THROW(solver.solve(scalar(0.1)), NumericalError);
}

TEST(ManifoldGraph, DiagnosticsRespectTheoreticalBounds) {
  const RdSetup rd;
  const LyapunovPerronSolver solver = rd.quiet(1e-2);
  const std::vector<Vector> samples = {scalar(-0.2), scalar(-0.1), scalar(0.05), scalar(0.1),
                                       scalar(0.2)};
  GraphOptions options;
  options.threads = 2;
  const ManifoldGraph g = manifold_graph(solver, samples, options);
  ASSERT_EQ(g.values.size(), 5u);
  EXPECT_EQ(g.center, std::vector<Index>({0}));
  EXPECT_LE(g.contraction_ratio, g.theoretical_lhs + 0.05);
  const double lhs = solver.gap_lhs();
  EXPECT_NEAR(g.lipschitz_ceiling, lhs / (1.0 - lhs), 1e-15);
  EXPECT_LE(g.lipschitz_ratio, 1.05 * g.lipschitz_ceiling);
  EXPECT_LE(g.tangency_norm, 1e-4 * rd.model.lipschitz_bound);
  EXPECT_NEAR(g.lipschitz_ratio, sampled_lipschitz(g), 1e-18);

  // Threading does not change the numbers.
  options.threads = 1;
  const ManifoldGraph serial = manifold_graph(solver, samples, options);
  for (Index i = 0; i < samples.size(); ++i) EXPECT_EQ(serial.values[i], g.values[i]);
}

TEST(SolverGraphProvider, MatchesDirectSolveOnRecenteredFrame) {
  RdSetup rd;
  rd.model = builtin_reaction_diffusion(0.01, 0.1, 8, 0.25);
  const RandomFrame frame = noisy_frame(10.0, 12.0, 1e-2, 0.1, 5);
  const SolverGraphProvider provider(rd.model, rd.split, frame, rd.options);
  const Index i = frame.origin() + 100;
  const LyapunovPerronSolver direct(rd.model, rd.split, frame.recentered(i), rd.options);
  EXPECT_EQ(provider.evaluate(scalar(0.1), i), direct.manifold_point(scalar(0.1)));
}

TEST(TabulatedGraphProvider, ReproducesNodesAndInterpolates) {
  RdSetup rd;
  rd.model = builtin_reaction_diffusion(0.01, 0.1, 8, 0.25);
  const RandomFrame frame = noisy_frame(10.0, 12.0, 1e-2, 0.1, 6);
  const SolverGraphProvider provider(rd.model, rd.split, frame, rd.options);
  const Index o = frame.origin();
  const std::vector<Index> times = {o, o + 50, o + 100};
  const TabulatedGraphProvider table = tabulate_graph(provider, times, {0.1, 0.11, 0.12, 0.13}, 1);
  EXPECT_EQ(table.evaluate(scalar(0.1), o + 50), provider.evaluate(scalar(0.1), o + 50));
  // Between amplitude nodes the cubic graph is reproduced up to
  // interpolation error.
  const Vector exact = provider.evaluate(scalar(0.115), o + 50);
  const Vector approx = table.evaluate(scalar(0.115), o + 50);
  EXPECT_LT((approx - exact).norm(), 0.01 * exact.norm());
  // Between time nodes the rows are blended linearly. The graph itself
  // follows the rough path z(t), so only the blend is checked.
  const Vector blend = 0.5 * table.evaluate(scalar(0.115), o) + 0.5 * approx;
  EXPECT_LT((table.evaluate(scalar(0.115), o + 25) - blend).norm(), 1e-15 * blend.norm());
  EXPECT_THROW(table.evaluate(scalar(0.3), o), ValidationError);
}

TEST(InvarianceCheck, TrajectoryStaysOnRandomManifold) {
  RdSetup rd;
  rd.model = builtin_reaction_diffusion(0.01, 0.1, 8, 0.25);
  const RandomFrame frame = noisy_frame(10.0, 12.0, 1e-3, 0.1, 8);
  const SolverGraphProvider provider(rd.model, rd.split, frame, rd.options);
  const Index o = frame.origin();
  const std::vector<InvarianceSample> r =
      invariance_check(provider, rd.model, rd.split, frame, scalar(0.1), {o + 500, o + 1000, o + 2000});
  ASSERT_EQ(r.size(), 3u);
  const double h_scale = 0.01 * 1e-3 / 32.0;  // sin 3x coefficient at s = 0.1
  for (const auto& s : r) EXPECT_LT(s.defect, 0.01 * h_scale) << "t = " << s.t;
  EXPECT_NEAR(r.back().t, 2.0, 1e-12);
}
