#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "nldeco/inference.hpp"
#include "test_util.hpp"

namespace nldeco {
namespace {

PopulationTrace synthesize(double d, double gamma0, const MotionalDistribution& dist, double t_max, std::size_t count,
                           double g = 1.0) {
  const ModelParams params(g, d, gamma0);
  const auto times = linear_grid(0.0, t_max, count);
  return population_trace(params, SpectralDensitySpec::paper_flat(gamma0), dist, times);
}

MotionalDistribution coherent3() { return make_distribution(CoherentKind{3.0}); }

TEST(FitDecayRates, FockGroundStateRoundTrip) {
  const auto trace = synthesize(-0.15, 0.1, make_distribution(FockKind{0}), 30.0, 200);
  const auto rates = fit_decay_rates(trace, trace.distribution, 1.0);
  ASSERT_EQ(rates.size(), 1u);
  EXPECT_EQ(rates[0].n, 0);
  EXPECT_NEAR(rates[0].rate, 0.1, 1e-6);
}

TEST(FitDecayRates, UndampedTraceGivesZeroRates) {
  const auto trace = synthesize(-0.15, 0.0, coherent3(), 40.0, 1000);
  for (const auto& r : fit_decay_rates(trace, trace.distribution, 1.0)) {
    EXPECT_NEAR(r.rate, 0.0, 1e-8) << r.n;
    EXPECT_GE(r.rate, 0.0);
  }
}

TEST(FitDecayRates, CoherentRoundTripPerLevel) {
  const auto trace = synthesize(-0.15, 0.05, coherent3(), 40.0, 1000);
  const auto rates = fit_decay_rates(trace, trace.distribution, 1.0);
  ASSERT_GE(rates.size(), 8u);
  for (const auto& r : rates) {
    const double truth = 0.05 * std::pow(r.n + 1.0, 0.7);
    EXPECT_LT(std::fabs(r.rate / truth - 1.0), 0.01) << r.n;
    EXPECT_GE(r.stderr_, 0.0);
  }
}

TEST(FitDecayRates, ActiveLevelsFollowThreshold) {
  const auto dist = coherent3();
  const auto trace = synthesize(0.0, 0.1, dist, 40.0, 1000);
  const auto rates = fit_decay_rates(trace, dist, 1.0);
  std::vector<int> expected;
  for (int n = 0; n <= dist.cutoff(); ++n) {
    if (dist[static_cast<std::size_t>(n)] > 0.01) expected.push_back(n);
  }
  ASSERT_EQ(rates.size(), expected.size());
  for (std::size_t k = 0; k < rates.size(); ++k) EXPECT_EQ(rates[k].n, expected[k]);
}

TEST(FitDecayRates, ShortTraceRejected) {
  const auto trace = synthesize(0.0, 0.1, coherent3(), 5.0, 200);
  EXPECT_THROW(fit_decay_rates(trace, trace.distribution, 1.0), DomainError);
}

TEST(FitDecayRates, MismatchedLengthsRejected) {
  auto trace = synthesize(0.0, 0.1, coherent3(), 40.0, 200);
  trace.p_down.pop_back();
  EXPECT_THROW(fit_decay_rates(trace, trace.distribution, 1.0), DomainError);
}

TEST(FitDecayRates, IterationBudgetExhaustion) {
  const auto trace = synthesize(-0.15, 0.1, coherent3(), 40.0, 400);
  FitOptions options;
  options.lm.max_iterations = 1;
  try {
    fit_decay_rates(trace, trace.distribution, 1.0, options);
    FAIL() << "expected FitConvergenceError";
  } catch (const FitConvergenceError& e) {
    EXPECT_FALSE(e.best_so_far().empty());
    EXPECT_GT(e.achieved_estimate(), 0.0);
  }
}

TEST(FitPowerLaw, LinearRates) {
  const std::vector<DecayRate> rates{{0, 0.1, 0.0}, {1, 0.2, 0.0}, {2, 0.3, 0.0}, {3, 0.4, 0.0}};
  const auto fit = fit_power_law(rates);
  EXPECT_NEAR(fit.nu_hat, 1.0, 1e-12);
  EXPECT_NEAR(fit.gamma0_hat, 0.1, 1e-12);
}

TEST(FitPowerLaw, ExactLogLinearRates) {
  std::vector<DecayRate> rates;
  for (int n = 0; n <= 5; ++n) rates.push_back({n, 0.1 * std::pow(n + 1.0, 0.7), 0.001 * (n + 1)});
  const auto fit = fit_power_law(rates);
  EXPECT_NEAR(fit.nu_hat, 0.7, 1e-10);
  EXPECT_NEAR(fit.gamma0_hat, 0.1, 1e-10);
}

TEST(FitPowerLaw, UnweightedResidualIsZeroOnExactData) {
  std::vector<DecayRate> rates;
  for (int n = 0; n <= 6; ++n) rates.push_back({n, 0.3 * std::pow(n + 1.0, 1.5), 0.0});
  const auto fit = fit_power_law(rates);
  EXPECT_NEAR(fit.covariance[1][1], 0.0, 1e-20);
  EXPECT_NEAR(fit.nu_hat, 1.5, 1e-12);
}

TEST(FitPowerLaw, SkipsPinnedRates) {
  const std::vector<DecayRate> rates{{0, 0.0, 0.0}, {1, 0.2, 0.0}, {3, 0.4, 0.0}};
  EXPECT_NEAR(fit_power_law(rates).nu_hat, 1.0, 1e-12);
}

TEST(FitPowerLaw, NeedsTwoPositiveRates) {
  const std::vector<DecayRate> one{{0, 0.1, 0.0}, {1, 0.0, 0.0}};
  EXPECT_THROW(fit_power_law(one), DomainError);
  EXPECT_THROW(fit_power_law(std::vector<DecayRate>{}), DomainError);
}

TEST(FitFullModel, HeadlineRoundTrip) {
  const auto trace = synthesize(-0.15, 0.1, coherent3(), 40.0, 1000);
  const auto fit = fit_full_model(trace, trace.distribution, 1.0);
  EXPECT_TRUE(fit.converged);
  EXPECT_GE(fit.nu_hat, 0.68);
  EXPECT_LE(fit.nu_hat, 0.72);
  EXPECT_GE(fit.gamma0_hat, 0.098);
  EXPECT_LE(fit.gamma0_hat, 0.102);
  EXPECT_LT(fit.residual_norm, 1e-8);
}

TEST(FitFullModel, LinearCoupling) {
  const auto trace = synthesize(0.0, 0.1, coherent3(), 40.0, 1000);
  EXPECT_NEAR(fit_full_model(trace, trace.distribution, 1.0).nu_hat, 1.0, 0.01);
}

TEST(FitFullModel, ExponentTracksCoupling) {
  for (const double d : {-0.25, 0.25}) {
    const auto trace = synthesize(d, 0.1, coherent3(), 40.0, 1000);
    EXPECT_NEAR(fit_full_model(trace, trace.distribution, 1.0).nu_hat, 2.0 * d + 1.0, 0.02) << d;
  }
}

TEST(FitFullModel, UniformNoiseMonteCarlo) {
  const double d = -0.15;
  const auto clean = synthesize(d, 0.1, coherent3(), 40.0, 1000);
  double worst = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    auto gen = test::rng(1000 + static_cast<std::uint64_t>(seed));
    auto noisy = clean;
    for (auto& p : noisy.p_down) p += test::uniform(gen, -0.005, 0.005);
    const auto fit = fit_full_model(noisy, noisy.distribution, 1.0);
    worst = std::max(worst, std::fabs(fit.nu_hat - 0.7));
  }
  EXPECT_LT(worst, 0.05);
}

TEST(FitFullModel, ScaleEquivariance) {
  const auto dist = coherent3();
  const auto base = fit_full_model(synthesize(-0.15, 0.1, dist, 40.0, 1000), dist, 1.0);
  for (const double s : {0.5, 2.0, 7.0}) {
    // t -> s t, g -> g / s, gamma0 -> gamma0 / s
    const auto scaled = synthesize(-0.15, 0.1 / s, dist, 40.0 * s, 1000, 1.0 / s);
    const auto fit = fit_full_model(scaled, dist, 1.0 / s);
    EXPECT_NEAR(fit.nu_hat, base.nu_hat, 1e-8) << s;
    EXPECT_NEAR(fit.gamma0_hat * s, base.gamma0_hat, 1e-9) << s;
  }
}

TEST(FitFullModel, Deterministic) {
  const auto trace = synthesize(-0.15, 0.1, coherent3(), 40.0, 500);
  auto noisy = trace;
  auto gen = test::rng(5);
  for (auto& p : noisy.p_down) p += test::uniform(gen, -0.01, 0.01);
  const auto a = fit_full_model(noisy, noisy.distribution, 1.0);
  const auto b = fit_full_model(noisy, noisy.distribution, 1.0);
  EXPECT_EQ(a.nu_hat, b.nu_hat);
  EXPECT_EQ(a.gamma0_hat, b.gamma0_hat);
  ASSERT_EQ(a.gamma_n.size(), b.gamma_n.size());
  for (std::size_t k = 0; k < a.gamma_n.size(); ++k) {
    EXPECT_EQ(a.gamma_n[k].rate, b.gamma_n[k].rate);
    EXPECT_EQ(a.gamma_n[k].stderr_, b.gamma_n[k].stderr_);
  }
}

TEST(LevenbergMarquardt, ObjectiveNeverIncreases) {
  const auto trace = synthesize(-0.15, 0.1, coherent3(), 40.0, 800);
  auto noisy = trace;
  auto gen = test::rng(17);
  for (auto& p : noisy.p_down) p += test::uniform(gen, -0.02, 0.02);
  const DampedCosineModel model(noisy.distribution, 1.0, 0.01);
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(model.parameter_count()), 0.5);
  const std::span<const double> times(noisy.times);
  const std::span<const double> values(noisy.p_down);
  const auto result = levenberg_marquardt(
      x0, [&](const Eigen::VectorXd& x) { return model.residual(times, values, x); },
      [&](const Eigen::VectorXd& x) { return model.jacobian(times, x); }, 0.0, LmOptions{});
  ASSERT_GE(result.objective_history.size(), 2u);
  for (std::size_t k = 1; k < result.objective_history.size(); ++k) {
    EXPECT_LE(result.objective_history[k], result.objective_history[k - 1]);
  }
  for (Eigen::Index i = 0; i < result.x.size(); ++i) EXPECT_GE(result.x(i), 0.0);
}

TEST(DampedCosineModel, JacobianMatchesFiniteDifferences) {
  const auto dist = coherent3();
  const DampedCosineModel model(dist, 1.0, 0.05);
  Eigen::VectorXd x(static_cast<Eigen::Index>(model.parameter_count()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 0.1 * std::pow(i + 2.0, 0.7);
  const std::vector<double> times{0.3, 2.0, 7.5, 19.0};
  const auto jac = model.jacobian(times, x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6;
    Eigen::VectorXd up = x, down = x;
    up(i) += h;
    down(i) -= h;
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double fd = (model.evaluate(times[j], up) - model.evaluate(times[j], down)) / (2.0 * h);
      EXPECT_NEAR(jac(static_cast<Eigen::Index>(j), i), fd, 1e-7);
    }
  }
}

}  // namespace
}  // namespace nldeco
