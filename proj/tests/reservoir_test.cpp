#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "nldeco/reservoir.hpp"
#include "test_util.hpp"

namespace nldeco {
namespace {

const auto kZeroT = InverseTemperature::zero_temperature();

// Brute-force reference: trapezoid rule with step h on [0, upper]; the integrand
// at omega = 0 is replaced by its limit.
template <class F>
double dense_trapezoid(const F& f, double at_zero, double upper, double h) {
  const auto steps = static_cast<long>(std::llround(upper / h));
  double sum = 0.5 * (at_zero + f(upper));
  for (long k = 1; k < steps; ++k) sum += f(static_cast<double>(k) * h);
  return sum * h;
}

TEST(Q2, PaperFlatZeroTemperatureIsLinear) {
  EXPECT_NEAR(q2(SpectralDensitySpec::paper_flat(0.2), kZeroT, 10.0), 0.5, 1e-15);
}

TEST(Q2, VanishesAtTimeZero) {
  const std::vector<SpectralDensitySpec> specs{SpectralDensitySpec::paper_flat(0.3),
                                               SpectralDensitySpec::ohmic(0.1, 5.0),
                                               SpectralDensitySpec::discrete({{1.0, 0.3}, {2.0, 0.1}})};
  for (const auto& spec : specs) {
    EXPECT_EQ(q2(spec, kZeroT, 0.0), 0.0);
    if (spec.has_finite_q1()) {
      EXPECT_EQ(q1(spec, 0.0), 0.0);
      EXPECT_EQ(q2(spec, InverseTemperature::finite(0.7), 0.0), 0.0);
    }
  }
}

TEST(Q2, SingleDiscreteMode) {
  EXPECT_NEAR(q2(SpectralDensitySpec::discrete({{1.0, 0.3}}), kZeroT, std::numbers::pi), 0.18, 1e-15);
}

TEST(Q1, SingleDiscreteMode) {
  EXPECT_NEAR(q1(SpectralDensitySpec::discrete({{2.0, 1.0}}), std::numbers::pi / 4.0), 0.25, 1e-15);
}

TEST(Kernels, PaperFlatDivergences) {
  const auto flat = SpectralDensitySpec::paper_flat(0.1);
  EXPECT_THROW(q1(flat, 1.0), DivergentKernelError);
  EXPECT_THROW(q2(flat, InverseTemperature::finite(1.0), 1.0), DivergentKernelError);
  EXPECT_THROW(q2(flat, kZeroT, -1.0), DomainError);
}

// Values frozen from the dense trapezoid (h = 1e-4 on [0, 50 wc]) for alpha = 0.1,
// wc = 5, t = 2. At zero temperature they also match the closed forms
// (alpha/2) ln(1 + wc^2 t^2) and alpha atan(wc t).
constexpr double kOhmicQ2ZeroT = 0.230756025675;
constexpr double kOhmicQ1 = 0.147112767464;
constexpr double kOhmicQ2Beta1 = 0.559758781527;

TEST(Kernels, OhmicAgainstDenseTrapezoid) {
  const double alpha = 0.1, wc = 5.0, t = 2.0, h = 1e-4;
  const auto spec = SpectralDensitySpec::ohmic(alpha, wc);

  const double trap_q2 = dense_trapezoid(
      [&](double w) { return 2.0 * alpha * std::exp(-w / wc) / w * std::pow(std::sin(0.5 * w * t), 2); }, 0.0,
      50.0 * wc, h);
  const double trap_q1 =
      dense_trapezoid([&](double w) { return alpha * std::exp(-w / wc) / w * std::sin(w * t); }, alpha * t, 50.0 * wc, h);
  const double trap_q2_beta1 = dense_trapezoid(
      [&](double w) {
        return 2.0 * alpha * std::exp(-w / wc) / w * std::pow(std::sin(0.5 * w * t), 2) / std::tanh(0.5 * w);
      },
      alpha * t * t, 50.0 * wc, h);

  EXPECT_NEAR(trap_q2, kOhmicQ2ZeroT, 1e-11);
  EXPECT_NEAR(trap_q1, kOhmicQ1, 1e-11);
  EXPECT_NEAR(trap_q2_beta1, kOhmicQ2Beta1, 1e-11);

  EXPECT_NEAR(q2(spec, kZeroT, t), trap_q2, 1e-8);
  EXPECT_NEAR(q1(spec, t), trap_q1, 1e-8);
  EXPECT_NEAR(q2(spec, InverseTemperature::finite(1.0), t), trap_q2_beta1, 1e-8);
}

TEST(Kernels, OhmicZeroTemperatureClosedForms) {
  const double alpha = 0.1, wc = 5.0;
  const auto spec = SpectralDensitySpec::ohmic(alpha, wc);
  for (const double t : {0.01, 0.3, 2.0, 17.0}) {
    EXPECT_NEAR(q2(spec, kZeroT, t), 0.5 * alpha * std::log1p(wc * wc * t * t), 1e-9) << t;
    EXPECT_NEAR(q1(spec, t), alpha * std::atan(wc * t), 1e-9) << t;
  }
}

TEST(Kernels, FlatQuadratureConvergesToAnalyticForm) {
  const double gamma0 = 0.37;
  for (const double scaled : {0.1, 1.0, 10.0}) {
    const double t = scaled / gamma0;
    const auto result = q2_flat_quadrature(PaperFlat{gamma0}, t, 1e-6 / t, 1e4 / t);
    const double exact = 0.25 * gamma0 * t;
    EXPECT_LT(std::fabs(result.value - exact) / exact, 1e-6) << "t = " << t;
  }
}

TEST(Kernels, DiscreteModesMatchDirectSums) {
  auto gen = test::rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ReservoirMode> modes;
    const int count = test::uniform_int(gen, 1, 6);
    for (int k = 0; k < count; ++k) modes.push_back({test::uniform(gen, 0.1, 5.0), test::uniform(gen, -1.0, 1.0)});
    const auto spec = SpectralDensitySpec::discrete(modes);
    const double t = test::uniform(gen, 0.0, 30.0);
    const double beta = test::uniform(gen, 0.1, 5.0);
    double direct_q1 = 0.0, direct_q2 = 0.0;
    for (const auto& m : modes) {
      const double weight = m.coupling * m.coupling / (m.omega * m.omega);
      direct_q1 += weight * std::sin(m.omega * t);
      direct_q2 += 2.0 * weight * std::pow(std::sin(0.5 * m.omega * t), 2) / std::tanh(0.5 * beta * m.omega);
    }
    EXPECT_NEAR(q1(spec, t), direct_q1, 1e-12);
    EXPECT_NEAR(q2(spec, InverseTemperature::finite(beta), t), direct_q2, 1e-12);
  }
}

TEST(Kernels, Q2NonnegativeAndWarmerIsLarger) {
  auto gen = test::rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto spec = SpectralDensitySpec::discrete(
        {{test::uniform(gen, 0.1, 4.0), test::uniform(gen, -1.0, 1.0)},
         {test::uniform(gen, 0.1, 4.0), test::uniform(gen, -1.0, 1.0)}});
    const double t = test::uniform(gen, 0.0, 50.0);
    const double cold = q2(spec, kZeroT, t);
    const double warm = q2(spec, InverseTemperature::finite(test::uniform(gen, 0.05, 10.0)), t);
    EXPECT_GE(cold, 0.0);
    EXPECT_GE(warm, cold);
  }
  const auto ohmic = SpectralDensitySpec::ohmic(0.2, 3.0);
  for (const double t : {0.05, 0.5, 5.0}) {
    EXPECT_GE(q2(ohmic, kZeroT, t), 0.0);
    EXPECT_GE(q2(ohmic, InverseTemperature::finite(2.0), t), q2(ohmic, kZeroT, t));
  }
}

TEST(Kernels, Q2ContinuousNearZero) {
  const auto ohmic = SpectralDensitySpec::ohmic(0.1, 5.0);
  // quadratic onset: Q2 ~ (t^2 / 2) int J coth
  const auto warm = InverseTemperature::finite(1.0);
  EXPECT_NEAR(q2(ohmic, warm, 1e-4) / q2(ohmic, warm, 2e-4), 0.25, 1e-3);
  // zero T closed form (alpha/2) ln(1 + wc^2 t^2)
  EXPECT_NEAR(q2(ohmic, kZeroT, 1e-5), 0.05 * std::log1p(25e-10), 1e-15);
}

TEST(KernelGrid, PaperFlatMarksQ1Unavailable) {
  const std::vector<double> times{0.0, 1.0, 2.0};
  const auto grid = kernel_grid(SpectralDensitySpec::paper_flat(1.0), kZeroT, times);
  EXPECT_EQ(grid.q2_values, (std::vector<double>{0.0, 0.25, 0.5}));
  for (const auto& q : grid.q1_values) EXPECT_FALSE(q.has_value());
}

TEST(KernelGrid, SingleModeAtZero) {
  const std::vector<double> times{0.0};
  const auto grid = kernel_grid(SpectralDensitySpec::discrete({{1.0, 0.5}}), kZeroT, times);
  ASSERT_TRUE(grid.q1_values[0].has_value());
  EXPECT_EQ(*grid.q1_values[0], 0.0);
  EXPECT_EQ(grid.q2_values[0], 0.0);
}

TEST(KernelGrid, MatchesPointwiseCallsExactly) {
  const auto spec = SpectralDensitySpec::ohmic(0.1, 5.0);
  std::vector<double> times;
  for (int j = 0; j < 100; ++j) times.push_back(0.1 * j);
  const auto beta = InverseTemperature::finite(0.8);
  const auto grid = kernel_grid(spec, beta, times);
  for (std::size_t j = 0; j < times.size(); ++j) {
    EXPECT_EQ(*grid.q1_values[j], q1(spec, times[j]));
    EXPECT_EQ(grid.q2_values[j], q2(spec, beta, times[j]));
  }
}

TEST(KernelGrid, RejectsBadGrids) {
  const auto spec = SpectralDensitySpec::discrete({{1.0, 0.5}});
  const std::vector<double> unsorted{0.0, 2.0, 1.0};
  const std::vector<double> negative{-1.0, 0.0};
  EXPECT_THROW(kernel_grid(spec, kZeroT, unsorted), DomainError);
  EXPECT_THROW(kernel_grid(spec, kZeroT, negative), DomainError);
}

TEST(Quadrature, ReportsAchievedErrorOnBudgetExhaustion) {
  QuadratureOptions tight;
  tight.abs_tol = 1e-300;
  tight.rel_tol = 1e-300;
  tight.max_intervals = 40;
  try {
    integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1.0, tight);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_GT(e.achieved_estimate(), 0.0);
  }
}

TEST(Quadrature, PolynomialIsExact) {
  const auto r = integrate_adaptive([](double x) { return x * x * x - 2.0 * x; }, -1.0, 3.0, 0.5);
  EXPECT_NEAR(r.value, (81.0 / 4 - 9.0) - (1.0 / 4 - 1.0), 1e-13);
}

TEST(SpectralDensitySpec, ValidatesParameters) {
  EXPECT_THROW(SpectralDensitySpec::paper_flat(-1.0), DomainError);
  EXPECT_THROW(SpectralDensitySpec::ohmic(0.1, 0.0), DomainError);
  EXPECT_THROW(SpectralDensitySpec::ohmic(-0.1, 1.0), DomainError);
  EXPECT_THROW(SpectralDensitySpec::discrete({{0.0, 1.0}}), DomainError);
}

}  // namespace
}  // namespace nldeco
