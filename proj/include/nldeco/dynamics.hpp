#pragma once

// Closed-form reduced dynamics in the dressed basis. A coherence between dressed
// states s1 and s2 evolves as
//   rho_{s1 s2}(t) = rho_{s1 s2}(0) exp(-i phase) exp(-damping),
//   phase   = (E_1 - E_2) t + [F(O_1)^2 - F(O_2)^2] Q1(t),
//   damping = [F(O_1) - F(O_2)]^2 Q2(t).

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "nldeco/distribution.hpp"
#include "nldeco/error.hpp"
#include "nldeco/model.hpp"
#include "nldeco/reservoir.hpp"

namespace nldeco {

struct CoherenceFactor {
  double phase = 0.0;
  double damping = 0.0;
};

struct PopulationTrace {
  std::vector<double> times;
  std::vector<double> p_down;
  ModelParams params;
  SpectralDensitySpec spectral;
  MotionalDistribution distribution;
};

/// Builds the coherence factor from already evaluated kernels. q1 is consulted
/// only when the phase-shift prefactor is nonzero, q2 only when the damping
/// prefactor is nonzero.
inline CoherenceFactor coherence_factor_from_kernels(const DressedState& s1, const DressedState& s2,
                                                     const ModelParams& params, double t,
                                                     std::optional<double> q1_value, double q2_value) {
  const double f1 = interaction_f(op_eigenvalue(s1), params.d());
  const double f2 = interaction_f(op_eigenvalue(s2), params.d());
  const double shift_prefactor = f1 * f1 - f2 * f2;
  const double damping_prefactor = (f1 - f2) * (f1 - f2);

  CoherenceFactor cf;
  cf.phase = (dressed_energy(s1, params) - dressed_energy(s2, params)) * t;
  if (shift_prefactor != 0.0) {
    if (!q1_value) {
      throw DivergentKernelError("coherence factor: phase shift needs Q1, which diverges for this spectral density");
    }
    cf.phase += shift_prefactor * *q1_value;
  }
  if (damping_prefactor != 0.0) cf.damping = damping_prefactor * q2_value;
  return cf;
}

inline CoherenceFactor coherence_factor(const DressedState& s1, const DressedState& s2, const ModelParams& params,
                                        const SpectralDensitySpec& spec, double t,
                                        const QuadratureOptions& options = {}) {
  const double f1 = interaction_f(op_eigenvalue(s1), params.d());
  const double f2 = interaction_f(op_eigenvalue(s2), params.d());
  std::optional<double> q1_value;
  if (f1 * f1 - f2 * f2 != 0.0) q1_value = q1(spec, t, options);
  const double q2_value = (f1 != f2) ? q2(spec, params.beta(), t, options) : 0.0;
  return coherence_factor_from_kernels(s1, s2, params, t, q1_value, q2_value);
}

/// Reservoir factor R = exp(-i dphi) exp(-Gamma), i.e. the coherence factor
/// without the dynamical phase (E_1 - E_2) t.
inline std::complex<double> reservoir_factor(const DressedState& s1, const DressedState& s2,
                                             const ModelParams& params, const SpectralDensitySpec& spec, double t,
                                             const QuadratureOptions& options = {}) {
  const auto cf = coherence_factor(s1, s2, params, spec, t, options);
  const double dynamical = (dressed_energy(s1, params) - dressed_energy(s2, params)) * t;
  return std::polar(std::exp(-cf.damping), -(cf.phase - dynamical));
}

inline std::complex<double> rho_element(const DressedState& s1, const DressedState& s2,
                                        std::complex<double> rho0_element, const ModelParams& params,
                                        const SpectralDensitySpec& spec, double t,
                                        const QuadratureOptions& options = {}) {
  if (rho0_element == 0.0) return {};
  const auto cf = coherence_factor(s1, s2, params, spec, t, options);
  return rho0_element * std::polar(std::exp(-cf.damping), -cf.phase);
}

/// P_down(t) for the initial state |down><down| (x) sum_n p_n |n><n| from precomputed kernels.
/// Terms are accumulated in ascending n; the result is normalized by the
/// accumulated mass so that P_down(0) == 1 and 0 <= P_down <= 1 hold exactly.
inline std::vector<double> population_from_kernels(const ModelParams& params, const MotionalDistribution& dist,
                                                   const KernelGrid& kernels) {
  std::vector<double> p_down(kernels.times.size());
  for (std::size_t j = 0; j < kernels.times.size(); ++j) {
    const double t = kernels.times[j];
    double mass = 0.0;
    double coherent = 0.0;
    for (std::size_t n = 0; n < dist.size(); ++n) {
      const double weight = dist.probabilities()[n];
      mass += weight;
      if (weight == 0.0) continue;
      const int level = static_cast<int>(n);
      const auto cf = coherence_factor_from_kernels(DressedState::upper(level), DressedState::lower(level), params, t,
                                                    kernels.q1_values[j], kernels.q2_values[j]);
      coherent += weight * std::cos(cf.phase) * std::exp(-cf.damping);
    }
    p_down[j] = 0.5 * (mass + coherent) / mass;
  }
  return p_down;
}

inline PopulationTrace population_trace(const ModelParams& params, const SpectralDensitySpec& spec,
                                        const MotionalDistribution& dist, std::span<const double> times,
                                        const QuadratureOptions& options = {}) {
  const auto kernels = kernel_grid(spec, params.beta(), times, options);
  return {kernels.times, population_from_kernels(params, dist, kernels), params, spec, dist};
}

/// Uniform grid of `count` points on [start, stop].
inline std::vector<double> linear_grid(double start, double stop, std::size_t count) {
  if (count < 2) throw DomainError("time_grid.count: must be >= 2");
  if (!(stop > start)) throw DomainError("time_grid: stop must exceed start");
  std::vector<double> times(count);
  for (std::size_t j = 0; j < count; ++j) {
    times[j] = start + (stop - start) * static_cast<double>(j) / static_cast<double>(count - 1);
  }
  return times;
}

}  // namespace nldeco
