#pragma once

// Oracle equivalence suite: every property compares the closed form, or a
// displacement-operator identity, against truncated-Fock brute force and
// reports its worst residual against a fixed tolerance.

#include <algorithm>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "nldeco/io.hpp"
#include "nldeco/oracle.hpp"

namespace nldeco {

struct OracleProperty {
  std::string property;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct OracleSettings {
  std::vector<ReservoirMode> modes;
  int fock_cutoff = 30;
  std::vector<InverseTemperature> temperatures{InverseTemperature::zero_temperature(),
                                               InverseTemperature::finite(1.0)};
  std::vector<int> levels{0, 1, 2};
  double t_max = 20.0;
  std::size_t t_count = 50;
  CounterTerm counter_term = CounterTerm::EnergyConsistent;
};

inline constexpr double kIdentityTolerance = 1e-9;
inline constexpr double kFactorizationTolerance = 1e-6;
inline constexpr double kDiagonalTolerance = 1e-9;
inline constexpr double kModulusTolerance = 1e-12;
inline constexpr double kModeProductTolerance = 1e-10;

/// Coherences checked against the closed form: (n,1)-(n,2) per level and (0,1)-(0,3).
inline std::vector<std::pair<DressedState, DressedState>> oracle_sector_pairs(const std::vector<int>& levels) {
  std::vector<std::pair<DressedState, DressedState>> pairs;
  for (const int n : levels) pairs.emplace_back(DressedState::upper(n), DressedState::lower(n));
  pairs.emplace_back(DressedState::upper(0), DressedState::decoupled());
  return pairs;
}

/// Worst |R_brute - R_closed| over sectors and times for one temperature.
inline double factorization_residual(const ModelParams& params, const FiniteReservoirSpec& reservoir,
                                     const std::vector<int>& levels, double t_max, std::size_t t_count) {
  double worst = 0.0;
  const auto times = linear_grid(0.0, t_max, t_count);
  for (const auto& [s1, s2] : oracle_sector_pairs(levels)) {
    for (const double t : times) {
      const auto brute = brute_force_r(s1, s2, params, reservoir, t);
      const auto closed = closed_form_r(s1, s2, params, reservoir, t);
      worst = std::max(worst, std::abs(brute - closed));
    }
  }
  return worst;
}

/// Composition, conjugation and thermal-trace residuals over the standard sweep
/// alpha in {0, 0.2, 0.5, 1} (with complex partners), beta*omega in {zero-T, 0.5, 1, 2}.
inline std::vector<OracleProperty> identity_suite(int cutoff = 60) {
  const std::vector<std::complex<double>> alphas{{0.0, 0.0}, {0.2, 0.0}, {0.5, 0.0}, {1.0, 0.0},
                                                 {0.3, 0.4}, {0.0, 0.5}};
  const std::vector<std::complex<double>> partners{{0.0, 0.2}, {-0.2, 0.4}, {0.5, 0.0}, {0.0, 1.0}};
  std::vector<InverseTemperature> temperatures{InverseTemperature::zero_temperature()};
  for (const double bw : {0.5, 1.0, 2.0}) temperatures.push_back(InverseTemperature::finite(bw));

  double composition = 0.0;
  double conjugation = 0.0;
  double trace = 0.0;
  for (const auto alpha : alphas) {
    for (const auto partner : partners) composition = std::max(composition, verify_composition(alpha, partner, 30));
    for (const auto beta : temperatures) {
      const auto r = verify_trace_identity(alpha, 1.0, beta, cutoff);
      conjugation = std::max(conjugation, r.conjugation);
      trace = std::max(trace, r.trace);
    }
  }
  return {{"displacement_composition", composition, kIdentityTolerance, composition < kIdentityTolerance},
          {"displacement_conjugation", conjugation, kIdentityTolerance, conjugation < kIdentityTolerance},
          {"thermal_trace", trace, kIdentityTolerance, trace < kIdentityTolerance}};
}

inline std::vector<OracleProperty> run_oracle_checks(const ModelParams& params, const OracleSettings& settings) {
  auto report = identity_suite();

  double factorization = 0.0;
  double diagonal = 0.0;
  double modulus = 0.0;
  const auto times = linear_grid(0.0, settings.t_max, settings.t_count);
  for (const auto beta : settings.temperatures) {
    const FiniteReservoirSpec reservoir{settings.modes, settings.fock_cutoff, beta, settings.counter_term};
    factorization = std::max(factorization,
                             factorization_residual(params, reservoir, settings.levels, settings.t_max,
                                                    settings.t_count));
    for (const auto& [s1, s2] : oracle_sector_pairs(settings.levels)) {
      for (std::size_t j = 0; j < times.size(); j += 7) {
        const double t = times[j];
        modulus = std::max(modulus, std::abs(brute_force_r(s1, s2, params, reservoir, t)) - 1.0);
        for (const auto& s : {s1, s2}) {
          diagonal = std::max(diagonal, std::abs(brute_force_r(s, s, params, reservoir, t) - 1.0));
        }
      }
    }
  }
  report.push_back({"factorization", factorization, kFactorizationTolerance, factorization < kFactorizationTolerance});
  report.push_back({"diagonal_sectors", diagonal, kDiagonalTolerance, diagonal < kDiagonalTolerance});
  report.push_back({"modulus_bound", modulus, kModulusTolerance, modulus < kModulusTolerance});

  if (settings.modes.size() >= 2) {
    // Joint two-mode evolution against the product of single-mode factors.
    const int cutoff = 12;
    FiniteReservoirSpec pair{{settings.modes[0], settings.modes[1]}, cutoff,
                             InverseTemperature::zero_temperature(), settings.counter_term};
    const DressedState s1 = DressedState::upper(0);
    const DressedState s2 = DressedState::lower(0);
    const double f1 = interaction_f(op_eigenvalue(s1), params.d());
    const double f2 = interaction_f(op_eigenvalue(s2), params.d());
    double worst = 0.0;
    for (const double t : {0.7, 2.3, 5.1}) {
      const auto joint = brute_force_r_joint(s1, s2, params, pair, t);
      std::complex<double> product = 1.0;
      for (const auto& mode : pair.modes) {
        product *= detail::single_mode_factor(mode, f1, f2, pair.beta, cutoff, pair.counter_term, t);
      }
      worst = std::max(worst, std::abs(joint - product));
    }
    report.push_back({"mode_factorization", worst, kModeProductTolerance, worst < kModeProductTolerance});
  }
  return report;
}

inline Json to_json(const std::vector<OracleProperty>& report) {
  Json out = Json::array();
  for (const auto& p : report) {
    out.push_back({{"property", p.property}, {"max_residual", p.max_residual}, {"tolerance", p.tolerance},
                   {"pass", p.pass}});
  }
  return out;
}

}  // namespace nldeco
