#pragma once

// Reservoir spectral densities and the dephasing kernels
//   Q1(t) =   int_0^inf dw J(w) c(w)^2 / w^2 sin(w t)
//   Q2(t) = 2 int_0^inf dw J(w) c(w)^2 / w^2 sin^2(w t / 2) coth(beta w / 2)
// or their discrete-mode sums.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nldeco/error.hpp"
#include "nldeco/model.hpp"
#include "nldeco/quadrature.hpp"

namespace nldeco {

/// J(w) c(w)^2 = gamma0 / (2 pi): gives Q2 = gamma0 t / 4 at zero temperature.
struct PaperFlat {
  double gamma0 = 0.0;
};

/// J(w) c(w)^2 = strength * w * exp(-w / cutoff).
struct OhmicExpCutoff {
  double strength = 0.0;
  double cutoff = 1.0;
};

struct ReservoirMode {
  double omega = 1.0;
  double coupling = 0.0;
};

struct DiscreteModes {
  std::vector<ReservoirMode> modes;
};

class SpectralDensitySpec {
 public:
  using Family = std::variant<PaperFlat, OhmicExpCutoff, DiscreteModes>;

  static SpectralDensitySpec paper_flat(double gamma0) {
    if (!(gamma0 >= 0.0) || !std::isfinite(gamma0)) throw DomainError("spectral.gamma0: must be finite and >= 0");
    return SpectralDensitySpec(PaperFlat{gamma0});
  }

  static SpectralDensitySpec ohmic(double strength, double cutoff) {
    if (!(strength >= 0.0) || !std::isfinite(strength)) throw DomainError("spectral.alpha: must be finite and >= 0");
    if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw DomainError("spectral.omega_c: must be finite and > 0");
    return SpectralDensitySpec(OhmicExpCutoff{strength, cutoff});
  }

  static SpectralDensitySpec discrete(std::vector<ReservoirMode> modes) {
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (!(modes[k].omega > 0.0) || !std::isfinite(modes[k].omega)) {
        throw DomainError("spectral.modes[" + std::to_string(k) + "].omega: must be finite and > 0");
      }
      if (!std::isfinite(modes[k].coupling)) {
        throw DomainError("spectral.modes[" + std::to_string(k) + "].c: must be finite");
      }
    }
    return SpectralDensitySpec(DiscreteModes{std::move(modes)});
  }

  const Family& family() const noexcept { return family_; }

  bool is_paper_flat() const noexcept { return std::holds_alternative<PaperFlat>(family_); }

  /// Whether Q1 exists for this spectral density.
  bool has_finite_q1() const noexcept { return !is_paper_flat(); }

 private:
  explicit SpectralDensitySpec(Family family) : family_(std::move(family)) {}
  Family family_;
};

/// Sampled kernels; q1 is empty where the kernel diverges.
struct KernelGrid {
  std::vector<double> times;
  std::vector<std::optional<double>> q1_values;
  std::vector<double> q2_values;
};

namespace detail {

inline void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("kernel time must be finite and >= 0");
}

// exp(-w/wc) falls below 1e-12 on the upper half of [0, limit].
inline double ohmic_upper_limit(const OhmicExpCutoff& ohmic) {
  return 2.0 * ohmic.cutoff * std::log(1e12);
}

}  // namespace detail

/// Q2 for the flat spectrum at zero temperature by quadrature over [lower, upper].
/// The production path returns gamma0 t / 4 in closed form; this exists to check it.
inline QuadratureResult q2_flat_quadrature(const PaperFlat& flat, double t, double lower, double upper,
                                           const QuadratureOptions& options = {}) {
  detail::check_time(t);
  if (t == 0.0) return {};
  const double density = flat.gamma0 / (2.0 * std::numbers::pi);
  auto integrand = [density, t](double w) {
    const double s = std::sin(0.5 * w * t);
    return 2.0 * density * s * s / (w * w);
  };
  return integrate_with_tail(integrand, lower, upper, oscillation_panel_width(t), options);
}

/// Damping kernel Q2(t) >= 0.
inline double q2(const SpectralDensitySpec& spec, InverseTemperature beta, double t,
                 const QuadratureOptions& options = {}) {
  detail::check_time(t);
  if (t == 0.0) return 0.0;
  return std::visit(
      [&](const auto& family) -> double {
        using T = std::decay_t<decltype(family)>;
        if constexpr (std::is_same_v<T, PaperFlat>) {
          if (!beta.is_zero_temperature()) {
            throw DivergentKernelError(
                "infrared-divergent kernel: Q2 of the flat spectral density diverges at finite temperature");
          }
          return 0.25 * family.gamma0 * t;
        } else if constexpr (std::is_same_v<T, DiscreteModes>) {
          double sum = 0.0;
          for (const auto& mode : family.modes) {
            const double s = std::sin(0.5 * mode.omega * t);
            sum += mode.coupling * mode.coupling / (mode.omega * mode.omega) * s * s * beta.coth_half(mode.omega);
          }
          return 2.0 * sum;
        } else {
          if (family.strength == 0.0) return 0.0;
          auto integrand = [&family, beta, t](double w) {
            const double s = std::sin(0.5 * w * t);
            return 2.0 * family.strength * std::exp(-w / family.cutoff) / w * s * s * beta.coth_half(w);
          };
          const auto result = integrate_with_tail(integrand, 0.0, detail::ohmic_upper_limit(family),
                                                  oscillation_panel_width(t), options);
          return std::max(result.value, 0.0);
        }
      },
      spec.family());
}

/// Phase-shift kernel Q1(t). Throws DivergentKernelError for the flat spectrum.
inline double q1(const SpectralDensitySpec& spec, double t, const QuadratureOptions& options = {}) {
  detail::check_time(t);
  if (spec.is_paper_flat()) {
    throw DivergentKernelError("infrared-divergent kernel: Q1 of the flat spectral density diverges");
  }
  if (t == 0.0) return 0.0;
  return std::visit(
      [&](const auto& family) -> double {
        using T = std::decay_t<decltype(family)>;
        if constexpr (std::is_same_v<T, DiscreteModes>) {
          double sum = 0.0;
          for (const auto& mode : family.modes) {
            sum += mode.coupling * mode.coupling / (mode.omega * mode.omega) * std::sin(mode.omega * t);
          }
          return sum;
        } else if constexpr (std::is_same_v<T, OhmicExpCutoff>) {
          if (family.strength == 0.0) return 0.0;
          auto integrand = [&family, t](double w) {
            return family.strength * std::exp(-w / family.cutoff) / w * std::sin(w * t);
          };
          return integrate_with_tail(integrand, 0.0, detail::ohmic_upper_limit(family),
                                     oscillation_panel_width(t), options)
              .value;
        } else {
          return 0.0;  // unreachable: flat handled above
        }
      },
      spec.family());
}

/// Evaluates both kernels on a time grid; every point is computed independently.
inline KernelGrid kernel_grid(const SpectralDensitySpec& spec, InverseTemperature beta, std::span<const double> times,
                              const QuadratureOptions& options = {}) {
  if (times.empty()) throw DomainError("kernel_grid: empty time grid");
  if (!(times.front() >= 0.0)) throw DomainError("kernel_grid: times must start at t >= 0");
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) throw DomainError("kernel_grid: times must be strictly increasing");
  }
  KernelGrid grid;
  grid.times.assign(times.begin(), times.end());
  grid.q1_values.reserve(times.size());
  grid.q2_values.reserve(times.size());
  for (const double t : times) {
    grid.q1_values.push_back(spec.has_finite_q1() ? std::optional<double>(q1(spec, t, options)) : std::nullopt);
    grid.q2_values.push_back(q2(spec, beta, t, options));
  }
  return grid;
}

}  // namespace nldeco
