#pragma once

// Dressed-state algebra of the anti Jaynes-Cummings Hamiltonian
//   H_S = g (a^+ s_+ + a s_-)
// and the nonlinear interaction function F(O) = O^(2d+1) with O = H_S / g.

#include <cmath>
#include <limits>
#include <string>

#include "nldeco/error.hpp"

namespace nldeco {

/// Inverse temperature of the reservoir. Zero temperature is a distinguished
/// value rather than a large float, so thermal factors are exact there.
class InverseTemperature {
 public:
  static constexpr InverseTemperature zero_temperature() noexcept { return InverseTemperature{}; }

  static InverseTemperature finite(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      throw DomainError("inverse temperature must be finite and > 0, got " + show(beta));
    }
    InverseTemperature b;
    b.beta_ = beta;
    return b;
  }

  constexpr bool is_zero_temperature() const noexcept { return beta_ == 0.0; }

  double value() const {
    if (is_zero_temperature()) throw DomainError("zero temperature has no finite inverse temperature");
    return beta_;
  }

  /// coth(beta * omega / 2); exactly 1 at zero temperature.
  double coth_half(double omega) const noexcept {
    if (is_zero_temperature()) return 1.0;
    return 1.0 / std::tanh(0.5 * beta_ * omega);
  }

  /// Boltzmann ratio exp(-beta * omega); exactly 0 at zero temperature.
  double boltzmann(double omega) const noexcept {
    if (is_zero_temperature()) return 0.0;
    return std::exp(-beta_ * omega);
  }

  friend constexpr bool operator==(InverseTemperature, InverseTemperature) = default;

 private:
  constexpr InverseTemperature() = default;
  double beta_ = 0.0;  // 0 encodes zero temperature
};

/// Physical and coupling constants of the model (hbar = 1).
class ModelParams {
 public:
  ModelParams(double g, double d, double gamma0,
              InverseTemperature beta = InverseTemperature::zero_temperature())
      : g_(g), d_(d), gamma0_(gamma0), beta_(beta) {
    if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("model.g: must be finite and > 0");
    if (!(d > -0.5) || !std::isfinite(d)) {
      throw DomainError("model.d: must satisfy 2d+1 > 0, i.e. d > -0.5");
    }
    if (!(gamma0 >= 0.0) || !std::isfinite(gamma0)) {
      throw DomainError("model.gamma0: must be finite and >= 0");
    }
  }

  double g() const noexcept { return g_; }
  double d() const noexcept { return d_; }
  double gamma0() const noexcept { return gamma0_; }
  InverseTemperature beta() const noexcept { return beta_; }
  /// Decay exponent nu = 2d + 1.
  double nu() const noexcept { return 2.0 * d_ + 1.0; }

  ModelParams with_g(double g) const { return {g, d_, gamma0_, beta_}; }
  ModelParams with_d(double d) const { return {g_, d, gamma0_, beta_}; }
  ModelParams with_gamma0(double gamma0) const { return {g_, d_, gamma0, beta_}; }
  ModelParams with_beta(InverseTemperature beta) const { return {g_, d_, gamma0_, beta}; }

 private:
  double g_;
  double d_;
  double gamma0_;
  InverseTemperature beta_;
};

/// Dressed eigenstate |phi(n, i)>. Branches 1 and 2 are the (anti)symmetric
/// combinations of |down, n> and |up, n+1>; branch 3 is the decoupled |up, 0>.
class DressedState {
 public:
  DressedState(int n, int branch) : n_(n), branch_(branch) {
    if (n < 0) throw DomainError("dressed state: n must be >= 0, got " + std::to_string(n));
    if (branch < 1 || branch > 3) {
      throw DomainError("dressed state: branch must be 1, 2 or 3, got " + std::to_string(branch));
    }
    if (branch == 3 && n != 0) throw DomainError("dressed state: branch 3 exists only for n = 0");
  }

  static DressedState upper(int n) { return {n, 1}; }
  static DressedState lower(int n) { return {n, 2}; }
  static DressedState decoupled() { return {0, 3}; }

  int n() const noexcept { return n_; }
  int branch() const noexcept { return branch_; }

  friend bool operator==(const DressedState&, const DressedState&) = default;

 private:
  int n_;
  int branch_;
};

/// Eigenvalue of O_S = a^+ s_+ + a s_- on the dressed state: +sqrt(n+1), -sqrt(n+1) or 0.
inline double op_eigenvalue(const DressedState& s) noexcept {
  if (s.branch() == 3) return 0.0;
  const double root = std::sqrt(static_cast<double>(s.n()) + 1.0);
  return s.branch() == 1 ? root : -root;
}

/// Eigenvalue of H_S on the dressed state, (-1)^(i+1) g sqrt(n+1), or 0 for |phi(0,3)>.
inline double dressed_energy(const DressedState& s, const ModelParams& params) noexcept {
  return params.g() * op_eigenvalue(s);
}

/// Sign-preserving real power sign(x) |x|^(2d+1), the odd extension of O^(2d+1).
inline double interaction_f(double x, double d) {
  const double exponent = 2.0 * d + 1.0;
  if (!(exponent > 0.0)) throw DomainError("interaction_f: requires 2d+1 > 0");
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::fabs(x), exponent), x);
}

/// Coefficient of Q2 in the (n,1)-(n,2) damping exponent: [F(sqrt(n+1)) - F(-sqrt(n+1))]^2 = 4 (n+1)^(2d+1).
inline double damping_coefficient(int n, double d) {
  if (n < 0) throw DomainError("damping_coefficient: n must be >= 0");
  const double exponent = 2.0 * d + 1.0;
  if (!(exponent > 0.0)) throw DomainError("damping_coefficient: requires 2d+1 > 0");
  return 4.0 * std::pow(static_cast<double>(n) + 1.0, exponent);
}

}  // namespace nldeco
