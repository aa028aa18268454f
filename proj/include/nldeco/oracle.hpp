#pragma once

// Brute-force reference for the closed-form dephasing factor: each reservoir mode
// is evolved on a truncated Fock space under the dressed-sector Hamiltonian
//   H_k(s) = w_k n + F(O_s) c_k (b + b^+) + F(O_s)^2 c_k^2 / w_k
// and R(s1, s2) = prod_k Tr[exp(-i H_k(s1) t) rho_k exp(+i H_k(s2) t)].

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nldeco/distribution.hpp"
#include "nldeco/dynamics.hpp"
#include "nldeco/error.hpp"
#include "nldeco/model.hpp"
#include "nldeco/reservoir.hpp"

namespace nldeco {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// Form of the F^2-proportional counter-term in the total Hamiltonian.
enum class CounterTerm {
  EnergyConsistent,  // F^2 c^2 / w, makes every sector spectrum w * n
  AsPrinted,         // F^2 c^2 / w^2
};

struct FiniteReservoirSpec {
  std::vector<ReservoirMode> modes;
  int fock_cutoff = 30;
  InverseTemperature beta = InverseTemperature::zero_temperature();
  CounterTerm counter_term = CounterTerm::EnergyConsistent;
};

inline constexpr double kTruncationBudget = 1e-10;
inline constexpr double kThermalTailBudget = 1e-8;
inline constexpr double kAuditTolerance = 1e-8;
inline constexpr int kAuditExtraLevels = 10;

namespace detail {

inline RealMatrix lowering_operator(int dim) {
  RealMatrix a = RealMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// exp(G) for anti-Hermitian G = i H, through the eigendecomposition of H.
inline ComplexMatrix exp_i_hermitian(const ComplexMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian);
  if (solver.info() != Eigen::Success) throw NumericalError("oracle: eigendecomposition failed", 0.0);
  const Eigen::VectorXcd phases =
      solver.eigenvalues().unaryExpr([](double lambda) { return std::polar(1.0, lambda); });
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

// Exponential of alpha b^+ - alpha* b on a Fock space of dimension `dim`.
inline ComplexMatrix truncated_displacement(std::complex<double> alpha, int dim) {
  const ComplexMatrix a = lowering_operator(dim).cast<std::complex<double>>();
  const ComplexMatrix generator = alpha * a.adjoint() - std::conj(alpha) * a;
  const ComplexMatrix hermitian = std::complex<double>(0.0, -1.0) * generator;
  return exp_i_hermitian(0.5 * (hermitian + hermitian.adjoint()));
}

inline void check_cutoff(int cutoff) {
  if (cutoff < 1) throw DomainError("oracle: Fock cutoff must be >= 1");
}

}  // namespace detail

/// Matrix elements <m|D(alpha)|n> for m, n <= cutoff. The exponential is taken on
/// an enlarged Fock space and projected, so the returned block is free of edge
/// effects. Throws TruncationError when the coherent state D(alpha)|0> leaks more
/// than 1e-10 of its norm beyond the cutoff.
inline ComplexMatrix displacement_matrix(std::complex<double> alpha, int cutoff) {
  detail::check_cutoff(cutoff);
  const double deficit = detail::poisson_tail(cutoff, std::norm(alpha));
  if (deficit > kTruncationBudget) {
    throw TruncationError("displacement: column-norm deficit " + show(deficit) +
                              " at cutoff " + std::to_string(cutoff) + " exceeds 1e-10",
                          deficit);
  }
  const int dim = cutoff + 1;
  const int padded = 2 * dim + 20;
  return detail::truncated_displacement(alpha, padded).topLeftCorner(dim, dim);
}

/// Thermal state (1 - e^{-beta w}) e^{-beta w n} on levels 0..cutoff, renormalized
/// over the window. Throws TruncationError when the occupation beyond the cutoff
/// is 1e-8 or more.
inline RealMatrix thermal_density(double omega, InverseTemperature beta, int cutoff) {
  detail::check_cutoff(cutoff);
  if (!(omega > 0.0)) throw DomainError("thermal_density: omega must be > 0");
  const int dim = cutoff + 1;
  RealMatrix rho = RealMatrix::Zero(dim, dim);
  const double ratio = beta.boltzmann(omega);
  if (ratio == 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  const double tail = std::pow(ratio, dim);
  if (!(tail < kThermalTailBudget)) {
    throw TruncationError("thermal state: occupation " + show(tail) + " beyond cutoff " +
                              std::to_string(cutoff) + " exceeds 1e-8",
                          tail);
  }
  double total = 0.0;
  for (int n = 0; n < dim; ++n) {
    rho(n, n) = (1.0 - ratio) * std::pow(ratio, n);
    total += rho(n, n);
  }
  return rho / total;
}

struct IdentityResiduals {
  double trace = 0.0;        // |Tr[D(a) rho] - exp(-|a|^2 coth(beta w / 2) / 2)|
  double conjugation = 0.0;  // max_ij |(e^{x n} D(a) e^{-x n})_ij - D(a e^x)_ij|, x = -i w t
  double max() const noexcept { return std::max(trace, conjugation); }
};

/// Checks the thermal-trace identity of the displacement operator and its
/// conjugation by exp(x n) for imaginary x = -i w t, t in {0.3, 1, 2.7}.
inline IdentityResiduals verify_trace_identity(std::complex<double> alpha, double omega, InverseTemperature beta,
                                               int cutoff) {
  const ComplexMatrix d = displacement_matrix(alpha, cutoff);
  const RealMatrix rho = thermal_density(omega, beta, cutoff);
  const std::complex<double> numeric = (d * rho.cast<std::complex<double>>()).trace();
  const double closed = std::exp(-0.5 * std::norm(alpha) * beta.coth_half(omega));

  IdentityResiduals residuals;
  residuals.trace = std::abs(numeric - closed);

  const int dim = cutoff + 1;
  for (const double t : {0.3, 1.0, 2.7}) {
    const std::complex<double> x(0.0, -omega * t);
    Eigen::VectorXcd left(dim);
    Eigen::VectorXcd right(dim);
    for (int n = 0; n < dim; ++n) {
      left(n) = std::exp(x * static_cast<double>(n));
      right(n) = std::exp(-x * static_cast<double>(n));
    }
    const ComplexMatrix conjugated = left.asDiagonal() * d * right.asDiagonal();
    const ComplexMatrix expected = displacement_matrix(alpha * std::exp(x), cutoff);
    residuals.conjugation = std::max(residuals.conjugation, (conjugated - expected).cwiseAbs().maxCoeff());
  }
  return residuals;
}

/// max_ij |(D(a) D(b))_ij - e^{i Im(a b*)} D(a + b)_ij| over i, j <= cutoff. The
/// product is formed on a doubled space so the intermediate sum is not truncated.
inline double verify_composition(std::complex<double> alpha, std::complex<double> beta, int cutoff) {
  const int wide = 2 * cutoff + 10;
  const ComplexMatrix product = displacement_matrix(alpha, wide) * displacement_matrix(beta, wide);
  const std::complex<double> phase = std::polar(1.0, std::imag(alpha * std::conj(beta)));
  const ComplexMatrix expected = phase * displacement_matrix(alpha + beta, cutoff);
  const int dim = cutoff + 1;
  return (product.topLeftCorner(dim, dim) - expected).cwiseAbs().maxCoeff();
}

namespace detail {

inline RealMatrix sector_hamiltonian(const ReservoirMode& mode, double f, int cutoff, CounterTerm counter_term) {
  const int dim = cutoff + 1;
  const RealMatrix a = lowering_operator(dim);
  RealMatrix h = mode.omega * (a.transpose() * a) + f * mode.coupling * (a + a.transpose());
  const double denominator = counter_term == CounterTerm::EnergyConsistent ? mode.omega : mode.omega * mode.omega;
  h.diagonal().array() += f * f * mode.coupling * mode.coupling / denominator;
  return h;
}

// exp(-i H t) for real symmetric H.
inline ComplexMatrix propagator(const RealMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("oracle: eigendecomposition failed", 0.0);
  const Eigen::VectorXcd phases = solver.eigenvalues().unaryExpr([t](double e) { return std::polar(1.0, -e * t); });
  const ComplexMatrix v = solver.eigenvectors().cast<std::complex<double>>();
  return v * phases.asDiagonal() * v.transpose();
}

inline std::complex<double> single_mode_factor(const ReservoirMode& mode, double f1, double f2, InverseTemperature beta,
                                               int cutoff, CounterTerm counter_term, double t) {
  const RealMatrix rho = thermal_density(mode.omega, beta, cutoff);
  const ComplexMatrix u1 = propagator(sector_hamiltonian(mode, f1, cutoff, counter_term), t);
  const ComplexMatrix u2 = propagator(sector_hamiltonian(mode, f2, cutoff, counter_term), t);
  // Tr[U1 rho U2^+] = sum_n rho_nn (U2^+ U1)_nn
  const ComplexMatrix m = u2.adjoint() * u1;
  std::complex<double> trace = 0.0;
  for (int n = 0; n <= cutoff; ++n) trace += rho(n, n) * m(n, n);
  return trace;
}

inline void validate(const FiniteReservoirSpec& reservoir) {
  if (reservoir.modes.empty() || reservoir.modes.size() > 4) {
    throw DomainError("oracle reservoir: needs between 1 and 4 modes");
  }
  if (reservoir.fock_cutoff < 10) throw DomainError("oracle reservoir: fock_cutoff must be >= 10");
  for (const auto& mode : reservoir.modes) {
    if (!(mode.omega > 0.0)) throw DomainError("oracle reservoir: mode frequencies must be > 0");
  }
}

}  // namespace detail

/// Reservoir factor of the (s1, s2) coherence from truncated-Fock evolution,
/// excluding the dynamical phase. Every mode factor is recomputed at cutoff + 10;
/// disagreement beyond 1e-8 raises TruncationError.
inline std::complex<double> brute_force_r(const DressedState& s1, const DressedState& s2, const ModelParams& params,
                                          const FiniteReservoirSpec& reservoir, double t) {
  detail::validate(reservoir);
  const double f1 = interaction_f(op_eigenvalue(s1), params.d());
  const double f2 = interaction_f(op_eigenvalue(s2), params.d());
  std::complex<double> r = 1.0;
  for (const auto& mode : reservoir.modes) {
    const auto factor = detail::single_mode_factor(mode, f1, f2, reservoir.beta, reservoir.fock_cutoff,
                                                   reservoir.counter_term, t);
    const auto audit = detail::single_mode_factor(mode, f1, f2, reservoir.beta,
                                                  reservoir.fock_cutoff + kAuditExtraLevels,
                                                  reservoir.counter_term, t);
    const double drift = std::abs(factor - audit);
    if (drift > kAuditTolerance) {
      throw TruncationError("oracle: result moved by " + show(drift) + " when raising the cutoff to " +
                                std::to_string(reservoir.fock_cutoff + kAuditExtraLevels),
                            drift);
    }
    r *= factor;
  }
  return r;
}

/// Same quantity evolved on the joint tensor-product space of all modes (no
/// per-mode factorization). Cost grows as cutoff^(2K); intended for K <= 2.
inline std::complex<double> brute_force_r_joint(const DressedState& s1, const DressedState& s2,
                                                const ModelParams& params, const FiniteReservoirSpec& reservoir,
                                                double t) {
  detail::validate(reservoir);
  const double f1 = interaction_f(op_eigenvalue(s1), params.d());
  const double f2 = interaction_f(op_eigenvalue(s2), params.d());
  const int dim = reservoir.fock_cutoff + 1;

  auto kron = [](const RealMatrix& x, const RealMatrix& y) {
    RealMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
      }
    }
    return out;
  };

  auto joint = [&](auto local) {
    RealMatrix total;
    for (std::size_t k = 0; k < reservoir.modes.size(); ++k) {
      RealMatrix term = RealMatrix::Identity(1, 1);
      for (std::size_t j = 0; j < reservoir.modes.size(); ++j) {
        term = kron(term, j == k ? local(reservoir.modes[k]) : RealMatrix::Identity(dim, dim));
      }
      total = (k == 0) ? term : RealMatrix(total + term);
    }
    return total;
  };

  const RealMatrix h1 = joint([&](const ReservoirMode& m) {
    return detail::sector_hamiltonian(m, f1, reservoir.fock_cutoff, reservoir.counter_term);
  });
  const RealMatrix h2 = joint([&](const ReservoirMode& m) {
    return detail::sector_hamiltonian(m, f2, reservoir.fock_cutoff, reservoir.counter_term);
  });
  RealMatrix rho = RealMatrix::Identity(1, 1);
  for (const auto& mode : reservoir.modes) rho = kron(rho, thermal_density(mode.omega, reservoir.beta, dim - 1));

  const ComplexMatrix m = detail::propagator(h2, t).adjoint() * detail::propagator(h1, t);
  std::complex<double> trace = 0.0;
  for (Eigen::Index n = 0; n < rho.rows(); ++n) trace += rho(n, n) * m(n, n);
  return trace;
}

/// Closed-form counterpart of brute_force_r built from the discrete-mode kernels.
inline std::complex<double> closed_form_r(const DressedState& s1, const DressedState& s2, const ModelParams& params,
                                          const FiniteReservoirSpec& reservoir, double t) {
  const auto spec = SpectralDensitySpec::discrete(reservoir.modes);
  return reservoir_factor(s1, s2, params.with_beta(reservoir.beta), spec, t);
}

}  // namespace nldeco
