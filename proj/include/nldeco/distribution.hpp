#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nldeco/error.hpp"

namespace nldeco {

/// Initial Fock-state probabilities p_0..p_N of the motional mode.
class MotionalDistribution {
 public:
  explicit MotionalDistribution(std::vector<double> probabilities) : p_(std::move(probabilities)) {
    if (p_.empty()) throw DomainError("distribution: needs at least one level");
    double total = 0.0;
    for (std::size_t n = 0; n < p_.size(); ++n) {
      if (!(p_[n] >= 0.0) || !std::isfinite(p_[n])) {
        throw DomainError("distribution: p[" + std::to_string(n) + "] must be finite and >= 0");
      }
      total += p_[n];
    }
    if (!(total >= 1.0 - 1e-9 && total <= 1.0 + 1e-12)) {
      throw DomainError("distribution: probabilities must sum to 1 within 1e-9, got " + show(total));
    }
  }

  const std::vector<double>& probabilities() const noexcept { return p_; }
  double operator[](std::size_t n) const { return p_.at(n); }
  int cutoff() const noexcept { return static_cast<int>(p_.size()) - 1; }
  std::size_t size() const noexcept { return p_.size(); }

  friend bool operator==(const MotionalDistribution&, const MotionalDistribution&) = default;

 private:
  std::vector<double> p_;
};

struct FockKind {
  int n0 = 0;
};
struct CoherentKind {
  double mean = 0.0;
};
struct ThermalKind {
  double mean = 0.0;
};

using DistributionKind = std::variant<FockKind, CoherentKind, ThermalKind>;

inline constexpr double kDefaultTailTolerance = 1e-8;
inline constexpr int kMaxAutoCutoff = 200;

namespace detail {

inline double poisson(int n, double mean) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

inline double poisson_tail(int cutoff, double mean) {
  double tail = 0.0;
  for (int n = cutoff + 1; n <= cutoff + 2000; ++n) {
    const double term = poisson(n, mean);
    tail += term;
    if (n > mean && term < 1e-30 * tail) break;
  }
  return tail;
}

inline double thermal(int n, double mean) {
  const double ratio = mean / (1.0 + mean);
  return std::pow(ratio, n) / (1.0 + mean);
}

inline double thermal_tail(int cutoff, double mean) { return std::pow(mean / (1.0 + mean), cutoff + 1); }

}  // namespace detail

/// Builds Fock, coherent (Poisson) or thermal (geometric) populations. Without an
/// explicit cutoff the smallest N with tail mass < tail_tolerance is used, capped at 200.
inline MotionalDistribution make_distribution(const DistributionKind& kind, std::optional<int> cutoff = std::nullopt,
                                              double tail_tolerance = kDefaultTailTolerance) {
  if (cutoff && *cutoff < 0) throw DomainError("distribution.cutoff: must be >= 0");
  if (!(tail_tolerance > 0.0)) throw DomainError("distribution.tail_tolerance: must be > 0");

  if (const auto* fock = std::get_if<FockKind>(&kind)) {
    if (fock->n0 < 0) throw DomainError("distribution.n0: must be >= 0");
    const int n_max = cutoff.value_or(fock->n0);
    if (fock->n0 > n_max) throw DomainError("distribution.n0: exceeds cutoff");
    std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
    p[static_cast<std::size_t>(fock->n0)] = 1.0;
    return MotionalDistribution(std::move(p));
  }

  const bool coherent = std::holds_alternative<CoherentKind>(kind);
  const double mean = coherent ? std::get<CoherentKind>(kind).mean : std::get<ThermalKind>(kind).mean;
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("distribution.mean: must be finite and >= 0");
  auto weight = [&](int n) { return coherent ? detail::poisson(n, mean) : detail::thermal(n, mean); };
  auto tail = [&](int n) { return coherent ? detail::poisson_tail(n, mean) : detail::thermal_tail(n, mean); };

  int n_max = 0;
  if (cutoff) {
    n_max = *cutoff;
    if (!(tail(n_max) < tail_tolerance)) {
      throw DomainError("distribution.cutoff: tail mass " + show(tail(n_max)) +
                        " beyond cutoff exceeds tolerance " + show(tail_tolerance));
    }
  } else {
    while (!(tail(n_max) < tail_tolerance)) {
      if (++n_max > kMaxAutoCutoff) {
        throw DomainError("distribution: no cutoff <= 200 brings the tail mass below " +
                          show(tail_tolerance));
      }
    }
  }

  std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
  double total = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    p[static_cast<std::size_t>(n)] = weight(n);
    total += p[static_cast<std::size_t>(n)];
  }
  for (auto& value : p) value /= total;
  return MotionalDistribution(std::move(p));
}

}  // namespace nldeco
