#pragma once

// Inverse problem: per-level decay rates from a population trace, fitted against
//   P_down(t) = 1/2 { 1 + sum_n p_n cos(2 g sqrt(n+1) t) exp(-gamma_n t) }
// with p_n and g held fixed, followed by a log-log regression gamma_n = gamma0 (n+1)^nu.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nldeco/distribution.hpp"
#include "nldeco/dynamics.hpp"
#include "nldeco/error.hpp"
#include "nldeco/levenberg_marquardt.hpp"

namespace nldeco {

struct DecayRate {
  int n = 0;
  double rate = 0.0;
  double stderr_ = 0.0;
};

struct PowerLawFit {
  double gamma0_hat = 0.0;
  double nu_hat = 0.0;
  // Covariance of (ln gamma0_hat, nu_hat).
  std::array<std::array<double, 2>, 2> covariance{};
};

struct DecayRateFit {
  std::vector<DecayRate> gamma_n;
  double gamma0_hat = 0.0;
  double nu_hat = std::numeric_limits<double>::quiet_NaN();
  double residual_norm = 0.0;
  bool converged = false;
};

struct FitOptions {
  double p_min = 0.01;
  LmOptions lm;
};

/// Raised when the rate fit exhausts its iteration budget; carries the best point found.
class FitConvergenceError : public NumericalError {
 public:
  FitConvergenceError(const std::string& what, double residual_norm, std::vector<DecayRate> best)
      : NumericalError(what, residual_norm), best_(std::move(best)) {}
  const std::vector<DecayRate>& best_so_far() const noexcept { return best_; }

 private:
  std::vector<DecayRate> best_;
};

/// Damped-cosine model of the population trace. Levels with p_n > p_min carry free rates;
/// the remaining populated levels follow the log-log line through the two
/// nearest free levels (or the nearest one when that line is undefined).
class DampedCosineModel {
 public:
  DampedCosineModel(const MotionalDistribution& dist, double g, double p_min) : g_(g) {
    if (!(g > 0.0)) throw DomainError("fit: g must be > 0");
    for (std::size_t n = 0; n < dist.size(); ++n) {
      const double p = dist.probabilities()[n];
      if (p == 0.0) continue;
      levels_.push_back({static_cast<int>(n), p, -1, -1, 0.0});
      if (p > p_min) {
        levels_.back().free_index = static_cast<int>(active_.size());
        active_.push_back(static_cast<int>(n));
      }
    }
    if (active_.empty()) throw DomainError("fit: no level has p_n above p_min");
    for (auto& level : levels_) {
      if (level.free_index >= 0) continue;
      std::vector<int> order(active_.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(active_[a] - level.n) < std::abs(active_[b] - level.n);
      });
      level.anchor = order[0];
      if (order.size() > 1) {
        level.second = order[1];
        level.weight = std::log((level.n + 1.0) / (active_[order[0]] + 1.0)) /
                       std::log((active_[order[0]] + 1.0) / (active_[order[1]] + 1.0));
      }
    }
  }

  const std::vector<int>& active_levels() const noexcept { return active_; }
  std::size_t parameter_count() const noexcept { return active_.size(); }

  /// Rate of every populated level given the free rates.
  double rate_of(std::size_t level_index, const Eigen::VectorXd& free) const {
    const auto& level = levels_[level_index];
    if (level.free_index >= 0) return free(level.free_index);
    const double a = free(level.anchor);
    if (level.second < 0) return a;
    const double b = free(level.second);
    if (!(a > 0.0) || !(b > 0.0)) return a;
    return a * std::exp(level.weight * std::log(a / b));
  }

  double frequency(int n) const noexcept { return 2.0 * g_ * std::sqrt(n + 1.0); }

  double evaluate(double t, const Eigen::VectorXd& free) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      sum += levels_[k].p * std::cos(frequency(levels_[k].n) * t) * std::exp(-rate_of(k, free) * t);
    }
    return 0.5 * (1.0 + sum);
  }

  Eigen::VectorXd residual(std::span<const double> times, std::span<const double> values,
                           const Eigen::VectorXd& free) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(times.size()));
    for (std::size_t j = 0; j < times.size(); ++j) r(static_cast<Eigen::Index>(j)) = evaluate(times[j], free) - values[j];
    return r;
  }

  Eigen::MatrixXd jacobian(std::span<const double> times, const Eigen::VectorXd& free) const {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(times.size()), free.size());
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      const auto& level = levels_[k];
      const double rate = rate_of(k, free);
      // d rate / d free for the (at most two) free rates this level depends on
      std::array<std::pair<int, double>, 2> chain{{{-1, 0.0}, {-1, 0.0}}};
      if (level.free_index >= 0) {
        chain[0] = {level.free_index, 1.0};
      } else {
        const double a = free(level.anchor);
        const double b = level.second >= 0 ? free(level.second) : 0.0;
        if (level.second >= 0 && a > 0.0 && b > 0.0) {
          chain[0] = {level.anchor, rate / a * (1.0 + level.weight)};
          chain[1] = {level.second, -rate / b * level.weight};
        } else {
          chain[0] = {level.anchor, 1.0};
        }
      }
      for (std::size_t j = 0; j < times.size(); ++j) {
        const double t = times[j];
        const double d_rate = -0.5 * level.p * t * std::cos(frequency(level.n) * t) * std::exp(-rate * t);
        for (const auto& [index, factor] : chain) {
          if (index >= 0) jac(static_cast<Eigen::Index>(j), index) += d_rate * factor;
        }
      }
    }
    return jac;
  }

 private:
  struct Level {
    int n;
    double p;
    int free_index;
    int anchor;
    double weight;
    int second = -1;
  };

  double g_;
  std::vector<Level> levels_;
  std::vector<int> active_;
};

namespace detail {

inline void check_trace(const PopulationTrace& trace) {
  if (trace.times.size() != trace.p_down.size()) throw DomainError("fit: times and p_down differ in length");
  if (trace.times.size() < 3) throw DomainError("fit: trace needs at least 3 samples");
  for (std::size_t j = 1; j < trace.times.size(); ++j) {
    if (!(trace.times[j] > trace.times[j - 1])) throw DomainError("fit: trace times must be strictly increasing");
  }
}

// Decay rate of the |2 P - 1| envelope, from per-window maxima of one |cos| period.
inline double envelope_rate(const PopulationTrace& trace, double window) {
  std::vector<double> ts;
  std::vector<double> logs;
  const double t0 = trace.times.front();
  std::size_t j = 0;
  while (j < trace.times.size()) {
    const double end = t0 + window * (std::floor((trace.times[j] - t0) / window) + 1.0);
    double best = 0.0;
    double best_t = trace.times[j];
    for (; j < trace.times.size() && trace.times[j] < end; ++j) {
      const double y = std::fabs(2.0 * trace.p_down[j] - 1.0);
      if (y > best) {
        best = y;
        best_t = trace.times[j];
      }
    }
    if (best > 1e-12) {
      ts.push_back(best_t);
      logs.push_back(std::log(best));
    }
  }
  if (ts.size() < 2) return 0.0;
  const double n = static_cast<double>(ts.size());
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    st += ts[k];
    sl += logs[k];
    stt += ts[k] * ts[k];
    stl += ts[k] * logs[k];
  }
  const double denom = n * stt - st * st;
  if (!(denom > 0.0)) return 0.0;
  return std::max(0.0, -(n * stl - st * sl) / denom);
}

struct RateFitOutcome {
  std::vector<DecayRate> rates;
  LmResult lm;
  double residual_norm = 0.0;
};

inline RateFitOutcome fit_rates(const PopulationTrace& trace, const MotionalDistribution& dist, double g,
                                const FitOptions& options) {
  check_trace(trace);
  const DampedCosineModel model(dist, g, options.p_min);
  const auto& active = model.active_levels();

  const int slowest = active.front();
  const double slowest_period = std::numbers::pi / (g * std::sqrt(slowest + 1.0));
  if (trace.times.back() - trace.times.front() < 3.0 * slowest_period) {
    throw DomainError("fit: trace must span at least 3 periods of the slowest fitted component");
  }
  if (trace.times.size() <= active.size()) throw DomainError("fit: fewer samples than free rates");

  int strongest = active.front();
  for (const int n : active) {
    if (dist.probabilities()[static_cast<std::size_t>(n)] > dist.probabilities()[static_cast<std::size_t>(strongest)]) {
      strongest = n;
    }
  }
  const double window = std::numbers::pi / (model.frequency(strongest));
  const double gamma_init = envelope_rate(trace, window) / (strongest + 1.0);

  Eigen::VectorXd x0(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) x0(static_cast<Eigen::Index>(k)) = gamma_init * (active[k] + 1.0);

  const std::span<const double> times(trace.times);
  const std::span<const double> values(trace.p_down);
  auto lm = levenberg_marquardt(
      x0, [&](const Eigen::VectorXd& x) { return model.residual(times, values, x); },
      [&](const Eigen::VectorXd& x) { return model.jacobian(times, x); }, 0.0, options.lm);

  RateFitOutcome outcome;
  outcome.residual_norm = std::sqrt(2.0 * lm.objective);
  const Eigen::Index params = lm.x.size();
  const double dof = std::max<double>(1.0, static_cast<double>(times.size()) - static_cast<double>(params));
  const double variance = 2.0 * lm.objective / dof;
  const Eigen::MatrixXd jtj = lm.jacobian.transpose() * lm.jacobian;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (!lu.isInvertible()) throw NumericalError("fit: ill-conditioned normal matrix", outcome.residual_norm);
  const Eigen::MatrixXd cov = variance * lu.inverse();

  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    outcome.rates.push_back({active[k], lm.x(i), std::sqrt(std::max(0.0, cov(i, i)))});
  }
  outcome.lm = std::move(lm);
  if (!outcome.lm.converged) {
    throw FitConvergenceError("fit: no convergence within " + std::to_string(options.lm.max_iterations) +
                                  " iterations; residual norm " + show(outcome.residual_norm),
                              outcome.residual_norm, outcome.rates);
  }
  return outcome;
}

}  // namespace detail

/// Least-squares decay rate for every level with p_n > p_min, with standard
/// errors from the local quadratic model at the optimum.
inline std::vector<DecayRate> fit_decay_rates(const PopulationTrace& trace, const MotionalDistribution& dist, double g,
                                              const FitOptions& options = {}) {
  return detail::fit_rates(trace, dist, g, options).rates;
}

/// Weighted regression of ln gamma_n on ln(n+1). Rates pinned at zero are skipped;
/// weights are (gamma_n / stderr)^2 when every stderr is positive, else uniform.
inline PowerLawFit fit_power_law(std::span<const DecayRate> rates) {
  std::vector<DecayRate> usable;
  for (const auto& r : rates) {
    if (r.rate > 0.0 && std::isfinite(r.rate)) usable.push_back(r);
  }
  if (usable.size() < 2) throw DomainError("power law: needs at least 2 positive rates");

  const bool weighted = std::all_of(usable.begin(), usable.end(),
                                    [](const DecayRate& r) { return r.stderr_ > 0.0 && std::isfinite(r.stderr_); });
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : usable) {
    const double x = std::log(r.n + 1.0);
    const double y = std::log(r.rate);
    const double w = weighted ? (r.rate / r.stderr_) * (r.rate / r.stderr_) : 1.0;
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double denom = sw * sxx - sx * sx;
  if (!(denom > 0.0)) throw DomainError("power law: rates need at least 2 distinct levels");
  const double slope = (sw * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / sw;

  PowerLawFit fit;
  fit.nu_hat = slope;
  fit.gamma0_hat = std::exp(intercept);

  double scale = 1.0;
  if (!weighted) {
    double rss = 0.0;
    for (const auto& r : usable) {
      const double e = std::log(r.rate) - intercept - slope * std::log(r.n + 1.0);
      rss += e * e;
    }
    scale = usable.size() > 2 ? rss / static_cast<double>(usable.size() - 2) : 0.0;
  }
  fit.covariance = {{{scale * sxx / denom, -scale * sx / denom}, {-scale * sx / denom, scale * sw / denom}}};
  return fit;
}

/// Rate fit followed by the power-law regression.
inline DecayRateFit fit_full_model(const PopulationTrace& trace, const MotionalDistribution& dist, double g,
                                   const FitOptions& options = {}) {
  auto outcome = detail::fit_rates(trace, dist, g, options);
  const auto law = fit_power_law(outcome.rates);
  DecayRateFit fit;
  fit.gamma_n = std::move(outcome.rates);
  fit.gamma0_hat = law.gamma0_hat;
  fit.nu_hat = law.nu_hat;
  fit.residual_norm = outcome.residual_norm;
  fit.converged = outcome.lm.converged;
  return fit;
}

}  // namespace nldeco
