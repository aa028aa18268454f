#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on oscillation-bounded panels.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nldeco/error.hpp"

namespace nldeco {

struct QuadratureOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  std::size_t max_intervals = 2'000'000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

struct GaussKronrod15 {
  static constexpr std::array<double, 8> nodes = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> kronrod_weights = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  // Gauss weights for nodes[1], nodes[3], nodes[5], nodes[7].
  static constexpr std::array<double, 4> gauss_weights = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

struct Interval {
  double lo;
  double hi;
  double value;
  double error;
};

template <class F>
Interval gauss_kronrod_15(const F& f, double lo, double hi) {
  using GK = GaussKronrod15;
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * GK::kronrod_weights[7];
  double gauss = fc * GK::gauss_weights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * GK::nodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += GK::kronrod_weights[j] * pair;
    if (j % 2 == 1) gauss += GK::gauss_weights[j / 2] * pair;
  }
  return {lo, hi, kronrod * half, std::fabs((kronrod - gauss) * half)};
}

inline bool by_error(const Interval& a, const Interval& b) { return a.error < b.error; }

}  // namespace detail

/// Integrates f over [lo, hi]. The range is first cut into panels no wider than
/// max_panel_width, then the interval with the largest error is bisected until
/// the summed error meets max(abs_tol, rel_tol * |I|).
template <class F>
QuadratureResult integrate_adaptive(const F& f, double lo, double hi, double max_panel_width,
                                    const QuadratureOptions& options = {}) {
  if (!(hi >= lo)) throw DomainError("integrate_adaptive: requires hi >= lo");
  if (hi == lo) return {};
  const double width = hi - lo;
  std::size_t panels = 1;
  if (std::isfinite(max_panel_width) && max_panel_width > 0.0) {
    panels = static_cast<std::size_t>(std::ceil(width / max_panel_width));
  }
  panels = std::max<std::size_t>(panels, 1);
  if (panels > options.max_intervals) {
    throw NumericalError("quadrature: oscillation panels exceed the interval budget",
                         std::numeric_limits<double>::infinity());
  }

  std::vector<detail::Interval> heap;
  heap.reserve(panels);
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = lo + width * static_cast<double>(k) / static_cast<double>(panels);
    const double b = (k + 1 == panels) ? hi : lo + width * static_cast<double>(k + 1) / static_cast<double>(panels);
    heap.push_back(detail::gauss_kronrod_15(f, a, b));
  }
  std::make_heap(heap.begin(), heap.end(), detail::by_error);

  auto totals = [&heap] {
    double value = 0.0;
    double error = 0.0;
    for (const auto& iv : heap) {
      value += iv.value;
      error += iv.error;
    }
    return QuadratureResult{value, error};
  };

  QuadratureResult total = totals();
  while (total.error_estimate > std::max(options.abs_tol, options.rel_tol * std::fabs(total.value))) {
    if (heap.size() >= options.max_intervals) {
      throw NumericalError("quadrature did not converge; achieved error estimate " +
                               show(total.error_estimate),
                           total.error_estimate);
    }
    std::pop_heap(heap.begin(), heap.end(), detail::by_error);
    const detail::Interval worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw NumericalError("quadrature: interval cannot be subdivided further; achieved error estimate " +
                               show(total.error_estimate),
                           total.error_estimate);
    }
    const auto left = detail::gauss_kronrod_15(f, worst.lo, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.hi);
    total.value += left.value + right.value - worst.value;
    total.error_estimate += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), detail::by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), detail::by_error);
  }

  // Final sum in ascending abscissa order so the result does not depend on heap history.
  std::sort(heap.begin(), heap.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  return totals();
}

/// As integrate_adaptive, with a Richardson-style correction for a tail that
/// decays like 1/omega: I(inf) ~ 2 I(hi) - I(hi/2). The correction magnitude is
/// added to the error budget.
template <class F>
QuadratureResult integrate_with_tail(const F& f, double lo, double hi, double max_panel_width,
                                     const QuadratureOptions& options = {}) {
  const double split = std::max(lo, 0.5 * hi);
  const auto head = integrate_adaptive(f, lo, split, max_panel_width, options);
  const auto upper = integrate_adaptive(f, split, hi, max_panel_width, options);
  return {head.value + 2.0 * upper.value, head.error_estimate + 2.0 * upper.error_estimate + std::fabs(upper.value)};
}

/// Panel width that resolves sin(omega t) and sin^2(omega t / 2) at time t.
inline double oscillation_panel_width(double t) {
  return t > 0.0 ? std::numbers::pi / (4.0 * t) : std::numeric_limits<double>::infinity();
}

}  // namespace nldeco
