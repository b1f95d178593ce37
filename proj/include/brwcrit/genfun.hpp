#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "brwcrit/paths.hpp"
#include "brwcrit/scc.hpp"

namespace brwcrit {

// Geometric parameters M_s(x,y) = limsup (k^n_xy)^{1/n},
// M_w(x) = limsup (T^n_x)^{1/n}, M_w^-(x) = liminf, and the series
// Gamma(x,y|l) = sum k^n l^n, Theta(x|l) = sum T^n l^n,
// Phi(x,y|l) = sum_{n>=1} phi^n l^n.

enum class ParameterKind { Ms, Mw, MwMinus };

/// Finite-n root sequence with limsup/liminf estimates taken over the upper
/// half of the range. No extrapolation is applied; callers get the raw
/// sequence. Zero terms are skipped (they would poison the roots; for k^n_xx
/// the limit runs along the period support anyway).
struct RootSequenceEstimate {
  int n_max = 0;
  std::vector<std::pair<int, double>> roots;  // (n, value^{1/n}), support only
  double limsup_est = 0.0;
  double liminf_est = 0.0;
  bool unreachable = false;  // all-zero sequence (target not reached)
};

namespace detail {

inline RootSequenceEstimate roots_from_logs(const std::vector<double>& logs,
                                            int n_max) {
  RootSequenceEstimate est;
  est.n_max = n_max;
  for (int n = 1; n <= n_max; ++n) {
    double lv = logs[static_cast<std::size_t>(n)];
    if (lv == -kInfinity) continue;
    est.roots.emplace_back(n, std::exp(lv / n));
  }
  if (est.roots.empty()) {
    est.unreachable = true;
    return est;
  }
  double lo = kInfinity, hi = 0.0;
  bool any = false;
  for (const auto& [n, r] : est.roots) {
    if (n * 2 < n_max) continue;
    any = true;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (!any) {  // no support in the upper half; fall back to the tail we have
    lo = hi = est.roots.back().second;
  }
  est.limsup_est = hi;
  est.liminf_est = lo;
  return est;
}

}  // namespace detail

inline RootSequenceEstimate estimate_parameters(const WeightedKernel& k,
                                                ParameterKind which, Site x,
                                                Site y, int n_max, Window w) {
  if (n_max < 8)
    throw std::invalid_argument("estimate_parameters: n_max must be >= 8");
  std::vector<double> logs;
  if (which == ParameterKind::Ms) {
    logs = power_entry_log_sequence(k, x, y, n_max, w);
  } else {
    logs = total_weight_log_sequence(k, x, n_max, w);
  }
  return detail::roots_from_logs(logs, n_max);
}

inline RootSequenceEstimate estimate_Ms(const WeightedKernel& k, Site x,
                                        Site y, int n_max, Window w) {
  return estimate_parameters(k, ParameterKind::Ms, x, y, n_max, w);
}
inline RootSequenceEstimate estimate_Mw(const WeightedKernel& k, Site x,
                                        int n_max, Window w) {
  return estimate_parameters(k, ParameterKind::Mw, x, x, n_max, w);
}

enum class SeriesKind { Gamma, Theta, Phi };
enum class TailFlag { converged, truncated, diverging };

struct SeriesValue {
  double lambda = 0.0;
  double partial_sum = 0.0;
  int terms_used = 0;
  TailFlag tail = TailFlag::truncated;
};

namespace detail {

/// Sum of exp(log_coeff[n] + n log l) with a crude tail classification:
/// diverging when the last-quartile nonzero terms still grow, converged when
/// the tail is negligible against the partial sum.
inline SeriesValue sum_series(const std::vector<double>& log_coeffs,
                              double lambda, int first_term) {
  SeriesValue sv;
  sv.lambda = lambda;
  const int n_max = static_cast<int>(log_coeffs.size()) - 1;
  sv.terms_used = n_max;
  if (lambda < 0.0)
    throw std::invalid_argument("series: lambda must be >= 0");
  double log_l = lambda == 0.0 ? -kInfinity : std::log(lambda);
  std::vector<std::pair<int, double>> terms;  // nonzero (n, term)
  double sum = 0.0;
  bool overflow = false;
  for (int n = first_term; n <= n_max; ++n) {
    double lc = log_coeffs[static_cast<std::size_t>(n)];
    if (lc == -kInfinity) continue;
    double lt = lc + (lambda == 0.0 ? (n == 0 ? 0.0 : -kInfinity)
                                    : n * log_l);
    if (lt == -kInfinity) continue;
    if (lt > 700.0) {  // past double range: definitively diverging
      overflow = true;
      break;
    }
    double t = std::exp(lt);
    sum += t;
    terms.emplace_back(n, t);
  }
  sv.partial_sum = sum;
  if (overflow) {
    sv.partial_sum = kOverflowSwitch;
    sv.tail = TailFlag::diverging;
    return sv;
  }
  // classify the tail: growing last-quartile terms mean divergence; a
  // decaying geometric tail whose bound is negligible means convergence
  std::vector<double> tail;
  for (const auto& [n, t] : terms)
    if (4 * n >= 3 * n_max) tail.push_back(t);
  if (terms.size() <= 1 || tail.empty()) {
    sv.tail = TailFlag::converged;  // finite series within the range
    return sv;
  }
  if (tail.size() >= 2 && tail.back() >= tail.front() * (1.0 - 1e-12)) {
    sv.tail = TailFlag::diverging;
    return sv;
  }
  double t_prev = terms[terms.size() - 2].second;
  double t_last = terms.back().second;
  double ratio = t_last / t_prev;
  if (ratio < 0.999) {
    double tail_bound = t_last * ratio / (1.0 - ratio);
    if (tail_bound <= 1e-12 * std::max(1.0, sum)) {
      sv.tail = TailFlag::converged;
      return sv;
    }
  }
  sv.tail = TailFlag::truncated;
  return sv;
}

}  // namespace detail

inline SeriesValue series(const WeightedKernel& k, SeriesKind which, Site x,
                          Site y, double lambda, int n_max, Window w) {
  switch (which) {
    case SeriesKind::Gamma:
      return detail::sum_series(power_entry_log_sequence(k, x, y, n_max, w),
                                lambda, 0);
    case SeriesKind::Theta:
      return detail::sum_series(total_weight_log_sequence(k, x, n_max, w),
                                lambda, 0);
    case SeriesKind::Phi:
    default:
      return detail::sum_series(first_passage_log_sequence(k, x, y, n_max, w),
                                lambda, 1);
  }
}

/// 1/M_s(x) = max{ l >= 0 : Phi(x,x|l) <= 1 } by bisection on the monotone
/// map l -> Phi(x,x|l). Returns +inf when no cycle runs through x.
inline double lambda_s_via_phi(const WeightedKernel& k, Site x, int n_max,
                               Window w, double tol = 1e-6) {
  auto classes = irreducible_classes(k, w);
  if (!classes.class_has_cycle(classes.class_of[static_cast<std::size_t>(x)]))
    return kInfinity;

  auto phi_logs = first_passage_log_sequence(k, x, x, n_max, w);
  auto phi_at = [&](double l) {
    return detail::sum_series(phi_logs, l, 1).partial_sum;
  };

  // bracket: lo with Phi <= 1, hi with Phi > 1
  auto kxx_roots = detail::roots_from_logs(
      power_entry_log_sequence(k, x, x, n_max, w), n_max);
  double hi = kxx_roots.unreachable ? 1.0 / k.row_bound()
                                    : 1.0 / kxx_roots.liminf_est;
  double lo = 0.0;
  int guard = 0;
  while (phi_at(hi) <= 1.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) return kInfinity;  // no window cycle mass at all
  }
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (phi_at(mid) <= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace brwcrit
