#pragma once

#include <cmath>
#include <vector>

#include "brwcrit/kernel.hpp"
#include "brwcrit/types.hpp"

namespace brwcrit {

// Path-weight recursions k^n_xy, T^n_x, phi^n_xy on a window. Departures from
// the window are lost mass, so every value is a monotone-in-window lower
// bound of the untruncated quantity. Running values above kOverflowSwitch
// move the row into the scaled representation (mantissa * exp(log_scale));
// nothing ever saturates to inf.

inline constexpr double kOverflowSwitch = 1e300;

namespace detail {

/// Row vector advanced by one kernel multiplication per step.
class RowWalk {
 public:
  RowWalk(const CompiledWindow& cw, Site start) : cw_(cw), row_(cw.window) {
    if (!cw.window.contains(start))
      throw std::invalid_argument("row walk: start site outside window");
    row_.at(start) = 1.0;
  }

  /// r'(y) = sum_x r(x) k_xy, skipping transitions into `avoid` when set.
  /// The mass absorbed into `avoid` during the step is kept as a log value.
  void step(Site avoid = -1) {
    // rescale early enough that the multiplication itself cannot overflow
    double pre_limit = 1e250 / std::max(1.0, cw_.row_bound);
    double pre_max = row_.max();
    if (pre_max > pre_limit) {
      for (double& v : row_.values) v /= pre_max;
      row_.log_scale += std::log(pre_max);
    }
    SiteVector next(cw_.window, 0.0);
    next.log_scale = row_.log_scale;
    double absorbed = 0.0;
    for (Site x = 0; x < cw_.size(); ++x) {
      double rx = row_.at(x);
      if (rx == 0.0) continue;
      for (const Edge& e : cw_.rows[static_cast<std::size_t>(x)]) {
        if (e.to == avoid) {
          absorbed += rx * e.weight;
        } else {
          next.at(e.to) += rx * e.weight;
        }
      }
    }
    absorbed_log_ = (absorbed == 0.0) ? -kInfinity
                                      : std::log(absorbed) + next.log_scale;
    double m = next.max();
    if (m > kOverflowSwitch) {
      for (double& v : next.values) v /= m;
      next.log_scale += std::log(m);
    }
    row_ = std::move(next);
  }

  const SiteVector& row() const { return row_; }
  double absorbed_log() const { return absorbed_log_; }

 private:
  const CompiledWindow& cw_;
  SiteVector row_;
  double absorbed_log_ = -kInfinity;
};

}  // namespace detail

/// (k^n_xy)_{y in w}: weight of length-n paths from x staying in the window.
/// n = 0 yields the indicator of x.
inline SiteVector kernel_power_row(const WeightedKernel& k, Site x, int n,
                                   Window w) {
  if (n < 0) throw std::invalid_argument("kernel_power_row: n must be >= 0");
  CompiledWindow cw(k, w);
  detail::RowWalk walk(cw, x);
  for (int i = 0; i < n; ++i) walk.step();
  return walk.row();
}

/// T^n_x restricted to the window; equals the sum of kernel_power_row.
inline double total_weight(const WeightedKernel& k, Site x, int n, Window w) {
  SiteVector row = kernel_power_row(k, x, n, w);
  return row.log_scale == 0.0 ? row.sum() : std::exp(row.log_sum());
}

/// log T^n_x for n = 0..n_max in one sweep.
inline std::vector<double> total_weight_log_sequence(const WeightedKernel& k,
                                                     Site x, int n_max,
                                                     Window w) {
  CompiledWindow cw(k, w);
  detail::RowWalk walk(cw, x);
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(n_max) + 1);
  logs.push_back(0.0);  // T^0_x = 1
  for (int n = 1; n <= n_max; ++n) {
    walk.step();
    logs.push_back(walk.row().log_sum());
  }
  return logs;
}

/// log k^n_xy for n = 0..n_max.
inline std::vector<double> power_entry_log_sequence(const WeightedKernel& k,
                                                    Site x, Site y, int n_max,
                                                    Window w) {
  CompiledWindow cw(k, w);
  detail::RowWalk walk(cw, x);
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(n_max) + 1);
  logs.push_back(x == y ? 0.0 : -kInfinity);
  for (int n = 1; n <= n_max; ++n) {
    walk.step();
    logs.push_back(walk.row().log_value(y));
  }
  return logs;
}

/// log phi^n_xy for n = 0..n_max: paths hitting y for the first time at step
/// n, intermediate steps avoiding y inside the window. phi^0 = 0.
inline std::vector<double> first_passage_log_sequence(const WeightedKernel& k,
                                                      Site x, Site y,
                                                      int n_max, Window w) {
  if (!w.contains(y))
    throw std::invalid_argument("first_passage: target outside window");
  CompiledWindow cw(k, w);
  detail::RowWalk walk(cw, x);
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(n_max) + 1);
  logs.push_back(-kInfinity);
  for (int n = 1; n <= n_max; ++n) {
    walk.step(y);
    logs.push_back(walk.absorbed_log());
  }
  return logs;
}

/// phi^n_xy in linear scale (overflows to +inf only past the double range).
inline double first_passage_row(const WeightedKernel& k, Site x, Site y, int n,
                                Window w) {
  if (n < 0) throw std::invalid_argument("first_passage: n must be >= 0");
  if (n == 0) return 0.0;
  auto logs = first_passage_log_sequence(k, x, y, n, w);
  return std::exp(logs[static_cast<std::size_t>(n)]);
}

}  // namespace brwcrit
