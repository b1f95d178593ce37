#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "brwcrit/types.hpp"

namespace brwcrit {

struct Edge {
  Site to = 0;
  double weight = 0.0;
};

/// Weighted graph (X, K): either a finite explicit weight table or a
/// deterministic out-neighbor enumerator over the naturals. Immutable after
/// construction; all row accesses are pure and safely concurrent.
///
/// Invariants enforced here:
///  - every stored weight is finite and > 0 (zero weights are dropped),
///  - every enumerated row sums to at most `row_bound` (hard error otherwise).
class WeightedKernel {
 public:
  using RowGenerator = std::function<std::vector<Edge>(Site)>;

  static WeightedKernel finite(std::vector<std::vector<Edge>> rows,
                               double row_bound) {
    WeightedKernel k;
    k.finite_ = true;
    k.row_bound_ = check_bound(row_bound);
    k.rows_ = std::move(rows);
    for (Site x = 0; x < k.finite_size(); ++x) {
      k.rows_[static_cast<std::size_t>(x)] =
          k.validate_row(x, k.rows_[static_cast<std::size_t>(x)],
                         k.finite_size());
    }
    return k;
  }

  static WeightedKernel generated(RowGenerator gen, double row_bound,
                                  std::string name = {},
                                  std::map<std::string, std::string> params = {}) {
    WeightedKernel k;
    k.finite_ = false;
    k.row_bound_ = check_bound(row_bound);
    k.gen_ = std::move(gen);
    k.name_ = std::move(name);
    k.params_ = std::move(params);
    return k;
  }

  bool is_finite() const { return finite_; }
  Site finite_size() const { return static_cast<Site>(rows_.size()); }
  double row_bound() const { return row_bound_; }
  const std::string& name() const { return name_; }
  const std::map<std::string, std::string>& params() const { return params_; }

  /// Out-edges of x (full row, including targets beyond any window).
  std::vector<Edge> row(Site x) const {
    if (x < 0) throw std::invalid_argument("kernel row: negative site");
    if (finite_) {
      if (x >= finite_size())
        throw std::invalid_argument("kernel row: site out of range");
      return rows_[static_cast<std::size_t>(x)];
    }
    return validate_row(x, gen_(x), -1);
  }

  double row_sum(Site x) const {
    double s = 0.0;
    for (const Edge& e : row(x)) s += e.weight;
    return s;
  }

  /// Natural window: full site set of a finite kernel.
  Window full_window() const {
    if (!finite_)
      throw std::logic_error("full_window: kernel is not finite");
    return Window(finite_size());
  }

 private:
  static double check_bound(double m) {
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::invalid_argument("kernel: row_bound must be positive finite");
    return m;
  }

  std::vector<Edge> validate_row(Site x, std::vector<Edge> r,
                                 Site max_site) const {
    std::vector<Edge> out;
    out.reserve(r.size());
    double sum = 0.0;
    for (const Edge& e : r) {
      if (!std::isfinite(e.weight) || e.weight < 0.0)
        throw std::invalid_argument("kernel row " + std::to_string(x) +
                                    ": weight must be finite nonnegative");
      if (e.to < 0 || (max_site >= 0 && e.to >= max_site))
        throw std::invalid_argument("kernel row " + std::to_string(x) +
                                    ": target site out of range");
      if (e.weight == 0.0) continue;  // zero weights are not edges
      sum += e.weight;
      out.push_back(e);
    }
    if (sum > row_bound_ * (1.0 + 1e-12))
      throw std::invalid_argument("kernel row " + std::to_string(x) +
                                  ": row sum exceeds declared row_bound");
    std::sort(out.begin(), out.end(),
              [](const Edge& a, const Edge& b) { return a.to < b.to; });
    return out;
  }

  bool finite_ = true;
  double row_bound_ = 1.0;
  std::vector<std::vector<Edge>> rows_;
  RowGenerator gen_;
  std::string name_;
  std::map<std::string, std::string> params_;
};

/// Window-restricted view of a kernel, materialized once so hot loops do not
/// re-enumerate generator rows. Edges leaving the window are dropped (lost
/// mass); `full_row_sum` keeps the untruncated S_x.
struct CompiledWindow {
  Window window;
  double row_bound = 1.0;
  std::vector<std::vector<Edge>> rows;      // in-window targets only
  std::vector<double> full_row_sum;         // S_x over all of X
  std::vector<double> window_row_sum;       // mass retained in the window

  CompiledWindow(const WeightedKernel& k, Window w)
      : window(w), row_bound(k.row_bound()) {
    // a finite kernel's window is always its full site set
    if (k.is_finite() && w.size != k.finite_size())
      throw std::invalid_argument(
          "finite kernels use their full site set as the window");
    rows.resize(static_cast<std::size_t>(w.size));
    full_row_sum.resize(static_cast<std::size_t>(w.size), 0.0);
    window_row_sum.resize(static_cast<std::size_t>(w.size), 0.0);
    for (Site x = 0; x < w.size; ++x) {
      auto full = k.row(x);
      auto& rx = rows[static_cast<std::size_t>(x)];
      for (const Edge& e : full) {
        full_row_sum[static_cast<std::size_t>(x)] += e.weight;
        if (w.contains(e.to)) {
          rx.push_back(e);
          window_row_sum[static_cast<std::size_t>(x)] += e.weight;
        }
      }
    }
  }

  Site size() const { return window.size; }
};

/// Kv on the window: (Kv)(x) = sum_y k_xy v(y), mass beyond the window lost.
inline SiteVector apply_K(const CompiledWindow& cw, const SiteVector& v) {
  SiteVector out(cw.window, 0.0);
  for (Site x = 0; x < cw.size(); ++x) {
    double acc = 0.0;
    for (const Edge& e : cw.rows[static_cast<std::size_t>(x)])
      acc += e.weight * v.at(e.to);
    out.at(x) = acc;
  }
  return out;
}

inline SiteVector apply_K(const WeightedKernel& k, const SiteVector& v) {
  return apply_K(CompiledWindow(k, Window(v.size())), v);
}

inline Window natural_window(const WeightedKernel& k, Site generated_size) {
  return k.is_finite() ? k.full_window() : Window(generated_size);
}

}  // namespace brwcrit
