#pragma once

#include <cmath>
#include <vector>

#include "brwcrit/kernel.hpp"
#include "brwcrit/scc.hpp"

namespace brwcrit {

/// Spectral radius of the kernel restricted to one irreducible class, by
/// power iteration on K|_C + I. The identity shift keeps bipartite classes
/// aperiodic; rho(K) = rho(K+I) - 1. The iterate is held in log scale
/// because Perron vectors of kernels with strongly asymmetric rates span
/// more dynamic range than a double (their entries would underflow and
/// poison the ratio bounds). Stops when the Collatz-Wielandt bracket
/// min_i (Av)_i / v_i <= rho(A) <= max_i (Av)_i / v_i closes below tol.
inline double spectral_radius_class(const CompiledWindow& cw,
                                    const std::vector<Site>& members,
                                    double tol = 1e-12,
                                    int max_iter = 100000) {
  const std::size_t m = members.size();
  if (m == 0) throw std::invalid_argument("spectral radius: empty class");
  std::vector<int> pos(static_cast<std::size_t>(cw.size()), -1);
  for (std::size_t i = 0; i < m; ++i)
    pos[static_cast<std::size_t>(members[i])] = static_cast<int>(i);

  // class-restricted rows of K + I, weights in log scale
  std::vector<std::vector<std::pair<int, double>>> rows(m);
  for (std::size_t i = 0; i < m; ++i) {
    bool diag_seen = false;
    for (const Edge& e : cw.rows[static_cast<std::size_t>(members[i])]) {
      int j = pos[static_cast<std::size_t>(e.to)];
      if (j < 0) continue;
      if (static_cast<std::size_t>(j) == i) {
        rows[i].emplace_back(j, std::log(e.weight + 1.0));
        diag_seen = true;
      } else {
        rows[i].emplace_back(j, std::log(e.weight));
      }
    }
    if (!diag_seen) rows[i].emplace_back(static_cast<int>(i), 0.0);
  }
  if (m == 1) return std::exp(rows[0][0].second) - 1.0;

  std::vector<double> lv(m, 0.0), lav(m, 0.0);
  double rho_shifted = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    double lo = kInfinity, hi = -kInfinity;
    for (std::size_t i = 0; i < m; ++i) {
      double mx = -kInfinity;
      for (const auto& [j, lw] : rows[i]) mx = std::max(mx, lw + lv[j]);
      double acc = 0.0;
      for (const auto& [j, lw] : rows[i]) acc += std::exp(lw + lv[j] - mx);
      lav[i] = mx + std::log(acc);
      double ratio = lav[i] - lv[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    double rlo = std::exp(lo), rhi = std::exp(hi);
    rho_shifted = 0.5 * (rlo + rhi);
    if (rhi - rlo <= tol * std::max(1.0, rho_shifted)) break;
    double shift = *std::max_element(lav.begin(), lav.end());
    for (std::size_t i = 0; i < m; ++i) lv[i] = lav[i] - shift;
  }
  return rho_shifted - 1.0;
}

/// rho(K) on the window: max over irreducible classes (the Collatz-Wielandt
/// bracket only closes on irreducible blocks, so decompose first).
inline double spectral_radius(const WeightedKernel& k, Window w,
                              double tol = 1e-12, int max_iter = 100000) {
  CompiledWindow cw(k, w);
  auto classes = irreducible_classes(cw);
  double rho = 0.0;
  for (int c = 0; c < classes.class_count(); ++c)
    rho = std::max(rho, spectral_radius_class(
                            cw, classes.members[static_cast<std::size_t>(c)],
                            tol, max_iter));
  return rho;
}

}  // namespace brwcrit
