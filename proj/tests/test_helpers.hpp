#pragma once

// Shared fixtures and independent oracles for the test suite. Everything in
// here must stay independent of the library code paths it is used to check:
// oracles are brute force (path enumeration, dense power iteration, closed
// forms) rather than calls back into the implementation.

#include <cmath>
#include <map>
#include <vector>

#include "brwcrit/kernel.hpp"
#include "brwcrit/rng.hpp"

namespace testutil {

using brwcrit::Edge;
using brwcrit::Site;
using brwcrit::WeightedKernel;

inline WeightedKernel single_site(double c) {
  return WeightedKernel::finite({{{0, c}}}, c);
}

inline WeightedKernel two_cycle(double a, double b) {
  return WeightedKernel::finite({{{1, a}}, {{0, b}}}, std::max(a, b));
}

/// Dense matrix from a finite kernel.
inline std::vector<std::vector<double>> dense(const WeightedKernel& k) {
  Site n = k.finite_size();
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (Site x = 0; x < n; ++x)
    for (const Edge& e : k.row(x))
      m[static_cast<std::size_t>(x)][static_cast<std::size_t>(e.to)] = e.weight;
  return m;
}

/// Brute-force k^n_xy by explicit path enumeration (exponential; small n).
inline double path_weight_oracle(const std::vector<std::vector<double>>& m,
                                 Site x, Site y, int n) {
  if (n == 0) return x == y ? 1.0 : 0.0;
  double total = 0.0;
  const Site size = static_cast<Site>(m.size());
  for (Site w = 0; w < size; ++w) {
    double step = m[static_cast<std::size_t>(x)][static_cast<std::size_t>(w)];
    if (step == 0.0) continue;
    total += step * path_weight_oracle(m, w, y, n - 1);
  }
  return total;
}

/// Brute-force phi^n_xy: paths avoiding y strictly between the endpoints.
inline double first_passage_oracle(const std::vector<std::vector<double>>& m,
                                   Site x, Site y, int n) {
  if (n == 0) return 0.0;
  if (n == 1) return m[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
  double total = 0.0;
  const Site size = static_cast<Site>(m.size());
  for (Site w = 0; w < size; ++w) {
    if (w == y) continue;
    double step = m[static_cast<std::size_t>(x)][static_cast<std::size_t>(w)];
    if (step == 0.0) continue;
    total += step * first_passage_oracle(m, w, y, n - 1);
  }
  return total;
}

/// Textbook dense power iteration on M + I with Collatz-Wielandt stopping;
/// the acceptance oracle for spectral radii of irreducible blocks.
inline double power_iteration_rho(const std::vector<std::vector<double>>& m,
                                  double tol = 1e-13, int max_iter = 2000000) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  std::vector<double> v(n, 1.0), av(n, 0.0);
  double rho = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = v[i];
      for (std::size_t j = 0; j < n; ++j) acc += m[i][j] * v[j];
      av[i] = acc;
      double r = acc / v[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    rho = 0.5 * (lo + hi);
    if (hi - lo <= tol * std::max(1.0, rho)) break;
    double mx = 0.0;
    for (double a : av) mx = std::max(mx, a);
    for (std::size_t i = 0; i < n; ++i) v[i] = av[i] / mx;
  }
  return rho - 1.0;
}

/// Random irreducible kernel: a Hamiltonian cycle guarantees one class, the
/// rest of the edges appear with probability `extra`. Weights are U(0,2].
inline WeightedKernel random_irreducible(brwcrit::Prng& rng, int n_sites,
                                         double extra = 0.5) {
  std::vector<std::vector<Edge>> rows(static_cast<std::size_t>(n_sites));
  auto weight = [&] { return 2.0 * rng.uniform(); };  // (0,2]
  for (Site x = 0; x < n_sites; ++x) {
    Site next = (x + 1) % n_sites;
    rows[static_cast<std::size_t>(x)].push_back({next, weight()});
    for (Site y = 0; y < n_sites; ++y) {
      if (y == next) continue;
      if (rng.uniform() < extra)
        rows[static_cast<std::size_t>(x)].push_back({y, weight()});
    }
  }
  double bound = 0.0;
  for (const auto& r : rows) {
    double s = 0.0;
    for (const Edge& e : r) s += e.weight;
    bound = std::max(bound, s);
  }
  return WeightedKernel::finite(std::move(rows), bound);
}

}  // namespace testutil
