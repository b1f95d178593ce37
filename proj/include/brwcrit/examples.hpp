#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "brwcrit/branching.hpp"
#include "brwcrit/kernel.hpp"

namespace brwcrit::examples {

using Params = std::map<std::string, std::string>;

inline double param_or(const Params& p, const std::string& key, double dflt) {
  auto it = p.find(key);
  return it == p.end() ? dflt : std::stod(it->second);
}
inline std::string param_or(const Params& p, const std::string& key,
                            const std::string& dflt) {
  auto it = p.find(key);
  return it == p.end() ? dflt : it->second;
}

// ---------------------------------------------------------------------------
// Nearest-neighbor IBP on the naturals: a particle of type n has one child
// of type n+1 w.p. 1-p_n, one child of type n-1 w.p. p_n/2, none w.p. p_n/2
// (type 0 sends the down-move to type 0). The dominated variant keeps only
// the up-move: one child of type n+1 w.p. 1-p_n, none w.p. p_n. Its n-step
// extinction probabilities have the closed form 1 - prod_{i=j}^{j+n-1}(1-p_i).

inline TableLaw example1_law(std::function<double(Site)> p) {
  return TableLaw([p = std::move(p)](Site n) -> std::vector<Offspring> {
    double pn = p(n);
    if (!(pn >= 0.0) || pn >= 1.0)
      throw std::invalid_argument("example1: p_n must lie in [0,1)");
    Site down = n == 0 ? 0 : n - 1;
    return {{{}, pn / 2}, {{{down, 1}}, pn / 2}, {{{n + 1, 1}}, 1.0 - pn}};
  });
}

inline TableLaw example1_dominated_law(std::function<double(Site)> p) {
  return TableLaw([p = std::move(p)](Site n) -> std::vector<Offspring> {
    double pn = p(n);
    if (!(pn >= 0.0) || pn >= 1.0)
      throw std::invalid_argument("example1: p_n must lie in [0,1)");
    return {{{}, pn}, {{{n + 1, 1}}, 1.0 - pn}};
  });
}

/// default p_i = 2^-(i+2); "harmonic" preset p_i = 1/(i+2)
inline double example1_default_p(Site i) {
  return std::pow(2.0, -double(i) - 2.0);
}
inline double example1_harmonic_p(Site i) { return 1.0 / double(i + 2); }

// ---------------------------------------------------------------------------
// Shift kernel on the naturals: k_{i,i+1} = k_i, all other rates zero. Total
// path weight from 0 is beta_n = prod_{i<n} k_i. The oscillating assignment
// alternates runs of rate 1 and rate 2 on ceiling-defined blocks so that the
// n-th roots of beta_n oscillate between 1 and 2: liminf = 1 < limsup = 2.

inline WeightedKernel example2_kernel(std::function<double(Site)> rates,
                                      double row_bound,
                                      std::string name = "example2",
                                      Params params = {}) {
  return WeightedKernel::generated(
      [rates = std::move(rates)](Site i) -> std::vector<Edge> {
        double r = rates(i);
        if (!(r > 0.0))
          throw std::invalid_argument("example2: rates must be positive");
        return {{i + 1, r}};
      },
      row_bound, std::move(name), std::move(params));
}

/// Block thresholds c_1 = 1, c_2r = a_2r c_{2r-1}, c_{2r+1} = b_{2r+1} c_2r
/// with a_n = ceil(log 2 / log(1+1/n)) and
/// b_n = ceil(log 2 / (log 2 - log(2 - 1/n))), precomputed past 2^62.
inline const std::vector<std::int64_t>& oscillating_thresholds() {
  static const std::vector<std::int64_t> c = [] {
    std::vector<std::int64_t> v{0, 1};  // v[j] = c_j, c_0 unused
    const double log2 = std::log(2.0);
    for (int j = 2; ; ++j) {
      double n = double(j);
      double factor =
          j % 2 == 0 ? std::ceil(log2 / std::log1p(1.0 / n))
                     : std::ceil(log2 / (log2 - std::log(2.0 - 1.0 / n)));
      double next = factor * double(v.back());
      if (next > 4.6e18) break;
      v.push_back(std::int64_t(next));
    }
    return v;
  }();
  return c;
}

/// k_i = 2 iff i lies in [c_2r, c_{2r+1}) for some r >= 1, else 1. With this
/// convention beta_{c_{2r+1}} = 2^{c_{2r+1} - c_2r - ...} picks up exactly
/// the 2-runs, and the root bounds at the thresholds come out as stated.
inline double oscillating_rate(Site i) {
  const auto& c = oscillating_thresholds();
  for (std::size_t r = 2; r + 1 < c.size(); r += 2) {
    if (i < c[r]) return 1.0;
    if (i < c[r + 1]) return 2.0;
  }
  return 1.0;
}

/// number of 2-rate indices below n (log2 beta_n = that count times log 2)
inline std::int64_t oscillating_twos_below(std::int64_t n) {
  const auto& c = oscillating_thresholds();
  std::int64_t total = 0;
  for (std::size_t r = 2; r + 1 < c.size(); r += 2) {
    std::int64_t lo = c[r], hi = c[r + 1];
    if (n <= lo) break;
    total += std::min(n, hi) - lo;
  }
  return total;
}

inline WeightedKernel example2_oscillating() {
  return example2_kernel([](Site i) { return oscillating_rate(i); }, 2.0,
                         "example2", {{"k", "oscillating"}});
}

// ---------------------------------------------------------------------------
// The weak-critical-survival kernel on the naturals:
//   k_01 = 2, k_{n,n+1} = (1+1/n)^2, k_{m,m-1} = 3^-(m+1).
// Row sums peak at S_1 = 4 + 1/9 = 37/9. The nonlinear certificate
// v(0) = 1/2, v(n) = 1/(n+1) holds for every lambda >= 1, and lambda_w = 1
// with global survival at the critical point itself.

inline WeightedKernel example4_kernel() {
  return WeightedKernel::generated(
      [](Site x) -> std::vector<Edge> {
        if (x == 0) return {{1, 2.0}};
        double fwd = (1.0 + 1.0 / double(x)) * (1.0 + 1.0 / double(x));
        return {{x - 1, std::pow(3.0, -double(x + 1))}, {x + 1, fwd}};
      },
      37.0 / 9.0, "example4");
}

inline SiteVector example4_certificate_vector(Window w) {
  SiteVector v(w, 0.0);
  for (Site n = 0; n < w.size; ++n)
    v.at(n) = n == 0 ? 0.5 : 1.0 / double(n + 1);
  return v;
}

// ---------------------------------------------------------------------------
// Line quotients of trees. A BRW on the homogeneous tree of degree m is
// locally isomorphic to the line kernel k_01 = m, k_{n,n+1} = m-1,
// k_{n,n-1} = 1; a radial tree with branching numbers a_n and rates
// k_n^+/k_n^- maps to k_{n,n+1} = a_n k_n^+, k_{n+1,n} = k_n^-.

inline WeightedKernel tree_line(double m) {
  if (m < 2.0) throw std::invalid_argument("tree_line: degree must be >= 2");
  return WeightedKernel::generated(
      [m](Site x) -> std::vector<Edge> {
        if (x == 0) return {{1, m}};
        return {{x - 1, 1.0}, {x + 1, m - 1.0}};
      },
      m, "tree_line", {{"m", std::to_string(m)}});
}

inline WeightedKernel radial_tree_line(std::function<double(Site)> a,
                                       std::function<double(Site)> k_plus,
                                       std::function<double(Site)> k_minus,
                                       double row_bound,
                                       std::string name = "radial_tree_line",
                                       Params params = {}) {
  return WeightedKernel::generated(
      [a = std::move(a), k_plus = std::move(k_plus),
       k_minus = std::move(k_minus)](Site x) -> std::vector<Edge> {
        double an = a(x);
        if (an < 1.0)
          throw std::invalid_argument("radial_tree_line: a_n must be >= 1");
        std::vector<Edge> r;
        if (x > 0) r.push_back({x - 1, k_minus(x - 1)});
        r.push_back({x + 1, an * k_plus(x)});
        return r;
      },
      row_bound, std::move(name), std::move(params));
}

// ---------------------------------------------------------------------------
// Registry: name -> builder, so files and the command line can materialize
// any example. Kernels round-trip through the kernel file format; the
// example1 laws are registered as laws.

struct ExampleEntry {
  std::string name;
  std::string note;  // one-line construction summary for listings
  Params defaults;
  bool is_law = false;
  std::function<WeightedKernel(const Params&)> build_kernel;
  std::function<std::shared_ptr<OffspringLaw>(const Params&)> build_law;
};

inline std::function<double(Site)> example1_p_from_params(const Params& p) {
  std::string preset = param_or(p, "p", std::string("summable"));
  if (preset == "summable") return example1_default_p;
  if (preset == "harmonic") return example1_harmonic_p;
  double c = std::stod(preset);  // constant p
  return [c](Site) { return c; };
}

inline const std::vector<ExampleEntry>& registry() {
  static const std::vector<ExampleEntry> entries = [] {
    std::vector<ExampleEntry> v;

    v.push_back({"example1",
                 "nearest-neighbor IBP on N with kill probability p_n "
                 "(p: summable|harmonic|<const>, dominated: 0|1)",
                 {{"p", "summable"}, {"dominated", "0"}},
                 true,
                 nullptr,
                 [](const Params& p) -> std::shared_ptr<OffspringLaw> {
                   auto pf = example1_p_from_params(p);
                   bool dom = param_or(p, "dominated", 0.0) != 0.0;
                   return dom ? std::make_shared<TableLaw>(
                                    example1_dominated_law(pf))
                              : std::make_shared<TableLaw>(example1_law(pf));
                 }});

    v.push_back({"example2",
                 "shift kernel k_{i,i+1} = k_i on N "
                 "(k: oscillating|<const>); oscillating runs of rates 1 and 2 "
                 "split liminf and limsup of the path-weight roots",
                 {{"k", "oscillating"}},
                 false,
                 [](const Params& p) -> WeightedKernel {
                   std::string preset = param_or(p, "k", std::string("oscillating"));
                   if (preset == "oscillating") return example2_oscillating();
                   double c = std::stod(preset);
                   return example2_kernel([c](Site) { return c; }, c,
                                          "example2", {{"k", preset}});
                 },
                 nullptr});

    v.push_back({"example4",
                 "drift-to-infinity kernel with summable backward rates; "
                 "lambda_w = 1 and the process survives globally at the "
                 "critical point",
                 {},
                 false,
                 [](const Params&) { return example4_kernel(); },
                 nullptr});

    v.push_back({"tree_line",
                 "line quotient of the homogeneous tree of degree m",
                 {{"m", "4"}},
                 false,
                 [](const Params& p) { return tree_line(param_or(p, "m", 4.0)); },
                 nullptr});

    v.push_back({"radial_tree_line",
                 "line quotient of a radial tree: k_{n,n+1} = a k+, "
                 "k_{n+1,n} = k- (constants; a0 may differ)",
                 {{"a", "3"}, {"a0", "4"}, {"kplus", "1"}, {"kminus", "1"}},
                 false,
                 [](const Params& p) -> WeightedKernel {
                   double a = param_or(p, "a", 3.0);
                   double a0 = param_or(p, "a0", a + 1.0);
                   double kp = param_or(p, "kplus", 1.0);
                   double km = param_or(p, "kminus", 1.0);
                   double bound = std::max(a0 * kp, a * kp + km);
                   Params resolved{{"a", std::to_string(a)},
                                   {"a0", std::to_string(a0)},
                                   {"kplus", std::to_string(kp)},
                                   {"kminus", std::to_string(km)}};
                   return radial_tree_line(
                       [a, a0](Site n) { return n == 0 ? a0 : a; },
                       [kp](Site) { return kp; }, [km](Site) { return km; },
                       bound, "radial_tree_line", std::move(resolved));
                 },
                 nullptr});
    return v;
  }();
  return entries;
}

inline const ExampleEntry* find(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return &e;
  return nullptr;
}

inline WeightedKernel build_kernel(const std::string& name, const Params& p) {
  const ExampleEntry* e = find(name);
  if (!e || e->is_law)
    throw std::invalid_argument("no kernel example named '" + name + "'");
  return e->build_kernel(p);
}

inline std::shared_ptr<OffspringLaw> build_law(const std::string& name,
                                               const Params& p) {
  const ExampleEntry* e = find(name);
  if (!e || !e->is_law)
    throw std::invalid_argument("no law example named '" + name + "'");
  return e->build_law(p);
}

}  // namespace brwcrit::examples
