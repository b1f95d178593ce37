#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "brwcrit/scc.hpp"
#include "brwcrit/types.hpp"

namespace brwcrit {

// Infinite-type branching processes over site types. A law assigns each type
// x a distribution mu_x over finitely supported offspring count functions f.
// All windowed computations use the sub-law convention: children placed
// outside the window are never born, which biases survival downward and
// makes windowed results monotone lower bounds in the window size.

inline constexpr double kFixedPointTol = 1e-10;
inline constexpr long long kFixedPointMaxIter = 1000000;
inline constexpr double kMonotoneHardTol = 1e-12;
inline constexpr double kDeltaSurvive = 1e-6;
inline constexpr double kDeltaExtinctNumerical = 1e-8;
inline constexpr double kLawMassTol = 1e-9;

using SparseCounts = std::vector<std::pair<Site, int>>;

inline int total_count(const SparseCounts& f) {
  int s = 0;
  for (const auto& [y, c] : f) s += c;
  return s;
}

/// One tabulated offspring outcome: counts f with probability mu_x(f).
struct Offspring {
  SparseCounts children;
  double prob = 0.0;
};

/// Window-bound evaluator of a law: G and H = 1 - G(1 - .) componentwise on
/// [0,1]^window, plus the offspring support graph for irreducibility.
class WindowedLaw {
 public:
  virtual ~WindowedLaw() = default;
  virtual Site window_size() const = 0;
  virtual void G(const SiteVector& z, SiteVector& out) const = 0;
  virtual void H(const SiteVector& v, SiteVector& out) const {
    SiteVector z(window_size(), 0.0);
    for (Site x = 0; x < window_size(); ++x) z.at(x) = 1.0 - v.at(x);
    G(z, out);
    for (Site x = 0; x < window_size(); ++x) out.at(x) = 1.0 - out.at(x);
  }
  /// E_mu restricted to the window: y appears in adj[x] iff some f with
  /// f(y) > 0 has mu_x(f) > 0.
  virtual std::vector<std::vector<Site>> support_adjacency() const = 0;
};

class OffspringLaw {
 public:
  virtual ~OffspringLaw() = default;
  virtual std::unique_ptr<WindowedLaw> window(Window w) const = 0;
};

/// Law given by explicit per-type outcome tables (possibly generated on
/// demand for types over the naturals). Masses must sum to 1 within 1e-9.
class TableLaw : public OffspringLaw {
 public:
  using RowFn = std::function<std::vector<Offspring>(Site)>;

  explicit TableLaw(RowFn rows) : rows_(std::move(rows)) {}

  std::vector<Offspring> outcomes(Site x) const {
    auto out = rows_(x);
    double mass = 0.0;
    for (const auto& o : out) {
      if (!(o.prob >= 0.0))
        throw std::invalid_argument("offspring law: negative probability");
      mass += o.prob;
    }
    if (std::abs(mass - 1.0) > kLawMassTol)
      throw std::invalid_argument("offspring law: mass deficit at type " +
                                  std::to_string(x));
    return out;
  }

  std::unique_ptr<WindowedLaw> window(Window w) const override;

 private:
  RowFn rows_;
};

class TableWindowedLaw : public WindowedLaw {
 public:
  TableWindowedLaw(const TableLaw& law, Window w) : w_(w) {
    table_.reserve(static_cast<std::size_t>(w.size));
    for (Site x = 0; x < w.size; ++x) table_.push_back(law.outcomes(x));
  }

  Site window_size() const override { return w_.size; }

  void G(const SiteVector& z, SiteVector& out) const override {
    for (Site x = 0; x < w_.size; ++x) {
      double acc = 0.0;
      for (const Offspring& o : table_[static_cast<std::size_t>(x)]) {
        double term = o.prob;
        for (const auto& [y, c] : o.children) {
          if (!w_.contains(y)) continue;  // sub-law: never born
          for (int i = 0; i < c; ++i) term *= z.at(y);
        }
        acc += term;
      }
      out.at(x) = acc;
    }
  }

  std::vector<std::vector<Site>> support_adjacency() const override {
    std::vector<std::vector<Site>> adj(static_cast<std::size_t>(w_.size));
    for (Site x = 0; x < w_.size; ++x) {
      std::set<Site> tgts;
      for (const Offspring& o : table_[static_cast<std::size_t>(x)])
        if (o.prob > 0.0)
          for (const auto& [y, c] : o.children)
            if (c > 0 && w_.contains(y)) tgts.insert(y);
      adj[static_cast<std::size_t>(x)].assign(tgts.begin(), tgts.end());
    }
    return adj;
  }

 private:
  Window w_;
  std::vector<std::vector<Offspring>> table_;
};

inline std::unique_ptr<WindowedLaw> TableLaw::window(Window w) const {
  return std::make_unique<TableWindowedLaw>(*this, w);
}

/// G(z|x) for one type; z lives on a window, out-of-window children ignored.
inline double evaluate_G(const OffspringLaw& law, const SiteVector& z,
                         Site x) {
  auto wl = law.window(Window(z.size()));
  SiteVector out(z.size(), 0.0);
  wl->G(z, out);
  return out.at(x);
}

enum class IterStart { FromZero, FromOne };

/// Result of a monotone fixed-point iteration. `monotone_ok` is the per-step
/// order audit: from-0 iterates must be nondecreasing, from-1 nonincreasing.
/// Violations beyond 1e-12 abort; smaller ones only clear the flag.
struct FixedPointReport {
  SiteVector limit;
  long long iterations = 0;
  double residual = 0.0;
  bool monotone_ok = true;
  IterStart direction = IterStart::FromZero;
  bool converged = false;
};

inline FixedPointReport monotone_iterate(
    const std::function<void(const SiteVector&, SiteVector&)>& W, Window w,
    IterStart start, double tol = kFixedPointTol,
    long long max_iter = kFixedPointMaxIter) {
  FixedPointReport rep;
  rep.direction = start;
  SiteVector cur(w, start == IterStart::FromZero ? 0.0 : 1.0);
  SiteVector next(w, 0.0);
  const double sgn = start == IterStart::FromZero ? 1.0 : -1.0;
  for (long long it = 0; it < max_iter; ++it) {
    W(cur, next);
    double res = 0.0;
    for (Site x = 0; x < w.size; ++x) {
      double step = sgn * (next.at(x) - cur.at(x));
      if (step < -kMonotoneHardTol)
        throw std::logic_error(
            "monotone_iterate: map violated monotonicity at site " +
            std::to_string(x));
      if (step < 0.0) rep.monotone_ok = false;
      res = std::max(res, std::abs(step));
    }
    std::swap(cur, next);
    rep.iterations = it + 1;
    rep.residual = res;
    if (res < tol) {
      rep.converged = true;
      break;
    }
  }
  rep.limit = std::move(cur);
  return rep;
}

/// Extinction probabilities q: smallest fixed point of G, iterated from 0.
inline FixedPointReport extinction_probs(const OffspringLaw& law, Window w,
                                         double tol = kFixedPointTol,
                                         long long max_iter = kFixedPointMaxIter) {
  auto wl = law.window(w);
  return monotone_iterate(
      [&wl](const SiteVector& z, SiteVector& out) { wl->G(z, out); }, w,
      IterStart::FromZero, tol, max_iter);
}

/// Survival probabilities v = 1 - q: iterates of H from 1 (largest fixed
/// point of H on [0,1]^window).
inline FixedPointReport survival_probs(const OffspringLaw& law, Window w,
                                       double tol = kFixedPointTol,
                                       long long max_iter = kFixedPointMaxIter) {
  auto wl = law.window(w);
  return monotone_iterate(
      [&wl](const SiteVector& v, SiteVector& out) { wl->H(v, out); }, w,
      IterStart::FromOne, tol, max_iter);
}

enum class SurvivalVerdict { survives, extinct, undecided };

/// Declared decision bands around the exact dichotomy: converged runs decide
/// by v(x) > 1e-6; unconverged runs are only called extinct when the iterate
/// already fell below 1e-8.
inline SurvivalVerdict survival_verdict(const FixedPointReport& rep, Site x) {
  double vx = rep.direction == IterStart::FromOne
                  ? rep.limit.at(x)
                  : 1.0 - rep.limit.at(x);
  if (rep.converged) return vx > kDeltaSurvive ? SurvivalVerdict::survives
                                               : SurvivalVerdict::extinct;
  if (vx < kDeltaExtinctNumerical) return SurvivalVerdict::extinct;
  return SurvivalVerdict::undecided;
}

inline const char* to_string(SurvivalVerdict v) {
  switch (v) {
    case SurvivalVerdict::survives: return "survives";
    case SurvivalVerdict::extinct: return "extinct";
    default: return "undecided";
  }
}

/// IBP irreducibility: connectivity of the offspring support graph E_mu on
/// the window.
inline bool ibp_irreducible(const OffspringLaw& law, Window w) {
  auto wl = law.window(w);
  return strongly_connected_components(wl->support_adjacency()).irreducible();
}

}  // namespace brwcrit
