#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "brwcrit/branching.hpp"
#include "brwcrit/kernel.hpp"

namespace brwcrit {

// Canonical IBP of a branching random walk: a particle of type x dies at
// rate 1 and breeds onto y at rate lambda * k_xy. Its offspring law is
//
//   mu_x(f) = S(f)! prod_y (lambda k_xy)^f(y)
//             / [ (1 + lambda S_x)^(S(f)+1) prod_y f(y)! ],  S_x = sum_y k_xy,
//
// with closed forms G(z|x) = 1 / (1 + lambda sum_y k_xy (1 - z(y))) and
// H(v) = lambda K v / (1 + lambda K v).

class BRWWindowedLaw;

class BRWLaw : public OffspringLaw {
 public:
  BRWLaw(const WeightedKernel& kernel, double lambda)
      : kernel_(&kernel), lambda_(lambda) {
    if (!(lambda > 0.0))
      throw std::invalid_argument("BRW law: lambda must be > 0");
  }

  const WeightedKernel& kernel() const { return *kernel_; }
  double lambda() const { return lambda_; }
  double total_rate(Site x) const { return kernel_->row_sum(x); }

  std::unique_ptr<WindowedLaw> window(Window w) const override;

  /// mu_x(f), computed in log domain (factorials via lgamma). Counts off the
  /// support of row x give probability 0.
  double offspring_prob(Site x, const SparseCounts& f) const {
    auto row = kernel_->row(x);
    double sx = 0.0;
    for (const Edge& e : row) sx += e.weight;
    double log_num = 0.0;
    long long total = 0;
    for (const auto& [y, c] : f) {
      if (c < 0) throw std::invalid_argument("offspring counts must be >= 0");
      if (c == 0) continue;
      double kxy = 0.0;
      for (const Edge& e : row)
        if (e.to == y) {
          kxy = e.weight;
          break;
        }
      if (kxy == 0.0) return 0.0;
      log_num += c * std::log(lambda_ * kxy) - std::lgamma(c + 1.0);
      total += c;
    }
    log_num += std::lgamma(static_cast<double>(total) + 1.0);
    double log_den = (static_cast<double>(total) + 1.0) *
                     std::log1p(lambda_ * sx);
    return std::exp(log_num - log_den);
  }

  /// All outcomes with S(f) <= s_max on the support of row x, exact masses.
  /// Test and audit helper; the tail mass past s_max is geometric.
  std::vector<Offspring> enumerate(Site x, int s_max) const {
    auto row = kernel_->row(x);
    std::vector<Offspring> out;
    SparseCounts f;
    enumerate_rec(x, row, 0, s_max, f, out);
    return out;
  }

 private:
  void enumerate_rec(Site x, const std::vector<Edge>& row, std::size_t idx,
                     int budget, SparseCounts& f,
                     std::vector<Offspring>& out) const {
    if (idx == row.size()) {
      out.push_back({f, offspring_prob(x, f)});
      return;
    }
    for (int c = 0; c <= budget; ++c) {
      if (c > 0) f.push_back({row[idx].to, c});
      enumerate_rec(x, row, idx + 1, budget - c, f, out);
      if (c > 0) f.pop_back();
    }
  }

  const WeightedKernel* kernel_;
  double lambda_;
};

class BRWWindowedLaw : public WindowedLaw {
 public:
  BRWWindowedLaw(const BRWLaw& law, Window w)
      : cw_(law.kernel(), w), lambda_(law.lambda()) {}

  Site window_size() const override { return cw_.size(); }

  /// G(z|x) with out-of-window offspring never born: the sum runs over
  /// in-window neighbors only, so G(1) = 1 holds on every window and
  /// H(v) = 1 - G(1-v) is an identity rather than an approximation.
  void G(const SiteVector& z, SiteVector& out) const override {
    for (Site x = 0; x < cw_.size(); ++x) {
      double acc = 0.0;
      for (const Edge& e : cw_.rows[static_cast<std::size_t>(x)])
        acc += e.weight * (1.0 - z.at(e.to));
      out.at(x) = 1.0 / (1.0 + lambda_ * acc);
    }
  }

  void H(const SiteVector& v, SiteVector& out) const override {
    for (Site x = 0; x < cw_.size(); ++x) {
      double kv = 0.0;
      for (const Edge& e : cw_.rows[static_cast<std::size_t>(x)])
        kv += e.weight * v.at(e.to);
      out.at(x) = lambda_ * kv / (1.0 + lambda_ * kv);
    }
  }

  std::vector<std::vector<Site>> support_adjacency() const override {
    std::vector<std::vector<Site>> adj(static_cast<std::size_t>(cw_.size()));
    for (Site x = 0; x < cw_.size(); ++x)
      for (const Edge& e : cw_.rows[static_cast<std::size_t>(x)])
        adj[static_cast<std::size_t>(x)].push_back(e.to);
    return adj;
  }

  const CompiledWindow& compiled() const { return cw_; }

 private:
  CompiledWindow cw_;
  double lambda_;
};

inline std::unique_ptr<WindowedLaw> BRWLaw::window(Window w) const {
  return std::make_unique<BRWWindowedLaw>(*this, w);
}

/// Closed-form G on a window (z determines the window).
inline double brw_G(const BRWLaw& law, const SiteVector& z, Site x) {
  BRWWindowedLaw wl(law, Window(z.size()));
  SiteVector out(z.size(), 0.0);
  wl.G(z, out);
  return out.at(x);
}

/// H(v) = lambda K v / (1 + lambda K v) componentwise; defined on the whole
/// positive cone of the window, not just [0,1].
inline SiteVector brw_H(const BRWLaw& law, const SiteVector& v) {
  BRWWindowedLaw wl(law, Window(v.size()));
  SiteVector out(v.size(), 0.0);
  wl.H(v, out);
  return out;
}

}  // namespace brwcrit
