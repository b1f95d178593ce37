#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace brwcrit {

using Site = std::int64_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Finite computation window: sites {0..size-1}. For a finite kernel the
/// window is always the full site set; for a generated kernel it is the
/// truncation prefix of the naturals.
struct Window {
  Site size = 0;

  explicit Window(Site n) : size(n) {
    if (n < 1) throw std::invalid_argument("Window: size must be >= 1");
  }
  bool contains(Site x) const { return x >= 0 && x < size; }
};

/// Nonnegative function on a window. `log_scale` is normally 0; path-weight
/// computations that outgrow the double range switch to a scaled
/// representation where the true entry is values[i] * exp(log_scale).
struct SiteVector {
  Site window_size = 0;
  std::vector<double> values;
  double log_scale = 0.0;

  SiteVector() = default;
  explicit SiteVector(Site n, double fill = 0.0)
      : window_size(n), values(static_cast<std::size_t>(n), fill) {}
  SiteVector(const Window& w, double fill = 0.0) : SiteVector(w.size, fill) {}

  static SiteVector zeros(const Window& w) { return SiteVector(w, 0.0); }
  static SiteVector ones(const Window& w) { return SiteVector(w, 1.0); }
  static SiteVector indicator(const Window& w, Site x) {
    SiteVector v(w, 0.0);
    v.at(x) = 1.0;
    return v;
  }

  Site size() const { return window_size; }
  double& at(Site x) { return values[static_cast<std::size_t>(x)]; }
  double at(Site x) const { return values[static_cast<std::size_t>(x)]; }
  double& operator[](Site x) { return at(x); }
  double operator[](Site x) const { return at(x); }

  /// Entry in linear scale; +inf if the scaled value overflows a double.
  double linear(Site x) const {
    return log_scale == 0.0 ? at(x) : at(x) * std::exp(log_scale);
  }
  /// log of the entry; -inf for zero entries.
  double log_value(Site x) const {
    double v = at(x);
    return v == 0.0 ? -kInfinity : std::log(v) + log_scale;
  }

  double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  double log_sum() const {
    double s = sum();
    return s == 0.0 ? -kInfinity : std::log(s) + log_scale;
  }
  double max() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
  }
};

/// sup-norm distance of two equally sized vectors (log_scale must match).
inline double sup_distance(const SiteVector& a, const SiteVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

}  // namespace brwcrit
