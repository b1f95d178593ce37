#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "brwcrit/kernel.hpp"

namespace brwcrit {

inline constexpr double kTolIso = 1e-9;  // absolute, identities are exact

struct LocalIsoResult {
  bool verified = false;
  bool structural_failure = false;  // f not surjective onto Y
  Site bad_x = -1;                  // first violating row (when !verified)
  Site bad_y = -1;
  double deviation = 0.0;
  std::string message;
};

/// Checks sum_{z in f^-1(y)} k_xz = ktilde_{f(x),y} for every x in the window
/// and y in the finite target graph, to absolute tolerance tol. f must be
/// defined on the window and on every out-neighbor of a windowed site.
inline LocalIsoResult check_local_isomorphism(
    const WeightedKernel& kx, const WeightedKernel& ky,
    const std::function<Site(Site)>& f, Window w, double tol = kTolIso) {
  LocalIsoResult res;
  if (!ky.is_finite())
    throw std::invalid_argument("local isomorphism: target must be finite");
  const Site ny = ky.finite_size();

  std::vector<bool> hit(static_cast<std::size_t>(ny), false);
  for (Site x = 0; x < w.size; ++x) {
    Site fx = f(x);
    if (fx < 0 || fx >= ny) {
      res.structural_failure = true;
      res.message = "f maps site " + std::to_string(x) + " outside Y";
      return res;
    }
    hit[static_cast<std::size_t>(fx)] = true;
  }
  for (Site y = 0; y < ny; ++y)
    if (!hit[static_cast<std::size_t>(y)]) {
      res.structural_failure = true;
      res.message = "f is not surjective onto Y (misses " +
                    std::to_string(y) + ")";
      return res;
    }

  for (Site x = 0; x < w.size; ++x) {
    std::map<Site, double> grouped;
    for (const Edge& e : kx.row(x)) {
      Site fz = f(e.to);
      if (fz < 0 || fz >= ny) {
        res.structural_failure = true;
        res.message = "f undefined/out of Y at out-neighbor " +
                      std::to_string(e.to);
        return res;
      }
      grouped[fz] += e.weight;
    }
    std::vector<double> target(static_cast<std::size_t>(ny), 0.0);
    for (const Edge& e : ky.row(f(x)))
      target[static_cast<std::size_t>(e.to)] = e.weight;
    for (Site y = 0; y < ny; ++y) {
      auto it = grouped.find(y);
      double got = (it == grouped.end()) ? 0.0 : it->second;
      double dev = std::abs(got - target[static_cast<std::size_t>(y)]);
      if (dev > tol) {
        res.bad_x = x;
        res.bad_y = y;
        res.deviation = dev;
        res.message = "row sums differ at (x=" + std::to_string(x) +
                      ", y=" + std::to_string(y) + ")";
        return res;
      }
    }
  }
  res.verified = true;
  return res;
}

}  // namespace brwcrit
