#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace brwcrit {

/// splitmix64 step; used to derive independent stream seeds from a master
/// seed and a counter, so replicas are reproducible and order-independent.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master,
                                        std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

/// Deterministic uniform/exponential/geometric draws on top of mt19937_64.
/// Samplers are inverse-CDF so outputs depend only on the engine stream, not
/// on any standard-library distribution implementation.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : eng_(seed) {}
  static Prng for_stream(std::uint64_t master, std::uint64_t stream) {
    return Prng(derive_stream_seed(master, stream));
  }

  /// uniform on (0,1]; never returns 0 so logs are safe
  double uniform() {
    std::uint64_t r = eng_();
    return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// geometric on {0,1,...} with P(i) = p (1-p)^i
  long long geometric(double p) {
    if (p >= 1.0) return 0;
    double u = uniform();
    return static_cast<long long>(std::floor(std::log(u) / std::log1p(-p)));
  }

  /// index into `cum` (cumulative weights, last entry = total)
  std::size_t categorical(const std::vector<double>& cum) {
    double u = uniform() * cum.back();
    std::size_t lo = 0, hi = cum.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cum[mid] < u) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  bool bernoulli(double p) { return uniform() <= p; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace brwcrit
