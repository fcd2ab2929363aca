#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "deltasym/expr.hpp"

namespace deltasym {

// Deterministic random source. Distributions are computed here from raw
// 64-bit draws rather than through <random> distributions, whose output is
// implementation-defined, so that sample points are identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  // Independent stream keyed by (seed, purpose).
  static Rng derive(std::uint64_t seed, std::string_view purpose) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : purpose) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return Rng(mix(seed ^ mix(h)));
  }

  // Independent stream for the index-th work item.
  Rng split(std::uint64_t index) const { return Rng(mix(seed_ + 0x9e3779b97f4a7c15ull * (index + 1))); }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  // Complex number with modulus in [rmin, rmax] and uniform argument.
  Complex annulus(double rmin, double rmax) {
    double r = uniform(rmin, rmax);
    double a = uniform(-3.14159265358979323846, 3.14159265358979323846);
    return std::polar(r, a);
  }

  // Rational p/q with q in [1, max_den], uniformly spread over [lo, hi].
  Rational rational(long lo, long hi, long max_den) {
    long q = 1 + static_cast<long>(below(static_cast<std::uint64_t>(max_den)));
    long span = (hi - lo) * q;
    long p = lo * q + static_cast<long>(below(static_cast<std::uint64_t>(span) + 1));
    Rational r(p, q);
    r.canonicalize();
    return r;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace deltasym
