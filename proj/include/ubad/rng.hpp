#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ubad {

std::uint64_t fnv1a64(const std::string& text);
std::uint64_t fnv1a64(const void* data, std::size_t len);

// Deterministic generator with hand-rolled distributions. The standard
// distribution adaptors are implementation-defined, so everything that must
// reproduce byte-identically draws through this class instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  std::uint64_t uniform_int(std::uint64_t n);  // [0, n)
  double normal();                       // standard normal, Box-Muller
  std::uint64_t poisson(double lambda);  // Knuth's product method

  template <typename T>
  void shuffle(std::vector<T>& values) {  // Fisher-Yates
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_int(i)]);
    }
  }

  // Derives an independent stream, e.g. per user or per aspect.
  static std::uint64_t derive(std::uint64_t seed, const std::string& tag);
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag);

 private:
  std::uint64_t s_[4];  // xoshiro256**
};

}  // namespace ubad
