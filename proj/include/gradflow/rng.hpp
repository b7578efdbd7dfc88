#ifndef GRADFLOW_RNG_HPP
#define GRADFLOW_RNG_HPP

#include <cstdint>
#include <string>

namespace gradflow {

// Counter-based generator: output i of stream `seed` is splitmix64(seed, i).
// State is just (seed, counter), so replay and parallel trials are exact.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + counter * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix(seed_, ++counter_); }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // independent child stream for trial `index`
  static std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
    return mix(seed ^ 0xa02bdbf7bb3c0a7full, index + 1);
  }

  static std::string name() { return "splitmix64-counter"; }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// Halton low-discrepancy sequence, seeded by an index offset.
class HaltonSampler {
 public:
  explicit HaltonSampler(std::uint64_t seed)
      : offset_(CounterRng::mix(seed, 0) % 100000), index_(0) {}

  // next point in [0,1)^dim, dim <= 6
  void next(double* u, int dim) {
    static const int bases[6] = {2, 3, 5, 7, 11, 13};
    ++index_;
    for (int d = 0; d < dim; ++d) u[d] = radical_inverse(index_ + offset_, bases[d]);
  }

 private:
  static double radical_inverse(std::uint64_t i, int base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= base;
      r += f * static_cast<double>(i % base);
      i /= base;
    }
    return r;
  }

  std::uint64_t offset_;
  std::uint64_t index_;
};

}  // namespace gradflow

#endif
