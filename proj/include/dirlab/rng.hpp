#pragma once

#include <bit>
#include <cstdint>
#include <random>

namespace dirlab {

// Seedable random source: mt19937_64 stream with splitmix64-derived
// sub-seeds. Index mapping and double conversion are done by hand so that
// draws do not depend on the standard library's distribution internals and a
// seed reproduces the same stream on every build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // splitmix64 finaliser; stream i of a master seed.
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + (stream + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, bound) by masked rejection; bound = 0 or 1 consumes no
  // randomness.
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const int zeros = std::countl_zero(bound - 1);
    const std::uint64_t mask =
        zeros == 64 ? 0 : (~std::uint64_t{0} >> zeros);
    std::uint64_t v;
    do {
      v = gen_() & mask;
    } while (v >= bound);
    return v;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform_double() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dirlab
