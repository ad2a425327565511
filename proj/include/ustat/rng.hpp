#ifndef USTAT_RNG_HPP
#define USTAT_RNG_HPP

#include <cstdint>
#include <random>

namespace ustat::rng {

// SplitMix64 step; used both as a stream on its own and to derive seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based seed derivation: the stream for counter i is independent of
// how many other streams exist and of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = master ^ (0xd1342543de82ef95ULL * (counter + 1));
  std::uint64_t b = splitmix64(s);
  return a ^ b;
}

// Deterministic generator built on std::mt19937_64 (bit-exact across
// conforming standard libraries). Uniform, Gaussian and Poisson draws avoid
// std::*_distribution, whose streams are implementation-defined.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via the Marsaglia polar transform; pairs are generated
  // and the spare is cached.
  double gaussian();

  // Poisson(lambda): inversion by sequential search for lambda <= 30,
  // Hormann's PTRS transformed rejection above.
  long poisson(double lambda);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ustat::rng

#endif
