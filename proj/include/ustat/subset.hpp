#ifndef USTAT_SUBSET_HPP
#define USTAT_SUBSET_HPP

#include <bit>
#include <cstdint>
#include <vector>

namespace ustat {

using Mask = std::uint32_t;

inline int popcount(Mask m) { return std::popcount(m); }

inline Mask low_bits(int n) { return n >= 32 ? ~Mask{0} : (Mask{1} << n) - 1; }

inline bool contains(Mask outer, Mask inner) { return (inner & ~outer) == 0; }

// Coordinates of a mask as 1-based indices, ascending.
inline std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  while (m) {
    int b = std::countr_zero(m);
    out.push_back(b + 1);
    m &= m - 1;
  }
  return out;
}

// All k-subsets of {0,...,n-1} as masks, in increasing numeric order.
inline std::vector<Mask> k_subsets(int n, int k) {
  std::vector<Mask> out;
  if (k < 0 || k > n) return out;
  if (k == 0) {
    out.push_back(0);
    return out;
  }
  // Gosper's hack.
  Mask v = low_bits(k);
  Mask limit = Mask{1} << n;
  while (v < limit) {
    out.push_back(v);
    Mask c = v & -v;
    Mask r = v + c;
    v = (((r ^ v) >> 2) / c) | r;
    if (c == 0) break;
  }
  return out;
}

// Iterate submasks of m (including 0 and m) calling fn(sub).
template <typename Fn>
inline void for_each_submask(Mask m, Fn&& fn) {
  Mask sub = m;
  while (true) {
    fn(sub);
    if (sub == 0) break;
    sub = (sub - 1) & m;
  }
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

}  // namespace ustat

#endif
