#include "ustat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>

#include "ustat/error.hpp"
#include "ustat/rng.hpp"
#include "ustat/subset.hpp"

namespace ustat {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Lexicographic comparison of two supports of equal length.
bool support_less(const std::int32_t* a, const std::int32_t* b, int p) {
  for (int i = 0; i < p; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

double SparseKernel::coefficient(std::span<const std::int32_t> subset) const {
  if (static_cast<int>(subset.size()) != order_) return 0.0;
  std::size_t lo = 0, hi = support_count();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    const std::int32_t* s = indices_.data() + mid * static_cast<std::size_t>(order_);
    if (support_less(s, subset.data(), order_)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < support_count() &&
      std::memcmp(indices_.data() + lo * static_cast<std::size_t>(order_), subset.data(),
                  sizeof(std::int32_t) * static_cast<std::size_t>(order_)) == 0) {
    return values_[lo];
  }
  return 0.0;
}

double SparseKernel::sum_sq() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

bool SparseKernel::is_normalized(double tol) const { return std::abs(sum_sq() - 1.0) <= tol; }

SparseKernel make_kernel(int order, int size,
                         const std::vector<std::pair<std::vector<int>, double>>& entries) {
  if (order < 1) fail(Errc::key_out_of_range, "make_kernel: order must be >= 1");
  if (size < order) fail(Errc::key_out_of_range, "make_kernel: size must be >= order");

  std::vector<std::pair<std::vector<std::int32_t>, double>> canon;
  canon.reserve(entries.size());
  for (const auto& [key, val] : entries) {
    if (static_cast<int>(key.size()) != order)
      fail(Errc::key_out_of_range, "make_kernel: key arity != order");
    std::vector<std::int32_t> j(key.begin(), key.end());
    std::sort(j.begin(), j.end());
    for (int i = 0; i < order; ++i) {
      if (j[i] < 1 || j[i] > size) fail(Errc::key_out_of_range, "make_kernel: index outside [1,m]");
      if (i > 0 && j[i] == j[i - 1]) fail(Errc::diagonal_key, "make_kernel: repeated index in key");
    }
    if (!std::isfinite(val)) fail(Errc::key_out_of_range, "make_kernel: non-finite coefficient");
    canon.emplace_back(std::move(j), val);
  }
  std::sort(canon.begin(), canon.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < canon.size(); ++i) {
    if (canon[i].first == canon[i - 1].first) fail(Errc::duplicate_key, "make_kernel: duplicate key");
  }

  SparseKernel k;
  k.order_ = order;
  k.size_ = size;
  k.indices_.reserve(canon.size() * static_cast<std::size_t>(order));
  k.values_.reserve(canon.size());
  for (auto& [key, val] : canon) {
    k.indices_.insert(k.indices_.end(), key.begin(), key.end());
    k.values_.push_back(val);
  }
  return k;
}

SparseKernel make_kernel_presorted(int order, int size, std::vector<std::int32_t> indices,
                                   std::vector<double> values) {
  SparseKernel k;
  k.order_ = order;
  k.size_ = size;
  k.indices_ = std::move(indices);
  k.values_ = std::move(values);
  return k;
}

SparseKernel normalize(const SparseKernel& k) {
  double s = k.sum_sq();
  if (!(s > 0.0)) fail(Errc::zero_kernel, "normalize: kernel has zero mass");
  double scale = 1.0 / std::sqrt(s);
  std::vector<double> vals = k.values();
  for (double& v : vals) v *= scale;
  return make_kernel_presorted(k.order(), k.size(), k.indices(), std::move(vals));
}

double influence(const SparseKernel& k, int i) {
  if (i < 1 || i > k.size()) fail(Errc::index_out_of_range, "influence: index outside [1,m]");
  const int p = k.order();
  double acc = 0.0;
  for (std::size_t s = 0; s < k.support_count(); ++s) {
    auto sup = k.support(s);
    if (std::binary_search(sup.begin(), sup.end(), i)) acc += k.value(s) * k.value(s);
  }
  double pf = factorial(p);
  return acc / (pf * pf);
}

double rho_squared(const SparseKernel& k) {
  std::vector<double> per_index(static_cast<std::size_t>(k.size()) + 1, 0.0);
  for (std::size_t s = 0; s < k.support_count(); ++s) {
    double sq = k.value(s) * k.value(s);
    for (std::int32_t i : k.support(s)) per_index[static_cast<std::size_t>(i)] += sq;
  }
  double best = 0.0;
  for (std::size_t i = 1; i < per_index.size(); ++i) best = std::max(best, per_index[i]);
  return best;
}

double sigma_sq_prefix(const SparseKernel& k, int j) {
  if (j < 0 || j > k.size()) fail(Errc::index_out_of_range, "sigma_sq_prefix: j outside [0,m]");
  const int p = k.order();
  double acc = 0.0;
  for (std::size_t s = 0; s < k.support_count(); ++s) {
    if (k.support(s)[static_cast<std::size_t>(p - 1)] <= j) acc += k.value(s) * k.value(s);
  }
  return acc;
}

double d_factor(const SparseKernel& k, std::span<const double> fourth_moments) {
  const bool constant = fourth_moments.size() == 1;
  if (!constant && fourth_moments.size() < static_cast<std::size_t>(k.size()))
    fail(Errc::moment_below_one, "d_factor: need one moment per index or a single constant");
  for (double m : fourth_moments) {
    if (!(m >= 1.0)) fail(Errc::moment_below_one, "d_factor: fourth moment below 1");
  }
  double best = 1.0;
  for (std::size_t s = 0; s < k.support_count(); ++s) {
    if (k.value(s) == 0.0) continue;
    double prod = 1.0;
    for (std::int32_t i : k.support(s))
      prod *= constant ? fourth_moments[0] : fourth_moments[static_cast<std::size_t>(i - 1)];
    best = std::max(best, prod);
  }
  return best;
}

namespace {

// Key packing for contraction accumulation: up to 4 indices, 16 bits each.
constexpr int kMaxPackedBlock = 4;
constexpr int kMaxPackedIndex = 0xffff;

std::uint64_t pack_block(const std::int32_t* ix, int len) {
  std::uint64_t key = 0;
  for (int i = 0; i < len; ++i) key = (key << 16) | static_cast<std::uint64_t>(ix[i]);
  return key;
}

void unpack_block(std::uint64_t key, int len, std::int32_t* out) {
  for (int i = len - 1; i >= 0; --i) {
    out[i] = static_cast<std::int32_t>(key & 0xffff);
    key >>= 16;
  }
}

struct ContractionWork {
  int p, r, block;
  double pf;  // p!
  // For each r-subset L of some support: the supports containing L, as
  // (packed complement block, coefficient) pairs.
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::uint64_t, double>>> by_l;
  // All (U, L) incidences grouped by U.
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::uint64_t, double>>> by_u;
};

ContractionWork build_contraction_work(const SparseKernel& k, int r) {
  const int p = k.order();
  if (r < 1 || r > p - 1) fail(Errc::depth_out_of_range, "contraction: depth must be in [1, p-1]");
  if (p - r > kMaxPackedBlock || r > kMaxPackedBlock || k.size() > kMaxPackedIndex)
    fail(Errc::too_large, "contraction: order/size beyond packed-key limits");

  ContractionWork w;
  w.p = p;
  w.r = r;
  w.block = p - r;
  w.pf = factorial(p);

  auto l_masks = k_subsets(p, r);
  std::vector<std::int32_t> lbuf(static_cast<std::size_t>(r));
  std::vector<std::int32_t> ubuf(static_cast<std::size_t>(p - r));
  for (std::size_t s = 0; s < k.support_count(); ++s) {
    auto sup = k.support(s);
    double a = k.value(s);
    if (a == 0.0) continue;
    for (Mask lm : l_masks) {
      int li = 0, ui = 0;
      for (int pos = 0; pos < p; ++pos) {
        if (lm & (Mask{1} << pos)) {
          lbuf[static_cast<std::size_t>(li++)] = sup[static_cast<std::size_t>(pos)];
        } else {
          ubuf[static_cast<std::size_t>(ui++)] = sup[static_cast<std::size_t>(pos)];
        }
      }
      std::uint64_t lkey = pack_block(lbuf.data(), r);
      std::uint64_t ukey = pack_block(ubuf.data(), p - r);
      w.by_l[lkey].emplace_back(ukey, a);
      w.by_u[ukey].emplace_back(lkey, a);
    }
  }
  return w;
}

// Accumulate g(U,V) = sum_L a_{U u L} a_{V u L} for one U into `cells`.
void accumulate_row(const ContractionWork& w,
                    const std::vector<std::pair<std::uint64_t, double>>& completions,
                    std::vector<std::pair<std::uint64_t, double>>& cells) {
  cells.clear();
  for (const auto& [lkey, a_ul] : completions) {
    auto it = w.by_l.find(lkey);
    for (const auto& [vkey, a_vl] : it->second) {
      cells.emplace_back(vkey, a_ul * a_vl);
    }
  }
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < cells.size();) {
    std::uint64_t key = cells[i].first;
    double acc = 0.0;
    while (i < cells.size() && cells[i].first == key) acc += cells[i++].second;
    cells[out++] = {key, acc};
  }
  cells.resize(out);
}

}  // namespace

double ContractionTable::value_at(std::span<const std::int32_t> u,
                                  std::span<const std::int32_t> v) const {
  const std::size_t w = static_cast<std::size_t>(2 * block);
  std::vector<std::int32_t> probe(w);
  std::copy(u.begin(), u.end(), probe.begin());
  std::copy(v.begin(), v.end(), probe.begin() + block);
  for (std::size_t c = 0; c < cell_count(); ++c) {
    if (std::memcmp(keys.data() + c * w, probe.data(), sizeof(std::int32_t) * w) == 0)
      return values[c];
  }
  return 0.0;
}

ContractionTable contraction(const SparseKernel& k, int r) {
  ContractionWork w = build_contraction_work(k, r);
  const double coeff = factorial(r) / (w.pf * w.pf);

  // Deterministic order: sort rows by U key.
  std::vector<std::uint64_t> ukeys;
  ukeys.reserve(w.by_u.size());
  for (const auto& [ukey, _] : w.by_u) ukeys.push_back(ukey);
  std::sort(ukeys.begin(), ukeys.end());

  ContractionTable table;
  table.depth = r;
  table.block = w.block;
  std::vector<std::pair<std::uint64_t, double>> cells;
  std::vector<std::int32_t> blockbuf(static_cast<std::size_t>(w.block));
  for (std::uint64_t ukey : ukeys) {
    accumulate_row(w, w.by_u.at(ukey), cells);
    for (const auto& [vkey, g] : cells) {
      unpack_block(ukey, w.block, blockbuf.data());
      table.keys.insert(table.keys.end(), blockbuf.begin(), blockbuf.end());
      unpack_block(vkey, w.block, blockbuf.data());
      table.keys.insert(table.keys.end(), blockbuf.begin(), blockbuf.end());
      table.values.push_back(coeff * g);
    }
  }
  return table;
}

double contraction_norm(const SparseKernel& k, int r) {
  ContractionWork w = build_contraction_work(k, r);
  const double rf = factorial(r);
  const double bf = factorial(w.block);

  double total = 0.0;
  std::vector<std::pair<std::uint64_t, double>> cells;
  for (const auto& [ukey, completions] : w.by_u) {
    accumulate_row(w, completions, cells);
    double row = 0.0;
    for (const auto& [vkey, g] : cells) row += g * g;
    total += row;
  }
  // value(U,V) = r!/p!^2 * g(U,V); each (U,V) cell covers ((p-r)!)^2 ordered tuples.
  double normsq = bf * bf * (rf / (w.pf * w.pf)) * (rf / (w.pf * w.pf)) * total;
  return std::sqrt(normsq);
}

namespace {

std::uint64_t checked_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > (std::uint64_t{1} << 62) / base)
      fail(Errc::too_large, "phi_map: shell bound overflows");
    r *= base;
  }
  return r;
}

// Number of tuples in [bound]^a strictly lex-smaller than t (entries of t
// may exceed bound).
std::uint64_t rank_below(std::span<const int> t, int bound, int arity) {
  if (bound <= 0) return 0;
  std::uint64_t count = 0;
  for (int i = 0; i < arity; ++i) {
    std::uint64_t smaller = static_cast<std::uint64_t>(std::min(t[static_cast<std::size_t>(i)] - 1, bound));
    count += smaller * checked_pow(static_cast<std::uint64_t>(bound), arity - 1 - i);
    if (t[static_cast<std::size_t>(i)] > bound) return count;  // no tuple continues this prefix
  }
  return count;
}

}  // namespace

std::uint64_t phi_map(int arity, std::span<const int> tuple) {
  if (arity < 1 || static_cast<int>(tuple.size()) != arity)
    fail(Errc::invalid_arity, "phi_map: tuple length must equal arity");
  int shell = 0;
  for (int v : tuple) {
    if (v < 1) fail(Errc::non_positive_entry, "phi_map: entries must be >= 1");
    shell = std::max(shell, v);
  }
  std::uint64_t base = checked_pow(static_cast<std::uint64_t>(shell - 1), arity);
  std::uint64_t rank = rank_below(tuple, shell, arity) - rank_below(tuple, shell - 1, arity);
  return base + rank + 1;
}

int integer_root(std::int64_t m, int a) {
  if (m < 1 || a < 1) fail(Errc::too_small, "integer_root: need m >= 1, a >= 1");
  int k = static_cast<int>(std::floor(std::pow(static_cast<double>(m), 1.0 / a)));
  // Fix floating-point drift in either direction.
  while (k > 0 && checked_pow(static_cast<std::uint64_t>(k), a) > static_cast<std::uint64_t>(m)) --k;
  while (checked_pow(static_cast<std::uint64_t>(k) + 1, a) <= static_cast<std::uint64_t>(m)) ++k;
  return k;
}

SparseKernel fractional_kernel(int p, int a, int m) {
  if (p < 3) fail(Errc::invalid_arity, "fractional_kernel: order must be >= 3");
  if (a < 2 || a > p - 1) fail(Errc::invalid_arity, "fractional_kernel: arity must be in [2, p-1]");
  std::uint64_t pa = checked_pow(static_cast<std::uint64_t>(p), a);
  if (static_cast<std::uint64_t>(m) <= pa)
    fail(Errc::too_small, "fractional_kernel: size must exceed order^arity");

  const int n_root = integer_root(m, a);
  const std::uint64_t tuple_count = binomial(n_root, p);
  if (tuple_count > 50'000'000ULL) fail(Errc::too_large, "fractional_kernel: support set too large");

  // Cyclic index windows S_i = {i, i+1, ..., i+a-1 mod p}, positions sorted.
  std::vector<std::vector<int>> windows(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < a; ++j) windows[static_cast<std::size_t>(i)].push_back((i + j) % p);
    std::sort(windows[static_cast<std::size_t>(i)].begin(), windows[static_cast<std::size_t>(i)].end());
  }

  const double pf = factorial(p);
  const double f_count = pf * static_cast<double>(tuple_count);  // |F_m|
  const double coeff = pf / std::sqrt(pf * f_count);             // a_J = p! * (p! |F_m|)^{-1/2}

  std::vector<std::int32_t> indices;
  std::vector<double> values;
  indices.reserve(static_cast<std::size_t>(tuple_count) * static_cast<std::size_t>(p));
  values.reserve(static_cast<std::size_t>(tuple_count));

  std::vector<int> t(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) t[static_cast<std::size_t>(i)] = i + 1;
  std::vector<int> proj(static_cast<std::size_t>(a));
  std::vector<std::int32_t> sup(static_cast<std::size_t>(p));
  while (true) {
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < a; ++j)
        proj[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(windows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])];
      std::uint64_t v = phi_map(a, proj);
      sup[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(v);
    }
    std::sort(sup.begin(), sup.end());
    indices.insert(indices.end(), sup.begin(), sup.end());
    values.push_back(coeff);

    // Next strictly increasing p-tuple over [n_root].
    int pos = p - 1;
    while (pos >= 0 && t[static_cast<std::size_t>(pos)] == n_root - (p - 1 - pos)) --pos;
    if (pos < 0) break;
    ++t[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < p; ++i) t[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i - 1)] + 1;
  }

  // Canonical lexicographic support order.
  const std::size_t count = values.size();
  std::vector<std::uint32_t> perm(count);
  std::iota(perm.begin(), perm.end(), 0u);
  std::sort(perm.begin(), perm.end(), [&](std::uint32_t x, std::uint32_t y) {
    return support_less(indices.data() + static_cast<std::size_t>(x) * static_cast<std::size_t>(p),
                        indices.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(p), p);
  });
  std::vector<std::int32_t> sorted_indices(indices.size());
  std::vector<double> sorted_values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::memcpy(sorted_indices.data() + i * static_cast<std::size_t>(p),
                indices.data() + static_cast<std::size_t>(perm[i]) * static_cast<std::size_t>(p),
                sizeof(std::int32_t) * static_cast<std::size_t>(p));
    sorted_values[i] = values[perm[i]];
  }
  return make_kernel_presorted(p, m, std::move(sorted_indices), std::move(sorted_values));
}

SparseKernel random_kernel(int p, int m, double density, std::uint64_t seed) {
  if (p < 1 || m < p) fail(Errc::key_out_of_range, "random_kernel: need 1 <= p <= m");
  if (!(density > 0.0) || density > 1.0) fail(Errc::bad_config, "random_kernel: density in (0,1]");
  if (binomial(m, p) > 10'000'000ULL) fail(Errc::too_large, "random_kernel: too many subsets");

  rng::Engine eng(seed);
  std::vector<std::int32_t> indices;
  std::vector<double> values;
  std::vector<int> t(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) t[static_cast<std::size_t>(i)] = i + 1;
  while (true) {
    if (eng.uniform01() < density) {
      for (int v : t) indices.push_back(v);
      values.push_back(eng.gaussian());
    }
    int pos = p - 1;
    while (pos >= 0 && t[static_cast<std::size_t>(pos)] == m - (p - 1 - pos)) --pos;
    if (pos < 0) break;
    ++t[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < p; ++i) t[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i - 1)] + 1;
  }
  if (values.empty()) {
    // Guarantee a nonempty kernel regardless of density draw.
    for (int i = 0; i < p; ++i) indices.push_back(i + 1);
    values.push_back(eng.gaussian());
    if (values.back() == 0.0) values.back() = 1.0;
  }
  return normalize(make_kernel_presorted(p, m, std::move(indices), std::move(values)));
}

}  // namespace ustat
