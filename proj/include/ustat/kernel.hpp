#ifndef USTAT_KERNEL_HPP
#define USTAT_KERNEL_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ustat {

// Sparse symmetric kernel of a multilinear form of order p over [m]: a map
// from p-subsets J of {1,...,m} to coefficients a_J. The symmetric
// point-function representation is f(i_1,...,i_p) = a_{{i_1..i_p}} / p! for
// pairwise-distinct indices and 0 otherwise (so f vanishes on diagonals by
// construction). Supports are kept sorted lexicographically.
class SparseKernel {
 public:
  SparseKernel() = default;

  int order() const { return order_; }
  int size() const { return size_; }
  std::size_t support_count() const { return values_.size(); }

  // Sorted 1-based indices of support #idx.
  std::span<const std::int32_t> support(std::size_t idx) const {
    return {indices_.data() + idx * static_cast<std::size_t>(order_), static_cast<std::size_t>(order_)};
  }
  double value(std::size_t idx) const { return values_[idx]; }

  // a_J for a sorted subset; 0 when absent.
  double coefficient(std::span<const std::int32_t> subset) const;

  double sum_sq() const;
  bool is_normalized(double tol = 1e-12) const;

  // Raw access for serialization and tight loops.
  const std::vector<std::int32_t>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  friend SparseKernel make_kernel(int order, int size,
                                  const std::vector<std::pair<std::vector<int>, double>>& entries);
  friend SparseKernel make_kernel_presorted(int order, int size, std::vector<std::int32_t> indices,
                                            std::vector<double> values);

 private:
  int order_ = 0;
  int size_ = 0;
  std::vector<std::int32_t> indices_;  // support_count * order, each block sorted ascending
  std::vector<double> values_;
};

// Validating constructor: keys are canonically sorted; repeated indices
// within a key (DiagonalKey), duplicate keys and out-of-range indices are
// rejected.
SparseKernel make_kernel(int order, int size,
                         const std::vector<std::pair<std::vector<int>, double>>& entries);

// Trusted fast path: indices must already be per-support sorted and the
// support list lexicographically sorted without duplicates.
SparseKernel make_kernel_presorted(int order, int size, std::vector<std::int32_t> indices,
                                   std::vector<double> values);

// Rescales so that sum of a_J^2 is 1; ZeroKernel when the mass is zero.
SparseKernel normalize(const SparseKernel& k);

// Inf_i(f) = (1/p!^2) sum_{J : i in J} a_J^2.
double influence(const SparseKernel& k, int i);

// max_i sum_{J : i in J} a_J^2  (== (p!)^2 max_i Inf_i).
double rho_squared(const SparseKernel& k);

// sum_{J subset of [j]} a_J^2; 0 at j=0, full mass at j=m.
double sigma_sq_prefix(const SparseKernel& k, int j);

// max over supports J of prod_{i in J} fourth_moments[i-1]; moments of size 1
// act as a constant. Every moment must be >= 1.
double d_factor(const SparseKernel& k, std::span<const double> fourth_moments);

// Contraction kernel f *_r f restricted to its nonzero cells. A cell is
// keyed by the pair of sorted (p-r)-blocks (U,V); every ordered tuple with
// those index sets carries the same value. Both (U,V) and (V,U) are stored.
struct ContractionTable {
  int depth = 0;  // r
  int block = 0;  // p - r
  std::vector<std::int32_t> keys;  // cell_count * 2*block
  std::vector<double> values;

  std::size_t cell_count() const { return values.size(); }
  std::span<const std::int32_t> key(std::size_t idx) const {
    return {keys.data() + idx * static_cast<std::size_t>(2 * block), static_cast<std::size_t>(2 * block)};
  }
  // Value at (U,V) given as sorted blocks; 0 when the cell is absent.
  double value_at(std::span<const std::int32_t> u, std::span<const std::int32_t> v) const;
};

ContractionTable contraction(const SparseKernel& k, int r);

// L2 norm of f *_r f over the full grid [m]^{2(p-r)} (counting measure),
// computed by support-pair accumulation without materializing the grid.
double contraction_norm(const SparseKernel& k, int r);

// Injective shell-preserving map N^a -> N: tuples with max entry K map into
// ((K-1)^a, K^a], consecutively in lexicographic order within the shell.
std::uint64_t phi_map(int arity, std::span<const int> tuple);

// Largest k with k^a <= m.
int integer_root(std::int64_t m, int a);

// Fractional-product kernel of order p with arity 2 <= a <= p-1 over [m],
// m > p^a. Index windows are the cyclic blocks S_i = {i,...,i+a-1 mod p}.
// The result is normalized by construction.
SparseKernel fractional_kernel(int p, int a, int m);

// Dense random kernel: each p-subset of [m] is kept with probability
// `density`, coefficients standard normal, then normalized.
SparseKernel random_kernel(int p, int m, double density, std::uint64_t seed);

}  // namespace ustat

#endif
