#ifndef USTAT_HOEFFDING_HPP
#define USTAT_HOEFFDING_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ustat/subset.hpp"

namespace ustat {

struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> probs;

  // Probabilities must be positive and sum to 1 within 1e-12.
  void validate() const;
  double moment(int k) const;
  double mean() const { return moment(1); }
  double variance() const;
  bool is_centered(double tol = 1e-12) const;
  bool is_standardized(double tol = 1e-12) const;

  static DiscreteDistribution rademacher();
  static DiscreteDistribution from_atoms(const std::vector<std::pair<double, double>>& atoms);
};

// Finite product of independent discrete coordinates; the substrate for
// exact expectations. Joint atoms are enumerated in mixed-radix order with
// coordinate 1 slowest.
class ProductSpace {
 public:
  static constexpr std::size_t kDefaultAtomCap = 1'000'000;

  explicit ProductSpace(std::vector<DiscreteDistribution> coords,
                        std::size_t atom_cap = kDefaultAtomCap);

  int coordinate_count() const { return static_cast<int>(coords_.size()); }
  const DiscreteDistribution& coordinate(int i) const { return coords_[static_cast<std::size_t>(i - 1)]; }
  std::size_t atom_count() const { return total_atoms_; }
  Mask full_scope() const { return low_bits(coordinate_count()); }

  // Atom count of the subspace spanned by the coordinates in `scope`.
  std::size_t scope_atom_count(Mask scope) const;

  static ProductSpace rademacher(int n);

 private:
  std::vector<DiscreteDistribution> coords_;
  std::size_t total_atoms_ = 1;
};

// Dense value table over the subspace spanned by `scope` (bit i-1 set means
// coordinate i participates). Values are mixed-radix indexed with the
// smallest participating coordinate slowest.
struct StatisticTable {
  Mask scope = 0;
  std::vector<double> values;
};

// Builds a table by evaluating f on the coordinate values of each scope atom.
StatisticTable make_table(const ProductSpace& space, Mask scope,
                          const std::function<double(std::span<const double>)>& f);

// Table of the homogeneous sum with the given kernel coefficients:
// sum_J a_J prod_{i in J} x_i over the first `size` coordinates.
class SparseKernel;
StatisticTable homogeneous_sum_table(const ProductSpace& space, const SparseKernel& kernel);

double expectation(const StatisticTable& y, const ProductSpace& space);

// E[Y | F_J]; the result has scope exactly `j`.
StatisticTable conditional_expectation(const StatisticTable& y, Mask j, const ProductSpace& space);

// Inclusion-exclusion component: sum_{J subset M} (-1)^{|M|-|J|} E[Y|F_J].
StatisticTable hoeffding_component(const StatisticTable& y, Mask m, const ProductSpace& space);

// Pointwise algebra.
StatisticTable embed(const StatisticTable& t, Mask scope, const ProductSpace& space);
StatisticTable pointwise_product(const StatisticTable& a, const StatisticTable& b,
                                 const ProductSpace& space);
double product_expectation(std::span<const StatisticTable* const> tables, const ProductSpace& space);

struct DecomposedStatistic {
  int n = 0;                               // coordinate count at decomposition
  std::vector<StatisticTable> components;  // indexed by scope mask, size 2^n
  std::vector<double> l2;                  // sqrt(E[Y_M^2]) per mask

  const StatisticTable& component(Mask m) const { return components[m]; }
  double l2_norm(Mask m) const { return l2[m]; }
  StatisticTable reconstruct(const ProductSpace& space) const;
};

// Full Hoeffding decomposition (all 2^n components). Refuses spaces beyond
// the caps instead of sampling.
DecomposedStatistic decompose(const StatisticTable& y, const ProductSpace& space, int max_n = 12);

// True iff every component with |M| != order has L2 norm below tol.
bool is_degenerate(const StatisticTable& y, const ProductSpace& space, int order,
                   double tol = 1e-10);

// Variances of the Hoeffding components of the pointwise product VW,
// indexed by mask.
std::vector<double> product_component_variances(const DecomposedStatistic& v,
                                                const DecomposedStatistic& w,
                                                const ProductSpace& space);

}  // namespace ustat

#endif
