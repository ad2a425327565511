#include "ustat/hoeffding.hpp"

#include <algorithm>
#include <cmath>

#include "ustat/error.hpp"
#include "ustat/kernel.hpp"

namespace ustat {

void DiscreteDistribution::validate() const {
  if (values.empty() || values.size() != probs.size())
    fail(Errc::bad_config, "distribution: atoms and probabilities must match and be nonempty");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0)) fail(Errc::bad_config, "distribution: probabilities must be positive");
    if (!std::isfinite(values[i])) fail(Errc::bad_config, "distribution: non-finite atom value");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) fail(Errc::bad_config, "distribution: probabilities must sum to 1");
}

double DiscreteDistribution::moment(int k) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += probs[i] * std::pow(values[i], k);
  return acc;
}

double DiscreteDistribution::variance() const {
  double m1 = moment(1);
  return moment(2) - m1 * m1;
}

bool DiscreteDistribution::is_centered(double tol) const { return std::abs(mean()) <= tol; }

bool DiscreteDistribution::is_standardized(double tol) const {
  return std::abs(variance() - 1.0) <= tol;
}

DiscreteDistribution DiscreteDistribution::rademacher() {
  return DiscreteDistribution{{-1.0, 1.0}, {0.5, 0.5}};
}

DiscreteDistribution DiscreteDistribution::from_atoms(
    const std::vector<std::pair<double, double>>& atoms) {
  DiscreteDistribution d;
  for (const auto& [v, p] : atoms) {
    d.values.push_back(v);
    d.probs.push_back(p);
  }
  d.validate();
  return d;
}

ProductSpace::ProductSpace(std::vector<DiscreteDistribution> coords, std::size_t atom_cap)
    : coords_(std::move(coords)) {
  if (coords_.empty()) fail(Errc::bad_config, "product space: needs at least one coordinate");
  if (coords_.size() > 30) fail(Errc::too_large, "product space: more than 30 coordinates");
  for (const auto& c : coords_) c.validate();
  for (const auto& c : coords_) {
    std::size_t s = c.values.size();
    if (total_atoms_ > atom_cap / s) fail(Errc::too_large, "product space: joint atom cap exceeded");
    total_atoms_ *= s;
  }
}

std::size_t ProductSpace::scope_atom_count(Mask scope) const {
  std::size_t n = 1;
  for (int c : mask_indices(scope)) n *= coordinate(c).values.size();
  return n;
}

ProductSpace ProductSpace::rademacher(int n) {
  std::vector<DiscreteDistribution> coords(static_cast<std::size_t>(n),
                                           DiscreteDistribution::rademacher());
  return ProductSpace(std::move(coords));
}

namespace {

// Odometer over the atoms of a scope: coordinate list ascending, first
// coordinate slowest. digits[k] indexes the atom of scope coordinate k.
struct ScopeIter {
  std::vector<int> coords;   // 1-based coordinate ids
  std::vector<int> sizes;    // atoms per coordinate
  std::vector<int> digits;   // current atom index per coordinate
  bool done = false;

  ScopeIter(Mask scope, const ProductSpace& space) : coords(mask_indices(scope)) {
    sizes.reserve(coords.size());
    for (int c : coords) sizes.push_back(static_cast<int>(space.coordinate(c).values.size()));
    digits.assign(coords.size(), 0);
  }

  void advance() {
    for (std::size_t k = coords.size(); k-- > 0;) {
      if (++digits[k] < sizes[k]) return;
      digits[k] = 0;
    }
    done = true;
  }

  double weight(const ProductSpace& space) const {
    double w = 1.0;
    for (std::size_t k = 0; k < coords.size(); ++k)
      w *= space.coordinate(coords[k]).probs[static_cast<std::size_t>(digits[k])];
    return w;
  }
};

// Maps digits of an outer scope iterator to the linear index of an inner
// table whose scope is a subset of the outer scope.
struct SubIndexer {
  std::vector<std::size_t> strides;  // per outer digit, 0 when not in inner scope

  SubIndexer(Mask inner, const ScopeIter& outer, const ProductSpace& space) {
    strides.assign(outer.coords.size(), 0);
    // Build inner strides (first inner coordinate slowest).
    std::vector<int> inner_coords = mask_indices(inner);
    std::vector<std::size_t> inner_strides(inner_coords.size(), 1);
    for (std::size_t k = inner_coords.size(); k-- > 1;) {
      inner_strides[k - 1] =
          inner_strides[k] * space.coordinate(inner_coords[k]).values.size();
    }
    for (std::size_t k = 0; k < outer.coords.size(); ++k) {
      auto it = std::find(inner_coords.begin(), inner_coords.end(), outer.coords[k]);
      if (it != inner_coords.end())
        strides[k] = inner_strides[static_cast<std::size_t>(it - inner_coords.begin())];
    }
  }

  std::size_t index(const ScopeIter& outer) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < strides.size(); ++k)
      idx += strides[k] * static_cast<std::size_t>(outer.digits[k]);
    return idx;
  }
};

}  // namespace

StatisticTable make_table(const ProductSpace& space, Mask scope,
                          const std::function<double(std::span<const double>)>& f) {
  if (!contains(space.full_scope(), scope)) fail(Errc::bad_index_set, "make_table: scope outside space");
  StatisticTable t;
  t.scope = scope;
  t.values.reserve(space.scope_atom_count(scope));
  ScopeIter it(scope, space);
  std::vector<double> x(it.coords.size());
  while (!it.done) {
    for (std::size_t k = 0; k < it.coords.size(); ++k)
      x[k] = space.coordinate(it.coords[k]).values[static_cast<std::size_t>(it.digits[k])];
    t.values.push_back(f(x));
    it.advance();
  }
  return t;
}

StatisticTable homogeneous_sum_table(const ProductSpace& space, const SparseKernel& kernel) {
  if (kernel.size() > space.coordinate_count())
    fail(Errc::shape_mismatch, "homogeneous_sum_table: kernel wider than space");
  Mask scope = space.full_scope();
  return make_table(space, scope, [&](std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t s = 0; s < kernel.support_count(); ++s) {
      double term = kernel.value(s);
      for (std::int32_t i : kernel.support(s)) term *= x[static_cast<std::size_t>(i - 1)];
      acc += term;
    }
    return acc;
  });
}

double expectation(const StatisticTable& y, const ProductSpace& space) {
  if (y.values.size() != space.scope_atom_count(y.scope))
    fail(Errc::shape_mismatch, "expectation: table does not match space");
  double acc = 0.0;
  ScopeIter it(y.scope, space);
  std::size_t idx = 0;
  while (!it.done) {
    acc += y.values[idx++] * it.weight(space);
    it.advance();
  }
  return acc;
}

StatisticTable conditional_expectation(const StatisticTable& y, Mask j, const ProductSpace& space) {
  if (!contains(space.full_scope(), j)) fail(Errc::bad_index_set, "conditional_expectation: bad index set");
  if (y.values.size() != space.scope_atom_count(y.scope))
    fail(Errc::shape_mismatch, "conditional_expectation: table does not match space");

  const Mask kept = j & y.scope;
  // Average Y over the coordinates outside kept, with product weights.
  StatisticTable reduced;
  reduced.scope = kept;
  reduced.values.assign(space.scope_atom_count(kept), 0.0);
  ScopeIter it(y.scope, space);
  SubIndexer to_kept(kept, it, space);
  const Mask averaged = y.scope & ~kept;
  std::vector<bool> in_avg(it.coords.size());
  for (std::size_t k = 0; k < it.coords.size(); ++k)
    in_avg[k] = (averaged >> (it.coords[k] - 1)) & 1u;
  std::size_t idx = 0;
  while (!it.done) {
    double w = 1.0;
    for (std::size_t k = 0; k < it.coords.size(); ++k) {
      if (in_avg[k])
        w *= space.coordinate(it.coords[k]).probs[static_cast<std::size_t>(it.digits[k])];
    }
    reduced.values[to_kept.index(it)] += w * y.values[idx++];
    it.advance();
  }
  if (kept == j) return reduced;
  return embed(reduced, j, space);
}

StatisticTable embed(const StatisticTable& t, Mask scope, const ProductSpace& space) {
  if (!contains(scope, t.scope)) fail(Errc::bad_index_set, "embed: scope must contain table scope");
  if (scope == t.scope) return t;
  StatisticTable out;
  out.scope = scope;
  out.values.reserve(space.scope_atom_count(scope));
  ScopeIter it(scope, space);
  SubIndexer sub(t.scope, it, space);
  while (!it.done) {
    out.values.push_back(t.values[sub.index(it)]);
    it.advance();
  }
  return out;
}

StatisticTable hoeffding_component(const StatisticTable& y, Mask m, const ProductSpace& space) {
  if (!contains(space.full_scope(), m)) fail(Errc::bad_index_set, "hoeffding_component: bad index set");
  StatisticTable acc;
  acc.scope = m;
  acc.values.assign(space.scope_atom_count(m), 0.0);
  const int size_m = popcount(m);
  for_each_submask(m, [&](Mask j) {
    StatisticTable cond = conditional_expectation(y, j, space);
    StatisticTable lifted = embed(cond, m, space);
    double sign = ((size_m - popcount(j)) % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += sign * lifted.values[i];
  });
  return acc;
}

StatisticTable pointwise_product(const StatisticTable& a, const StatisticTable& b,
                                 const ProductSpace& space) {
  Mask scope = a.scope | b.scope;
  StatisticTable out;
  out.scope = scope;
  out.values.reserve(space.scope_atom_count(scope));
  ScopeIter it(scope, space);
  SubIndexer ia(a.scope, it, space);
  SubIndexer ib(b.scope, it, space);
  while (!it.done) {
    out.values.push_back(a.values[ia.index(it)] * b.values[ib.index(it)]);
    it.advance();
  }
  return out;
}

double product_expectation(std::span<const StatisticTable* const> tables, const ProductSpace& space) {
  Mask scope = 0;
  for (const StatisticTable* t : tables) scope |= t->scope;
  ScopeIter it(scope, space);
  std::vector<SubIndexer> sub;
  sub.reserve(tables.size());
  for (const StatisticTable* t : tables) sub.emplace_back(t->scope, it, space);
  double acc = 0.0;
  while (!it.done) {
    double prod = it.weight(space);
    for (std::size_t k = 0; k < tables.size(); ++k) prod *= tables[k]->values[sub[k].index(it)];
    acc += prod;
    it.advance();
  }
  return acc;
}

StatisticTable DecomposedStatistic::reconstruct(const ProductSpace& space) const {
  Mask scope = low_bits(n);
  StatisticTable out;
  out.scope = scope;
  out.values.assign(space.scope_atom_count(scope), 0.0);
  for (Mask m = 0; m < components.size(); ++m) {
    const StatisticTable& c = components[m];
    ScopeIter outer(scope, space);
    SubIndexer sub(c.scope, outer, space);
    std::size_t idx = 0;
    while (!outer.done) {
      out.values[idx++] += c.values[sub.index(outer)];
      outer.advance();
    }
  }
  return out;
}

DecomposedStatistic decompose(const StatisticTable& y, const ProductSpace& space, int max_n) {
  const int n = space.coordinate_count();
  if (n > max_n) fail(Errc::too_large, "decompose: coordinate count beyond cap");
  const Mask full = space.full_scope();
  const std::size_t nsub = std::size_t{1} << n;

  // All conditional expectations first; component M is a signed sum over
  // the submasks of M.
  std::vector<StatisticTable> cond(nsub);
  for (Mask j = 0; j < nsub; ++j) cond[j] = conditional_expectation(y, j, space);

  DecomposedStatistic d;
  d.n = n;
  d.components.resize(nsub);
  d.l2.resize(nsub);
  for (Mask m = 0; m < nsub; ++m) {
    StatisticTable acc;
    acc.scope = m;
    acc.values.assign(space.scope_atom_count(m), 0.0);
    const int size_m = popcount(m);
    ScopeIter it(m, space);
    for_each_submask(m, [&](Mask j) {
      double sign = ((size_m - popcount(j)) % 2 == 0) ? 1.0 : -1.0;
      ScopeIter outer(m, space);
      SubIndexer sub(j, outer, space);
      std::size_t idx = 0;
      while (!outer.done) {
        acc.values[idx++] += sign * cond[j].values[sub.index(outer)];
        outer.advance();
      }
    });
    (void)it;
    const StatisticTable* self[] = {&acc, &acc};
    d.l2[m] = std::sqrt(std::max(0.0, product_expectation(self, space)));
    d.components[m] = std::move(acc);
  }
  (void)full;
  return d;
}

bool is_degenerate(const StatisticTable& y, const ProductSpace& space, int order, double tol) {
  DecomposedStatistic d = decompose(y, space);
  for (Mask m = 0; m < d.components.size(); ++m) {
    if (popcount(m) == order) continue;
    if (d.l2[m] >= tol) return false;
  }
  return true;
}

std::vector<double> product_component_variances(const DecomposedStatistic& v,
                                                const DecomposedStatistic& w,
                                                const ProductSpace& space) {
  if (v.n != space.coordinate_count() || w.n != space.coordinate_count())
    fail(Errc::space_mismatch, "product_component_variances: statistics over different spaces");
  StatisticTable tv = v.reconstruct(space);
  StatisticTable tw = w.reconstruct(space);
  StatisticTable prod = pointwise_product(tv, tw, space);
  DecomposedStatistic d = decompose(prod, space);
  std::vector<double> variances(d.components.size());
  for (Mask m = 0; m < d.components.size(); ++m) {
    double mean = expectation(d.components[m], space);
    variances[m] = d.l2[m] * d.l2[m] - mean * mean;
  }
  return variances;
}

}  // namespace ustat
