#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "critbranch/model.hpp"
#include "critbranch/stats.hpp"

namespace critbranch {

struct SimulationCaps {
  /// Guard on the number of individuals stored in one tree (all generations),
  /// or on a single generation's size for counts-only simulation.
  std::int64_t max_population = 1'000'000;
};

/// Individuals of one generation in birth order. parent[k] indexes the
/// previous generation; roots carry -1.
struct GenerationRecord {
  std::vector<int> type;
  std::vector<std::int32_t> parent;

  std::size_t size() const { return type.size(); }
};

struct FamilyTree {
  int dim = 0;
  Population start;
  std::vector<GenerationRecord> generations;

  int horizon() const { return static_cast<int>(generations.size()) - 1; }
  Population counts(int generation) const;
  std::int64_t total_nodes() const;
  bool alive_at(int generation) const { return !generations.at(generation).type.empty(); }
};

struct Trajectory {
  std::vector<Population> counts;
};

template <class T>
struct Conditioned {
  T value;
  std::int64_t attempts = 0;
};

/// Draws one offspring atom of `type` by cumulative-probability inversion in
/// config order.
int sample_atom(const BranchingModel& model, int type, Rng& rng);

/// One Galton-Watson generation: the sum of independent offspring vectors of
/// every individual in z. Per type, atom multiplicities are drawn as one
/// multinomial (sequential binomials in config order).
Population step(const BranchingModel& model, std::span<const std::int64_t> z, Rng& rng);

Trajectory simulate_counts(const BranchingModel& model, const Population& start, int n, Rng& rng,
                           const SimulationCaps& caps = {});

FamilyTree simulate_tree(const BranchingModel& model, const Population& start, int n, Rng& rng,
                         const SimulationCaps& caps = {});
FamilyTree simulate_tree(const BranchingModel& model, int root_type, int n, Rng& rng,
                         const SimulationCaps& caps = {});

/// Exact rejection sampler for P_z(. | Z(n) != 0).
Conditioned<FamilyTree> condition_on_survival(const BranchingModel& model, const Population& start, int n,
                                              Rng& rng, std::int64_t max_attempts,
                                              const SimulationCaps& caps = {});
Conditioned<Trajectory> condition_on_survival_counts(const BranchingModel& model, const Population& start,
                                                     int n, Rng& rng, std::int64_t max_attempts,
                                                     const SimulationCaps& caps = {});

/// Index in generation m of the ancestor of individual x of generation n.
std::size_t ancestor(const FamilyTree& tree, int n, std::size_t x, int m);

/// A^(m)(n): share of generation n descending from time-(n-m) ancestors of
/// each type. Computed from descendant counts of generation n-m.
Vector empirical_ancestral(const FamilyTree& tree, int n, int m);

/// L^x(n) = (1/n) #{k < n : type of x(k) = i}.
Vector lineage_occupation(const FamilyTree& tree, int n, std::size_t x);

/// L^x(n) for every x in generation n, as rows.
Matrix lineage_occupations(const FamilyTree& tree, int n);

/// (1/|X_n|) sum_x L^x(n), by walking every lineage back.
Vector mean_lineage_occupation(const FamilyTree& tree, int n);

/// (1/n) sum_{k<n} A^(n-k)(n), by descendant counting.
Vector mean_ancestral_profile(const FamilyTree& tree, int n);

/// Fraction of generation-n individuals whose lineage occupation is at TV
/// distance >= rho from alpha.
double deviant_fraction(const FamilyTree& tree, int n, double rho, const Vector& alpha);

/// True iff some generation-n lineage has TV(L^x(n), alpha) >= rho.
bool has_deviant_lineage(const FamilyTree& tree, int n, double rho, const Vector& alpha);

}  // namespace critbranch
