#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "critbranch/forward_sim.hpp"
#include "critbranch/model.hpp"
#include "critbranch/spectral.hpp"
#include "critbranch/stats.hpp"

namespace critbranch {

/// Trunk offspring law p^_i(kappa) = <u, kappa> p_i(kappa) / u_i. Atoms with
/// <u, kappa> = 0 are dropped, so the trunk never dies.
struct SizeBiasedLaw {
  int type = 0;
  std::vector<OffspringAtom> atoms;
  std::vector<double> cumulative;
  /// sum_kappa <u, kappa> p_i(kappa) / u_i before renormalization (1 at criticality).
  double normalizer = 0.0;
};

SizeBiasedLaw size_biased_law(const BranchingModel& model, const SpectralData& spectral, int type,
                              bool allow_noncritical = false);

/// Retrospective mutation chain P_ij = m_ij u_j / u_i.
struct RetroChain {
  Matrix P;
};

RetroChain retro_matrix(const SpectralData& spectral, const Matrix& mean);

struct SuccessorChoice {
  int child_index = -1;  ///< position among the siblings, type-major birth order
  int type = -1;
};

/// Picks the trunk successor among the children described by kappa: type j
/// with probability kappa_j u_j / <kappa, u>, uniform among same-type children.
SuccessorChoice spine_successor(std::span<const int> kappa, const Vector& u, Rng& rng);

struct SpineGeneration {
  int trunk_type = 0;
  /// Individuals of this generation other than the trunk.
  Population off_spine;
  /// Z(k) = off_spine + e_{trunk_type}.
  Population total;
  /// Trunk offspring and successor; empty / -1 in the last generation.
  Counts trunk_offspring;
  int successor_child = -1;
};

struct SpineRecord {
  std::vector<SpineGeneration> generations;
};

/// Full genealogy of a size-biased tree; trunk[k] indexes the trunk
/// individual within generation k.
struct SpineTree {
  FamilyTree tree;
  std::vector<std::int32_t> trunk;
};

/// Size-biased tree sampler. Precomputes the trunk laws once; cheap to copy.
class SpineSampler {
 public:
  SpineSampler(const BranchingModel& model, const SpectralData& spectral, bool allow_noncritical = false);

  const SizeBiasedLaw& trunk_law(int type) const { return laws_.at(type); }

  /// Counts-level simulation: bushes are tracked as aggregate counts.
  SpineRecord simulate(int root_type, int n, Rng& rng, const SimulationCaps& caps = {}) const;

  /// Genealogy-level simulation with individual parent links.
  SpineTree simulate_tree(int root_type, int n, Rng& rng, const SimulationCaps& caps = {}) const;

  /// Trunk types sigma(0..n) only (the retrospective chain realized through
  /// size-biased offspring and successor selection).
  std::vector<int> trunk_path(int root_type, int n, Rng& rng) const;

 private:
  const Counts& draw_trunk_offspring(int type, Rng& rng) const;

  const BranchingModel* model_;
  Vector u_;
  std::vector<SizeBiasedLaw> laws_;
};

SpineRecord simulate_spine(const BranchingModel& model, const SpectralData& spectral, int root_type, int n,
                           Rng& rng, const SimulationCaps& caps = {});

/// Exact law of a counts vector, keyed by Z.
using CountLaw = std::map<Population, double>;

/// Exact law of Z(n) under P_start by propagating the state distribution.
/// Throws EnumerationTooLarge beyond `max_states` reachable states.
CountLaw forward_exact_law(const BranchingModel& model, const Population& start, int n,
                           std::size_t max_states = 200000);

/// Exact law of Z(n) under the h-transform P^_{e_i}: the forward law
/// reweighted by <u, Z(n)> / u_i.
CountLaw hhat_exact_law(const BranchingModel& model, const SpectralData& spectral, int root_type, int n,
                        std::size_t max_states = 200000);

/// Functional of a type path (sigma(x(0)), ..., sigma(x(n))).
using PathFunctional = std::function<double(std::span<const int>)>;

struct ManyToOneResult {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = u_i^{-1} E_{e_i}[ sum_{x in X_n} F(path of x) u_{sigma(x)} ] by exact
/// recursion over offspring atoms; rhs = E[F(trunk path)] by summation over
/// paths of the retrospective chain.
ManyToOneResult many_to_one(const BranchingModel& model, const SpectralData& spectral, int root_type, int n,
                            const PathFunctional& functional, std::int64_t max_evaluations = 10'000'000);

}  // namespace critbranch
