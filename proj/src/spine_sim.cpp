#include "critbranch/spine_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "critbranch/error.hpp"

namespace critbranch {
namespace {

double dot_u(const Vector& u, std::span<const int> kappa) {
  double s = 0.0;
  for (std::size_t j = 0; j < kappa.size(); ++j) s += u[static_cast<Eigen::Index>(j)] * kappa[j];
  return s;
}

std::int64_t total_of(const Population& z) {
  std::int64_t s = 0;
  for (auto x : z) s += x;
  return s;
}

// Law of the summed offspring of every individual in z.
CountLaw offspring_sum_law(const BranchingModel& model, const Population& z, std::size_t max_states) {
  const int d = model.dim();
  CountLaw dist{{Population(d, 0), 1.0}};
  for (int l = 0; l < d; ++l) {
    for (std::int64_t c = 0; c < z[l]; ++c) {
      CountLaw next;
      for (const auto& [state, p] : dist) {
        for (const auto& atom : model.law(l).atoms) {
          if (atom.prob == 0.0) continue;
          Population s = state;
          for (int j = 0; j < d; ++j) s[j] += atom.counts[j];
          next[s] += p * atom.prob;
        }
      }
      if (next.size() > max_states) throw EnumerationTooLarge("offspring convolution exceeds state guard");
      dist = std::move(next);
    }
  }
  return dist;
}

}  // namespace

SizeBiasedLaw size_biased_law(const BranchingModel& model, const SpectralData& spectral, int type,
                              bool allow_noncritical) {
  require_critical(spectral, allow_noncritical);
  if (type < 0 || type >= model.dim()) throw std::out_of_range("size_biased_law: invalid type");
  SizeBiasedLaw out;
  out.type = type;
  const double ui = spectral.u[type];
  for (const auto& atom : model.law(type).atoms) {
    const double w = dot_u(spectral.u, atom.counts) * atom.prob / ui;
    if (w <= 0.0) continue;
    out.atoms.push_back({atom.counts, w});
    out.normalizer += w;
  }
  if (out.atoms.empty()) throw ModelError("size-biased law is empty: type has no offspring");
  double acc = 0.0;
  for (auto& atom : out.atoms) {
    atom.prob /= out.normalizer;
    acc += atom.prob;
    out.cumulative.push_back(acc);
  }
  out.cumulative.back() = 1.0;
  return out;
}

RetroChain retro_matrix(const SpectralData& spectral, const Matrix& mean) {
  const Eigen::Index d = mean.rows();
  RetroChain chain{Matrix(d, d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) chain.P(i, j) = mean(i, j) * spectral.u[j] / spectral.u[i];
  }
  return chain;
}

SuccessorChoice spine_successor(std::span<const int> kappa, const Vector& u, Rng& rng) {
  const double total = dot_u(u, kappa);
  if (!(total > 0.0)) throw std::invalid_argument("spine_successor: empty offspring");
  double r = uniform01(rng) * total;
  int offset = 0;
  int last_type = -1;
  for (std::size_t j = 0; j < kappa.size(); ++j) {
    if (kappa[j] == 0) continue;
    const double uj = u[static_cast<Eigen::Index>(j)];
    const double block = kappa[j] * uj;
    last_type = static_cast<int>(j);
    if (r < block) {
      const int rank = std::min(kappa[j] - 1, static_cast<int>(r / uj));
      return {offset + rank, static_cast<int>(j)};
    }
    r -= block;
    offset += kappa[j];
  }
  // Rounding pushed r past the last block: take its last child.
  return {offset - 1, last_type};
}

SpineSampler::SpineSampler(const BranchingModel& model, const SpectralData& spectral, bool allow_noncritical)
    : model_(&model), u_(spectral.u) {
  for (int i = 0; i < model.dim(); ++i) laws_.push_back(size_biased_law(model, spectral, i, allow_noncritical));
}

const Counts& SpineSampler::draw_trunk_offspring(int type, Rng& rng) const {
  const auto& law = laws_[type];
  const double r = uniform01(rng);
  auto it = std::upper_bound(law.cumulative.begin(), law.cumulative.end(), r);
  const auto idx = std::min<std::ptrdiff_t>(it - law.cumulative.begin(),
                                            static_cast<std::ptrdiff_t>(law.atoms.size()) - 1);
  return law.atoms[static_cast<std::size_t>(idx)].counts;
}

SpineRecord SpineSampler::simulate(int root_type, int n, Rng& rng, const SimulationCaps& caps) const {
  if (n < 0) throw std::invalid_argument("simulate_spine: n < 0");
  const int d = model_->dim();
  SpineRecord rec;
  rec.generations.reserve(static_cast<std::size_t>(n) + 1);
  SpineGeneration g0;
  g0.trunk_type = root_type;
  g0.off_spine = Population(d, 0);
  g0.total = unit_population(d, root_type);
  rec.generations.push_back(std::move(g0));
  for (int k = 0; k < n; ++k) {
    SpineGeneration& cur = rec.generations.back();
    const Counts& kappa = draw_trunk_offspring(cur.trunk_type, rng);
    const SuccessorChoice succ = spine_successor(kappa, u_, rng);
    cur.trunk_offspring = kappa;
    cur.successor_child = succ.child_index;

    SpineGeneration next;
    next.trunk_type = succ.type;
    next.off_spine = step(*model_, cur.off_spine, rng);
    for (int j = 0; j < d; ++j) next.off_spine[j] += kappa[j];
    next.off_spine[succ.type] -= 1;
    next.total = next.off_spine;
    next.total[succ.type] += 1;
    if (total_of(next.total) > caps.max_population) throw CapExceeded("population cap exceeded");
    rec.generations.push_back(std::move(next));
  }
  return rec;
}

SpineTree SpineSampler::simulate_tree(int root_type, int n, Rng& rng, const SimulationCaps& caps) const {
  if (n < 0) throw std::invalid_argument("simulate_spine_tree: n < 0");
  const int d = model_->dim();
  SpineTree out;
  out.tree.dim = d;
  out.tree.start = unit_population(d, root_type);
  out.tree.generations.resize(static_cast<std::size_t>(n) + 1);
  out.tree.generations[0].type.push_back(root_type);
  out.tree.generations[0].parent.push_back(-1);
  out.trunk.assign(static_cast<std::size_t>(n) + 1, 0);
  std::int64_t nodes = 1;
  for (int k = 0; k < n; ++k) {
    const auto& prev = out.tree.generations[k];
    auto& cur = out.tree.generations[k + 1];
    for (std::size_t x = 0; x < prev.size(); ++x) {
      const int t = prev.type[x];
      const bool on_trunk = static_cast<std::int32_t>(x) == out.trunk[k];
      const Counts& kappa = on_trunk ? draw_trunk_offspring(t, rng)
                                     : model_->law(t).atoms[sample_atom(*model_, t, rng)].counts;
      if (on_trunk) {
        const SuccessorChoice succ = spine_successor(kappa, u_, rng);
        out.trunk[k + 1] = static_cast<std::int32_t>(cur.size()) + succ.child_index;
      }
      for (int j = 0; j < d; ++j) {
        for (int c = 0; c < kappa[j]; ++c) {
          cur.type.push_back(j);
          cur.parent.push_back(static_cast<std::int32_t>(x));
        }
      }
    }
    nodes += static_cast<std::int64_t>(cur.size());
    if (nodes > caps.max_population) throw CapExceeded("population cap exceeded");
  }
  return out;
}

std::vector<int> SpineSampler::trunk_path(int root_type, int n, Rng& rng) const {
  std::vector<int> path;
  path.reserve(static_cast<std::size_t>(n) + 1);
  path.push_back(root_type);
  for (int k = 0; k < n; ++k) {
    const Counts& kappa = draw_trunk_offspring(path.back(), rng);
    path.push_back(spine_successor(kappa, u_, rng).type);
  }
  return path;
}

SpineRecord simulate_spine(const BranchingModel& model, const SpectralData& spectral, int root_type, int n,
                           Rng& rng, const SimulationCaps& caps) {
  return SpineSampler(model, spectral).simulate(root_type, n, rng, caps);
}

CountLaw forward_exact_law(const BranchingModel& model, const Population& start, int n, std::size_t max_states) {
  if (n < 0) throw std::invalid_argument("forward_exact_law: n < 0");
  CountLaw law{{start, 1.0}};
  for (int k = 0; k < n; ++k) {
    CountLaw next;
    for (const auto& [z, p] : law) {
      for (const auto& [z2, q] : offspring_sum_law(model, z, max_states)) next[z2] += p * q;
      if (next.size() > max_states) throw EnumerationTooLarge("state space exceeds guard");
    }
    law = std::move(next);
  }
  return law;
}

CountLaw hhat_exact_law(const BranchingModel& model, const SpectralData& spectral, int root_type, int n,
                        std::size_t max_states) {
  require_critical(spectral);
  const CountLaw forward = forward_exact_law(model, unit_population(model.dim(), root_type), n, max_states);
  CountLaw out;
  const double ui = spectral.u[root_type];
  for (const auto& [z, p] : forward) {
    const double w = spectral.u.dot(to_vector(z)) / ui;
    if (w > 0.0) out[z] = p * w;
  }
  return out;
}

ManyToOneResult many_to_one(const BranchingModel& model, const SpectralData& spectral, int root_type, int n,
                            const PathFunctional& functional, std::int64_t max_evaluations) {
  require_critical(spectral);
  if (n < 0) throw std::invalid_argument("many_to_one: n < 0");
  const int d = model.dim();
  std::int64_t evaluations = 0;
  std::vector<int> path{root_type};

  // Expected sum over generation-n descendants, one offspring atom at a time.
  std::function<double(int, int)> population_side = [&](int type, int depth) -> double {
    if (++evaluations > max_evaluations) throw EnumerationTooLarge("many_to_one: evaluation guard hit");
    if (depth == n) return functional(path) * spectral.u[type];
    double acc = 0.0;
    for (const auto& atom : model.law(type).atoms) {
      if (atom.prob == 0.0) continue;
      for (int j = 0; j < d; ++j) {
        if (atom.counts[j] == 0) continue;
        path.push_back(j);
        acc += atom.prob * atom.counts[j] * population_side(j, depth + 1);
        path.pop_back();
      }
    }
    return acc;
  };

  const Matrix P = retro_matrix(spectral, model.mean()).P;
  std::function<double(int, int, double)> chain_side = [&](int type, int depth, double weight) -> double {
    if (++evaluations > max_evaluations) throw EnumerationTooLarge("many_to_one: evaluation guard hit");
    if (depth == n) return weight * functional(path);
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      if (P(type, j) == 0.0) continue;
      path.push_back(j);
      acc += chain_side(j, depth + 1, weight * P(type, j));
      path.pop_back();
    }
    return acc;
  };

  ManyToOneResult out;
  out.lhs = population_side(root_type, 0) / spectral.u[root_type];
  path.assign(1, root_type);
  out.rhs = chain_side(root_type, 0, 1.0);
  return out;
}

}  // namespace critbranch
