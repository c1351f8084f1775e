#include "critbranch/forward_sim.hpp"

#include <algorithm>
#include <stdexcept>

#include "critbranch/error.hpp"

namespace critbranch {
namespace {

void check_generation(const FamilyTree& tree, int n) {
  if (n < 0 || n > tree.horizon()) throw std::out_of_range("generation out of range");
}

std::int64_t sum_of(std::span<const std::int64_t> z) {
  std::int64_t s = 0;
  for (auto x : z) s += x;
  return s;
}

// Number of generation-n descendants of every individual in generation k.
std::vector<std::int64_t> descendants_at(const FamilyTree& tree, int k, int n) {
  std::vector<std::int64_t> desc(tree.generations[n].size(), 1);
  for (int g = n; g > k; --g) {
    const auto& gen = tree.generations[g];
    std::vector<std::int64_t> up(tree.generations[g - 1].size(), 0);
    for (std::size_t x = 0; x < gen.size(); ++x) up[gen.parent[x]] += desc[x];
    desc = std::move(up);
  }
  return desc;
}

}  // namespace

Population FamilyTree::counts(int generation) const {
  Population z(dim, 0);
  for (int t : generations.at(generation).type) ++z[t];
  return z;
}

std::int64_t FamilyTree::total_nodes() const {
  std::int64_t total = 0;
  for (const auto& g : generations) total += static_cast<std::int64_t>(g.size());
  return total;
}

int sample_atom(const BranchingModel& model, int type, Rng& rng) {
  const auto cum = model.cumulative(type);
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cum.begin(), static_cast<std::ptrdiff_t>(cum.size()) - 1));
}

Population step(const BranchingModel& model, std::span<const std::int64_t> z, Rng& rng) {
  const int d = model.dim();
  if (static_cast<int>(z.size()) != d) throw std::invalid_argument("step: dimension mismatch");
  Population next(d, 0);
  for (int l = 0; l < d; ++l) {
    if (z[l] < 0) throw std::invalid_argument("step: negative population");
    std::int64_t remaining = z[l];
    if (remaining == 0) continue;
    const auto& atoms = model.law(l).atoms;
    double mass_left = 1.0;
    for (std::size_t a = 0; a < atoms.size() && remaining > 0; ++a) {
      std::int64_t k;
      if (a + 1 == atoms.size()) {
        k = remaining;
      } else {
        const double p = mass_left > 0.0 ? std::clamp(atoms[a].prob / mass_left, 0.0, 1.0) : 1.0;
        if (remaining == 1) {
          k = uniform01(rng) < p ? 1 : 0;
        } else {
          k = std::binomial_distribution<std::int64_t>(remaining, p)(rng);
        }
      }
      mass_left -= atoms[a].prob;
      remaining -= k;
      if (k == 0) continue;
      for (int j = 0; j < d; ++j) next[j] += k * atoms[a].counts[j];
    }
  }
  return next;
}

Trajectory simulate_counts(const BranchingModel& model, const Population& start, int n, Rng& rng,
                           const SimulationCaps& caps) {
  if (n < 0) throw std::invalid_argument("simulate_counts: n < 0");
  Trajectory t;
  t.counts.reserve(static_cast<std::size_t>(n) + 1);
  t.counts.push_back(start);
  for (int k = 1; k <= n; ++k) {
    const Population& prev = t.counts.back();
    if (sum_of(prev) == 0) {
      t.counts.push_back(prev);
      continue;
    }
    Population next = step(model, prev, rng);
    if (sum_of(next) > caps.max_population) throw CapExceeded("population cap exceeded");
    t.counts.push_back(std::move(next));
  }
  return t;
}

FamilyTree simulate_tree(const BranchingModel& model, const Population& start, int n, Rng& rng,
                         const SimulationCaps& caps) {
  if (n < 0) throw std::invalid_argument("simulate_tree: n < 0");
  const int d = model.dim();
  if (static_cast<int>(start.size()) != d) throw std::invalid_argument("simulate_tree: dimension mismatch");
  FamilyTree tree;
  tree.dim = d;
  tree.start = start;
  tree.generations.resize(static_cast<std::size_t>(n) + 1);
  auto& roots = tree.generations[0];
  for (int i = 0; i < d; ++i) {
    for (std::int64_t c = 0; c < start[i]; ++c) {
      roots.type.push_back(i);
      roots.parent.push_back(-1);
    }
  }
  std::int64_t nodes = static_cast<std::int64_t>(roots.size());
  if (nodes > caps.max_population) throw CapExceeded("population cap exceeded");
  for (int k = 1; k <= n; ++k) {
    const auto& prev = tree.generations[k - 1];
    auto& cur = tree.generations[k];
    for (std::size_t x = 0; x < prev.size(); ++x) {
      const int t = prev.type[x];
      const auto& counts = model.law(t).atoms[sample_atom(model, t, rng)].counts;
      for (int j = 0; j < d; ++j) {
        for (int c = 0; c < counts[j]; ++c) {
          cur.type.push_back(j);
          cur.parent.push_back(static_cast<std::int32_t>(x));
        }
      }
    }
    nodes += static_cast<std::int64_t>(cur.size());
    if (nodes > caps.max_population) throw CapExceeded("population cap exceeded");
    if (cur.size() == 0) break;
  }
  return tree;
}

FamilyTree simulate_tree(const BranchingModel& model, int root_type, int n, Rng& rng,
                         const SimulationCaps& caps) {
  return simulate_tree(model, unit_population(model.dim(), root_type), n, rng, caps);
}

Conditioned<FamilyTree> condition_on_survival(const BranchingModel& model, const Population& start, int n,
                                              Rng& rng, std::int64_t max_attempts,
                                              const SimulationCaps& caps) {
  if (max_attempts < 1) throw std::invalid_argument("condition_on_survival: max_attempts < 1");
  for (std::int64_t a = 1; a <= max_attempts; ++a) {
    FamilyTree tree = simulate_tree(model, start, n, rng, caps);
    if (tree.alive_at(n)) return {std::move(tree), a};
  }
  throw AttemptsExhausted("no surviving tree in " + std::to_string(max_attempts) + " attempts");
}

Conditioned<Trajectory> condition_on_survival_counts(const BranchingModel& model, const Population& start,
                                                     int n, Rng& rng, std::int64_t max_attempts,
                                                     const SimulationCaps& caps) {
  if (max_attempts < 1) throw std::invalid_argument("condition_on_survival_counts: max_attempts < 1");
  for (std::int64_t a = 1; a <= max_attempts; ++a) {
    Trajectory t = simulate_counts(model, start, n, rng, caps);
    if (sum_of(t.counts.back()) > 0) return {std::move(t), a};
  }
  throw AttemptsExhausted("no surviving trajectory in " + std::to_string(max_attempts) + " attempts");
}

std::size_t ancestor(const FamilyTree& tree, int n, std::size_t x, int m) {
  check_generation(tree, n);
  if (m < 0 || m > n) throw std::out_of_range("ancestor: m outside [0, n]");
  if (x >= tree.generations[n].size()) throw std::out_of_range("ancestor: invalid individual");
  for (int g = n; g > m; --g) x = static_cast<std::size_t>(tree.generations[g].parent[x]);
  return x;
}

Vector empirical_ancestral(const FamilyTree& tree, int n, int m) {
  check_generation(tree, n);
  if (m < 0 || m > n) throw std::out_of_range("empirical_ancestral: m outside [0, n]");
  const auto& last = tree.generations[n];
  if (last.size() == 0) throw std::domain_error("empirical_ancestral: generation n is empty");
  const int k = n - m;
  const auto desc = descendants_at(tree, k, n);
  Vector a = Vector::Zero(tree.dim);
  for (std::size_t x = 0; x < desc.size(); ++x) a[tree.generations[k].type[x]] += static_cast<double>(desc[x]);
  return a / static_cast<double>(last.size());
}

Vector lineage_occupation(const FamilyTree& tree, int n, std::size_t x) {
  check_generation(tree, n);
  if (n == 0) throw std::domain_error("lineage_occupation: n must be >= 1");
  if (x >= tree.generations[n].size()) throw std::out_of_range("lineage_occupation: invalid individual");
  Vector l = Vector::Zero(tree.dim);
  for (int g = n; g > 0; --g) {
    x = static_cast<std::size_t>(tree.generations[g].parent[x]);
    l[tree.generations[g - 1].type[x]] += 1.0;
  }
  return l / static_cast<double>(n);
}

Matrix lineage_occupations(const FamilyTree& tree, int n) {
  check_generation(tree, n);
  if (n == 0) throw std::domain_error("lineage_occupations: n must be >= 1");
  const std::size_t size = tree.generations[n].size();
  Matrix occ = Matrix::Zero(static_cast<Eigen::Index>(size), tree.dim);
  std::vector<std::int32_t> cur(size);
  for (std::size_t x = 0; x < size; ++x) cur[x] = static_cast<std::int32_t>(x);
  for (int g = n; g > 0; --g) {
    const auto& gen = tree.generations[g];
    const auto& up = tree.generations[g - 1];
    for (std::size_t x = 0; x < size; ++x) {
      cur[x] = gen.parent[cur[x]];
      occ(static_cast<Eigen::Index>(x), up.type[cur[x]]) += 1.0;
    }
  }
  return occ / static_cast<double>(n);
}

Vector mean_lineage_occupation(const FamilyTree& tree, int n) {
  const Matrix occ = lineage_occupations(tree, n);
  if (occ.rows() == 0) throw std::domain_error("mean_lineage_occupation: generation n is empty");
  return occ.colwise().sum().transpose() / static_cast<double>(occ.rows());
}

Vector mean_ancestral_profile(const FamilyTree& tree, int n) {
  check_generation(tree, n);
  if (n == 0) throw std::domain_error("mean_ancestral_profile: n must be >= 1");
  const double population = static_cast<double>(tree.generations[n].size());
  if (population == 0.0) throw std::domain_error("mean_ancestral_profile: generation n is empty");
  // One backward sweep of descendant counts; A^(n-k)(n) is read off at each k.
  Vector acc = Vector::Zero(tree.dim);
  std::vector<std::int64_t> desc(tree.generations[n].size(), 1);
  for (int g = n; g > 0; --g) {
    const auto& gen = tree.generations[g];
    const auto& up_gen = tree.generations[g - 1];
    std::vector<std::int64_t> up(up_gen.size(), 0);
    for (std::size_t x = 0; x < gen.size(); ++x) up[gen.parent[x]] += desc[x];
    Vector a = Vector::Zero(tree.dim);
    for (std::size_t x = 0; x < up.size(); ++x) a[up_gen.type[x]] += static_cast<double>(up[x]);
    acc += a / population;
    desc = std::move(up);
  }
  return acc / static_cast<double>(n);
}

double deviant_fraction(const FamilyTree& tree, int n, double rho, const Vector& alpha) {
  const Matrix occ = lineage_occupations(tree, n);
  if (occ.rows() == 0) throw std::domain_error("deviant_fraction: generation n is empty");
  std::size_t hits = 0;
  for (Eigen::Index x = 0; x < occ.rows(); ++x) {
    const double tv = 0.5 * (occ.row(x).transpose() - alpha).cwiseAbs().sum();
    if (tv >= rho) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(occ.rows());
}

bool has_deviant_lineage(const FamilyTree& tree, int n, double rho, const Vector& alpha) {
  return deviant_fraction(tree, n, rho, alpha) > 0.0;
}

}  // namespace critbranch
