#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "critbranch/error.hpp"
#include "critbranch/spine_sim.hpp"
#include "support.hpp"

using namespace critbranch;
using namespace testing_support;

TEST(SpineLaw, SizeBiasedAtoms) {
  const auto a = model_a();
  const auto sa = analyze(a);
  const auto law = size_biased_law(a, sa, 0);
  ASSERT_EQ(law.atoms.size(), 1u);
  EXPECT_EQ(law.atoms[0].counts, (Counts{2}));
  EXPECT_NEAR(law.normalizer, 1.0, 1e-12);

  const auto c = model_c();
  const auto sc = analyze(c);
  for (int i = 0; i < 2; ++i) {
    const auto l = size_biased_law(c, sc, i);
    EXPECT_NEAR(l.normalizer, 1.0, 1e-10);
    double total = 0.0;
    for (const auto& atom : l.atoms) total += atom.prob;
    EXPECT_NEAR(total, 1.0, 1e-15);
  }
}

TEST(SpineLaw, RequiresCriticality) {
  const auto sub = load_model(R"({"d": 1, "offspring": [[{"counts": [0], "prob": 0.6}, {"counts": [2], "prob": 0.4}]]})");
  const auto sd = analyze(sub);
  EXPECT_THROW(size_biased_law(sub, sd, 0), CriticalityError);
  EXPECT_NO_THROW(size_biased_law(sub, sd, 0, true));
}

TEST(RetroChain, StochasticWithStationaryAlpha) {
  for (const auto& model : {model_a(), model_b(), model_c()}) {
    const auto sd = analyze(model);
    const Matrix P = retro_matrix(sd, model.mean()).P;
    EXPECT_LT((P.rowwise().sum() - Vector::Ones(model.dim())).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((P.transpose() * sd.alpha - sd.alpha).cwiseAbs().maxCoeff(), 1e-10);
  }
  const auto sd = analyze(model_b());
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  EXPECT_LT((retro_matrix(sd, model_b().mean()).P - swap).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Successor, TypeAndRankFrequencies) {
  const Counts kappa{1, 3};
  const Vector u = (Vector(2) << 2.0, 1.0).finished();
  Rng rng(21);
  std::vector<double> obs(4, 0.0);
  for (int i = 0; i < 50000; ++i) {
    const auto s = spine_successor(kappa, u, rng);
    ASSERT_EQ(s.type, s.child_index == 0 ? 0 : 1);
    obs[static_cast<std::size_t>(s.child_index)] += 1.0;
  }
  // weights 2 : 1 : 1 : 1
  EXPECT_GT(chi_square(obs, std::vector<double>{0.4, 0.2, 0.2, 0.2}).p_value, 0.001);
  EXPECT_THROW(spine_successor(Counts{0, 0}, u, rng), std::invalid_argument);
}

TEST(Spine, RecordInvariants) {
  const auto c = model_c();
  const auto sd = analyze(c);
  const SpineSampler sampler(c, sd);
  Rng rng(22);
  for (int rep = 0; rep < 50; ++rep) {
    const auto rec = sampler.simulate(0, 30, rng);
    ASSERT_EQ(rec.generations.size(), 31u);
    for (std::size_t k = 0; k < rec.generations.size(); ++k) {
      const auto& g = rec.generations[k];
      Population expected = g.off_spine;
      expected[g.trunk_type] += 1;
      EXPECT_EQ(g.total, expected);
      if (k + 1 < rec.generations.size()) {
        ASSERT_EQ(g.trunk_offspring.size(), 2u);
        EXPECT_GT(g.trunk_offspring[rec.generations[k + 1].trunk_type], 0);
      }
    }
  }
  const auto root_only = sampler.simulate(1, 0, rng);
  ASSERT_EQ(root_only.generations.size(), 1u);
  EXPECT_EQ(root_only.generations[0].total, (Population{0, 1}));
}

TEST(Spine, TreeTrunkIsALineage) {
  const auto c = model_c();
  const auto sd = analyze(c);
  const SpineSampler sampler(c, sd);
  Rng rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const auto st = sampler.simulate_tree(0, 25, rng);
    for (int k = 1; k <= 25; ++k) {
      EXPECT_EQ(st.tree.generations[k].parent[st.trunk[k]], st.trunk[k - 1]);
    }
    EXPECT_TRUE(st.tree.alive_at(25));
  }
}

TEST(ExactLaw, ForwardMatchesEnumeration) {
  for (const auto& [model, horizon] : {std::pair{model_a(), 3}, std::pair{model_c(), 2}}) {
    for (int n = 0; n <= horizon; ++n) {
      const auto oracle = brute_force_law(model, 0, n);
      const auto law = forward_exact_law(model, unit_population(model.dim(), 0), n);
      ASSERT_EQ(law.size(), oracle.size());
      for (const auto& [z, p] : oracle) EXPECT_NEAR(law.at(z), p, 1e-15);
    }
  }
}

TEST(ExactLaw, HhatIsReweightedAndNormalized) {
  const auto c = model_c();
  const auto sd = analyze(c);
  const auto oracle = brute_force_law(c, 1, 2);
  const auto law = hhat_exact_law(c, sd, 1, 2);
  double mass = 0.0;
  for (const auto& [z, p] : law) {
    EXPECT_NEAR(p, oracle.at(z) * (sd.u.dot(to_vector(z)) / sd.u[1]), 1e-12);
    mass += p;
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_EQ(law.count(Population{0, 0}), 0u);
}

TEST(ExactLaw, GuardTrips) {
  EXPECT_THROW(forward_exact_law(model_c(), Population{1, 0}, 6, 10), EnumerationTooLarge);
}

TEST(Spine, RealizesHhatLaw) {
  const auto c = model_c();
  const auto sd = analyze(c);
  const auto exact = hhat_exact_law(c, sd, 0, 2);
  std::map<Population, std::size_t> index;
  std::vector<double> p;
  for (const auto& [z, q] : exact) {
    index[z] = p.size();
    p.push_back(q);
  }
  const SpineSampler sampler(c, sd);
  std::vector<double> counts_obs(p.size(), 0.0), tree_obs(p.size(), 0.0);
  Rng rng(24);
  for (int i = 0; i < 50000; ++i) {
    counts_obs[index.at(sampler.simulate(0, 2, rng).generations.back().total)] += 1.0;
    tree_obs[index.at(sampler.simulate_tree(0, 2, rng).tree.counts(2))] += 1.0;
  }
  EXPECT_GT(chi_square(counts_obs, p).p_value, 0.001);
  EXPECT_GT(chi_square(tree_obs, p).p_value, 0.001);
}

TEST(Spine, TrunkPathFollowsRetroChain) {
  const auto c = model_c();
  const auto sd = analyze(c);
  const Matrix P = retro_matrix(sd, c.mean()).P;
  const SpineSampler sampler(c, sd);
  Rng rng(25);
  const auto path = sampler.trunk_path(0, 200000, rng);
  Matrix counts = Matrix::Zero(2, 2);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) counts(path[k], path[k + 1]) += 1.0;
  for (int i = 0; i < 2; ++i) {
    const double row = counts.row(i).sum();
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt(P(i, j) * (1 - P(i, j)) / row);
      EXPECT_NEAR(counts(i, j) / row, P(i, j), 5.0 * se + 1e-12);
    }
  }
}

namespace {

// lhs of the many-to-one identity from explicit genealogies.
double genealogy_lhs(const BranchingModel& model, const Vector& u, int root, int n, const PathFunctional& f) {
  double acc = 0.0;
  enumerate_genealogies(model, {{root, {root}}}, n, 1.0, [&](const std::vector<Individual>& gen, double p) {
    for (const auto& x : gen) acc += p * f(x.path) * u[x.type];
  });
  return acc / u[root];
}

}  // namespace

TEST(ManyToOne, MatchesGenealogyEnumerationAndMatrixPowers) {
  std::mt19937_64 rng(26);
  for (const auto& [model, horizon] : {std::pair{model_a(), 3}, std::pair{model_b(), 3}, std::pair{model_c(), 2}}) {
    const auto sd = analyze(model);
    const int d = model.dim();
    const Matrix P = retro_matrix(sd, model.mean()).P;
    for (int n = 1; n <= horizon; ++n) {
      for (int trial = 0; trial < 5; ++trial) {
        std::map<std::vector<int>, double> weights;
        const PathFunctional f = [&](std::span<const int> path) {
          std::vector<int> key(path.begin(), path.end());
          auto it = weights.find(key);
          if (it == weights.end()) it = weights.emplace(key, static_cast<double>(rng() % 1000) / 1000.0).first;
          return it->second;
        };
        for (int root = 0; root < d; ++root) {
          const auto res = many_to_one(model, sd, root, n, f);
          EXPECT_NEAR(res.lhs, res.rhs, 1e-12);
          EXPECT_NEAR(res.lhs, genealogy_lhs(model, sd.u, root, n, f), 1e-12);
        }
      }
      // endpoint indicator: rhs is a matrix power entry
      Matrix Pn = Matrix::Identity(d, d);
      for (int k = 0; k < n; ++k) Pn = Pn * P;
      for (int root = 0; root < d; ++root) {
        for (int j = 0; j < d; ++j) {
          const auto res = many_to_one(model, sd, root, n,
                                       [j](std::span<const int> path) { return path.back() == j ? 1.0 : 0.0; });
          EXPECT_NEAR(res.rhs, Pn(root, j), 1e-12);
        }
      }
    }
  }
}

TEST(ManyToOne, EvaluationGuard) {
  const auto c = model_c();
  const auto sd = analyze(c);
  EXPECT_THROW(many_to_one(c, sd, 0, 12, [](std::span<const int>) { return 1.0; }, 100), EnumerationTooLarge);
}
