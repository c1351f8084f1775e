#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "critbranch/model.hpp"

namespace testing_support {

using critbranch::BranchingModel;
using critbranch::Population;

inline const char* kModelA = R"({"d": 1, "offspring": [[{"counts": [0], "prob": "1/2"}, {"counts": [2], "prob": "1/2"}]]})";

inline const char* kModelB = R"({"d": 2, "offspring": [
  [{"counts": [0, 0], "prob": "1/2"}, {"counts": [0, 2], "prob": "1/2"}],
  [{"counts": [0, 0], "prob": "1/2"}, {"counts": [2, 0], "prob": "1/2"}]]})";

inline const char* kModelC = R"({"d": 2, "offspring": [
  [{"counts": [1, 1], "prob": "1/2"}, {"counts": [0, 0], "prob": "1/2"}],
  [{"counts": [1, 3], "prob": "1/4"}, {"counts": [0, 0], "prob": "3/4"}]]})";

inline BranchingModel model_a() { return critbranch::load_model(kModelA); }
inline BranchingModel model_b() { return critbranch::load_model(kModelB); }
inline BranchingModel model_c() { return critbranch::load_model(kModelC); }

/// Every individual of a generation with the type path from the root.
struct Individual {
  int type;
  std::vector<int> path;
};

/// Walks every genealogy up to generation n by choosing an offspring atom for
/// each individual separately (cartesian product), calling visit(generation_n, probability).
inline void enumerate_genealogies(const BranchingModel& model, const std::vector<Individual>& gen, int remaining,
                                  double prob,
                                  const std::function<void(const std::vector<Individual>&, double)>& visit) {
  if (remaining == 0) {
    visit(gen, prob);
    return;
  }
  std::vector<Individual> next;
  std::function<void(std::size_t, double)> choose = [&](std::size_t idx, double p) {
    if (idx == gen.size()) {
      enumerate_genealogies(model, next, remaining - 1, p, visit);
      return;
    }
    const std::size_t mark = next.size();
    for (const auto& atom : model.law(gen[idx].type).atoms) {
      for (int j = 0; j < model.dim(); ++j) {
        for (int c = 0; c < atom.counts[j]; ++c) {
          auto path = gen[idx].path;
          path.push_back(j);
          next.push_back({j, std::move(path)});
        }
      }
      choose(idx + 1, p * atom.prob);
      next.resize(mark);
    }
  };
  choose(0, prob);
}

/// Exact law of Z(n) from a single root, by genealogy enumeration.
inline std::map<Population, double> brute_force_law(const BranchingModel& model, int root, int n) {
  std::map<Population, double> law;
  enumerate_genealogies(model, {{root, {root}}}, n, 1.0, [&](const std::vector<Individual>& gen, double p) {
    Population z(model.dim(), 0);
    for (const auto& x : gen) ++z[x.type];
    law[z] += p;
  });
  return law;
}

}  // namespace testing_support
