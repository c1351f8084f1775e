#include "critbranch/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/expint.hpp>

#include "critbranch/error.hpp"
#include "critbranch/forward_sim.hpp"
#include "critbranch/ldp.hpp"
#include "critbranch/limit_laws.hpp"
#include "critbranch/report.hpp"
#include "critbranch/spine_sim.hpp"
#include "critbranch/stats.hpp"

namespace critbranch {
namespace {

constexpr double kNoThreshold = std::numeric_limits<double>::quiet_NaN();

CheckRow below(std::string name, double statistic, double threshold) {
  return {std::move(name), statistic, threshold, statistic < threshold, true};
}

CheckRow above(std::string name, double statistic, double threshold) {
  return {std::move(name), statistic, threshold, statistic > threshold, true};
}

CheckRow info(std::string name, double statistic) { return {std::move(name), statistic, kNoThreshold, true, false}; }

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double u_mass(const Vector& u, const Population& z) {
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) s += u[static_cast<Eigen::Index>(j)] * static_cast<double>(z[j]);
  return s;
}

struct Resolved {
  int n;
  int m;
  std::size_t replicates;
  double t;
  double tolerance;
};

Resolved resolve(std::string_view suite, const VerifyConfig& c) {
  const SuiteDefaults d = suite_defaults(suite);
  Resolved r{c.n.value_or(d.n), c.m.value_or(d.m), c.replicates.value_or(d.replicates), c.t.value_or(d.t),
             c.tolerance.value_or(d.tolerance)};
  if (r.n < 0 || r.m < 0) throw std::invalid_argument("n and m must be nonnegative");
  if (!(r.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(r.t > 0.0)) throw std::invalid_argument("t must be positive");
  return r;
}

std::vector<CheckRow> suite_spectral(const BranchingModel& model, const SpectralData& sd, const Resolved& r) {
  const Matrix& M = model.mean();
  std::vector<CheckRow> rows;
  rows.push_back(below("lambda_minus_one", std::abs(sd.lambda - 1.0), r.tolerance));
  rows.push_back(below("right_residual", (M * sd.u - sd.u).lpNorm<Eigen::Infinity>(), r.tolerance));
  rows.push_back(below("left_residual", (M.transpose() * sd.v - sd.v).lpNorm<Eigen::Infinity>(), r.tolerance));
  rows.push_back(below("v_sum_minus_one", std::abs(sd.v.sum() - 1.0), r.tolerance));
  rows.push_back(below("uv_minus_one", std::abs(sd.u.dot(sd.v) - 1.0), r.tolerance));
  rows.push_back(above("min_eigenvector_entry", std::min(sd.u.minCoeff(), sd.v.minCoeff()), 0.0));
  rows.push_back(info("q_u", sd.q_u));
  for (Eigen::Index i = 0; i < sd.alpha.size(); ++i) rows.push_back(info("alpha_" + std::to_string(i + 1), sd.alpha[i]));
  return rows;
}

std::vector<CheckRow> suite_survival(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                     const VerifyConfig& c) {
  const double limit = survival_asymptote(sd, to_vector(unit_population(model.dim(), c.root_type)));
  const double scaled = r.n * (1.0 - extinction_by(model, r.n, c.root_type));
  return {info("n_survival", scaled), info("asymptote", limit),
          below("relative_error", std::abs(scaled / limit - 1.0), r.tolerance)};
}

struct LatticeDraw {
  double raw = 0.0;
  double smoothed = 0.0;
};

std::vector<CheckRow> ks_rows(const std::vector<LatticeDraw>& draws, const std::function<double(double)>& cdf,
                              double threshold) {
  std::vector<double> raw, smooth;
  for (const auto& d : draws) {
    raw.push_back(d.raw);
    smooth.push_back(d.smoothed);
  }
  double mean = 0.0;
  for (double x : raw) mean += x;
  mean /= static_cast<double>(std::max<std::size_t>(raw.size(), 1));
  return {below("ks_continuity_corrected", ks_statistic(smooth, cdf), threshold),
          info("ks_raw", ks_statistic(raw, cdf)), info("ks_critical_1pct", ks_critical_1pct(raw.size())),
          info("sample_mean", mean)};
}

std::vector<CheckRow> suite_entrance(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                     const VerifyConfig& c) {
  if (r.n < 1) throw std::invalid_argument("entrance: n must be >= 1");
  const double span = lattice_span(model, sd);
  const Population start = unit_population(model.dim(), c.root_type);
  const auto draws = mc_collect(
      [&](std::size_t, Rng& rng) {
        const auto cond = condition_on_survival_counts(model, start, r.n, rng, c.max_attempts);
        const double s = u_mass(sd.u, cond.value.counts.back());
        return LatticeDraw{s / r.n, (s - span * uniform01(rng)) / r.n};
      },
      r.replicates, StreamFamily(c.seed).child(3), c.workers);
  const ScalarLaw law = entrance_conditioned({sd.q_u, 1.0});
  auto rows = ks_rows(draws, [&](double y) { return law.cdf(y); }, r.tolerance);
  rows.push_back(info("limit_mean", law.mean()));
  return rows;
}

std::vector<CheckRow> suite_hhat_entrance(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                          const VerifyConfig& c) {
  if (r.n < 1) throw std::invalid_argument("hhat-entrance: n must be >= 1");
  const double span = lattice_span(model, sd);
  const SpineSampler sampler(model, sd);
  const auto draws = mc_collect(
      [&](std::size_t, Rng& rng) {
        const SpineRecord rec = sampler.simulate(c.root_type, r.n, rng);
        const double s = u_mass(sd.u, rec.generations.back().total);
        return LatticeDraw{s / r.n, (s - span * uniform01(rng)) / r.n};
      },
      r.replicates, StreamFamily(c.seed).child(4), c.workers);
  const ScalarLaw law = entrance_hhat({sd.q_u, 1.0});
  auto rows = ks_rows(draws, [&](double y) { return law.cdf(y); }, r.tolerance);
  rows.push_back(info("limit_mean", law.mean()));
  return rows;
}

std::vector<CheckRow> suite_spine_law(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                      const VerifyConfig& c) {
  const CountLaw exact = hhat_exact_law(model, sd, c.root_type, r.n);
  const SpineSampler sampler(model, sd);
  const auto draws = mc_collect(
      [&](std::size_t, Rng& rng) { return sampler.simulate(c.root_type, r.n, rng).generations.back().total; },
      r.replicates, StreamFamily(c.seed).child(5), c.workers);
  std::map<Population, std::size_t> index;
  std::vector<double> expected;
  double mass = 0.0;
  for (const auto& [z, p] : exact) {
    index.emplace(z, expected.size());
    expected.push_back(p);
    mass += p;
  }
  std::vector<double> observed(expected.size(), 0.0);
  std::size_t unexpected = 0;
  for (const auto& z : draws) {
    auto it = index.find(z);
    if (it == index.end()) {
      ++unexpected;
    } else {
      observed[it->second] += 1.0;
    }
  }
  for (double& p : expected) p /= mass;
  const ChiSquareResult chi = chi_square(observed, expected);
  return {below("exact_mass_minus_one", std::abs(mass - 1.0), 1e-12),
          below("states_outside_support", static_cast<double>(unexpected), 0.5),
          above("chi_square_p_value", chi.p_value, r.tolerance), info("chi_square_statistic", chi.statistic),
          info("chi_square_dof", chi.dof), info("support_size", static_cast<double>(expected.size()))};
}

std::vector<CheckRow> suite_many_to_one(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                        const VerifyConfig& c) {
  const int d = model.dim();
  const StreamFamily streams = StreamFamily(c.seed).child(6);
  const std::size_t functionals = r.replicates;
  std::vector<CheckRow> rows;
  for (int n = 1; n <= r.n; ++n) {
    std::size_t paths = 1;
    for (int k = 0; k <= n; ++k) paths *= static_cast<std::size_t>(d);
    Rng rng = streams.stream(static_cast<std::uint64_t>(n));
    double worst = 0.0;
    double largest = 0.0;
    for (std::size_t f = 0; f < functionals; ++f) {
      std::vector<char> member(paths);
      for (auto& b : member) b = uniform01(rng) < 0.5;
      const PathFunctional indicator = [&member, d](std::span<const int> path) {
        std::size_t code = 0;
        for (int t : path) code = code * static_cast<std::size_t>(d) + static_cast<std::size_t>(t);
        return member[code] ? 1.0 : 0.0;
      };
      const ManyToOneResult res = many_to_one(model, sd, c.root_type, n, indicator);
      worst = std::max(worst, std::abs(res.lhs - res.rhs));
      largest = std::max(largest, std::abs(res.lhs));
    }
    rows.push_back(below("max_abs_diff_n" + std::to_string(n), worst, r.tolerance));
    rows.push_back(info("max_lhs_n" + std::to_string(n), largest));
  }
  return rows;
}

struct TreeSummary {
  Vector ancestral;
  double tv = 0.0;
  double identity = 0.0;
};

std::vector<CheckRow> suite_ancestral(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                      const VerifyConfig& c) {
  if (r.m < 1 || r.m > r.n) throw std::invalid_argument("ancestral: need 1 <= m <= n");
  const Population start = unit_population(model.dim(), c.root_type);
  SimulationCaps caps;
  caps.max_population = 50'000'000;
  const auto trees = mc_collect(
      [&](std::size_t, Rng& rng) {
        const auto cond = condition_on_survival(model, start, r.n, rng, c.max_attempts, caps);
        TreeSummary s;
        s.ancestral = empirical_ancestral(cond.value, r.n, r.m);
        s.tv = tv_distance(as_span(s.ancestral), as_span(sd.alpha));
        s.identity = (mean_lineage_occupation(cond.value, r.n) - mean_ancestral_profile(cond.value, r.n))
                         .lpNorm<Eigen::Infinity>();
        return s;
      },
      r.replicates, StreamFamily(c.seed).child(7), c.workers);
  Vector mean_a = Vector::Zero(model.dim());
  double mean_tv = 0.0;
  double worst_identity = 0.0;
  for (const auto& s : trees) {
    mean_a += s.ancestral;
    mean_tv += s.tv;
    worst_identity = std::max(worst_identity, s.identity);
  }
  const double count = static_cast<double>(std::max<std::size_t>(trees.size(), 1));
  mean_a /= count;
  mean_tv /= count;
  std::vector<CheckRow> rows;
  rows.push_back(below("tv_mean_ancestral_vs_alpha", tv_distance(as_span(mean_a), as_span(sd.alpha)), r.tolerance));
  rows.push_back(info("mean_per_tree_tv", mean_tv));
  rows.push_back(below("lineage_identity_max_residual", worst_identity, 1e-12));
  for (Eigen::Index i = 0; i < mean_a.size(); ++i) rows.push_back(info("mean_ancestral_" + std::to_string(i + 1), mean_a[i]));
  rows.push_back(info("trees", static_cast<double>(trees.size())));
  return rows;
}

std::vector<CheckRow> suite_retro(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                  const VerifyConfig& c) {
  if (r.n < 1) throw std::invalid_argument("retro: n must be >= 1");
  const Matrix P = retro_matrix(sd, model.mean()).P;
  const SpineSampler sampler(model, sd);
  Rng rng = StreamFamily(c.seed).child(8).stream(0);
  const std::vector<int> path = sampler.trunk_path(c.root_type, r.n, rng);
  Vector occ = Vector::Zero(model.dim());
  for (int k = 0; k < r.n; ++k) occ[path[static_cast<std::size_t>(k)]] += 1.0;
  occ /= static_cast<double>(r.n);
  const Vector ones = Vector::Ones(model.dim());
  return {below("row_sum_residual", (P * ones - ones).lpNorm<Eigen::Infinity>(), 1e-12),
          below("stationarity_residual", (P.transpose() * sd.alpha - sd.alpha).lpNorm<Eigen::Infinity>(), 1e-10),
          below("occupation_tv_vs_alpha", tv_distance(as_span(occ), as_span(sd.alpha)), r.tolerance)};
}

std::vector<CheckRow> suite_transition(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                       const VerifyConfig& c) {
  if (r.n < 1) throw std::invalid_argument("transition: n must be >= 1");
  const int steps = static_cast<int>(std::floor(r.n * r.t));
  Population start(model.dim(), 0);
  start[c.root_type] = r.n;
  const double span = lattice_span(model, sd);
  const auto draws = mc_collect(
      [&](std::size_t, Rng& rng) {
        const Trajectory traj = simulate_counts(model, start, steps, rng);
        const double s = u_mass(sd.u, traj.counts.back());
        if (s == 0.0) return LatticeDraw{0.0, 0.0};
        return LatticeDraw{s / r.n, (s - span * uniform01(rng)) / r.n};
      },
      r.replicates, StreamFamily(c.seed).child(9), c.workers);
  const ScalarLaw law = transition_law({sd.q_u, r.t, sd.u[c.root_type]});
  const auto reference = mc_collect([&](std::size_t, Rng& rng) { return law.sample(rng); }, r.replicates,
                                    StreamFamily(c.seed).child(90), c.workers);

  std::vector<double> positive, positive_raw, reference_positive;
  std::size_t extinct = 0;
  for (const auto& d : draws) {
    if (d.raw == 0.0) {
      ++extinct;
    } else {
      positive.push_back(d.smoothed);
      positive_raw.push_back(d.raw);
    }
  }
  for (double y : reference)
    if (y > 0.0) reference_positive.push_back(y);
  const double freq = static_cast<double>(extinct) / static_cast<double>(draws.size());
  const auto cdf = [&](double y) { return law.positive_part_cdf(y); };
  std::vector<CheckRow> rows;
  rows.push_back(below("extinction_frequency_error", std::abs(freq - law.atom_mass()), r.tolerance));
  rows.push_back(info("extinction_frequency", freq));
  rows.push_back(info("atom_mass", law.atom_mass()));
  rows.push_back(below("ks_positive_vs_sampler", ks_two_sample(positive, reference_positive), 0.02));
  rows.push_back(info("ks_positive_vs_cdf", ks_statistic(positive, cdf)));
  rows.push_back(info("ks_positive_raw_vs_cdf", ks_statistic(positive_raw, cdf)));
  return rows;
}

std::vector<CheckRow> suite_fdd(const Resolved& r, const VerifyConfig& c) {
  const StreamFamily streams = StreamFamily(c.seed).child(10);
  std::vector<CheckRow> rows;
  const double norm = integrate_half_line([](double y) { return sb_transition_density(1.0, y, 1.0); });
  rows.push_back(below("normalization_error", std::abs(norm - 1.0), 1e-8));

  auto ck_residual = [](double x, double z, double s, double t) {
    const double lhs = integrate_half_line(
        [&](double y) { return sb_transition_density(x, y, s) * sb_transition_density(y, z, t); });
    return std::abs(lhs - sb_transition_density(x, z, s + t));
  };
  rows.push_back(below("chapman_kolmogorov_residual", ck_residual(1.0, 1.0, 0.5, 0.5), 1e-6));
  Rng triple_rng = streams.stream(0);
  for (int k = 1; k <= 3; ++k) {
    const double x = 0.2 + 2.8 * uniform01(triple_rng);
    const double z = 0.2 + 2.8 * uniform01(triple_rng);
    const double s = 0.2 + 1.3 * uniform01(triple_rng);
    const double t = 0.2 + 1.3 * uniform01(triple_rng);
    rows.push_back(below("chapman_kolmogorov_random_" + std::to_string(k), ck_residual(x, z, s, t), 1e-6));
  }
  rows.push_back(below("small_x_limit", std::abs(sb_transition_density(1e-14, 1.0, 1.0) - std::exp(-1.0)), 1e-9));

  auto samples = mc_collect([](std::size_t, Rng& rng) { return sample_sb_transition(1.0, 1.0, rng); },
                            r.replicates, streams.child(1), c.workers);
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  // CDF at each sorted sample point by accumulating quadrature between neighbours.
  std::map<double, double> cdf_at;
  double acc = 0.0;
  double prev = 0.0;
  for (double y : sorted) {
    if (y > prev) acc += integrate([](double w) { return sb_transition_density(1.0, w, 1.0); }, prev, y, 1e-12, 0);
    cdf_at[y] = acc;
    prev = y;
  }
  rows.push_back(below("ks_sampler_vs_density", ks_statistic(samples,
                                                                  [&](double y) {
                                                                    // smallest sample point >= y
                                                                    const auto it = cdf_at.lower_bound(y);
                                                                    return it == cdf_at.end() ? acc : it->second;
                                                                  }),
                       r.tolerance));

  const std::vector<double> times{0.5, 1.0};
  const auto second = mc_collect([&](std::size_t, Rng& rng) { return sample_limit_fdd(times, rng)[1]; },
                                 r.replicates, streams.child(2), c.workers);
  const ScalarLaw gamma = entrance_hhat({1.0, 1.0});
  rows.push_back(below("ks_two_time_marginal", ks_statistic(second, [&](double y) { return gamma.cdf(y); }),
                       r.tolerance));
  return rows;
}

std::vector<CheckRow> suite_ldp(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                const VerifyConfig& c) {
  const Matrix P = retro_matrix(sd, model.mean()).P;
  std::vector<CheckRow> rows;
  const RateResult at_alpha = rate_J(P, sd.alpha);
  rows.push_back(below("rate_at_alpha", at_alpha.infinite ? std::numeric_limits<double>::infinity() : at_alpha.value, 1e-8));

  Matrix flat(2, 2);
  flat << 0.5, 0.5, 0.5, 0.5;
  Vector nu(2);
  nu << 0.9, 0.1;
  const RateResult flat_rate = rate_J(flat, nu);
  rows.push_back(below("identical_rows_vs_kl", std::abs(flat_rate.value - kl(nu, flat.row(0).transpose())), 1e-6));

  const Eigen::Index d = P.rows();
  Matrix rows_alpha(d, d);
  for (Eigen::Index i = 0; i < d; ++i) rows_alpha.row(i) = sd.alpha.transpose();
  Vector nu2 = Vector::LinSpaced(d, 1.0, static_cast<double>(d));
  nu2 /= nu2.sum();
  const RateResult alpha_rows_rate = rate_J(rows_alpha, nu2);
  rows.push_back(below("alpha_rows_vs_kl", std::abs(alpha_rows_rate.value - kl(nu2, sd.alpha)), 1e-6));

  Matrix swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  Vector off(2);
  off << 0.6, 0.4;
  const RateResult swap_rate = rate_J(swap, off);
  rows.push_back(above("periodic_chain_flags_infinite", swap_rate.infinite ? 1.0 : 0.0, 0.5));

  const std::vector<int> n_list{40, 80, 160};
  const auto slopes = ld_slope_estimate(model, sd, 0.25, n_list, r.replicates, StreamFamily(c.seed).child(11),
                                        c.max_attempts, c.workers);
  for (const auto& pt : slopes) {
    rows.push_back(info("deviant_probability_n" + std::to_string(pt.n), pt.p));
    rows.push_back(info("slope_n" + std::to_string(pt.n), pt.slope));
  }
  for (std::size_t i = 1; i < slopes.size(); ++i) {
    const double gap = slopes[i].lo - slopes[i - 1].hi;
    rows.push_back({"slope_nonincreasing_n" + std::to_string(slopes[i].n), std::isnan(gap) ? 0.0 : gap, 0.0,
                    !(gap > 0.0), true});
  }
  return rows;
}

std::vector<CheckRow> suite_functional(const BranchingModel& model, const SpectralData& sd, const Resolved& r,
                                       const VerifyConfig& c) {
  if (r.n < 1) throw std::invalid_argument("functional: n must be >= 1");
  const Population start = unit_population(model.dim(), c.root_type);
  const MeanEstimate est = mc_mean(
      [&](std::size_t, Rng& rng) {
        const auto cond = condition_on_survival_counts(model, start, r.n, rng, c.max_attempts);
        const double w = u_mass(sd.u, cond.value.counts.back()) / (r.n * sd.q_u);
        return apply_functional(Functional::Saturating, w);
      },
      r.replicates, StreamFamily(c.seed).child(12), c.workers);
  const double target = limit_functional_value(Functional::Saturating);
  const double oracle = 1.0 - std::exp(1.0) * boost::math::expint(1, 1.0);
  return {below("relative_error_vs_quadrature", std::abs(est.mean / target - 1.0), r.tolerance),
          below("quadrature_vs_closed_form", std::abs(target - oracle), 1e-8), info("simulated_mean", est.mean),
          info("standard_error", est.std_error), info("quadrature_value", target)};
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.gating || r.pass; });
}

std::string SuiteReport::csv() const {
  CsvTable table({"check", "statistic", "threshold", "pass"});
  for (const auto& r : rows) {
    table.add_row({r.check, format_number(r.statistic), r.gating ? format_number(r.threshold) : "",
                   r.gating ? (r.pass ? "true" : "false") : "info"});
  }
  return table.str();
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"spectral",   "survival",    "entrance", "hhat-entrance",
                                              "spine-law",  "many-to-one", "ancestral", "retro",
                                              "transition", "fdd",         "ldp",       "functional"};
  return names;
}

SuiteDefaults suite_defaults(std::string_view suite) {
  if (suite == "spectral") return {0, 0, 0, 1.0, 1e-10};
  if (suite == "survival") return {10'000, 0, 0, 1.0, 0.01};
  if (suite == "entrance") return {100, 0, 20'000, 1.0, 0.02};
  if (suite == "hhat-entrance") return {150, 0, 10'000, 1.0, 0.02};
  if (suite == "spine-law") return {3, 0, 100'000, 1.0, 0.001};
  if (suite == "many-to-one") return {3, 0, 20, 1.0, 1e-12};
  if (suite == "ancestral") return {300, 60, 2'000, 1.0, 0.05};
  if (suite == "retro") return {1'000'000, 0, 0, 1.0, 0.005};
  if (suite == "transition") return {100, 0, 100'000, 1.0, 0.01};
  if (suite == "fdd") return {0, 0, 100'000, 1.0, 0.01};
  if (suite == "ldp") return {0, 0, 300, 1.0, 1e-8};
  if (suite == "functional") return {100, 0, 20'000, 1.0, 0.05};
  throw std::invalid_argument("unknown suite: " + std::string(suite));
}

SuiteReport run_suite(std::string_view suite, const BranchingModel& model, const VerifyConfig& config) {
  const Resolved r = resolve(suite, config);
  if (config.root_type < 0 || config.root_type >= model.dim()) throw std::invalid_argument("root type out of range");
  const SpectralData sd = analyze(model);
  require_critical(sd);
  SuiteReport out;
  out.suite = std::string(suite);
  if (suite == "spectral") out.rows = suite_spectral(model, sd, r);
  else if (suite == "survival") out.rows = suite_survival(model, sd, r, config);
  else if (suite == "entrance") out.rows = suite_entrance(model, sd, r, config);
  else if (suite == "hhat-entrance") out.rows = suite_hhat_entrance(model, sd, r, config);
  else if (suite == "spine-law") out.rows = suite_spine_law(model, sd, r, config);
  else if (suite == "many-to-one") out.rows = suite_many_to_one(model, sd, r, config);
  else if (suite == "ancestral") out.rows = suite_ancestral(model, sd, r, config);
  else if (suite == "retro") out.rows = suite_retro(model, sd, r, config);
  else if (suite == "transition") out.rows = suite_transition(model, sd, r, config);
  else if (suite == "fdd") out.rows = suite_fdd(r, config);
  else if (suite == "ldp") out.rows = suite_ldp(model, sd, r, config);
  else if (suite == "functional") out.rows = suite_functional(model, sd, r, config);
  return out;
}

double lattice_span(const BranchingModel& model, const SpectralData& spectral) {
  const double u0 = spectral.u[0];
  for (Eigen::Index i = 1; i < spectral.u.size(); ++i) {
    if (std::abs(spectral.u[i] - u0) > 1e-12 * u0) return 0.0;
  }
  int g = 0;
  for (const auto& law : model.laws()) {
    for (const auto& atom : law.atoms) {
      if (atom.prob == 0.0) continue;
      g = std::gcd(g, std::accumulate(atom.counts.begin(), atom.counts.end(), 0));
    }
  }
  return u0 * g;
}

}  // namespace critbranch
