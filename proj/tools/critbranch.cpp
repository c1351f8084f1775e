// critbranch: command-line front end for the critical branching toolkit.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "critbranch/error.hpp"
#include "critbranch/forward_sim.hpp"
#include "critbranch/ldp.hpp"
#include "critbranch/limit_laws.hpp"
#include "critbranch/model.hpp"
#include "critbranch/report.hpp"
#include "critbranch/spectral.hpp"
#include "critbranch/spine_sim.hpp"
#include "critbranch/stats.hpp"
#include "critbranch/verify.hpp"

namespace cb = critbranch;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kBadModel = 3 };

struct Globals {
  std::string model;
  std::uint64_t seed = 20240611;
  std::optional<std::size_t> replicates;
  std::string out;
  int workers = 0;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

cb::BranchingModel require_model(const Globals& g) {
  if (g.model.empty()) throw UsageError("--model is required");
  return cb::load_model_file(g.model);
}

nlohmann::json json_vector(const cb::Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(cb::json_number(v[i]));
  return arr;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(cb::parse_probability(item));
    } catch (const std::exception&) {
      throw UsageError("bad number in list: " + item);
    }
  }
  return out;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& raw : items) {
    std::stringstream ss(raw);
    std::string kv;
    while (std::getline(ss, kv, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("expected key=value, got " + kv);
      try {
        out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("bad value in " + kv);
      }
    }
  }
  for (const auto& [k, v] : out) {
    if (k != "theta" && k != "q" && k != "t" && k != "a" && k != "x") throw UsageError("unknown parameter: " + k);
  }
  return out;
}

cb::ScalarLaw make_law(const std::string& name, const std::map<std::string, double>& p) {
  cb::LawKind kind;
  try {
    kind = cb::parse_law_kind(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  auto get = [&](const char* key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
  };
  const double theta = p.count("theta") ? p.at("theta") : get("q", 1.0) * get("t", 1.0);
  const double param = kind == cb::LawKind::CompoundPoissonExp ? get("a", 0.0) : get("x", 0.0);
  return cb::ScalarLaw(kind, theta, param);
}

int cmd_spectral(const Globals& g) {
  const auto model = require_model(g);
  const auto sd = cb::analyze(model);
  nlohmann::json j;
  j["lambda"] = cb::json_number(sd.lambda);
  j["u"] = json_vector(sd.u);
  j["v"] = json_vector(sd.v);
  j["alpha"] = json_vector(sd.alpha);
  j["q_u"] = cb::json_number(sd.q_u);
  j["critical"] = cb::check_critical(sd);
  j["warnings"] = model.warnings();
  cb::write_output(g.out, j.dump(2) + "\n");
  return cb::check_critical(sd) ? kPass : kBadModel;
}

struct SimulateArgs {
  int n = -1;
  int start = 1;
  bool spine = false;
  bool condition = false;
  std::int64_t max_attempts = 10'000'000;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  const auto model = require_model(g);
  const int d = model.dim();
  if (a.n < 0) throw UsageError("--n must be >= 0");
  if (a.start < 1 || a.start > d) throw UsageError("--start must name a type in 1..d");
  const std::size_t reps = g.replicates.value_or(1);
  const cb::StreamFamily streams(g.seed);
  const int root = a.start - 1;

  if (a.spine) {
    if (a.condition) throw UsageError("--spine and --condition-survival are exclusive");
    const auto sd = cb::analyze(model);
    const cb::SpineSampler sampler(model, sd);
    const auto records = cb::mc_collect(
        [&](std::size_t, cb::Rng& rng) { return sampler.simulate(root, a.n, rng); }, reps, streams, g.workers);
    std::vector<std::string> header{"replicate", "generation", "trunk_type"};
    for (int j = 1; j <= d; ++j) header.push_back("count_" + std::to_string(j));
    cb::CsvTable table(header);
    for (std::size_t r = 0; r < records.size(); ++r) {
      for (std::size_t k = 0; k < records[r].generations.size(); ++k) {
        const auto& gen = records[r].generations[k];
        std::vector<std::string> row{std::to_string(r), std::to_string(k), std::to_string(gen.trunk_type + 1)};
        for (auto c : gen.total) row.push_back(cb::format_number(c));
        table.add_row(std::move(row));
      }
    }
    cb::write_output(g.out, table.str());
    return kPass;
  }

  if (a.condition) cb::require_critical(cb::analyze(model));
  const cb::Population start = cb::unit_population(d, root);
  const auto trajectories = cb::mc_collect(
      [&](std::size_t, cb::Rng& rng) {
        if (a.condition) return cb::condition_on_survival_counts(model, start, a.n, rng, a.max_attempts).value;
        return cb::simulate_counts(model, start, a.n, rng);
      },
      reps, streams, g.workers);
  cb::CsvTable table({"replicate", "generation", "type", "count"});
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    const auto& counts = trajectories[r].counts;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      for (int j = 0; j < d; ++j) {
        table.add_row({std::to_string(r), std::to_string(k), std::to_string(j + 1), cb::format_number(counts[k][j])});
      }
    }
  }
  cb::write_output(g.out, table.str());
  return kPass;
}

struct LimitsArgs {
  std::string law;
  std::vector<std::string> params;
  std::string grid = "0:50:20001";
  std::size_t n = 0;
};

int cmd_limits_pdf(const Globals& g, const LimitsArgs& a) {
  const auto law = make_law(a.law, parse_params(a.params));
  const auto parts = parse_list([&] {
    std::string s = a.grid;
    for (char& c : s)
      if (c == ':') c = ',';
    return s;
  }());
  if (parts.size() != 3 || parts[2] < 2 || parts[1] <= parts[0] || parts[2] != std::floor(parts[2]))
    throw UsageError("--grid must be a:b:n with a < b and integer n >= 2");
  const auto points = static_cast<std::size_t>(parts[2]);
  cb::CsvTable table({"x", "density", "cdf"});
  for (std::size_t i = 0; i < points; ++i) {
    const double x = parts[0] + (parts[1] - parts[0]) * static_cast<double>(i) / static_cast<double>(points - 1);
    table.add_row({cb::format_number(x), cb::format_number(law.density(x)), cb::format_number(law.cdf(x))});
  }
  cb::write_output(g.out, table.str());
  return kPass;
}

int cmd_limits_sample(const Globals& g, const LimitsArgs& a) {
  const auto law = make_law(a.law, parse_params(a.params));
  const std::size_t n = a.n ? a.n : g.replicates.value_or(0);
  if (n == 0) throw UsageError("--n must be positive");
  const auto draws =
      cb::mc_collect([&](std::size_t, cb::Rng& rng) { return law.sample(rng); }, n, cb::StreamFamily(g.seed), g.workers);
  cb::CsvTable table({"value"});
  for (double y : draws) table.add_row({cb::format_number(y)});
  cb::write_output(g.out, table.str());
  return kPass;
}

int cmd_rate(const Globals& g, const std::string& nu_text, int starts) {
  const auto model = require_model(g);
  const auto sd = cb::analyze(model);
  cb::require_critical(sd);
  const auto values = parse_list(nu_text);
  if (static_cast<int>(values.size()) != model.dim()) throw UsageError("--nu needs one entry per type");
  cb::Vector nu = Eigen::Map<const cb::Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  if (std::abs(nu.sum() - 1.0) < 1e-5) nu /= nu.sum();
  cb::RateOptions opts;
  opts.starts = starts;
  opts.seed = g.seed;
  cb::RateResult res;
  try {
    res = cb::rate_J(cb::retro_matrix(sd, model.mean()).P, nu, opts);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  nlohmann::json j;
  j["value"] = res.infinite ? nlohmann::json(nullptr) : cb::json_number(res.value);
  j["infinite"] = res.infinite;
  j["maximizer"] = json_vector(res.maximizer);
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  cb::write_output(g.out, j.dump(2) + "\n");
  return kPass;
}

int cmd_verify(const Globals& g, const std::string& suite, cb::VerifyConfig cfg) {
  const auto& names = cb::suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) throw UsageError("unknown suite: " + suite);
  const auto model = require_model(g);
  cfg.seed = g.seed;
  cfg.workers = g.workers;
  cfg.replicates = g.replicates;
  const auto report = cb::run_suite(suite, model, cfg);
  cb::write_output(g.out, report.csv());
  return report.passed() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical multitype branching: simulation, limit laws and verification"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--model", g.model, "model config (JSON)");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--replicates", g.replicates, "number of replicates");
  app.add_option("--out", g.out, "output file (stdout when omitted)");
  app.add_option("--workers", g.workers, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);

  auto* spectral = app.add_subcommand("spectral", "Perron data of the mean matrix as JSON");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "forward or spine simulation, CSV");
  simulate->add_option("--n", sim.n, "horizon")->required();
  simulate->add_option("--start", sim.start, "root type (1-based)");
  simulate->add_flag("--spine", sim.spine, "size-biased tree with a spine");
  simulate->add_flag("--condition-survival", sim.condition, "condition on survival to n");
  simulate->add_option("--max-attempts", sim.max_attempts, "rejection attempts per replicate");

  LimitsArgs lim;
  auto* limits = app.add_subcommand("limits", "limit-law densities and samples");
  limits->require_subcommand(1);
  auto* pdf = limits->add_subcommand("pdf", "density and CDF on a grid");
  auto* sample = limits->add_subcommand("sample", "draws from a limit law");
  for (auto* sub : {pdf, sample}) {
    sub->add_option("--law", lim.law, "exp | gamma2 | cpe | sbtrans")->required();
    sub->add_option("--params", lim.params, "theta=..., or q=...,t=...; a=... (cpe), x=... (sbtrans)");
  }
  pdf->add_option("--grid", lim.grid, "a:b:n");
  sample->add_option("--n", lim.n, "number of draws");

  std::string nu_text;
  int starts = 5;
  auto* rate = app.add_subcommand("rate", "rate function of the retrospective chain, JSON");
  rate->add_option("--nu", nu_text, "comma-separated probability vector")->required();
  rate->add_option("--starts", starts, "optimizer starts")->check(CLI::PositiveNumber);

  std::string suite;
  cb::VerifyConfig cfg;
  int start_type = 1;
  auto* verify = app.add_subcommand("verify", "run a verification suite, CSV check,statistic,threshold,pass");
  verify->add_option("suite", suite, "suite name")->required();
  verify->add_option("--n", cfg.n, "horizon");
  verify->add_option("--m", cfg.m, "ancestral lag");
  verify->add_option("--t", cfg.t, "time");
  verify->add_option("--tolerance", cfg.tolerance, "primary threshold");
  verify->add_option("--start", start_type, "root type (1-based)");
  verify->add_option("--max-attempts", cfg.max_attempts, "rejection attempts per replicate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*spectral) return cmd_spectral(g);
    if (*simulate) return cmd_simulate(g, sim);
    if (*pdf) return cmd_limits_pdf(g, lim);
    if (*sample) return cmd_limits_sample(g, lim);
    if (*rate) return cmd_rate(g, nu_text, starts);
    if (*verify) {
      cfg.root_type = start_type - 1;
      return cmd_verify(g, suite, cfg);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const cb::ModelError& e) {
    std::cerr << "invalid model: " << e.what() << "\n";
    return kBadModel;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
