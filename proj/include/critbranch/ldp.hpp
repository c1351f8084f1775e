#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "critbranch/model.hpp"
#include "critbranch/spectral.hpp"
#include "critbranch/stats.hpp"

namespace critbranch {

struct RateOptions {
  int starts = 5;
  /// Objective level beyond which a still-growing iterate is reported as +inf.
  double divergence_threshold = 50.0;
  double grad_tol = 1e-10;
  int max_iter = 2000;
  std::uint64_t seed = 0x5eed;
  /// Start for the first run, as log-weights; zeros when absent.
  std::optional<Vector> initial;
};

struct RateResult {
  /// Meaningful only when !infinite.
  double value = 0.0;
  bool infinite = false;
  /// Positive weights with w_d = 1.
  Vector maximizer;
  int iterations = 0;
  bool converged = false;
};

/// -sum_j nu_j log((P w)_j / w_j).
double rate_objective(const Matrix& P, const Vector& nu, const Vector& w);

/// J_P(nu) = sup_{w > 0} rate_objective(P, nu, w), by damped Newton ascent in
/// theta = log w with theta_d = 0 and a gradient fallback, over several starts.
RateResult rate_J(const Matrix& P, const Vector& nu, const RateOptions& opts = {});

/// Relative entropy sum nu_j log(nu_j / pi_j); +inf on a support violation.
double kl(const Vector& nu, const Vector& pi);

struct SlopePoint {
  int n = 0;
  std::size_t replicates = 0;
  std::size_t hits = 0;
  double p = 0.0;
  /// (1/n) log p; -inf when p = 0.
  double slope = 0.0;
  /// Slope band from the Wilson interval of p.
  double lo = 0.0;
  double hi = 0.0;
};

/// Monte Carlo estimate of (1/n) log P(some lineage has TV(L^x(n), alpha) >= rho | survival to n).
std::vector<SlopePoint> ld_slope_estimate(const BranchingModel& model, const SpectralData& spectral, double rho,
                                          const std::vector<int>& n_list, std::size_t replicates,
                                          const StreamFamily& streams, std::int64_t max_attempts = 1'000'000,
                                          int workers = 0);

}  // namespace critbranch
