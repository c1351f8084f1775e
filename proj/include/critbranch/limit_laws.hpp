#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "critbranch/stats.hpp"

namespace critbranch {

/// Scale parameters of the limit laws; theta = q_u * t.
struct LimitParams {
  double q_u = 1.0;
  double t = 1.0;
  /// Initial u-mass <u, c> of a macroscopic start.
  double a = 0.0;
  /// Entrance point of the transition kernel.
  double x = 0.0;

  double theta() const { return q_u * t; }
  /// Throws std::invalid_argument unless q_u > 0, t > 0, a >= 0, x >= 0.
  void validate() const;
};

enum class LawKind { Exponential, Gamma2, CompoundPoissonExp, SizeBiasedTransition };

/// One-dimensional limit law. Mixed laws carry an explicit atom at 0; density()
/// is the continuous part only, cdf() includes the atom.
class ScalarLaw {
 public:
  ScalarLaw(LawKind kind, double theta, double param = 0.0);

  LawKind kind() const { return kind_; }
  double theta() const { return theta_; }
  /// a for CompoundPoissonExp, x for SizeBiasedTransition, unused otherwise.
  double param() const { return param_; }

  double density(double y) const;
  double cdf(double y) const;
  double atom_mass() const;
  double mean() const;
  double sample(Rng& rng) const;
  /// CDF of the law conditioned on y > 0.
  double positive_part_cdf(double y) const;

 private:
  LawKind kind_;
  double theta_;
  double param_;
};

ScalarLaw entrance_conditioned(const LimitParams& params);
ScalarLaw entrance_hhat(const LimitParams& params);
ScalarLaw transition_law(const LimitParams& params);
ScalarLaw sb_transition_law(const LimitParams& params);

/// p(x, y) = e^{-(x+y)/theta} (1/theta) sqrt(y/x) sum_k (sqrt(xy)/theta)^{2k+1} / (k!(k+1)!).
/// Summed in log scale outward from the largest term; x = 0 gives the
/// Gamma(2, theta) density.
double sb_transition_density(double x, double y, double theta);

/// K ~ Poisson(x/theta), then Gamma(K + 2, theta).
double sample_sb_transition(double x, double theta, Rng& rng);

/// B(t_1), ..., B(t_k) in the Q-normalized scale: B(t_1) ~ Gamma(2, t_1), then
/// transition kernel steps with theta = t_{i+1} - t_i.
std::vector<double> sample_limit_fdd(std::span<const double> times, Rng& rng);

enum class Functional { Zero, Saturating, WExpNeg };

/// Parses "zero", "saturating" (w/(1+w)) or "wexp" (w e^{-w}).
Functional parse_functional(std::string_view name);
double apply_functional(Functional f, double w);

/// E_0[f(Y) / h(Y(1))] = int_0^inf f(w) e^{-w} dw, by adaptive quadrature.
double limit_functional_value(Functional f);

/// Adaptive quadrature on [0, inf) and on [a, b].
double integrate_half_line(const std::function<double(double)>& f, double tol = 1e-12);
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12, unsigned max_depth = 15);

LawKind parse_law_kind(std::string_view name);

}  // namespace critbranch
