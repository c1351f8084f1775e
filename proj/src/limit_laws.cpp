#include "critbranch/limit_laws.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace critbranch {
namespace {

void require_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be positive");
}

double log_poisson(double lambda, long k) {
  return k * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0);
}

// sum_{k >= k0} Pois(k; lambda) term(k), walking outward from the mode until
// weights are negligible on both sides.
template <class Term>
double poisson_mixture(double lambda, long k0, Term term) {
  if (lambda == 0.0) return k0 == 0 ? term(0) : 0.0;
  const long mode = std::max(k0, static_cast<long>(std::floor(lambda)));
  const double log_peak = log_poisson(lambda, mode);
  double sum = 0.0;
  for (long k = mode;; ++k) {
    const double w = std::exp(log_poisson(lambda, k) - log_peak);
    sum += w * term(k);
    if (k > lambda && w < 1e-18) break;
  }
  for (long k = mode - 1; k >= k0; --k) {
    const double w = std::exp(log_poisson(lambda, k) - log_peak);
    sum += w * term(k);
    if (w < 1e-18) break;
  }
  return sum * std::exp(log_peak);
}

double gamma_draw(double shape, double scale, Rng& rng) {
  std::gamma_distribution<double> g(shape, scale);
  return g(rng);
}

long poisson_draw(double lambda, Rng& rng) {
  if (lambda <= 0.0) return 0;
  std::poisson_distribution<long> p(lambda);
  return p(rng);
}

}  // namespace

void LimitParams::validate() const {
  if (!(q_u > 0.0)) throw std::invalid_argument("q_u must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  if (!(a >= 0.0)) throw std::invalid_argument("a must be nonnegative");
  if (!(x >= 0.0)) throw std::invalid_argument("x must be nonnegative");
}

ScalarLaw::ScalarLaw(LawKind kind, double theta, double param) : kind_(kind), theta_(theta), param_(param) {
  require_theta(theta);
  if (!(param >= 0.0)) throw std::invalid_argument("law parameter must be nonnegative");
}

double ScalarLaw::density(double y) const {
  if (y < 0.0) return 0.0;
  switch (kind_) {
    case LawKind::Exponential:
      return std::exp(-y / theta_) / theta_;
    case LawKind::Gamma2:
      return y * std::exp(-y / theta_) / (theta_ * theta_);
    case LawKind::CompoundPoissonExp: {
      if (y == 0.0) return std::exp(-param_ / theta_) * param_ / (theta_ * theta_);
      const double lambda = param_ / theta_;
      return poisson_mixture(lambda, 1, [&](long k) {
        return std::exp((k - 1) * std::log(y / theta_) - y / theta_ - std::lgamma(static_cast<double>(k))) / theta_;
      });
    }
    case LawKind::SizeBiasedTransition:
      return sb_transition_density(param_, y, theta_);
  }
  return 0.0;
}

double ScalarLaw::cdf(double y) const {
  if (y < 0.0) return 0.0;
  const double s = y / theta_;
  switch (kind_) {
    case LawKind::Exponential:
      return -std::expm1(-s);
    case LawKind::Gamma2:
      return boost::math::gamma_p(2.0, s);
    case LawKind::CompoundPoissonExp: {
      const double lambda = param_ / theta_;
      if (y == 0.0) return atom_mass();
      return atom_mass() +
             poisson_mixture(lambda, 1, [&](long k) { return boost::math::gamma_p(static_cast<double>(k), s); });
    }
    case LawKind::SizeBiasedTransition: {
      if (y == 0.0) return 0.0;
      const double lambda = param_ / theta_;
      return poisson_mixture(lambda, 0,
                             [&](long k) { return boost::math::gamma_p(static_cast<double>(k) + 2.0, s); });
    }
  }
  return 0.0;
}

double ScalarLaw::atom_mass() const {
  return kind_ == LawKind::CompoundPoissonExp ? std::exp(-param_ / theta_) : 0.0;
}

double ScalarLaw::mean() const {
  switch (kind_) {
    case LawKind::Exponential:
      return theta_;
    case LawKind::Gamma2:
      return 2.0 * theta_;
    case LawKind::CompoundPoissonExp:
      return param_;
    case LawKind::SizeBiasedTransition:
      return param_ + 2.0 * theta_;
  }
  return 0.0;
}

double ScalarLaw::sample(Rng& rng) const {
  switch (kind_) {
    case LawKind::Exponential:
      return -theta_ * std::log1p(-uniform01(rng));
    case LawKind::Gamma2:
      return gamma_draw(2.0, theta_, rng);
    case LawKind::CompoundPoissonExp: {
      const long k = poisson_draw(param_ / theta_, rng);
      return k == 0 ? 0.0 : gamma_draw(static_cast<double>(k), theta_, rng);
    }
    case LawKind::SizeBiasedTransition:
      return sample_sb_transition(param_, theta_, rng);
  }
  return 0.0;
}

double ScalarLaw::positive_part_cdf(double y) const {
  const double atom = atom_mass();
  if (atom >= 1.0) throw std::domain_error("law has no positive part");
  if (y <= 0.0) return 0.0;
  return (cdf(y) - atom) / (1.0 - atom);
}

ScalarLaw entrance_conditioned(const LimitParams& params) {
  params.validate();
  return ScalarLaw(LawKind::Exponential, params.theta());
}

ScalarLaw entrance_hhat(const LimitParams& params) {
  params.validate();
  return ScalarLaw(LawKind::Gamma2, params.theta());
}

ScalarLaw transition_law(const LimitParams& params) {
  params.validate();
  return ScalarLaw(LawKind::CompoundPoissonExp, params.theta(), params.a);
}

ScalarLaw sb_transition_law(const LimitParams& params) {
  params.validate();
  return ScalarLaw(LawKind::SizeBiasedTransition, params.theta(), params.x);
}

double sb_transition_density(double x, double y, double theta) {
  require_theta(theta);
  if (x < 0.0 || y < 0.0) throw std::invalid_argument("sb_transition_density: negative argument");
  if (y == 0.0 || std::isinf(y)) return 0.0;
  if (x == 0.0) return y * std::exp(-y / theta) / (theta * theta);
  const double gap = std::sqrt(y) - std::sqrt(x);
  if (gap * gap / theta > 1400.0) return 0.0;
  const double z = std::sqrt(x * y) / theta;
  const double prefactor = 0.5 * std::log(y / x) - std::log(theta);
  if (z > 1e5) {
    // Large-argument expansion of I_1(2z) e^{-2z}.
    const double w = 2.0 * z;
    const double r = 1.0 / (8.0 * w);
    const double series = 1.0 - 3.0 * r - 15.0 / 2.0 * r * r - 315.0 / 6.0 * r * r * r;
    return std::exp(-gap * gap / theta + prefactor) * series / std::sqrt(2.0 * M_PI * w);
  }
  const double log_z = std::log(z);
  auto log_term = [&](long k) {
    return (2.0 * k + 1.0) * log_z - std::lgamma(k + 1.0) - std::lgamma(k + 2.0);
  };
  const long peak = static_cast<long>(std::floor(z));
  const double log_peak = log_term(peak);
  double sum = 0.0;
  for (long k = peak;; ++k) {
    const double r = std::exp(log_term(k) - log_peak);
    sum += r;
    if (r < 1e-15 * sum && k > z) break;
  }
  for (long k = peak - 1; k >= 0; --k) {
    const double r = std::exp(log_term(k) - log_peak);
    sum += r;
    if (r < 1e-15 * sum) break;
  }
  return std::exp(-(x + y) / theta + log_peak + std::log(sum) + prefactor);
}

double sample_sb_transition(double x, double theta, Rng& rng) {
  require_theta(theta);
  if (x < 0.0) throw std::invalid_argument("sample_sb_transition: negative x");
  const long k = poisson_draw(x / theta, rng);
  return gamma_draw(static_cast<double>(k) + 2.0, theta, rng);
}

std::vector<double> sample_limit_fdd(std::span<const double> times, Rng& rng) {
  std::vector<double> out;
  out.reserve(times.size());
  double prev_t = 0.0;
  for (double t : times) {
    if (!(t > prev_t)) throw std::invalid_argument("sample_limit_fdd: times must be positive and increasing");
    const double prev_b = out.empty() ? 0.0 : out.back();
    out.push_back(sample_sb_transition(prev_b, t - prev_t, rng));
    prev_t = t;
  }
  return out;
}

Functional parse_functional(std::string_view name) {
  if (name == "zero") return Functional::Zero;
  if (name == "saturating") return Functional::Saturating;
  if (name == "wexp") return Functional::WExpNeg;
  throw std::invalid_argument("unsupported functional: " + std::string(name));
}

double apply_functional(Functional f, double w) {
  switch (f) {
    case Functional::Zero:
      return 0.0;
    case Functional::Saturating:
      return w / (1.0 + w);
    case Functional::WExpNeg:
      return w * std::exp(-w);
  }
  return 0.0;
}

double limit_functional_value(Functional f) {
  if (f == Functional::Zero) return 0.0;
  return integrate_half_line([f](double w) { return apply_functional(f, w) * std::exp(-w); }, 1e-13);
}

double integrate_half_line(const std::function<double(double)>& f, double tol) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), tol);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol, unsigned max_depth) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, tol);
}

LawKind parse_law_kind(std::string_view name) {
  if (name == "exp") return LawKind::Exponential;
  if (name == "gamma2") return LawKind::Gamma2;
  if (name == "cpe") return LawKind::CompoundPoissonExp;
  if (name == "sbtrans") return LawKind::SizeBiasedTransition;
  throw std::invalid_argument("unknown law: " + std::string(name));
}

}  // namespace critbranch
