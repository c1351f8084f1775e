#include "critbranch/ldp.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "critbranch/forward_sim.hpp"

namespace critbranch {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_inputs(const Matrix& P, const Vector& nu) {
  if (P.rows() != P.cols() || P.rows() == 0) throw std::invalid_argument("P must be square and nonempty");
  if (nu.size() != P.rows()) throw std::invalid_argument("nu has the wrong length");
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    if ((P.row(i).array() < 0.0).any()) throw std::invalid_argument("P has a negative entry");
    if (std::abs(P.row(i).sum() - 1.0) > 1e-10) throw std::invalid_argument("P is not row-stochastic");
  }
  if ((nu.array() < 0.0).any() || std::abs(nu.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("nu is not a probability vector");
}

struct Ascent {
  double value = 0.0;
  Vector theta;
  int iterations = 0;
  bool converged = false;
  bool infinite = false;
};

// theta has length d - 1; the last log-weight is pinned to 0.
class Objective {
 public:
  Objective(const Matrix& P, const Vector& nu) : P_(P), nu_(nu), d_(P.rows()) {}

  Vector weights(const Vector& theta) const {
    Vector w(d_);
    w.head(d_ - 1) = theta.array().exp();
    w[d_ - 1] = 1.0;
    return w;
  }

  double value(const Vector& theta) const { return rate_objective(P_, nu_, weights(theta)); }

  // Gradient and Hessian in the free coordinates.
  void derivatives(const Vector& theta, Vector& grad, Matrix& hess) const {
    const Vector w = weights(theta);
    Vector g = nu_;
    Matrix h = Matrix::Zero(d_, d_);
    for (Eigen::Index j = 0; j < d_; ++j) {
      if (nu_[j] == 0.0) continue;
      const Vector r = (P_.row(j).transpose().array() * w.array()) / P_.row(j).dot(w);
      g -= nu_[j] * r;
      h -= nu_[j] * (Matrix(r.asDiagonal()) - r * r.transpose());
    }
    grad = g.head(d_ - 1);
    hess = h.topLeftCorner(d_ - 1, d_ - 1);
  }

 private:
  const Matrix& P_;
  const Vector& nu_;
  Eigen::Index d_;
};

Ascent ascend(const Objective& obj, Vector theta, const RateOptions& opts) {
  Ascent out;
  double value = obj.value(theta);
  double eta = 1.0;
  Vector grad;
  Matrix hess;
  for (int it = 0; it < opts.max_iter; ++it) {
    out.iterations = it + 1;
    obj.derivatives(theta, grad, hess);
    if (grad.norm() < opts.grad_tol) {
      out.converged = true;
      break;
    }
    Vector dir;
    bool newton = false;
    Eigen::LDLT<Matrix> ldlt(-hess);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 1e-14).all()) {
      dir = ldlt.solve(grad);
      newton = dir.allFinite() && dir.dot(grad) > 0.0;
    }
    if (!newton) dir = grad;

    double step = newton ? 1.0 : eta;
    const double slope = dir.dot(grad);
    Vector trial = theta + step * dir;
    double trial_value = obj.value(trial);
    while (!(trial_value >= value + 1e-4 * step * slope) && step > 1e-20) {
      step *= 0.5;
      trial = theta + step * dir;
      trial_value = obj.value(trial);
    }
    if (!(trial_value >= value)) break;
    if (!newton) eta = 2.0 * step;
    const bool growing = trial.norm() > theta.norm();
    const double gain = trial_value - value;
    theta = std::move(trial);
    value = trial_value;
    if (value > opts.divergence_threshold && growing) {
      out.infinite = true;
      break;
    }
    if (gain <= 1e-15 * std::max(1.0, std::abs(value)) && grad.norm() < 1e-6) {
      // stalled at rounding level
      out.converged = grad.norm() < std::max(opts.grad_tol, 1e-8);
      break;
    }
  }
  out.value = value;
  out.theta = std::move(theta);
  return out;
}

}  // namespace

double rate_objective(const Matrix& P, const Vector& nu, const Vector& w) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < nu.size(); ++j) {
    if (nu[j] == 0.0) continue;
    s -= nu[j] * std::log(P.row(j).dot(w) / w[j]);
  }
  return s;
}

RateResult rate_J(const Matrix& P, const Vector& nu, const RateOptions& opts) {
  validate_inputs(P, nu);
  if (opts.starts < 1) throw std::invalid_argument("rate_J: starts must be >= 1");
  const Eigen::Index d = P.rows();
  RateResult out;
  out.maximizer = Vector::Ones(d);
  if (d == 1) {
    out.converged = true;
    return out;
  }
  const Objective obj(P, nu);
  Rng rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  bool have = false;
  for (int s = 0; s < opts.starts; ++s) {
    Vector start = Vector::Zero(d - 1);
    if (s == 0 && opts.initial) {
      if (opts.initial->size() != d) throw std::invalid_argument("rate_J: initial point has the wrong length");
      start = opts.initial->head(d - 1).array() - (*opts.initial)[d - 1];
    } else if (s > 0) {
      for (Eigen::Index k = 0; k < d - 1; ++k) start[k] = normal(rng);
    }
    const Ascent run = ascend(obj, start, opts);
    out.iterations += run.iterations;
    if (run.infinite) {
      out.infinite = true;
      out.value = kInf;
      out.converged = false;
      out.maximizer = obj.weights(run.theta);
      continue;
    }
    if (out.infinite) continue;
    if (!have || run.value > out.value) {
      out.value = run.value;
      out.maximizer = obj.weights(run.theta);
      out.converged = run.converged;
      have = true;
    }
  }
  if (!out.infinite) out.value = std::max(out.value, 0.0);
  return out;
}

double kl(const Vector& nu, const Vector& pi) {
  if (nu.size() != pi.size() || nu.size() == 0) throw std::invalid_argument("kl: size mismatch");
  if ((nu.array() < 0.0).any() || (pi.array() < 0.0).any() || std::abs(nu.sum() - 1.0) > 1e-10 ||
      std::abs(pi.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("kl: inputs must be probability vectors");
  double s = 0.0;
  for (Eigen::Index j = 0; j < nu.size(); ++j) {
    if (nu[j] == 0.0) continue;
    if (pi[j] == 0.0) return kInf;
    s += nu[j] * std::log(nu[j] / pi[j]);
  }
  return s;
}

std::vector<SlopePoint> ld_slope_estimate(const BranchingModel& model, const SpectralData& spectral, double rho,
                                          const std::vector<int>& n_list, std::size_t replicates,
                                          const StreamFamily& streams, std::int64_t max_attempts, int workers) {
  require_critical(spectral);
  if (replicates == 0) throw std::invalid_argument("ld_slope_estimate: replicates must be positive");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1]))
      throw std::invalid_argument("ld_slope_estimate: n_list must be positive and increasing");
  }
  std::vector<SlopePoint> out;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const int n = n_list[i];
    const StreamFamily fam = streams.child(static_cast<std::uint64_t>(n));
    const auto flags = mc_collect(
        [&](std::size_t, Rng& rng) -> int {
          const auto tree = condition_on_survival(model, unit_population(model.dim(), 0), n, rng, max_attempts);
          return has_deviant_lineage(tree.value, n, rho, spectral.alpha) ? 1 : 0;
        },
        replicates, fam, workers);
    SlopePoint pt;
    pt.n = n;
    pt.replicates = replicates;
    for (int f : flags) pt.hits += static_cast<std::size_t>(f);
    pt.p = static_cast<double>(pt.hits) / static_cast<double>(replicates);
    const auto [lo, hi] = wilson_interval(pt.hits, replicates);
    auto slope_of = [n](double p) { return p > 0.0 ? std::log(p) / n : -kInf; };
    pt.slope = slope_of(pt.p);
    pt.lo = slope_of(lo);
    pt.hi = slope_of(hi);
    out.push_back(pt);
  }
  return out;
}

}  // namespace critbranch
