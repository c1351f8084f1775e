#include "critbranch/spectral.hpp"

#include <cmath>
#include <cstdio>

#include "critbranch/error.hpp"

namespace critbranch {
namespace {

// Returns the positive fixed direction of `a` (l1-normalized) and the
// corresponding eigenvalue of `a`.
std::pair<Vector, double> iterate(const Matrix& a, const PowerOptions& opts, int& iters) {
  const Eigen::Index d = a.rows();
  Vector x = Vector::Ones(d) / static_cast<double>(d);
  for (int it = 1; it <= opts.max_iter; ++it) {
    Vector y = a * x;
    const double norm = y.sum();
    if (!(norm > 0.0)) throw ConvergenceError("power iteration collapsed to zero");
    y /= norm;
    const double delta = (y - x).cwiseAbs().maxCoeff();
    x = std::move(y);
    if (delta < opts.tol) {
      iters = std::max(iters, it);
      return {x, (a * x).sum()};
    }
  }
  throw ConvergenceError("power iteration did not converge within " +
                         std::to_string(opts.max_iter) + " iterations");
}

}  // namespace

SpectralData perron_eigen(const Matrix& mean, const PowerOptions& opts) {
  if (mean.rows() != mean.cols() || mean.rows() == 0) {
    throw std::invalid_argument("perron_eigen: mean matrix must be square");
  }
  if ((mean.array() < 0.0).any()) throw ModelError("mean matrix has negative entries");
  const Eigen::Index d = mean.rows();
  const Matrix shifted = 0.5 * (mean + Matrix::Identity(d, d));

  SpectralData out;
  auto [u, mu_right] = iterate(shifted, opts, out.iterations);
  auto [v, mu_left] = iterate(shifted.transpose(), opts, out.iterations);
  if ((u.array() <= 0.0).any() || (v.array() <= 0.0).any()) {
    throw ModelError("Perron vectors are not strictly positive (reducible mean matrix?)");
  }
  out.lambda = 2.0 * 0.5 * (mu_right + mu_left) - 1.0;
  v /= v.sum();
  u /= u.dot(v);
  out.u = u;
  out.v = v;
  out.alpha = u.cwiseProduct(v);
  return out;
}

SpectralData perron_eigen(const BranchingModel& model, const PowerOptions& opts) {
  return perron_eigen(model.mean(), opts);
}

double big_Q(const BranchingModel& model, const SpectralData& spectral) {
  return spectral.v.dot(q_form_vector(model, spectral.u));
}

SpectralData analyze(const BranchingModel& model, const PowerOptions& opts) {
  SpectralData s = perron_eigen(model, opts);
  s.q_u = big_Q(model, s);
  return s;
}

double survival_asymptote(const SpectralData& spectral, const Vector& z) {
  if (z.size() != spectral.u.size()) throw std::invalid_argument("survival_asymptote: dimension mismatch");
  if ((z.array() == 0.0).all()) throw std::invalid_argument("survival_asymptote: z = 0");
  if (!(spectral.q_u > 0.0)) throw std::domain_error("survival_asymptote: Q[u] must be positive");
  return spectral.u.dot(z) / spectral.q_u;
}

bool check_critical(const SpectralData& spectral, double tol) {
  return std::abs(spectral.lambda - 1.0) <= tol;
}

void require_critical(const SpectralData& spectral, bool allow_noncritical) {
  if (allow_noncritical || check_critical(spectral)) return;
  char buf[128];
  std::snprintf(buf, sizeof buf, "model is not critical: lambda = %.12g", spectral.lambda);
  throw CriticalityError(buf);
}

}  // namespace critbranch
