#pragma once

#include "critbranch/model.hpp"

namespace critbranch {

/// Perron-Frobenius data of the mean matrix, normalized so that
/// <1, v> = 1 = <u, v>. alpha_i = u_i v_i is the ancestral type distribution.
struct SpectralData {
  double lambda = 0.0;
  Vector u;
  Vector v;
  Vector alpha;
  /// Q[u] = <v, q[u]>; zero until filled by big_Q / analyze.
  double q_u = 0.0;
  int iterations = 0;
};

struct PowerOptions {
  double tol = 1e-12;
  int max_iter = 100000;
};

/// Tolerance of the criticality gate used by every lambda == 1 operation.
inline constexpr double kCriticalityTol = 1e-9;

/// Power iteration on (M + I)/2 for both eigenvectors; lambda = 2 lambda' - 1.
/// Throws ConvergenceError if max_iter is hit.
SpectralData perron_eigen(const Matrix& mean, const PowerOptions& opts = {});
SpectralData perron_eigen(const BranchingModel& model, const PowerOptions& opts = {});

double big_Q(const BranchingModel& model, const SpectralData& spectral);

/// perron_eigen followed by big_Q.
SpectralData analyze(const BranchingModel& model, const PowerOptions& opts = {});

/// lim n P_z(survive to n) = <u, z> / Q[u].
double survival_asymptote(const SpectralData& spectral, const Vector& z);

bool check_critical(const SpectralData& spectral, double tol = kCriticalityTol);

/// Throws CriticalityError unless |lambda - 1| <= kCriticalityTol or override is set.
void require_critical(const SpectralData& spectral, bool allow_noncritical = false);

}  // namespace critbranch
