#include "critbranch/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace critbranch {

int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    const double f = cdf(xs[i]);
    const double f_left = cdf(std::nextafter(xs[i], -std::numeric_limits<double>::infinity()));
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j) / n;
    d = std::max({d, std::abs(f_left - below), std::abs(at - f)});
    i = j;
  }
  return d;
}

double ks_statistic(const EmpiricalSample& sample, const std::function<double(double)>& cdf) {
  if (sample.size() == 0) throw std::invalid_argument("ks_statistic: empty sample");
  if (sample.atom_count == 0) return ks_statistic(sample.values, cdf);
  std::vector<double> xs = sample.values;
  xs.insert(xs.end(), sample.atom_count, sample.atom_at);
  return ks_statistic(xs, cdf);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> xa(a.begin(), a.end()), xb(b.begin(), b.end());
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const double na = static_cast<double>(xa.size()), nb = static_cast<double>(xb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xa.size() || j < xb.size()) {
    double x;
    if (j >= xb.size() || (i < xa.size() && xa[i] <= xb[j])) {
      x = xa[i];
    } else {
      x = xb[j];
    }
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected_prob,
                           double min_expected) {
  if (observed.size() != expected_prob.size()) {
    throw std::invalid_argument("chi_square: observed/expected size mismatch");
  }
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("chi_square: all-zero observations");
  const double psum = std::accumulate(expected_prob.begin(), expected_prob.end(), 0.0);

  struct Cell {
    double obs;
    double expc;
  };
  std::vector<Cell> big;
  std::vector<std::size_t> small;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * expected_prob[i] / psum;
    if (e < min_expected) {
      small.push_back(i);
    } else {
      big.push_back({observed[i], e});
    }
  }
  if (!small.empty()) {
    Cell tail{0.0, 0.0};
    for (std::size_t i : small) {
      tail.obs += observed[i];
      tail.expc += total * expected_prob[i] / psum;
    }
    // Grow the tail bucket with the smallest remaining categories.
    std::stable_sort(big.begin(), big.end(), [](const Cell& a, const Cell& b) { return a.expc < b.expc; });
    std::size_t absorbed = 0;
    while (tail.expc < min_expected && absorbed < big.size()) {
      tail.obs += big[absorbed].obs;
      tail.expc += big[absorbed].expc;
      ++absorbed;
    }
    big.erase(big.begin(), big.begin() + static_cast<std::ptrdiff_t>(absorbed));
    if (tail.expc > 0.0) big.push_back(tail);
  }
  if (big.size() < 2) throw std::invalid_argument("chi_square: fewer than two categories (dof 0)");

  ChiSquareResult out;
  for (const auto& c : big) out.statistic += (c.obs - c.expc) * (c.obs - c.expc) / c.expc;
  out.dof = static_cast<int>(big.size()) - 1;
  out.p_value = out.statistic <= 0.0 ? 1.0 : boost::math::gamma_q(0.5 * out.dof, 0.5 * out.statistic);
  return out;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9) {
    throw std::invalid_argument("tv_distance: inputs must be probability vectors");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw std::invalid_argument("tv_distance: negative entry");
    acc += std::abs(p[i] - q[i]);
  }
  return 0.5 * acc;
}

std::pair<double, double> wilson_interval(std::size_t hits, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace critbranch
