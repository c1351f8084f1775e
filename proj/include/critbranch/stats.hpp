#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "critbranch/error.hpp"

namespace critbranch {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based family of independent random streams. stream(k) depends only
/// on (master_seed, k), so replicate k sees the same draws under any schedule.
class StreamFamily {
 public:
  explicit StreamFamily(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t seed_for(std::uint64_t index) const {
    return mix64(mix64(master_) ^ mix64(index + 0x632be59bd9b4e019ULL));
  }
  Rng stream(std::uint64_t index) const { return Rng(seed_for(index)); }
  /// A derived family, for suites that need several independent groups.
  StreamFamily child(std::uint64_t tag) const { return StreamFamily(seed_for(~tag)); }

 private:
  std::uint64_t master_;
};

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct EmpiricalSample {
  std::vector<double> values;
  /// Number of draws that hit the atom (not stored in `values`).
  std::size_t atom_count = 0;
  double atom_at = 0.0;

  std::size_t size() const { return values.size() + atom_count; }
};

/// sup_x |F_n(x) - F(x)| for the empirical CDF of `sample`.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);
double ks_statistic(const EmpiricalSample& sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic 1% critical value 1.63 / sqrt(N).
inline double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit. Categories with expected count below
/// `min_expected` are pooled into a tail bucket (smallest expected first,
/// ties by index) until the bucket itself reaches `min_expected`.
ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected_prob,
                           double min_expected = 5.0);

/// (1/2) sum |p_i - q_i|; both inputs must sum to 1 within 1e-9.
double tv_distance(std::span<const double> p, std::span<const double> q);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

int default_workers();

/// Runs task(replicate_index, rng) for every replicate with rng =
/// streams.stream(replicate_index) and returns results in replicate order.
/// The first failing replicate (lowest index) is rethrown as ReplicateError.
template <class Task>
auto mc_collect(Task&& task, std::size_t replicates, const StreamFamily& streams, int workers = 0)
    -> std::vector<std::invoke_result_t<Task&, std::size_t, Rng&>> {
  using Result = std::invoke_result_t<Task&, std::size_t, Rng&>;
  std::vector<Result> results(replicates);
  if (workers <= 0) workers = default_workers();
  workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers),
                                                   std::max<std::size_t>(replicates, 1)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex err_mutex;
  std::size_t err_index = replicates;
  std::string err_what;

  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= replicates) return;
      if (stop.load()) {
        // Indices below a recorded failure still run, so the lowest failing one wins.
        std::lock_guard lock(err_mutex);
        if (r > err_index) return;
      }
      try {
        Rng rng = streams.stream(r);
        results[r] = task(r, rng);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        if (r < err_index) {
          err_index = r;
          err_what = e.what();
        }
        stop = true;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (err_index < replicates) throw ReplicateError(err_index, err_what);
  return results;
}

/// Folds per-replicate results in replicate order, so the aggregate does not
/// depend on the worker count.
template <class Task, class Acc, class Fold>
Acc mc_run(Task&& task, std::size_t replicates, const StreamFamily& streams, Acc init, Fold fold,
           int workers = 0) {
  auto results = mc_collect(std::forward<Task>(task), replicates, streams, workers);
  for (auto& r : results) init = fold(std::move(init), r);
  return init;
}

/// Sample mean and standard error of a real-valued replicate function.
template <class Task>
MeanEstimate mc_mean(Task&& task, std::size_t replicates, const StreamFamily& streams,
                     int workers = 0) {
  auto xs = mc_collect(std::forward<Task>(task), replicates, streams, workers);
  MeanEstimate out;
  out.count = xs.size();
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  if (xs.size() > 1) {
    out.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return out;
}

/// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::size_t hits, std::size_t trials, double z = 1.96);

}  // namespace critbranch
