#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "critbranch/model.hpp"
#include "critbranch/spectral.hpp"

namespace critbranch {

/// Run parameters shared by every suite. Unset optionals fall back to the
/// per-suite defaults listed in suite_defaults().
struct VerifyConfig {
  std::uint64_t seed = 20240611;
  int workers = 0;
  int root_type = 0;
  std::optional<int> n;
  std::optional<int> m;
  std::optional<std::size_t> replicates;
  std::optional<double> t;
  /// Overrides the suite's primary threshold.
  std::optional<double> tolerance;
  std::int64_t max_attempts = 10'000'000;
};

struct SuiteDefaults {
  int n = 0;
  int m = 0;
  std::size_t replicates = 0;
  double t = 1.0;
  double tolerance = 0.0;
};

/// One CSV row. Informational rows carry no threshold and never fail a suite.
struct CheckRow {
  std::string check;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = true;
  bool gating = true;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckRow> rows;

  bool passed() const;
  /// `check,statistic,threshold,pass`; pass is true, false or info.
  std::string csv() const;
};

const std::vector<std::string>& suite_names();
SuiteDefaults suite_defaults(std::string_view suite);

/// Throws std::invalid_argument for an unknown suite and CriticalityError for
/// a non-critical model.
SuiteReport run_suite(std::string_view suite, const BranchingModel& model, const VerifyConfig& config);

/// Spacing of the lattice carrying <u, Z(n)> for n >= 1, or 0 when it is not
/// a lattice this helper recognizes (u constant across types).
double lattice_span(const BranchingModel& model, const SpectralData& spectral);

}  // namespace critbranch
