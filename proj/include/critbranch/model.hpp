#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace critbranch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Offspring vector kappa in N_0^d.
using Counts = std::vector<int>;
/// Population count vector Z(n).
using Population = std::vector<std::int64_t>;

struct OffspringAtom {
  Counts counts;
  double prob = 0.0;
};

struct OffspringLaw {
  std::vector<OffspringAtom> atoms;
};

/// Finite-support multitype Galton-Watson offspring structure. Immutable once
/// constructed; the constructor enforces every invariant (probabilities sum
/// to one, dimensions agree, irreducible support graph).
class BranchingModel {
 public:
  BranchingModel(int d, std::vector<OffspringLaw> laws);

  int dim() const { return d_; }
  const OffspringLaw& law(int type) const { return laws_.at(type); }
  const std::vector<OffspringLaw>& laws() const { return laws_; }

  /// m_ij = E[number of type-j children of a type-i parent].
  const Matrix& mean() const { return mean_; }

  /// Cumulative atom probabilities in config order, last entry forced to 1.
  std::span<const double> cumulative(int type) const { return cumulative_.at(type); }

  /// Non-fatal diagnostics gathered during validation (e.g. zero mean entries).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  int d_;
  std::vector<OffspringLaw> laws_;
  Matrix mean_;
  std::vector<std::vector<double>> cumulative_;
  std::vector<std::string> warnings_;
};

/// Parses the JSON model config:
///   {"d": 2, "offspring": [[{"counts": [1,1], "prob": "1/2"}, ...], ...]}
/// `prob` may be a number, a decimal string or a ratio string "p/q".
/// Throws ModelError on any parse or validation failure.
BranchingModel load_model(std::string_view config_text);
BranchingModel load_model_file(const std::filesystem::path& path);

/// Parses "0.25", "1/4" or "3" into a double. Throws ModelError.
double parse_probability(std::string_view text);

struct MomentData {
  Matrix mean;
  /// factorial2[i](j,k) = E_{e_i}[Z_k(1) Z_j(1) - delta_jk Z_k(1)].
  std::vector<Matrix> factorial2;
  /// Always true for finite support.
  bool third_finite = true;
};

MomentData moments(const BranchingModel& model);

/// E_{e_i}[ |<w, Z(1)>|^3 ].
double third_absolute_moment(const BranchingModel& model, int type, const Vector& weights);

/// f_i(s) = sum_kappa p_i(kappa) prod_j s_j^kappa_j, for s in [0,1]^d.
Vector pgf_eval(const BranchingModel& model, const Vector& s);

/// P_{e_i}(Z(n) = 0), the n-fold pgf iterate at 0.
double extinction_by(const BranchingModel& model, int n, int root_type);

/// q_i[s] = 1/2 sum_{j,k} s_j s_k F_i[j,k], s >= 0.
Vector q_form_vector(const BranchingModel& model, const Vector& s);

/// D_z(n)[i][j] = E_z[Z_i(n) Z_j(n)] from the second-moment recursion
/// D(k) = M^T D(k-1) M + sum_i C_{e_i} E_z[Z_i(k-1)].
Matrix second_moment_matrix(const BranchingModel& model, const Vector& z, int n);

/// Offspring covariance C_{e_i}(j,k) = E[N_j N_k] - m_ij m_ik.
Matrix offspring_covariance(const BranchingModel& model, int type);

Vector to_vector(const Population& z);
Population unit_population(int d, int type);

}  // namespace critbranch
