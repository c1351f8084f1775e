#include "critbranch/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "critbranch/error.hpp"

namespace critbranch {
namespace {

constexpr double kProbSumTol = 1e-12;

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s) {
  s = trim(s);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ModelError("cannot parse number '" + std::string(s) + "'");
  }
  return value;
}

// Every type must reach every other type through atoms of positive mass.
bool support_irreducible(int d, const std::vector<OffspringLaw>& laws) {
  std::vector<std::vector<int>> adj(d);
  for (int i = 0; i < d; ++i) {
    for (const auto& atom : laws[i].atoms) {
      if (atom.prob <= 0.0) continue;
      for (int j = 0; j < d; ++j) {
        if (atom.counts[j] > 0) adj[i].push_back(j);
      }
    }
  }
  for (int start = 0; start < d; ++start) {
    std::vector<bool> seen(d, false);
    std::vector<int> stack;
    // A type only "reaches" itself through a path of length >= 1.
    for (int j : adj[start]) {
      if (!seen[j]) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
    while (!stack.empty()) {
      int k = stack.back();
      stack.pop_back();
      for (int j : adj[k]) {
        if (!seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) return false;
  }
  return true;
}

}  // namespace

double parse_probability(std::string_view text) {
  text = trim(text);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    double num = parse_number(text.substr(0, slash));
    double den = parse_number(text.substr(slash + 1));
    if (den == 0.0) throw ModelError("zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return parse_number(text);
}

BranchingModel::BranchingModel(int d, std::vector<OffspringLaw> laws)
    : d_(d), laws_(std::move(laws)), mean_(Matrix::Zero(d, d)) {
  if (d_ < 1) throw ModelError("d must be >= 1");
  if (static_cast<int>(laws_.size()) != d_) {
    throw ModelError("expected " + std::to_string(d_) + " offspring laws, got " +
                     std::to_string(laws_.size()));
  }
  cumulative_.resize(d_);
  for (int i = 0; i < d_; ++i) {
    const auto& atoms = laws_[i].atoms;
    const std::string where = "type " + std::to_string(i + 1);
    if (atoms.empty()) throw ModelError(where + ": no offspring atoms");
    std::set<Counts> distinct;
    double total = 0.0;
    for (const auto& atom : atoms) {
      if (static_cast<int>(atom.counts.size()) != d_) {
        throw ModelError(where + ": counts vector of length " + std::to_string(atom.counts.size()) +
                         ", expected " + std::to_string(d_));
      }
      for (int c : atom.counts) {
        if (c < 0) throw ModelError(where + ": negative offspring count");
      }
      if (!(atom.prob >= 0.0) || atom.prob > 1.0) {
        throw ModelError(where + ": probability " + fmt_g(atom.prob) + " outside [0,1]");
      }
      if (!distinct.insert(atom.counts).second) {
        throw ModelError(where + ": duplicate offspring vector");
      }
      total += atom.prob;
      for (int j = 0; j < d_; ++j) mean_(i, j) += atom.prob * atom.counts[j];
    }
    if (std::abs(total - 1.0) > kProbSumTol) {
      throw ModelError(where + ": probabilities sum to " + fmt_g(total));
    }
    double acc = 0.0;
    for (const auto& atom : atoms) {
      acc += atom.prob;
      cumulative_[i].push_back(acc);
    }
    cumulative_[i].back() = 1.0;
  }
  if (!support_irreducible(d_, laws_)) {
    throw ModelError("mean matrix is reducible (support graph not strongly connected)");
  }
  if ((mean_.array() == 0.0).any()) {
    warnings_.push_back("some mean entries m_ij are zero; only irreducibility is assumed");
  }
}

BranchingModel load_model(std::string_view config_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("parse failure: ") + e.what());
  }
  try {
    if (!doc.contains("d") || !doc.contains("offspring")) {
      throw ModelError("model config needs fields 'd' and 'offspring'");
    }
    const int d = doc.at("d").get<int>();
    const auto& per_type = doc.at("offspring");
    if (!per_type.is_array()) throw ModelError("'offspring' must be an array");
    std::vector<OffspringLaw> laws;
    for (const auto& type_atoms : per_type) {
      if (!type_atoms.is_array()) throw ModelError("each offspring law must be an array of atoms");
      OffspringLaw law;
      for (const auto& a : type_atoms) {
        OffspringAtom atom;
        atom.counts = a.at("counts").get<Counts>();
        const auto& p = a.at("prob");
        atom.prob = p.is_string() ? parse_probability(p.get<std::string>()) : p.get<double>();
        law.atoms.push_back(std::move(atom));
      }
      laws.push_back(std::move(law));
    }
    return BranchingModel(d, std::move(laws));
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model config: ") + e.what());
  }
}

BranchingModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_model(buffer.str());
}

MomentData moments(const BranchingModel& model) {
  const int d = model.dim();
  MomentData out;
  out.mean = model.mean();
  out.factorial2.assign(d, Matrix::Zero(d, d));
  for (int i = 0; i < d; ++i) {
    Matrix& f = out.factorial2[i];
    for (const auto& atom : model.law(i).atoms) {
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
          const double kj = atom.counts[j];
          const double kk = atom.counts[k];
          f(j, k) += atom.prob * (kj * kk - (j == k ? kk : 0.0));
        }
      }
    }
  }
  return out;
}

double third_absolute_moment(const BranchingModel& model, int type, const Vector& weights) {
  double acc = 0.0;
  for (const auto& atom : model.law(type).atoms) {
    double w = 0.0;
    for (int j = 0; j < model.dim(); ++j) w += weights[j] * atom.counts[j];
    acc += atom.prob * std::abs(w * w * w);
  }
  return acc;
}

Vector pgf_eval(const BranchingModel& model, const Vector& s) {
  const int d = model.dim();
  if (s.size() != d) throw std::invalid_argument("pgf_eval: dimension mismatch");
  for (int j = 0; j < d; ++j) {
    if (!(s[j] >= 0.0 && s[j] <= 1.0)) throw std::domain_error("pgf_eval: s outside [0,1]^d");
  }
  Vector f = Vector::Zero(d);
  for (int i = 0; i < d; ++i) {
    for (const auto& atom : model.law(i).atoms) {
      double term = atom.prob;
      for (int j = 0; j < d; ++j) {
        if (atom.counts[j] > 0) term *= std::pow(s[j], atom.counts[j]);
      }
      f[i] += term;
    }
  }
  return f;
}

double extinction_by(const BranchingModel& model, int n, int root_type) {
  if (n < 0) throw std::invalid_argument("extinction_by: n < 0");
  Vector s = Vector::Zero(model.dim());
  for (int k = 0; k < n; ++k) s = pgf_eval(model, s).cwiseMin(1.0);
  return s[root_type];
}

Vector q_form_vector(const BranchingModel& model, const Vector& s) {
  const int d = model.dim();
  if (s.size() != d) throw std::invalid_argument("q_form_vector: dimension mismatch");
  if ((s.array() < 0.0).any()) throw std::domain_error("q_form_vector: negative entries");
  const MomentData mom = moments(model);
  Vector q(d);
  for (int i = 0; i < d; ++i) q[i] = 0.5 * s.dot(mom.factorial2[i] * s);
  return q;
}

Matrix offspring_covariance(const BranchingModel& model, int type) {
  const int d = model.dim();
  Matrix c = Matrix::Zero(d, d);
  for (const auto& atom : model.law(type).atoms) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) c(j, k) += atom.prob * atom.counts[j] * atom.counts[k];
    }
  }
  const Vector m = model.mean().row(type).transpose();
  return c - m * m.transpose();
}

Matrix second_moment_matrix(const BranchingModel& model, const Vector& z, int n) {
  if (n < 0) throw std::invalid_argument("second_moment_matrix: n < 0");
  const int d = model.dim();
  const Matrix& m = model.mean();
  std::vector<Matrix> cov;
  for (int i = 0; i < d; ++i) cov.push_back(offspring_covariance(model, i));
  Matrix D = z * z.transpose();
  Vector ez = z;  // E_z[Z(k-1)] as a column vector
  for (int k = 1; k <= n; ++k) {
    Matrix next = m.transpose() * D * m;
    for (int i = 0; i < d; ++i) next += cov[i] * ez[i];
    D = std::move(next);
    ez = m.transpose() * ez;
  }
  return D;
}

Vector to_vector(const Population& z) {
  Vector v(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) v[static_cast<Eigen::Index>(i)] = static_cast<double>(z[i]);
  return v;
}

Population unit_population(int d, int type) {
  Population z(d, 0);
  z.at(type) = 1;
  return z;
}

}  // namespace critbranch
