#ifndef POCS_SIGNALS_HPP
#define POCS_SIGNALS_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <utility>
#include <vector>

#include "pocs/rng.hpp"

namespace pocs {

// Unit-norm s-sparse vector in R^n stored by support and values.
class SparseSignal {
 public:
  SparseSignal(int n, std::vector<int> support, std::vector<double> values);

  int dimension() const { return n_; }
  int sparsity() const { return static_cast<int>(support_.size()); }
  const std::vector<int>& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  double l1() const { return l1_; }

  Eigen::VectorXd dense() const;

  nlohmann::json to_json() const;
  static SparseSignal from_json(const nlohmann::json& j);

 private:
  int n_;
  std::vector<int> support_;
  std::vector<double> values_;
  double l1_;
};

// Rank-r p x q matrix X = U1 diag(sigma) V1^T with unit Frobenius norm.
class LowRankSignal {
 public:
  LowRankSignal(int p, int q, Eigen::VectorXd sigma, Eigen::MatrixXd u1,
                Eigen::MatrixXd v1);

  int rows() const { return p_; }
  int cols() const { return q_; }
  int rank() const { return static_cast<int>(sigma_.size()); }
  const Eigen::VectorXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& u1() const { return u1_; }
  const Eigen::MatrixXd& v1() const { return v1_; }
  double nuclear() const { return nuclear_; }

  Eigen::MatrixXd dense() const;
  // Column-major vectorization, the layout used by the measurement operators.
  Eigen::VectorXd flat() const;

  nlohmann::json to_json() const;
  static LowRankSignal from_json(const nlohmann::json& j);

 private:
  int p_, q_;
  Eigen::VectorXd sigma_;
  Eigen::MatrixXd u1_, v1_;
  double nuclear_;
};

// Positive magnitudes (big, small) of the "all equal but one" profile:
// (k-1) entries equal to `small`, one entry equal to `big`, with
// (k-1)*small + big = target_l1 and (k-1)*small^2 + big^2 = 1.
// Requires k >= 2 and target_l1 in (1, sqrt(k)].
std::pair<double, double> equal_but_one_profile(int k, double target_l1);

SparseSignal make_equal_amplitude_sparse(int n, int s, Rng& rng,
                                         const std::optional<std::vector<double>>& signs = std::nullopt);

// Equal-amplitude signal on a caller-supplied support.
SparseSignal make_equal_amplitude_sparse(int n, std::vector<int> support,
                                         const std::vector<double>& signs);

SparseSignal make_sparse_with_l1(int n, int s, double target_l1, Rng& rng);

LowRankSignal make_lowrank_with_nuclear(int p, int q, int r, double target_nuclear, Rng& rng);

// p x k matrix with orthonormal columns, Haar distributed: Q factor of a
// Gaussian matrix with the signs of diag(R) fixed positive.
Eigen::MatrixXd haar_frame(int p, int k, Rng& rng);

// Uniformly random s-subset of [0, n), sorted.
std::vector<int> random_support(int n, int s, Rng& rng);

}  // namespace pocs

#endif  // POCS_SIGNALS_HPP
