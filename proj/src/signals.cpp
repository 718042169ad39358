#include "pocs/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pocs {

namespace {

constexpr double kUnitNormTol = 1e-12;
constexpr double kFrameTol = 1e-10;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

SparseSignal::SparseSignal(int n, std::vector<int> support, std::vector<double> values)
    : n_(n), support_(std::move(support)), values_(std::move(values)) {
  require(n_ >= 1, "SparseSignal: dimension must be positive");
  require(support_.size() == values_.size(), "SparseSignal: support/values size mismatch");
  require(!support_.empty() && static_cast<int>(support_.size()) <= n_,
          "SparseSignal: sparsity must be in [1, n]");
  for (std::size_t i = 0; i < support_.size(); ++i) {
    require(support_[i] >= 0 && support_[i] < n_, "SparseSignal: support index out of range");
    require(i == 0 || support_[i - 1] < support_[i], "SparseSignal: support must be sorted and distinct");
    require(values_[i] != 0.0, "SparseSignal: stored values must be nonzero");
  }
  double sq = 0.0;
  l1_ = 0.0;
  for (double v : values_) {
    sq += v * v;
    l1_ += std::abs(v);
  }
  require(std::abs(sq - 1.0) <= kUnitNormTol, "SparseSignal: values must have unit l2 norm");
}

Eigen::VectorXd SparseSignal::dense() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
  for (std::size_t i = 0; i < support_.size(); ++i) x(support_[i]) = values_[i];
  return x;
}

nlohmann::json SparseSignal::to_json() const {
  return {{"n", n_}, {"support", support_}, {"values", values_}};
}

SparseSignal SparseSignal::from_json(const nlohmann::json& j) {
  return SparseSignal(j.at("n").get<int>(), j.at("support").get<std::vector<int>>(),
                      j.at("values").get<std::vector<double>>());
}

LowRankSignal::LowRankSignal(int p, int q, Eigen::VectorXd sigma, Eigen::MatrixXd u1,
                             Eigen::MatrixXd v1)
    : p_(p), q_(q), sigma_(std::move(sigma)), u1_(std::move(u1)), v1_(std::move(v1)) {
  const int r = static_cast<int>(sigma_.size());
  require(p_ >= 1 && p_ <= q_, "LowRankSignal: need 1 <= p <= q");
  require(r >= 1 && r <= p_, "LowRankSignal: rank must be in [1, p]");
  require(u1_.rows() == p_ && u1_.cols() == r, "LowRankSignal: U1 must be p x r");
  require(v1_.rows() == q_ && v1_.cols() == r, "LowRankSignal: V1 must be q x r");
  for (int i = 0; i < r; ++i) {
    require(sigma_(i) > 0.0, "LowRankSignal: singular values must be positive");
    require(i == 0 || sigma_(i - 1) >= sigma_(i), "LowRankSignal: singular values must be sorted");
  }
  require(std::abs(sigma_.squaredNorm() - 1.0) <= kUnitNormTol,
          "LowRankSignal: singular values must have unit l2 norm");
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(r, r);
  require((u1_.transpose() * u1_ - eye).cwiseAbs().maxCoeff() <= kFrameTol,
          "LowRankSignal: U1 columns must be orthonormal");
  require((v1_.transpose() * v1_ - eye).cwiseAbs().maxCoeff() <= kFrameTol,
          "LowRankSignal: V1 columns must be orthonormal");
  nuclear_ = sigma_.sum();
}

Eigen::MatrixXd LowRankSignal::dense() const {
  return u1_ * sigma_.asDiagonal() * v1_.transpose();
}

Eigen::VectorXd LowRankSignal::flat() const {
  const Eigen::MatrixXd x = dense();
  return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
}

nlohmann::json LowRankSignal::to_json() const {
  auto rows_of = [](const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
  };
  return {{"p", p_},
          {"q", q_},
          {"r", rank()},
          {"sigma", std::vector<double>(sigma_.data(), sigma_.data() + sigma_.size())},
          {"U1", rows_of(u1_)},
          {"V1", rows_of(v1_)}};
}

LowRankSignal LowRankSignal::from_json(const nlohmann::json& j) {
  const int p = j.at("p").get<int>();
  const int q = j.at("q").get<int>();
  const int r = j.at("r").get<int>();
  auto sigma = j.at("sigma").get<std::vector<double>>();
  require(static_cast<int>(sigma.size()) == r, "LowRankSignal: sigma length must equal r");
  auto read = [r](const nlohmann::json& rows, int nrows) {
    Eigen::MatrixXd m(nrows, r);
    require(static_cast<int>(rows.size()) == nrows, "LowRankSignal: factor row count mismatch");
    for (int i = 0; i < nrows; ++i) {
      require(static_cast<int>(rows[i].size()) == r, "LowRankSignal: factor column count mismatch");
      for (int k = 0; k < r; ++k) m(i, k) = rows[i][k].get<double>();
    }
    return m;
  };
  return LowRankSignal(p, q, Eigen::Map<Eigen::VectorXd>(sigma.data(), r), read(j.at("U1"), p),
                       read(j.at("V1"), q));
}

std::pair<double, double> equal_but_one_profile(int k, double target_l1) {
  require(k >= 2, "equal_but_one_profile: need at least two entries");
  const double root_k = std::sqrt(static_cast<double>(k));
  require(target_l1 > 1.0 && target_l1 <= root_k * (1.0 + 1e-15),
          "target l1 must lie in (1, sqrt(k)]");
  const double l = std::min(target_l1, root_k);
  if (root_k - l <= 1e-12 * root_k) return {1.0 / root_k, 1.0 / root_k};
  // Eliminating big = l - (k-1)*small gives k(k-1) small^2 - 2l(k-1) small + l^2 - 1 = 0
  // with reduced discriminant (k - l^2)/(k - 1).
  const double disc = (static_cast<double>(k) - l * l) / (k - 1.0);
  require(disc >= -1e-15, "equal_but_one_profile: negative discriminant");
  const double root = std::sqrt(std::max(disc, 0.0));
  // The smaller root for `small` gives big - small = root >= 0.
  const double small = (l - root) / k;
  const double big = small + root;
  require(small > 0.0, "equal_but_one_profile: no positive solution");
  return {big, small};
}

std::vector<int> random_support(int n, int s, Rng& rng) {
  require(s >= 1 && s <= n, "sparsity must satisfy 1 <= s <= n");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < s; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  std::vector<int> support(idx.begin(), idx.begin() + s);
  std::sort(support.begin(), support.end());
  return support;
}

SparseSignal make_equal_amplitude_sparse(int n, std::vector<int> support,
                                         const std::vector<double>& signs) {
  const int s = static_cast<int>(support.size());
  require(s >= 1 && s <= n, "sparsity must satisfy 1 <= s <= n");
  require(static_cast<int>(signs.size()) == s, "sign pattern length must equal s");
  const double a = 1.0 / std::sqrt(static_cast<double>(s));
  std::vector<double> values(s);
  for (int i = 0; i < s; ++i) {
    require(signs[i] == 1.0 || signs[i] == -1.0, "signs must be +1 or -1");
    values[i] = signs[i] * a;
  }
  return SparseSignal(n, std::move(support), std::move(values));
}

SparseSignal make_equal_amplitude_sparse(int n, int s, Rng& rng,
                                         const std::optional<std::vector<double>>& signs) {
  require(n >= 1 && s >= 1 && s <= n, "sparsity must satisfy 1 <= s <= n");
  std::vector<int> support = random_support(n, s, rng);
  std::vector<double> sg;
  if (signs) {
    sg = *signs;
  } else {
    sg.resize(s);
    for (double& v : sg) v = rng.sign();
  }
  return make_equal_amplitude_sparse(n, std::move(support), sg);
}

SparseSignal make_sparse_with_l1(int n, int s, double target_l1, Rng& rng) {
  require(n >= 1 && s >= 2 && s <= n, "make_sparse_with_l1: need 2 <= s <= n");
  const auto [big, small] = equal_but_one_profile(s, target_l1);
  std::vector<int> support = random_support(n, s, rng);
  // The larger entry lands on a uniformly chosen support position.
  const auto big_pos = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(s)));
  std::vector<double> values(s);
  for (int i = 0; i < s; ++i) values[i] = rng.sign() * (i == big_pos ? big : small);
  return SparseSignal(n, std::move(support), std::move(values));
}

Eigen::MatrixXd haar_frame(int p, int k, Rng& rng) {
  require(k >= 1 && k <= p, "haar_frame: need 1 <= k <= p");
  Eigen::MatrixXd g(p, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < p; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, k);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

LowRankSignal make_lowrank_with_nuclear(int p, int q, int r, double target_nuclear, Rng& rng) {
  require(p >= 1 && p <= q, "make_lowrank_with_nuclear: need 1 <= p <= q");
  require(r >= 1 && r <= p, "make_lowrank_with_nuclear: need 1 <= r <= p");
  Eigen::VectorXd sigma(r);
  if (r == 1) {
    require(std::abs(target_nuclear - 1.0) <= 1e-12, "rank-1 signals have nuclear norm 1");
    sigma(0) = 1.0;
  } else {
    const auto [big, small] = equal_but_one_profile(r, target_nuclear);
    sigma.setConstant(small);
    sigma(0) = big;
  }
  Eigen::MatrixXd u1 = haar_frame(p, r, rng);
  Eigen::MatrixXd v1 = haar_frame(q, r, rng);
  return LowRankSignal(p, q, std::move(sigma), std::move(u1), std::move(v1));
}

}  // namespace pocs
