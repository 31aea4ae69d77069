#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mtax/error.hpp"

namespace mtax::gmm {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct GaussianComponent {
  Scalar weight = Scalar(1);
  Vector<Scalar> mean;
  Matrix<Scalar> cov;

  Eigen::Index dims() const noexcept { return mean.size(); }

  friend bool operator==(const GaussianComponent &a, const GaussianComponent &b) {
    return a.weight == b.weight && a.mean.size() == b.mean.size() && a.cov.rows() == b.cov.rows() &&
           a.cov.cols() == b.cov.cols() && a.mean == b.mean && a.cov == b.cov;
  }
};

/// Tolerance on the sum of mixture weights.
template <typename Scalar>
constexpr Scalar weight_sum_tolerance() {
  return std::max(Scalar(1e-9), Scalar(100) * std::numeric_limits<Scalar>::epsilon());
}

namespace detail {

template <typename Scalar>
void check_component(const GaussianComponent<Scalar> &c, Eigen::Index d, std::size_t index) {
  const auto where = "component " + std::to_string(index) + ": ";
  if (!(c.weight > Scalar(0) && c.weight <= Scalar(1)))
    throw InvalidArgument(where + "weight must lie in (0, 1]");
  if (c.mean.size() != d || c.cov.rows() != d || c.cov.cols() != d)
    throw InvalidArgument(where + "dimension mismatch");
  if (!c.mean.allFinite() || !c.cov.allFinite()) throw InvalidArgument(where + "non-finite parameter");
  const Scalar scale = std::max(Scalar(1), c.cov.cwiseAbs().maxCoeff());
  const Scalar sym_tol = std::max(Scalar(1e-12), Scalar(16) * std::numeric_limits<Scalar>::epsilon()) * scale;
  if ((c.cov - c.cov.transpose()).cwiseAbs().maxCoeff() > sym_tol)
    throw InvalidArgument(where + "covariance is not symmetric");
  Eigen::LLT<Matrix<Scalar>> llt(c.cov);
  if (llt.info() != Eigen::Success) throw InvalidArgument(where + "covariance is not positive definite");
}

} // namespace detail

/// Weighted sum of multivariate normals sharing one dimension.
template <typename Scalar>
class GaussianMixture {
public:
  using Component = GaussianComponent<Scalar>;

  /// Throws InvalidArgument unless the components form a valid mixture.
  explicit GaussianMixture(std::vector<Component> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidArgument("mixture needs at least one component");
    const auto d = components_.front().dims();
    if (d < 1) throw InvalidArgument("mixture dimension must be at least 1");
    Scalar total = 0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      detail::check_component(components_[i], d, i);
      total += components_[i].weight;
    }
    if (std::abs(total - Scalar(1)) > weight_sum_tolerance<Scalar>())
      throw InvalidArgument("mixture weights must sum to 1");
  }

  /// Single Gaussian with weight 1.
  static GaussianMixture single(Vector<Scalar> mean, Matrix<Scalar> cov) {
    return GaussianMixture({Component{Scalar(1), std::move(mean), std::move(cov)}});
  }

  const std::vector<Component> &components() const noexcept { return components_; }
  const Component &operator[](std::size_t i) const { return components_[i]; }
  std::size_t size() const noexcept { return components_.size(); }
  Eigen::Index dims() const noexcept { return components_.front().dims(); }

  friend bool operator==(const GaussianMixture &a, const GaussianMixture &b) {
    return a.components_ == b.components_;
  }

private:
  std::vector<Component> components_;
};

using GaussianComponentd = GaussianComponent<double>;
using GaussianMixtured = GaussianMixture<double>;

/// Cholesky-factored normal density.
template <typename Scalar>
class GaussianDensity {
public:
  GaussianDensity(const Vector<Scalar> &mean, const Matrix<Scalar> &cov) : mean_(mean), llt_(cov) {
    if (llt_.info() != Eigen::Success) throw InvalidArgument("covariance is not positive definite");
    const auto d = static_cast<Scalar>(mean.size());
    log_norm_ = Scalar(-0.5) * (d * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) + log_det());
  }

  Scalar log_det() const {
    return Scalar(2) * llt_.matrixLLT().diagonal().array().log().sum();
  }

  template <typename Derived>
  Scalar log_density(const Eigen::MatrixBase<Derived> &x) const {
    const Vector<Scalar> z = llt_.matrixL().solve(x - mean_);
    return log_norm_ - Scalar(0.5) * z.squaredNorm();
  }

  /// Log densities of every row of `rows` (n x d).
  Vector<Scalar> log_density_rows(const Eigen::Ref<const Matrix<Scalar>> &rows) const {
    Matrix<Scalar> diff = (rows.rowwise() - mean_.transpose()).transpose();
    llt_.matrixL().solveInPlace(diff);
    return (log_norm_ - Scalar(0.5) * diff.colwise().squaredNorm().array()).matrix().transpose();
  }

  const Eigen::LLT<Matrix<Scalar>> &llt() const noexcept { return llt_; }
  const Vector<Scalar> &mean() const noexcept { return mean_; }

private:
  Vector<Scalar> mean_;
  Eigen::LLT<Matrix<Scalar>> llt_;
  Scalar log_norm_ = 0;
};

/// Numerically stable log(sum(exp(v))). Returns -inf for an all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived> &v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.derived().array() - m).exp().sum());
}

/// Pre-factored mixture for repeated density evaluation.
template <typename Scalar>
class MixtureDensity {
public:
  explicit MixtureDensity(const GaussianMixture<Scalar> &g) : dims_(g.dims()) {
    for (const auto &c : g.components()) {
      log_weights_.push_back(std::log(c.weight));
      densities_.emplace_back(c.mean, c.cov);
    }
  }

  template <typename Derived>
  Scalar log_pdf(const Eigen::MatrixBase<Derived> &x) const {
    Vector<Scalar> terms(static_cast<Eigen::Index>(densities_.size()));
    for (std::size_t a = 0; a < densities_.size(); ++a)
      terms[static_cast<Eigen::Index>(a)] = log_weights_[a] + densities_[a].log_density(x);
    return log_sum_exp(terms);
  }

  /// n x k matrix of log(weight_a) + log N(row_i; component a).
  Matrix<Scalar> weighted_log_densities(const Eigen::Ref<const Matrix<Scalar>> &rows) const {
    Matrix<Scalar> out(rows.rows(), static_cast<Eigen::Index>(densities_.size()));
    for (std::size_t a = 0; a < densities_.size(); ++a)
      out.col(static_cast<Eigen::Index>(a)) =
          densities_[a].log_density_rows(rows).array() + log_weights_[a];
    return out;
  }

  Eigen::Index dims() const noexcept { return dims_; }

private:
  Eigen::Index dims_;
  std::vector<Scalar> log_weights_;
  std::vector<GaussianDensity<Scalar>> densities_;
};

/// log sum_a pi_a N(x; mu_a, Sigma_a). Throws InvalidArgument on a dimension
/// mismatch or non-finite x.
template <typename Scalar, typename Derived>
Scalar log_pdf(const GaussianMixture<Scalar> &g, const Eigen::MatrixBase<Derived> &x) {
  if (x.size() != g.dims()) throw InvalidArgument("log_pdf: dimension mismatch");
  if (!x.allFinite()) throw InvalidArgument("log_pdf: non-finite point");
  return MixtureDensity<Scalar>(g).log_pdf(x);
}

} // namespace mtax::gmm
