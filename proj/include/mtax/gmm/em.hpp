#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Eigenvalues>

#include "mtax/gmm/mixture.hpp"

namespace mtax::gmm {

enum class InitPolicy { kmeans, random_from_data };

struct EmConfig {
  int k = 3;
  int max_iters = 200;
  /// Stop when |ll_t - ll_{t-1}| <= rel_tol * |ll_t|.
  double rel_tol = 1e-6;
  /// Covariances are kept above diag(cov_floor_rel * channel variance), and
  /// never below cov_floor_abs per channel.
  double cov_floor_rel = 1e-6;
  double cov_floor_abs = 1e-9;
  InitPolicy init = InitPolicy::kmeans;
  std::uint64_t seed = 0;
  /// Lloyd iterations run after k-means++ seeding.
  int kmeans_iters = 10;
};

template <typename Scalar>
struct FitResult {
  GaussianMixture<Scalar> mixture;
  int iterations = 0;
  /// Total log-likelihood at the initial parameters and after every M-step.
  std::vector<Scalar> log_likelihoods;
  Scalar final_log_likelihood = 0;
  bool converged = false;
  /// All rows identical: a single component with a floored covariance.
  bool degenerate = false;
};

namespace detail {

template <typename Scalar>
Vector<Scalar> channel_floor(const Eigen::Ref<const Matrix<Scalar>> &x, const EmConfig &cfg) {
  const Vector<Scalar> mean = x.colwise().mean().transpose();
  const Vector<Scalar> var =
      (x.rowwise() - mean.transpose()).array().square().colwise().sum().transpose() / Scalar(x.rows());
  return (var.array() * Scalar(cfg.cov_floor_rel)).max(Scalar(cfg.cov_floor_abs)).matrix();
}

/// Projects `cov` onto {S : S >= diag(floor)}; the maximum-likelihood
/// covariance under that constraint. Leaves it untouched when feasible.
template <typename Scalar>
Matrix<Scalar> apply_floor(const Matrix<Scalar> &cov, const Vector<Scalar> &floor) {
  const Vector<Scalar> s = floor.array().sqrt();
  const Vector<Scalar> inv_s = s.cwiseInverse();
  Matrix<Scalar> scaled = inv_s.asDiagonal() * cov * inv_s.asDiagonal();
  scaled = Scalar(0.5) * (scaled + scaled.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(scaled);
  if (eig.eigenvalues().minCoeff() >= Scalar(1)) return cov;
  const Vector<Scalar> clamped = eig.eigenvalues().cwiseMax(Scalar(1));
  Matrix<Scalar> fixed = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  fixed = s.asDiagonal() * fixed * s.asDiagonal();
  return Scalar(0.5) * (fixed + fixed.transpose());
}

template <typename Scalar>
Matrix<Scalar> covariance(const Eigen::Ref<const Matrix<Scalar>> &x, const Vector<Scalar> &mean) {
  const Matrix<Scalar> c = x.rowwise() - mean.transpose();
  Matrix<Scalar> cov = c.transpose() * c / Scalar(x.rows());
  return Scalar(0.5) * (cov + cov.transpose());
}

template <typename Scalar>
struct Params {
  std::vector<Scalar> weights;
  std::vector<Vector<Scalar>> means;
  std::vector<Matrix<Scalar>> covs;
};

template <typename Scalar>
Params<Scalar> init_kmeans(const Eigen::Ref<const Matrix<Scalar>> &x, int k, const Vector<Scalar> &floor,
                           const EmConfig &cfg, std::mt19937_64 &rng) {
  const auto n = x.rows();
  std::vector<Vector<Scalar>> centers;
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.push_back(x.row(pick(rng)).transpose());

  Vector<Scalar> d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (x.row(i).transpose() - centers[0]).squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    const double total = static_cast<double>(d2.sum());
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (chosen = 0; chosen < n - 1; ++chosen) {
        acc += static_cast<double>(d2[chosen]);
        if (u < acc) break;
      }
    } else {
      chosen = pick(rng);
    }
    centers.push_back(x.row(chosen).transpose());
    for (Eigen::Index i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (x.row(i).transpose() - centers.back()).squaredNorm());
  }

  std::vector<int> label(static_cast<std::size_t>(n), 0);
  for (int it = 0; it <= cfg.kmeans_iters; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      Scalar best_d = std::numeric_limits<Scalar>::infinity();
      for (int c = 0; c < k; ++c) {
        const Scalar dc = (x.row(i).transpose() - centers[static_cast<std::size_t>(c)]).squaredNorm();
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      changed |= label[static_cast<std::size_t>(i)] != best;
      label[static_cast<std::size_t>(i)] = best;
    }
    if (it > 0 && !changed) break;
    if (it == cfg.kmeans_iters) break;
    for (int c = 0; c < k; ++c) {
      Vector<Scalar> sum = Vector<Scalar>::Zero(x.cols());
      Eigen::Index count = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (label[static_cast<std::size_t>(i)] == c) {
          sum += x.row(i).transpose();
          ++count;
        }
      if (count > 0) centers[static_cast<std::size_t>(c)] = sum / Scalar(count);
    }
  }

  const Vector<Scalar> global_mean = x.colwise().mean().transpose();
  const Matrix<Scalar> global_cov = apply_floor(covariance<Scalar>(x, global_mean), floor);
  Params<Scalar> p;
  Scalar total = 0;
  for (int c = 0; c < k; ++c) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i)
      if (label[static_cast<std::size_t>(i)] == c) members.push_back(i);
    const auto m = static_cast<Eigen::Index>(members.size());
    Matrix<Scalar> cov = global_cov;
    if (m > x.cols()) {
      Matrix<Scalar> sub(m, x.cols());
      for (Eigen::Index r = 0; r < m; ++r) sub.row(r) = x.row(members[static_cast<std::size_t>(r)]);
      cov = apply_floor(covariance<Scalar>(sub, centers[static_cast<std::size_t>(c)]), floor);
    }
    const Scalar w = std::max<Scalar>(Scalar(m), Scalar(1));
    p.weights.push_back(w);
    total += w;
    p.means.push_back(centers[static_cast<std::size_t>(c)]);
    p.covs.push_back(cov);
  }
  for (auto &w : p.weights) w /= total;
  return p;
}

template <typename Scalar>
Params<Scalar> init_random(const Eigen::Ref<const Matrix<Scalar>> &x, int k, const Vector<Scalar> &floor,
                           std::mt19937_64 &rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Eigen::Index>(i);
  // partial Fisher-Yates
  for (int c = 0; c < k; ++c) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(c), idx.size() - 1);
    std::swap(idx[static_cast<std::size_t>(c)], idx[pick(rng)]);
  }
  const Vector<Scalar> global_mean = x.colwise().mean().transpose();
  const Matrix<Scalar> global_cov = apply_floor(covariance<Scalar>(x, global_mean), floor);
  Params<Scalar> p;
  for (int c = 0; c < k; ++c) {
    p.weights.push_back(Scalar(1) / Scalar(k));
    p.means.push_back(x.row(idx[static_cast<std::size_t>(c)]).transpose());
    p.covs.push_back(global_cov);
  }
  return p;
}

template <typename Scalar>
std::vector<GaussianComponent<Scalar>> to_components(const Params<Scalar> &p) {
  std::vector<GaussianComponent<Scalar>> out;
  Scalar total = 0;
  for (std::size_t c = 0; c < p.weights.size(); ++c)
    if (p.weights[c] > Scalar(0)) total += p.weights[c];
  for (std::size_t c = 0; c < p.weights.size(); ++c)
    if (p.weights[c] > Scalar(0)) out.push_back({p.weights[c] / total, p.means[c], p.covs[c]});
  return out;
}

/// E-step: fills responsibilities (n x k) and returns the total log-likelihood.
template <typename Scalar>
Scalar expectation(const Eigen::Ref<const Matrix<Scalar>> &x, const Params<Scalar> &p, Matrix<Scalar> &resp) {
  const auto k = static_cast<Eigen::Index>(p.weights.size());
  resp.resize(x.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    if (p.weights[cu] <= Scalar(0)) {
      resp.col(c).setConstant(-std::numeric_limits<Scalar>::infinity());
      continue;
    }
    resp.col(c) = GaussianDensity<Scalar>(p.means[cu], p.covs[cu]).log_density_rows(x).array() +
                  std::log(p.weights[cu]);
  }
  Scalar ll = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Scalar lse = log_sum_exp(resp.row(i));
    ll += lse;
    resp.row(i) = (resp.row(i).array() - lse).exp();
  }
  return ll;
}

template <typename Scalar>
void maximization(const Eigen::Ref<const Matrix<Scalar>> &x, const Matrix<Scalar> &resp,
                  const Vector<Scalar> &floor, Params<Scalar> &p) {
  const auto n = Scalar(x.rows());
  for (Eigen::Index c = 0; c < resp.cols(); ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const Scalar nk = resp.col(c).sum();
    if (!(nk > Scalar(0))) {
      p.weights[cu] = Scalar(0);
      continue;
    }
    const Vector<Scalar> mean = (x.transpose() * resp.col(c)) / nk;
    const Matrix<Scalar> centered = x.rowwise() - mean.transpose();
    Matrix<Scalar> cov = centered.transpose() * resp.col(c).asDiagonal() * centered / nk;
    cov = Scalar(0.5) * (cov + cov.transpose()).eval();
    p.weights[cu] = nk / n;
    p.means[cu] = mean;
    p.covs[cu] = apply_floor(cov, floor);
  }
}

} // namespace detail

/**
 * Maximum-likelihood Gaussian mixture by expectation-maximization.
 *
 * `data` holds one sample per row. Requires n > k * d and finite entries.
 * Identical rows short-circuit to a flagged single-component fit. Components
 * whose responsibility mass underflows to zero are dropped from the result.
 */
template <typename Scalar>
FitResult<Scalar> fit_em(const Eigen::Ref<const Matrix<Scalar>> &data, const EmConfig &cfg) {
  if (cfg.k < 1) throw InvalidArgument("EM needs k >= 1");
  if (cfg.max_iters < 1 || !(cfg.rel_tol > 0.0) || !(cfg.cov_floor_rel >= 0.0) || !(cfg.cov_floor_abs > 0.0))
    throw InvalidArgument("EM tolerances must be positive");
  const auto n = data.rows();
  const auto d = data.cols();
  if (d < 1) throw InvalidArgument("EM needs at least one channel");
  if (n <= static_cast<Eigen::Index>(cfg.k) * d)
    throw InvalidArgument("EM needs more than k*d samples (" + std::to_string(n) + " <= " +
                          std::to_string(cfg.k * d) + ")");
  if (!data.allFinite()) throw InvalidArgument("EM input has non-finite entries");

  const Vector<Scalar> floor = detail::channel_floor<Scalar>(data, cfg);

  if ((data.rowwise() - data.row(0)).cwiseAbs().maxCoeff() == Scalar(0)) {
    auto mix = GaussianMixture<Scalar>::single(data.row(0).transpose(), Matrix<Scalar>(floor.asDiagonal()));
    const Scalar ll = Scalar(n) * GaussianDensity<Scalar>(mix[0].mean, mix[0].cov).log_density(mix[0].mean);
    return {std::move(mix), 0, {ll}, ll, true, true};
  }

  std::mt19937_64 rng(cfg.seed);
  auto params = cfg.init == InitPolicy::kmeans ? detail::init_kmeans<Scalar>(data, cfg.k, floor, cfg, rng)
                                               : detail::init_random<Scalar>(data, cfg.k, floor, rng);

  Matrix<Scalar> resp;
  std::vector<Scalar> lls{detail::expectation<Scalar>(data, params, resp)};
  bool converged = false;
  int it = 0;
  while (it < cfg.max_iters) {
    ++it;
    detail::maximization<Scalar>(data, resp, floor, params);
    const Scalar ll = detail::expectation<Scalar>(data, params, resp);
    const Scalar prev = lls.back();
    lls.push_back(ll);
    if (std::abs(ll - prev) <= Scalar(cfg.rel_tol) * std::abs(ll)) {
      converged = true;
      break;
    }
  }
  const Scalar final_ll = lls.back();
  return {GaussianMixture<Scalar>(detail::to_components(params)), it, std::move(lls), final_ll, converged, false};
}

/// Free parameters of a full-covariance mixture.
inline long mixture_parameter_count(int k, long d) { return (k - 1) + k * d + k * d * (d + 1) / 2; }

template <typename Scalar>
struct BicEntry {
  int k = 0;
  Scalar log_likelihood = 0;
  Scalar bic = 0;
};

template <typename Scalar>
struct BicSweep {
  std::vector<BicEntry<Scalar>> entries;
  FitResult<Scalar> best;
};

/// Fits every k in [k_min, k_max] that the sample count allows and keeps the
/// lowest BIC = -2 ll + p ln n. Ties keep the smaller k.
template <typename Scalar>
BicSweep<Scalar> select_k_bic(const Eigen::Ref<const Matrix<Scalar>> &data, EmConfig cfg, int k_min = 1,
                              int k_max = 5) {
  if (k_min < 1 || k_max < k_min) throw InvalidArgument("BIC sweep needs 1 <= k_min <= k_max");
  std::vector<BicEntry<Scalar>> entries;
  std::optional<FitResult<Scalar>> best;
  Scalar best_bic = std::numeric_limits<Scalar>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    if (data.rows() <= static_cast<Eigen::Index>(k) * data.cols()) break;
    cfg.k = k;
    auto fit = fit_em<Scalar>(data, cfg);
    const auto p = mixture_parameter_count(static_cast<int>(fit.mixture.size()), data.cols());
    const Scalar bic = Scalar(-2) * fit.final_log_likelihood + Scalar(p) * std::log(Scalar(data.rows()));
    entries.push_back({k, fit.final_log_likelihood, bic});
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(fit);
    }
    if (best && best->degenerate) break;
  }
  if (!best) throw InvalidArgument("BIC sweep: too few samples for any k");
  return {std::move(entries), std::move(*best)};
}

} // namespace mtax::gmm
