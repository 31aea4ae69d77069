#pragma once

#include <cstdint>
#include <random>

#include "mtax/gmm/mixture.hpp"
#include "mtax/gmm/sampling.hpp"

namespace mtax::gmm {

/**
 * Closed-form KL(a || b) between two Gaussians, ignoring component weights:
 *
 *   0.5 * [ tr(Sb^-1 Sa) + (mb - ma)' Sb^-1 (mb - ma) - d + ln(det Sb / det Sa) ]
 *
 * Exactly 0 for parameter-identical inputs. Rounding residue below zero is
 * clipped to 0.
 */
template <typename Scalar>
Scalar gauss_kl(const GaussianComponent<Scalar> &a, const GaussianComponent<Scalar> &b) {
  const auto d = a.dims();
  if (b.dims() != d || a.cov.rows() != d || b.cov.rows() != d)
    throw InvalidArgument("gauss_kl: dimension mismatch");
  if (a.mean == b.mean && a.cov == b.cov) {
    if (Eigen::LLT<Matrix<Scalar>>(a.cov).info() != Eigen::Success)
      throw InvalidArgument("gauss_kl: covariance is not positive definite");
    return Scalar(0);
  }
  Eigen::LLT<Matrix<Scalar>> la(a.cov), lb(b.cov);
  if (la.info() != Eigen::Success || lb.info() != Eigen::Success)
    throw InvalidArgument("gauss_kl: covariance is not positive definite");

  const Scalar trace = lb.solve(a.cov).trace();
  const Vector<Scalar> z = lb.matrixL().solve(b.mean - a.mean);
  const Scalar log_det_a = Scalar(2) * la.matrixLLT().diagonal().array().log().sum();
  const Scalar log_det_b = Scalar(2) * lb.matrixLLT().diagonal().array().log().sum();
  const Scalar kl = Scalar(0.5) * (trace + z.squaredNorm() - static_cast<Scalar>(d) + log_det_b - log_det_a);
  return std::max(kl, Scalar(0));
}

template <typename Scalar>
struct VariationalKl {
  Scalar value = 0;   ///< max(raw, 0)
  Scalar raw = 0;
  bool clamped = false;
};

/**
 * Variational approximation of KL(f || g) between mixtures:
 *
 *   sum_a pi_a log( sum_a' pi_a' exp(-KL(f_a||f_a')) / sum_b w_b exp(-KL(f_a||g_b)) )
 *
 * evaluated with log-sum-exp. Negative raw values are clamped to 0 and
 * reported through `clamped`.
 */
template <typename Scalar>
VariationalKl<Scalar> variational_kl_detail(const GaussianMixture<Scalar> &f, const GaussianMixture<Scalar> &g) {
  if (f.dims() != g.dims()) throw InvalidArgument("variational_kl: dimension mismatch");
  const auto nf = static_cast<Eigen::Index>(f.size());
  const auto ng = static_cast<Eigen::Index>(g.size());
  Scalar raw = 0;
  Vector<Scalar> self(nf), cross(ng);
  for (Eigen::Index a = 0; a < nf; ++a) {
    const auto &fa = f[static_cast<std::size_t>(a)];
    for (Eigen::Index k = 0; k < nf; ++k) {
      const auto &fk = f[static_cast<std::size_t>(k)];
      self[k] = std::log(fk.weight) - gauss_kl(fa, fk);
    }
    for (Eigen::Index b = 0; b < ng; ++b) {
      const auto &gb = g[static_cast<std::size_t>(b)];
      cross[b] = std::log(gb.weight) - gauss_kl(fa, gb);
    }
    raw += fa.weight * (log_sum_exp(self) - log_sum_exp(cross));
  }
  return {std::max(raw, Scalar(0)), raw, raw < Scalar(0)};
}

template <typename Scalar>
Scalar variational_kl(const GaussianMixture<Scalar> &f, const GaussianMixture<Scalar> &g) {
  return variational_kl_detail(f, g).value;
}

/// Average of the two clamped directed variational divergences.
template <typename Scalar>
Scalar symmetric_divergence(const GaussianMixture<Scalar> &f, const GaussianMixture<Scalar> &g) {
  if (f.dims() != g.dims()) throw InvalidArgument("symmetric_divergence: dimension mismatch");
  return (variational_kl(f, g) + variational_kl(g, f)) / Scalar(2);
}

template <typename Scalar>
struct MonteCarloKl {
  Scalar estimate = 0;
  Scalar std_error = 0;
  std::size_t draws = 0;
};

/// Sampling estimate of KL(f || g): mean of log f(x) - log g(x) over n draws
/// x ~ f from a mt19937_64 seeded with `seed`. Requires n >= 1000.
template <typename Scalar>
MonteCarloKl<Scalar> mc_kl(const GaussianMixture<Scalar> &f, const GaussianMixture<Scalar> &g, std::size_t n,
                           std::uint64_t seed) {
  if (f.dims() != g.dims()) throw InvalidArgument("mc_kl: dimension mismatch");
  if (n < 1000) throw InvalidArgument("mc_kl: needs at least 1000 draws");
  std::mt19937_64 rng(seed);
  const auto draws = draw_samples(f, n, rng);
  const MixtureDensity<Scalar> df(f), dg(g);

  const Matrix<Scalar> lf = df.weighted_log_densities(draws.samples);
  const Matrix<Scalar> lg = dg.weighted_log_densities(draws.samples);
  std::vector<double> diffs(n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < lf.rows(); ++i) {
    diffs[static_cast<std::size_t>(i)] = static_cast<double>(log_sum_exp(lf.row(i)) - log_sum_exp(lg.row(i)));
    sum += diffs[static_cast<std::size_t>(i)];
  }
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  double ss = 0.0;
  for (double v : diffs) ss += (v - mean) * (v - mean);
  const double var = ss / (nd - 1.0);
  return {static_cast<Scalar>(mean), static_cast<Scalar>(std::sqrt(var / nd)), n};
}

} // namespace mtax::gmm
