#pragma once

#include <random>

#include "mtax/gmm/mixture.hpp"

namespace mtax::gmm {

template <typename Scalar>
struct Draws {
  Matrix<Scalar> samples;                  ///< n x d
  std::vector<std::size_t> assignments;    ///< generating component per row
};

/// Draws n i.i.d. samples. Consumes, per row, one uniform for the component
/// then d standard normals, so results are fixed for a given generator state.
template <typename Scalar, typename Rng>
Draws<Scalar> draw_samples(const GaussianMixture<Scalar> &g, std::size_t n, Rng &rng) {
  const auto d = g.dims();
  std::vector<Matrix<Scalar>> factors;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto &c : g.components()) {
    Eigen::LLT<Matrix<Scalar>> llt(c.cov);
    if (llt.info() != Eigen::Success) throw InvalidArgument("covariance is not positive definite");
    factors.push_back(llt.matrixL());
    acc += static_cast<double>(c.weight);
    cumulative.push_back(acc);
  }

  std::uniform_real_distribution<double> uniform(0.0, acc);
  std::normal_distribution<Scalar> normal(Scalar(0), Scalar(1));
  Draws<Scalar> out{Matrix<Scalar>(static_cast<Eigen::Index>(n), d), std::vector<std::size_t>(n)};
  Vector<Scalar> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform(rng);
    std::size_t a = 0;
    while (a + 1 < cumulative.size() && u >= cumulative[a]) ++a;
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
    out.samples.row(static_cast<Eigen::Index>(i)) = (g[a].mean + factors[a] * z).transpose();
    out.assignments[i] = a;
  }
  return out;
}

} // namespace mtax::gmm
