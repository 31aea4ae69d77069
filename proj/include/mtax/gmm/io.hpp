#pragma once

#include <string>
#include <string_view>

#include "mtax/gmm/em.hpp"
#include "mtax/gmm/mixture.hpp"

namespace mtax::gmm {

/// {"dims": d, "components": [{"weight": w, "mean": [..], "cov": [[..]]}]}
GaussianMixtured parse_mixture_json(std::string_view json);
GaussianMixtured load_mixture(const std::string &path);
std::string mixture_to_json(const GaussianMixtured &g);

/// Fit summary including the per-iteration log-likelihood trace.
std::string fit_report_to_json(const FitResult<double> &fit, const EmConfig &cfg);

} // namespace mtax::gmm
