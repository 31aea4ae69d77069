#include "mtax/gmm/io.hpp"

#include <json.hpp>

#include "mtax/text.hpp"

namespace mtax::gmm {

using nlohmann::json;

GaussianMixtured parse_mixture_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("mixture JSON: ") + e.what());
  }
  try {
    const auto d = doc.at("dims").get<Eigen::Index>();
    if (d < 1) throw ParseError("mixture JSON: dims must be >= 1");
    std::vector<GaussianComponentd> comps;
    for (const auto &c : doc.at("components")) {
      GaussianComponentd comp;
      comp.weight = c.at("weight").get<double>();
      const auto mean = c.at("mean").get<std::vector<double>>();
      const auto cov = c.at("cov").get<std::vector<std::vector<double>>>();
      if (static_cast<Eigen::Index>(mean.size()) != d || static_cast<Eigen::Index>(cov.size()) != d)
        throw ParseError("mixture JSON: component size does not match dims");
      comp.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
      comp.cov.resize(d, d);
      for (Eigen::Index r = 0; r < d; ++r) {
        if (static_cast<Eigen::Index>(cov[static_cast<std::size_t>(r)].size()) != d)
          throw ParseError("mixture JSON: covariance row size does not match dims");
        for (Eigen::Index col = 0; col < d; ++col)
          comp.cov(r, col) = cov[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
      }
      comps.push_back(std::move(comp));
    }
    return GaussianMixtured(std::move(comps));
  } catch (const json::exception &e) {
    throw ParseError(std::string("mixture JSON: ") + e.what());
  }
}

GaussianMixtured load_mixture(const std::string &path) { return parse_mixture_json(text::read_file(path)); }

namespace {

json mixture_value(const GaussianMixtured &g) {
  json comps = json::array();
  for (const auto &c : g.components()) {
    json cov = json::array();
    for (Eigen::Index r = 0; r < c.cov.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index col = 0; col < c.cov.cols(); ++col) row.push_back(c.cov(r, col));
      cov.push_back(std::move(row));
    }
    comps.push_back({{"weight", c.weight},
                     {"mean", std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size())},
                     {"cov", std::move(cov)}});
  }
  return {{"dims", g.dims()}, {"components", std::move(comps)}};
}

} // namespace

std::string mixture_to_json(const GaussianMixtured &g) { return mixture_value(g).dump(2) + "\n"; }

std::string fit_report_to_json(const FitResult<double> &fit, const EmConfig &cfg) {
  json doc = {
      {"k_requested", cfg.k},
      {"components", fit.mixture.size()},
      {"seed", cfg.seed},
      {"init", cfg.init == InitPolicy::kmeans ? "kmeans" : "random"},
      {"max_iters", cfg.max_iters},
      {"rel_tol", cfg.rel_tol},
      {"iterations", fit.iterations},
      {"converged", fit.converged},
      {"degenerate", fit.degenerate},
      {"final_log_likelihood", fit.final_log_likelihood},
      {"log_likelihoods", fit.log_likelihoods},
      {"model", mixture_value(fit.mixture)},
  };
  return doc.dump(2) + "\n";
}

} // namespace mtax::gmm
