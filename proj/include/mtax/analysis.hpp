#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mtax/gmm/mixture.hpp"
#include "mtax/taxonomy.hpp"

namespace mtax::analysis {

/// One motion label with one fitted mixture per recording variant.
struct LabeledModels {
  std::string label;
  std::vector<gmm::GaussianMixtured> variants;
};

struct MatrixMetadata {
  /// Directed variational evaluations whose raw value was negative and clamped.
  std::size_t clamped_evaluations = 0;
  std::size_t total_evaluations = 0;
  std::vector<std::string> notes;
};

/// Symmetric, zero-diagonal, nonnegative pairwise divergences.
struct DivergenceMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;
  MatrixMetadata metadata;

  std::size_t size() const noexcept { return labels.size(); }
};

/// Throws InvalidArgument if the matrix is not square, symmetric, zero-diagonal, finite and nonnegative.
void check_matrix(const DivergenceMatrix &m);

/**
 * Entry (i, j) is the mean of symmetric_divergence over every pair of
 * variants of label i and label j. Requires at least two labels and shared
 * dimension. Cells are independent and may be computed on `threads` workers;
 * the result does not depend on the thread count.
 */
DivergenceMatrix divergence_matrix(std::span<const LabeledModels> models, unsigned threads = 1);
DivergenceMatrix divergence_matrix(const std::map<std::string, std::vector<gmm::GaussianMixtured>> &models,
                                   unsigned threads = 1);

struct PairRow {
  std::string a;
  std::string b;
  double divergence = 0.0;
  bool same_code = false;
  double code_distance = 0.0;
};

struct ConsistencyReport {
  std::optional<double> intra_mean;
  std::optional<double> inter_mean;
  std::optional<double> ratio;
  double nn_agreement = 0.0;
  /// Nearest neighbour of each label, in matrix order.
  std::vector<std::string> nearest;
  std::optional<double> rank_correlation;
  std::vector<PairRow> pairs;  ///< upper triangle, matrix order
};

/// Compares same-code and different-code divergences. Every label needs a code.
ConsistencyReport cluster_consistency(const DivergenceMatrix &m, const std::map<std::string, MotionCode> &codes,
                                      const CodeDistanceWeights &weights = {});

/// Spearman correlation with average ranks for ties. Throws InvalidArgument
/// for fewer than 3 pairs or unequal lengths; empty when either side has
/// zero variance.
std::optional<double> rank_correlation(std::span<const double> x, std::span<const double> y);

/// Header "label,<l1>,...", then one row per label; values at 9 significant digits.
std::string matrix_to_csv(const DivergenceMatrix &m);
DivergenceMatrix parse_matrix_csv(std::string_view csv);
void export_matrix_csv(const DivergenceMatrix &m, const std::string &path);
DivergenceMatrix import_matrix_csv(const std::string &path);

/// Binary PGM (P5), one pixel per cell; minimum -> 255 (light), maximum -> 0.
std::string matrix_to_pgm(const DivergenceMatrix &m);
void export_heatmap(const DivergenceMatrix &m, const std::string &path);

std::string consistency_to_json(const ConsistencyReport &r);

} // namespace mtax::analysis
