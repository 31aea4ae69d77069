#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mtax/gmm/mixture.hpp"

namespace mtax::ftdata {

enum class Channel { fx = 0, fy, fz, tx, ty, tz };

std::string_view channel_name(Channel c) noexcept;
Channel parse_channel(std::string_view name);

/// fx, fy, fz
std::vector<Channel> force_channels();
/// fx, fy, fz, tx, ty, tz
std::vector<Channel> all_channels();

/// One demonstration: strictly increasing timestamps (s), forces (N) and torques (N m).
struct ForceTrial {
  std::string motion_label;
  std::string variant;
  Eigen::VectorXd time;
  Eigen::Matrix<double, Eigen::Dynamic, 6> wrench;

  Eigen::Index size() const noexcept { return time.size(); }
};

/// Checks the trial invariants; throws InvalidArgument.
void check_trial(const ForceTrial &trial);

/**
 * Parses a trial CSV with header columns t,fx,fy,fz,tx,ty,tz (any order,
 * extra columns ignored). Errors cite the 1-based data row, header excluded.
 */
ForceTrial parse_trial_csv(std::string_view csv, std::string label, std::string variant);

/// Splits "<label>_<variant>.csv" at the last underscore. A stem without an
/// underscore yields variant "default".
std::pair<std::string, std::string> label_from_filename(std::string_view filename);

/// Loads one file, or every *.csv in a directory in filename order.
std::vector<ForceTrial> load_trials(const std::string &path);

/// n x d samples with channel names. d >= 1; every entry finite.
class SampleMatrix {
public:
  SampleMatrix(Eigen::MatrixXd rows, std::vector<std::string> names);

  const Eigen::MatrixXd &rows() const noexcept { return rows_; }
  const std::vector<std::string> &names() const noexcept { return names_; }
  Eigen::Index size() const noexcept { return rows_.rows(); }
  Eigen::Index dims() const noexcept { return rows_.cols(); }

private:
  Eigen::MatrixXd rows_;
  std::vector<std::string> names_;
};

struct PoolOptions {
  bool allow_cross_label = false;
};

/// Stacks trials in order, keeping each trial's time order.
SampleMatrix pool_samples(std::span<const ForceTrial> trials, std::span<const Channel> channels,
                          PoolOptions options = {});

enum class Standardization { none, zscore };

/// x_std = (x - mean) / scale per channel. Constant channels keep mean 0 and scale 1.
struct ChannelTransform {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<bool> constant;

  bool any_constant() const;
};

struct Standardized {
  SampleMatrix matrix;
  ChannelTransform transform;
};

/// Population z-score per channel. Requires n >= 2 under zscore.
Standardized standardize(const SampleMatrix &m, Standardization policy);
SampleMatrix invert_standardize(const SampleMatrix &m, const ChannelTransform &t);

struct Synthesized {
  SampleMatrix matrix;
  std::vector<std::size_t> assignments;
};

/// Draws n samples from a mixture with a mt19937_64 seeded by `seed`.
Synthesized synth_generate_with_assignments(const gmm::GaussianMixtured &g, std::size_t n, std::uint64_t seed);
SampleMatrix synth_generate(const gmm::GaussianMixtured &g, std::size_t n, std::uint64_t seed);

/// Default names for a d-column matrix: force or full wrench names for d = 3 or 6, x1..xd otherwise.
std::vector<std::string> default_channel_names(Eigen::Index d);

/// Header of channel names then one row per sample, 17 significant digits.
std::string samples_to_csv(const SampleMatrix &m);
/// Reads a samples CSV. If a "t" column is present the file is treated as a
/// trial and `channels` selects the columns; otherwise every column is used.
SampleMatrix parse_samples_csv(std::string_view csv, std::span<const Channel> channels);

} // namespace mtax::ftdata
