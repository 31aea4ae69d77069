#include "mtax/ftdata.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "mtax/error.hpp"
#include "mtax/gmm/sampling.hpp"
#include "mtax/text.hpp"

namespace mtax::ftdata {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 6> kChannelNames{"fx", "fy", "fz", "tx", "ty", "tz"};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string_view::npos) lines.pop_back();
  return lines;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Parses a numeric CSV table; `needed` columns must be present and finite.
Table parse_table(std::string_view csv, const std::vector<std::string> &needed_or_all) {
  const auto lines = split_lines(csv);
  if (lines.empty()) throw ParseError("empty CSV");
  Table t;
  for (auto &h : text::split_csv(lines[0])) t.header.push_back(text::normalize_label(h));
  std::vector<std::size_t> cols;
  for (const auto &name : needed_or_all) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw ParseError("missing column '" + name + "'", 1);
    cols.push_back(static_cast<std::size_t>(it - t.header.begin()));
  }
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto row_no = r;  // 1-based data row
    const auto fields = text::split_csv(lines[r]);
    if (fields.size() != t.header.size())
      throw ParseError("data row " + std::to_string(row_no) + ": expected " + std::to_string(t.header.size()) +
                       " fields, got " + std::to_string(fields.size()), r + 1);
    std::vector<double> values;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double v = 0.0;
      try {
        v = text::parse_double(fields[cols[k]]);
      } catch (const ParseError &) {
        throw ParseError("data row " + std::to_string(row_no) + ": column '" + needed_or_all[k] +
                         "' is not a number", r + 1);
      }
      if (!std::isfinite(v))
        throw ParseError("data row " + std::to_string(row_no) + ": non-finite value in column '" +
                         needed_or_all[k] + "'", r + 1);
      values.push_back(v);
    }
    t.rows.push_back(std::move(values));
  }
  return t;
}

} // namespace

std::string_view channel_name(Channel c) noexcept { return kChannelNames[static_cast<std::size_t>(c)]; }

Channel parse_channel(std::string_view name) {
  const auto key = text::normalize_label(name);
  for (std::size_t i = 0; i < kChannelNames.size(); ++i)
    if (kChannelNames[i] == key) return static_cast<Channel>(i);
  throw InvalidArgument("unknown channel '" + std::string(name) + "'");
}

std::vector<Channel> force_channels() { return {Channel::fx, Channel::fy, Channel::fz}; }
std::vector<Channel> all_channels() {
  return {Channel::fx, Channel::fy, Channel::fz, Channel::tx, Channel::ty, Channel::tz};
}

void check_trial(const ForceTrial &trial) {
  if (trial.time.size() != trial.wrench.rows()) throw InvalidArgument("trial time/sample count mismatch");
  if (trial.time.size() < 2) throw InvalidArgument("trial needs at least 2 samples");
  if (!trial.time.allFinite() || !trial.wrench.allFinite()) throw InvalidArgument("trial has non-finite values");
  for (Eigen::Index i = 1; i < trial.time.size(); ++i)
    if (!(trial.time[i] > trial.time[i - 1]))
      throw InvalidArgument("trial timestamps not strictly increasing at sample " + std::to_string(i + 1));
}

ForceTrial parse_trial_csv(std::string_view csv, std::string label, std::string variant) {
  const std::vector<std::string> cols{"t", "fx", "fy", "fz", "tx", "ty", "tz"};
  const auto table = parse_table(csv, cols);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n < 2) throw ParseError("trial needs at least 2 data rows, got " + std::to_string(n));

  ForceTrial trial{std::move(label), std::move(variant), Eigen::VectorXd(n),
                   Eigen::Matrix<double, Eigen::Dynamic, 6>(n, 6)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &row = table.rows[static_cast<std::size_t>(i)];
    trial.time[i] = row[0];
    for (Eigen::Index c = 0; c < 6; ++c) trial.wrench(i, c) = row[static_cast<std::size_t>(c + 1)];
    if (i > 0 && !(trial.time[i] > trial.time[i - 1]))
      throw ParseError("data row " + std::to_string(i + 1) + ": timestamp not strictly increasing",
                       static_cast<std::size_t>(i + 2));
  }
  return trial;
}

std::pair<std::string, std::string> label_from_filename(std::string_view filename) {
  std::string stem = fs::path(std::string(filename)).stem().string();
  const auto pos = stem.rfind('_');
  if (pos == std::string::npos || pos == 0 || pos + 1 == stem.size()) return {text::normalize_label(stem), "default"};
  return {text::normalize_label(stem.substr(0, pos)), stem.substr(pos + 1)};
}

std::vector<ForceTrial> load_trials(const std::string &path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto &entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .csv trial files in " + path);
  } else {
    if (!fs::exists(path)) throw IoError("no such file: " + path);
    files.emplace_back(path);
  }
  std::vector<ForceTrial> trials;
  for (const auto &f : files) {
    auto [label, variant] = label_from_filename(f.filename().string());
    try {
      trials.push_back(parse_trial_csv(text::read_file(f.string()), std::move(label), std::move(variant)));
    } catch (const ParseError &e) {
      throw ParseError(f.filename().string() + ": " + e.what());
    }
  }
  return trials;
}

SampleMatrix::SampleMatrix(Eigen::MatrixXd rows, std::vector<std::string> names)
    : rows_(std::move(rows)), names_(std::move(names)) {
  if (rows_.rows() < 1) throw InvalidArgument("sample matrix needs at least one row");
  if (rows_.cols() < 1) throw InvalidArgument("sample matrix needs at least one channel");
  if (static_cast<Eigen::Index>(names_.size()) != rows_.cols())
    throw InvalidArgument("sample matrix channel names do not match its width");
  if (!rows_.allFinite()) throw InvalidArgument("sample matrix has non-finite entries");
}

SampleMatrix pool_samples(std::span<const ForceTrial> trials, std::span<const Channel> channels,
                          PoolOptions options) {
  if (trials.empty()) throw InvalidArgument("pool_samples: no trials");
  if (channels.empty()) throw InvalidArgument("pool_samples: no channels selected");
  std::set<Channel> unique(channels.begin(), channels.end());
  if (unique.size() != channels.size()) throw InvalidArgument("pool_samples: duplicate channel");

  Eigen::Index total = 0;
  for (const auto &t : trials) {
    check_trial(t);
    if (!options.allow_cross_label && t.motion_label != trials.front().motion_label)
      throw InvalidArgument("pool_samples: trials have different labels ('" + trials.front().motion_label +
                            "', '" + t.motion_label + "')");
    total += t.size();
  }
  const auto d = static_cast<Eigen::Index>(channels.size());
  Eigen::MatrixXd rows(total, d);
  Eigen::Index r = 0;
  for (const auto &t : trials) {
    for (Eigen::Index c = 0; c < d; ++c)
      rows.block(r, c, t.size(), 1) = t.wrench.col(static_cast<Eigen::Index>(channels[static_cast<std::size_t>(c)]));
    r += t.size();
  }
  std::vector<std::string> names;
  for (auto c : channels) names.emplace_back(channel_name(c));
  return SampleMatrix(std::move(rows), std::move(names));
}

bool ChannelTransform::any_constant() const {
  return std::any_of(constant.begin(), constant.end(), [](bool b) { return b; });
}

Standardized standardize(const SampleMatrix &m, Standardization policy) {
  const auto d = m.dims();
  ChannelTransform t{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d), std::vector<bool>(static_cast<std::size_t>(d))};
  if (policy == Standardization::none) return {m, t};
  if (m.size() < 2) throw InvalidArgument("z-score standardization needs at least 2 rows");

  Eigen::MatrixXd out = m.rows();
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto col = m.rows().col(c);
    if (col.maxCoeff() == col.minCoeff()) {
      t.constant[static_cast<std::size_t>(c)] = true;
      continue;
    }
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    t.mean[c] = mean;
    t.scale[c] = sd;
    out.col(c) = (col.array() - mean) / sd;
  }
  return {SampleMatrix(std::move(out), m.names()), std::move(t)};
}

SampleMatrix invert_standardize(const SampleMatrix &m, const ChannelTransform &t) {
  if (t.mean.size() != m.dims()) throw InvalidArgument("transform width does not match sample matrix");
  Eigen::MatrixXd out = m.rows();
  for (Eigen::Index c = 0; c < m.dims(); ++c)
    if (!t.constant[static_cast<std::size_t>(c)]) out.col(c) = m.rows().col(c).array() * t.scale[c] + t.mean[c];
  return SampleMatrix(std::move(out), m.names());
}

std::vector<std::string> default_channel_names(Eigen::Index d) {
  std::vector<std::string> names;
  if (d == 3 || d == 6) {
    for (Eigen::Index i = 0; i < d; ++i) names.emplace_back(kChannelNames[static_cast<std::size_t>(i)]);
  } else {
    for (Eigen::Index i = 0; i < d; ++i) names.push_back("x" + std::to_string(i + 1));
  }
  return names;
}

Synthesized synth_generate_with_assignments(const gmm::GaussianMixtured &g, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("synth_generate: n must be >= 1");
  std::mt19937_64 rng(seed);
  auto draws = gmm::draw_samples(g, n, rng);
  return {SampleMatrix(std::move(draws.samples), default_channel_names(g.dims())), std::move(draws.assignments)};
}

SampleMatrix synth_generate(const gmm::GaussianMixtured &g, std::size_t n, std::uint64_t seed) {
  return synth_generate_with_assignments(g, n, seed).matrix;
}

std::string samples_to_csv(const SampleMatrix &m) {
  std::string out;
  for (std::size_t i = 0; i < m.names().size(); ++i) out += (i ? "," : "") + text::quote_csv(m.names()[i]);
  out += '\n';
  for (Eigen::Index r = 0; r < m.size(); ++r) {
    for (Eigen::Index c = 0; c < m.dims(); ++c) {
      if (c) out += ',';
      out += text::format_g(m.rows()(r, c), 17);
    }
    out += '\n';
  }
  return out;
}

SampleMatrix parse_samples_csv(std::string_view csv, std::span<const Channel> channels) {
  const auto lines = split_lines(csv);
  if (lines.empty()) throw ParseError("empty CSV");
  std::vector<std::string> header;
  for (auto &h : text::split_csv(lines[0])) header.push_back(text::normalize_label(h));

  std::vector<std::string> wanted;
  if (std::find(header.begin(), header.end(), "t") != header.end()) {
    for (auto c : channels) wanted.emplace_back(channel_name(c));
  } else {
    wanted = header;
  }
  const auto table = parse_table(csv, wanted);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n < 1) throw ParseError("samples CSV has no data rows");
  Eigen::MatrixXd rows(n, static_cast<Eigen::Index>(wanted.size()));
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
      rows(r, c) = table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return SampleMatrix(std::move(rows), std::move(wanted));
}

} // namespace mtax::ftdata
