#include "mtax/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "mtax/error.hpp"
#include "mtax/gmm/divergence.hpp"
#include "mtax/text.hpp"

namespace mtax::analysis {

void check_matrix(const DivergenceMatrix &m) {
  const auto n = static_cast<Eigen::Index>(m.labels.size());
  if (m.values.rows() != n || m.values.cols() != n) throw InvalidArgument("matrix shape does not match labels");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m.values(i, i) != 0.0) throw InvalidArgument("matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = m.values(i, j);
      if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("matrix entries must be finite and nonnegative");
      if (v != m.values(j, i)) throw InvalidArgument("matrix is not symmetric");
    }
  }
}

namespace {

struct Cell {
  double value = 0.0;
  std::size_t clamped = 0;
  std::size_t evaluations = 0;
};

Cell compute_cell(const LabeledModels &a, const LabeledModels &b) {
  Cell cell;
  double sum = 0.0;
  for (const auto &f : a.variants)
    for (const auto &g : b.variants) {
      const auto fg = gmm::variational_kl_detail(f, g);
      const auto gf = gmm::variational_kl_detail(g, f);
      sum += (fg.value + gf.value) / 2.0;
      cell.clamped += fg.clamped + gf.clamped;
      cell.evaluations += 2;
    }
  cell.value = sum / static_cast<double>(a.variants.size() * b.variants.size());
  return cell;
}

} // namespace

DivergenceMatrix divergence_matrix(std::span<const LabeledModels> models, unsigned threads) {
  if (models.size() < 2) throw InvalidArgument("divergence matrix needs at least two labels");
  Eigen::Index dims = -1;
  for (const auto &m : models) {
    if (m.variants.empty()) throw InvalidArgument("label '" + m.label + "' has no models");
    for (const auto &g : m.variants) {
      if (dims < 0) dims = g.dims();
      if (g.dims() != dims) throw InvalidArgument("divergence matrix: dimension mismatch for '" + m.label + "'");
    }
  }

  const auto n = models.size();
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) jobs.emplace_back(i, j);
  std::vector<Cell> cells(jobs.size());

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  if (workers == 1) {
    for (std::size_t q = 0; q < jobs.size(); ++q) cells[q] = compute_cell(models[jobs[q].first], models[jobs[q].second]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t q = w; q < jobs.size(); q += workers)
            cells[q] = compute_cell(models[jobs[q].first], models[jobs[q].second]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto &t : pool) t.join();
    for (auto &e : errors)
      if (e) std::rethrow_exception(e);
  }

  DivergenceMatrix out;
  for (const auto &m : models) out.labels.push_back(m.label);
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t q = 0; q < jobs.size(); ++q) {
    const auto i = static_cast<Eigen::Index>(jobs[q].first);
    const auto j = static_cast<Eigen::Index>(jobs[q].second);
    out.values(i, j) = out.values(j, i) = cells[q].value;
    out.metadata.clamped_evaluations += cells[q].clamped;
    out.metadata.total_evaluations += cells[q].evaluations;
  }
  if (out.metadata.clamped_evaluations > 0)
    out.metadata.notes.push_back(std::to_string(out.metadata.clamped_evaluations) +
                                 " negative variational KL values clamped to 0");
  return out;
}

DivergenceMatrix divergence_matrix(const std::map<std::string, std::vector<gmm::GaussianMixtured>> &models,
                                   unsigned threads) {
  std::vector<LabeledModels> list;
  for (const auto &[label, variants] : models) list.push_back({label, variants});
  return divergence_matrix(list, threads);
}

std::optional<double> rank_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("rank_correlation: lists differ in length");
  if (x.size() < 3) throw InvalidArgument("rank_correlation: needs at least 3 pairs");

  const auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t q = i; q <= j; ++q) r[order[q]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double mean = (static_cast<double>(x.size()) + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

ConsistencyReport cluster_consistency(const DivergenceMatrix &m, const std::map<std::string, MotionCode> &codes,
                                      const CodeDistanceWeights &weights) {
  check_matrix(m);
  const auto n = m.labels.size();
  if (n < 2) throw InvalidArgument("cluster consistency needs at least two labels");
  std::vector<MotionCode> code(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = codes.find(m.labels[i]);
    if (it == codes.end()) throw InvalidArgument("no motion code for label '" + m.labels[i] + "'");
    code[i] = it->second;
  }

  ConsistencyReport r;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      r.pairs.push_back({m.labels[i], m.labels[j], m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                         code[i] == code[j], code_distance(code[i], code[j], weights)});

  // Aggregate in label order so scalars do not depend on matrix row order.
  std::vector<const PairRow *> canonical;
  for (const auto &p : r.pairs) canonical.push_back(&p);
  const auto key = [](const PairRow *p) { return std::minmax(p->a, p->b); };
  std::sort(canonical.begin(), canonical.end(), [&](const PairRow *x, const PairRow *y) { return key(x) < key(y); });

  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  std::vector<double> cd, dv;
  for (const auto *p : canonical) {
    (p->same_code ? intra : inter) += p->divergence;
    ++(p->same_code ? n_intra : n_inter);
    cd.push_back(p->code_distance);
    dv.push_back(p->divergence);
  }
  if (n_intra) r.intra_mean = intra / static_cast<double>(n_intra);
  if (n_inter) r.inter_mean = inter / static_cast<double>(n_inter);
  if (r.intra_mean && r.inter_mean && *r.inter_mean > 0.0) r.ratio = *r.intra_mean / *r.inter_mean;
  if (cd.size() >= 3) r.rank_correlation = rank_correlation(cd, dv);

  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (best == n) {
        best = j;
        continue;
      }
      const double bv = m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best));
      if (v < bv || (v == bv && m.labels[j] < m.labels[best])) best = j;
    }
    r.nearest.push_back(m.labels[best]);
    agree += code[best] == code[i];
  }
  r.nn_agreement = static_cast<double>(agree) / static_cast<double>(n);
  return r;
}

std::string matrix_to_csv(const DivergenceMatrix &m) {
  check_matrix(m);
  std::string out = "label";
  for (const auto &l : m.labels) out += ',' + text::quote_csv(l);
  out += '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out += text::quote_csv(m.labels[i]);
    for (std::size_t j = 0; j < m.labels.size(); ++j)
      out += ',' + text::format_g(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 9);
    out += '\n';
  }
  return out;
}

DivergenceMatrix parse_matrix_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    const auto line = csv.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty() || line == "\r") continue;
    rows.push_back(text::split_csv(line));
  }
  if (rows.empty()) throw ParseError("empty matrix CSV");
  DivergenceMatrix m;
  m.labels.assign(rows[0].begin() + 1, rows[0].end());
  const auto n = m.labels.size();
  if (rows.size() != n + 1) throw ParseError("matrix CSV must have one row per label");
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto &row = rows[i + 1];
    if (row.size() != n + 1) throw ParseError("matrix row has wrong field count", i + 2);
    if (row[0] != m.labels[i]) throw ParseError("row label '" + row[0] + "' does not match header", i + 2);
    for (std::size_t j = 0; j < n; ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = text::parse_double(row[j + 1]);
  }
  try {
    check_matrix(m);
  } catch (const InvalidArgument &e) {
    throw ParseError(std::string("matrix CSV: ") + e.what());
  }
  return m;
}

void export_matrix_csv(const DivergenceMatrix &m, const std::string &path) { text::write_file(path, matrix_to_csv(m)); }

DivergenceMatrix import_matrix_csv(const std::string &path) { return parse_matrix_csv(text::read_file(path)); }

std::string matrix_to_pgm(const DivergenceMatrix &m) {
  check_matrix(m);
  const auto n = static_cast<Eigen::Index>(m.labels.size());
  const double lo = n ? m.values.minCoeff() : 0.0;
  const double hi = n ? m.values.maxCoeff() : 0.0;
  std::string out = "P5\n# divergence heatmap: light = low divergence (similar), dark = high (dissimilar)\n";
  out += std::to_string(n) + ' ' + std::to_string(n) + "\n255\n";
  std::string pixels(static_cast<std::size_t>(n * n), static_cast<char>(255));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      unsigned char level = 255;
      if (hi > lo) level = static_cast<unsigned char>(std::lround(255.0 * (hi - m.values(i, j)) / (hi - lo)));
      pixels[static_cast<std::size_t>(i * n + j)] = static_cast<char>(level);
      pixels[static_cast<std::size_t>(j * n + i)] = static_cast<char>(level);
    }
  return out + pixels;
}

void export_heatmap(const DivergenceMatrix &m, const std::string &path) { text::write_file(path, matrix_to_pgm(m)); }

std::string consistency_to_json(const ConsistencyReport &r) {
  using nlohmann::json;
  const auto opt = [](const std::optional<double> &v) { return v ? json(*v) : json(nullptr); };
  json pairs = json::array();
  for (const auto &p : r.pairs)
    pairs.push_back({{"a", p.a}, {"b", p.b}, {"divergence", p.divergence}, {"same_code", p.same_code},
                     {"code_distance", p.code_distance}});
  json doc = {{"intra_mean", opt(r.intra_mean)},
              {"inter_mean", opt(r.inter_mean)},
              {"ratio", opt(r.ratio)},
              {"nn_agreement", r.nn_agreement},
              {"nearest", r.nearest},
              {"rank_correlation", opt(r.rank_correlation)},
              {"pairs", pairs}};
  return doc.dump(2) + "\n";
}

} // namespace mtax::analysis
