#include "mtax/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtax/analysis.hpp"
#include "mtax/foon.hpp"
#include "mtax/ftdata.hpp"
#include "mtax/gmm.hpp"
#include "mtax/lexicon.hpp"
#include "mtax/taxonomy.hpp"
#include "mtax/text.hpp"

namespace mtax::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Thrown for argument problems detected after CLI11 parsing (exit 2).
struct UsageError : Error {
  using Error::Error;
};

/// Parsed command line.
struct RunConfig {
  bool as_json = false;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string lexicon_variant = "verbatim";

  std::vector<std::string> attributes;
  std::string code_a, code_b, weights;
  std::string labels_file;

  std::string foon_file, annotate, out;
  int top = 20;

  std::string spec, in, heatmap, models_dir, matrix, lexicon, f, g, report;
  std::string channels = "force", standardize = "none", init = "kmeans";
  std::size_t n = 0, mc = 0;
  int k = 3;
  bool bic = false;
};

std::uint64_t require_seed(const RunConfig &cfg, std::string_view sub) {
  if (!cfg.seed) throw UsageError(std::string(sub) + " needs --seed");
  return *cfg.seed;
}

MotionLexicon select_lexicon(const RunConfig &cfg, const std::string &path) {
  if (!path.empty()) return load_lexicon(path);
  return paper_table_lexicon(cfg.lexicon_variant == "prose-corrected" ? LexiconVariant::prose_corrected
                                                                      : LexiconVariant::verbatim);
}

void emit(std::ostream &out, const std::string &path, const std::string &contents) {
  if (path.empty())
    out << contents;
  else
    text::write_file(path, contents);
}

json code_json(const MotionCode &c) {
  const auto v = validate(c);
  json violations = json::array();
  for (const auto &x : v.violations) violations.push_back({{"attribute", x.attribute}, {"message", x.message}});
  return {{"code", render_code(c)},
          {"contact", c.contact},
          {"engagement", c.soft ? "soft" : "rigid"},
          {"subclass", c.contact ? std::string(subclass_name(c.soft, c.subclass)) : std::string("none")},
          {"prismatic", c.prismatic},
          {"revolute", c.revolute},
          {"duration", c.continuous ? "continuous" : "discontinuous"},
          {"manual", c.bimanual ? "bimanual" : "unimanual"},
          {"legal", v.ok()},
          {"violations", violations},
          {"warnings", v.warnings}};
}

int run_encode(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  MotionCode c;
  for (const auto &raw : cfg.attributes) {
    const auto t = text::normalize_label(raw);
    if (t == "contact") c.contact = true;
    else if (t == "non-contact" || t == "noncontact") c.contact = false;
    else if (t == "rigid") c.soft = false;
    else if (t == "soft") c.soft = true;
    else if (t == "stationary") { c.contact = true; c.soft = false; c.subclass = Subclass::b00; }
    else if (t == "moving") { c.contact = true; c.soft = false; c.subclass = Subclass::b11; }
    else if (t == "admitting" || t == "penetrative") { c.contact = true; c.soft = true; c.subclass = Subclass::b00; }
    else if (t == "manipulator-deforming") { c.contact = true; c.soft = true; c.subclass = Subclass::b10; }
    else if (t == "manipulatee-deforming") { c.contact = true; c.soft = true; c.subclass = Subclass::b11; }
    else if (t == "prismatic") c.prismatic = true;
    else if (t == "revolute") c.revolute = true;
    else if (t == "continuous") c.continuous = true;
    else if (t == "discontinuous") c.continuous = false;
    else if (t == "unimanual") c.bimanual = false;
    else if (t == "bimanual") c.bimanual = true;
    else throw UsageError("unknown attribute '" + raw + "'");
  }
  const auto v = validate(c);
  if (cfg.as_json) {
    out << code_json(c).dump(2) << '\n';
  } else if (v.ok()) {
    out << render_code(c) << '\n';
    for (const auto &w : v.warnings) err << "warning: " << w << '\n';
  } else {
    for (const auto &x : v.violations) out << "violation: " << x.attribute << ": " << x.message << '\n';
  }
  return v.ok() ? 0 : 1;
}

int run_decode(const RunConfig &cfg, std::ostream &out) {
  const auto c = parse_code(cfg.code_a);
  if (cfg.as_json) {
    out << code_json(c).dump(2) << '\n';
    return 0;
  }
  out << describe(c);
  const auto v = validate(c);
  out << "legal:       " << (v.ok() ? "yes" : "no") << '\n';
  for (const auto &x : v.violations) out << "violation: " << x.attribute << ": " << x.message << '\n';
  for (const auto &w : v.warnings) out << "warning: " << w << '\n';
  return 0;
}

int run_validate(const RunConfig &cfg, std::ostream &out) {
  const auto c = parse_code(cfg.code_a);
  const auto v = validate(c);
  if (cfg.as_json) {
    const auto j = code_json(c);
    out << json{{"code", j["code"]}, {"ok", v.ok()}, {"violations", j["violations"]}, {"warnings", j["warnings"]}}
               .dump(2)
        << '\n';
  } else {
    if (v.ok()) out << "ok\n";
    for (const auto &x : v.violations) out << "violation: " << x.attribute << ": " << x.message << '\n';
    for (const auto &w : v.warnings) out << "warning: " << w << '\n';
  }
  return v.ok() ? 0 : 1;
}

CodeDistanceWeights parse_weights(const std::string &spec) {
  if (spec.empty()) return {};
  const auto fields = text::split_csv(spec);
  if (fields.size() != 8) throw UsageError("--weights needs 8 comma-separated values");
  std::array<double, 8> w{};
  for (std::size_t i = 0; i < 8; ++i) w[i] = text::parse_double(fields[i]);
  return CodeDistanceWeights(w);
}

int run_dist(const RunConfig &cfg, std::ostream &out) {
  const auto a = parse_code(cfg.code_a);
  const auto b = parse_code(cfg.code_b);
  const double d = code_distance(a, b, parse_weights(cfg.weights));
  if (cfg.as_json)
    out << json{{"a", render_code(a)}, {"b", render_code(b)}, {"distance", d}}.dump(2) << '\n';
  else
    out << text::format_g(d, 9) << '\n';
  return 0;
}

std::vector<std::string> read_label_lines(const std::string &path) {
  const auto contents = text::read_file(path);
  std::vector<std::string> labels;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string::npos) end = contents.size();
    auto label = text::normalize_label(std::string_view(contents).substr(pos, end - pos));
    if (!label.empty()) labels.push_back(std::move(label));
    pos = end + 1;
  }
  return labels;
}

int run_consolidate(const RunConfig &cfg, std::ostream &out) {
  const auto lex = select_lexicon(cfg, cfg.lexicon);
  const auto labels = read_label_lines(cfg.labels_file);
  const auto res = consolidate(labels, lex);
  if (cfg.as_json) {
    json groups = json::array();
    for (const auto &[code, members] : res.groups) groups.push_back({{"code", render_code(code)}, {"labels", members}});
    out << json{{"groups", groups}, {"unknowns", res.unknowns}}.dump(2) << '\n';
    return 0;
  }
  for (const auto &[code, members] : res.groups) {
    out << render_code(code) << ':';
    for (std::size_t i = 0; i < members.size(); ++i) out << (i ? ", " : " ") << members[i];
    out << '\n';
  }
  if (!res.unknowns.empty()) {
    out << "unknown:";
    for (std::size_t i = 0; i < res.unknowns.size(); ++i) out << (i ? ", " : " ") << res.unknowns[i];
    out << '\n';
  }
  return 0;
}

int run_foon_stats(const RunConfig &cfg, std::ostream &out) {
  if (cfg.top < 1) throw UsageError("--top must be >= 1");
  auto graph = foon::load_foon(cfg.foon_file);
  std::optional<MotionLexicon> lex;
  std::vector<std::string> unknown;
  if (!cfg.annotate.empty()) {
    lex = load_lexicon(cfg.annotate);
    auto ann = foon::annotate_motions(graph, *lex);
    graph = std::move(ann.graph);
    unknown = std::move(ann.unknown_labels);
  }
  const auto counts = foon::node_counts(graph);
  const auto report = foon::motion_frequency(graph);
  const double coverage = foon::top_k_coverage(report, cfg.top);
  if (!cfg.out.empty()) text::write_file(cfg.out, foon::frequency_csv(report, lex ? &*lex : nullptr));

  const auto shown = std::min<std::size_t>(static_cast<std::size_t>(cfg.top), report.rows.size());
  if (cfg.as_json) {
    json rows = json::array();
    for (std::size_t i = 0; i < shown; ++i) {
      const auto &r = report.rows[i];
      json row = {{"label", r.label}, {"count", r.count}, {"share", r.share}};
      if (lex) {
        const auto code = lex->find(r.label);
        row["code"] = code ? json(render_code(*code)) : json(nullptr);
      }
      rows.push_back(std::move(row));
    }
    json doc = {{"objects", counts.objects},     {"motions", counts.motions},
                {"total", counts.total},         {"distinct_motions", report.rows.size()},
                {"top", cfg.top},                {"top_coverage", coverage},
                {"rows", rows}};
    if (lex) doc["unknown_labels"] = unknown;
    out << doc.dump(2) << '\n';
    return 0;
  }
  out << "object nodes: " << counts.objects << '\n'
      << "motion nodes: " << counts.motions << '\n'
      << "total nodes:  " << counts.total << '\n'
      << "distinct motions: " << report.rows.size() << '\n'
      << "top-" << cfg.top << " coverage: " << text::format_g(coverage, 6) << '\n';
  for (std::size_t i = 0; i < shown; ++i) {
    const auto &r = report.rows[i];
    out << i + 1 << '\t' << r.label << '\t' << r.count << '\t' << text::format_g(r.share, 6);
    if (lex) {
      const auto code = lex->find(r.label);
      out << '\t' << (code ? render_code(*code) : "-");
    }
    out << '\n';
  }
  if (lex && !unknown.empty()) {
    out << "unknown labels:";
    for (std::size_t i = 0; i < unknown.size(); ++i) out << (i ? ", " : " ") << unknown[i];
    out << '\n';
  }
  return 0;
}

int run_synth(const RunConfig &cfg, std::ostream &out) {
  const auto seed = require_seed(cfg, "synth");
  if (cfg.n < 1) throw UsageError("--n must be >= 1");
  const auto g = gmm::load_mixture(cfg.spec);
  emit(out, cfg.out, ftdata::samples_to_csv(ftdata::synth_generate(g, cfg.n, seed)));
  return 0;
}

std::vector<ftdata::Channel> selected_channels(const RunConfig &cfg) {
  return cfg.channels == "all" ? ftdata::all_channels() : ftdata::force_channels();
}

int run_fit(const RunConfig &cfg, std::ostream &out) {
  const auto seed = require_seed(cfg, "fit");
  const auto channels = selected_channels(cfg);
  std::optional<ftdata::SampleMatrix> samples;
  if (fs::is_directory(cfg.in)) {
    const auto trials = ftdata::load_trials(cfg.in);
    samples = ftdata::pool_samples(trials, channels);
  } else {
    samples = ftdata::parse_samples_csv(text::read_file(cfg.in), channels);
  }
  const auto std_res = ftdata::standardize(
      *samples, cfg.standardize == "zscore" ? ftdata::Standardization::zscore : ftdata::Standardization::none);

  gmm::EmConfig em;
  em.k = cfg.k;
  em.seed = seed;
  em.init = cfg.init == "random" ? gmm::InitPolicy::random_from_data : gmm::InitPolicy::kmeans;

  std::optional<gmm::FitResult<double>> fit;
  json sweep = json::array();
  if (cfg.bic) {
    auto s = gmm::select_k_bic<double>(std_res.matrix.rows(), em, 1, cfg.k);
    for (const auto &e : s.entries) sweep.push_back({{"k", e.k}, {"log_likelihood", e.log_likelihood}, {"bic", e.bic}});
    em.k = static_cast<int>(s.best.mixture.size());
    fit = std::move(s.best);
  } else {
    fit = gmm::fit_em<double>(std_res.matrix.rows(), em);
  }

  emit(out, cfg.out, gmm::mixture_to_json(fit->mixture));
  if (!cfg.report.empty()) {
    auto rep = json::parse(gmm::fit_report_to_json(*fit, em));
    rep["channels"] = std_res.matrix.names();
    rep["samples"] = std_res.matrix.size();
    rep["standardize"] = cfg.standardize;
    if (cfg.standardize == "zscore") {
      const auto &t = std_res.transform;
      rep["transform"] = {{"mean", std::vector<double>(t.mean.data(), t.mean.data() + t.mean.size())},
                          {"scale", std::vector<double>(t.scale.data(), t.scale.data() + t.scale.size())},
                          {"constant", t.constant}};
    }
    if (cfg.bic) rep["bic_sweep"] = sweep;
    text::write_file(cfg.report, rep.dump(2) + "\n");
  }
  if (!cfg.out.empty()) {
    out << "components: " << fit->mixture.size() << '\n'
        << "iterations: " << fit->iterations << '\n'
        << "converged: " << (fit->converged ? "yes" : "no") << '\n'
        << "log-likelihood: " << text::format_g(fit->final_log_likelihood, 12) << '\n';
    if (fit->degenerate) out << "degenerate: all samples identical\n";
  }
  return 0;
}

int run_kl(const RunConfig &cfg, std::ostream &out) {
  const auto f = gmm::load_mixture(cfg.f);
  const auto g = gmm::load_mixture(cfg.g);
  const auto fg = gmm::variational_kl_detail(f, g);
  const auto gf = gmm::variational_kl_detail(g, f);
  const double sym = gmm::symmetric_divergence(f, g);
  std::optional<gmm::MonteCarloKl<double>> mc;
  if (cfg.mc > 0) mc = gmm::mc_kl(f, g, cfg.mc, require_seed(cfg, "kl --mc"));

  if (cfg.as_json) {
    json doc = {{"kl_fg", fg.value}, {"kl_gf", gf.value},          {"symmetric", sym},
                {"raw_fg", fg.raw},  {"raw_gf", gf.raw},           {"clamped", fg.clamped || gf.clamped}};
    if (mc) doc["mc"] = {{"estimate", mc->estimate}, {"std_error", mc->std_error}, {"draws", mc->draws}};
    out << doc.dump(2) << '\n';
    return 0;
  }
  out << "variational KL(f||g): " << text::format_g(fg.value, 9) << (fg.clamped ? " (clamped)" : "") << '\n'
      << "variational KL(g||f): " << text::format_g(gf.value, 9) << (gf.clamped ? " (clamped)" : "") << '\n'
      << "symmetric:            " << text::format_g(sym, 9) << '\n';
  if (mc)
    out << "monte carlo KL(f||g): " << text::format_g(mc->estimate, 9) << " +/- " << text::format_g(mc->std_error, 3)
        << " (" << mc->draws << " draws)\n";
  return 0;
}

int run_matrix(const RunConfig &cfg, std::ostream &out) {
  if (!fs::is_directory(cfg.models_dir)) throw IoError("not a directory: " + cfg.models_dir);
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(cfg.models_dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::map<std::string, std::vector<gmm::GaussianMixtured>> models;
  for (const auto &p : files) {
    auto [label, variant] = ftdata::label_from_filename(p.filename().string());
    try {
      models[label].push_back(gmm::load_mixture(p.string()));
    } catch (const ParseError &e) {
      throw ParseError(p.filename().string() + ": " + e.what());
    }
  }
  const auto m = analysis::divergence_matrix(models, cfg.threads);
  emit(out, cfg.out, analysis::matrix_to_csv(m));
  if (!cfg.heatmap.empty()) analysis::export_heatmap(m, cfg.heatmap);
  if (!cfg.out.empty()) {
    out << "labels: " << m.size() << '\n' << "models: " << files.size() << '\n';
    for (const auto &note : m.metadata.notes) out << "note: " << note << '\n';
  }
  return 0;
}

int run_eval(const RunConfig &cfg, std::ostream &out) {
  const auto m = analysis::import_matrix_csv(cfg.matrix);
  const auto lex = select_lexicon(cfg, cfg.lexicon);
  std::map<std::string, MotionCode> codes;
  for (const auto &l : m.labels) codes[l] = lookup(l, lex);
  const auto r = analysis::cluster_consistency(m, codes);
  const auto doc = analysis::consistency_to_json(r);
  if (cfg.out.empty() && cfg.as_json) {
    out << doc;
    return 0;
  }
  if (!cfg.out.empty()) text::write_file(cfg.out, doc);
  const auto show = [](const std::optional<double> &v) { return v ? text::format_g(*v, 6) : std::string("absent"); };
  out << "intra mean:       " << show(r.intra_mean) << '\n'
      << "inter mean:       " << show(r.inter_mean) << '\n'
      << "intra/inter:      " << show(r.ratio) << '\n'
      << "nn agreement:     " << text::format_g(r.nn_agreement, 6) << '\n'
      << "rank correlation: " << show(r.rank_correlation) << '\n';
  return 0;
}

} // namespace

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Manipulation motion codes, FOON statistics and force-data divergence analysis", "mtax"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;

  app.add_flag("--json", cfg.as_json, "Structured JSON output");
  app.add_option("--seed", cfg.seed, "Seed for stochastic subcommands");
  app.add_option("--threads", cfg.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--lexicon-variant", cfg.lexicon_variant, "Built-in lexicon reading")
      ->check(CLI::IsMember({"verbatim", "prose-corrected"}));

  auto *encode = app.add_subcommand("encode", "Build a code from attribute words");
  encode->add_option("attributes", cfg.attributes,
                     "contact|non-contact rigid|soft stationary|moving|admitting|manipulator-deforming|"
                     "manipulatee-deforming prismatic revolute continuous|discontinuous unimanual|bimanual")
      ->required();

  auto *decode = app.add_subcommand("decode", "Describe an 8-bit code");
  decode->add_option("code", cfg.code_a, "8-character binary code")->required();

  auto *validate_cmd = app.add_subcommand("validate", "Check a code against the attribute rules");
  validate_cmd->add_option("code", cfg.code_a, "8-character binary code")->required();

  auto *dist = app.add_subcommand("dist", "Weighted Hamming distance between two codes");
  dist->add_option("a", cfg.code_a)->required();
  dist->add_option("b", cfg.code_b)->required();
  dist->add_option("--weights", cfg.weights, "8 comma-separated per-bit weights");

  auto *cons = app.add_subcommand("consolidate", "Group labels (one per line) by code");
  cons->add_option("labels-file", cfg.labels_file)->required()->check(CLI::ExistingFile);
  cons->add_option("--lexicon", cfg.lexicon, "Lexicon JSON (default: built-in table)")->check(CLI::ExistingFile);

  auto *fst = app.add_subcommand("foon-stats", "Node counts and motion frequencies of a FOON file");
  fst->add_option("file", cfg.foon_file)->required()->check(CLI::ExistingFile);
  fst->add_option("--top", cfg.top, "Rows shown and coverage k")->capture_default_str();
  fst->add_option("--annotate", cfg.annotate, "Lexicon JSON used to attach codes")->check(CLI::ExistingFile);
  fst->add_option("--out", cfg.out, "Full frequency report CSV");

  auto *synth = app.add_subcommand("synth", "Sample from a mixture JSON");
  synth->add_option("--spec", cfg.spec, "Mixture JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--n", cfg.n, "Sample count")->required();
  synth->add_option("--out", cfg.out, "Output CSV (default stdout)");

  auto *fit = app.add_subcommand("fit", "Fit a Gaussian mixture by EM");
  fit->add_option("--in", cfg.in, "Samples CSV, trial CSV, or directory of trial CSVs")->required()->check(CLI::ExistingPath);
  fit->add_option("--k", cfg.k, "Components (upper bound with --bic)")->capture_default_str()->check(CLI::Range(1, 64));
  fit->add_option("--out", cfg.out, "Model JSON (default stdout)");
  fit->add_option("--report", cfg.report, "Fit report JSON");
  fit->add_option("--channels", cfg.channels, "force or all")->check(CLI::IsMember({"force", "all"}))->capture_default_str();
  fit->add_option("--standardize", cfg.standardize)->check(CLI::IsMember({"none", "zscore"}))->capture_default_str();
  fit->add_option("--init", cfg.init)->check(CLI::IsMember({"kmeans", "random"}))->capture_default_str();
  fit->add_flag("--bic", cfg.bic, "Select k in 1..K by BIC");

  auto *kl = app.add_subcommand("kl", "Divergences between two mixture JSON files");
  kl->add_option("--f", cfg.f)->required()->check(CLI::ExistingFile);
  kl->add_option("--g", cfg.g)->required()->check(CLI::ExistingFile);
  kl->add_option("--mc", cfg.mc, "Also estimate KL(f||g) from N draws");

  auto *matrix = app.add_subcommand("matrix", "Pairwise divergence matrix from <label>_<variant>.json models");
  matrix->add_option("--models", cfg.models_dir)->required();
  matrix->add_option("--out", cfg.out, "Matrix CSV (default stdout)");
  matrix->add_option("--heatmap", cfg.heatmap, "PGM heatmap");

  auto *eval = app.add_subcommand("eval", "Cluster consistency of a matrix against motion codes");
  eval->add_option("--matrix", cfg.matrix)->required()->check(CLI::ExistingFile);
  eval->add_option("--lexicon", cfg.lexicon, "Lexicon JSON (default: built-in table)")->check(CLI::ExistingFile);
  eval->add_option("--out", cfg.out, "Report JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (encode->parsed()) return run_encode(cfg, out, err);
    if (decode->parsed()) return run_decode(cfg, out);
    if (validate_cmd->parsed()) return run_validate(cfg, out);
    if (dist->parsed()) return run_dist(cfg, out);
    if (cons->parsed()) return run_consolidate(cfg, out);
    if (fst->parsed()) return run_foon_stats(cfg, out);
    if (synth->parsed()) return run_synth(cfg, out);
    if (fit->parsed()) return run_fit(cfg, out);
    if (kl->parsed()) return run_kl(cfg, out);
    if (matrix->parsed()) return run_matrix(cfg, out);
    if (eval->parsed()) return run_eval(cfg, out);
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace mtax::cli
