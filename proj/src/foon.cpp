#include "mtax/foon.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "mtax/error.hpp"
#include "mtax/text.hpp"

namespace mtax::foon {

namespace {

struct PendingUnit {
  FunctionalUnit unit;
  bool has_motion = false;
  std::size_t first_line = 0;
  ObjectNode *last_object = nullptr;
};

std::string unit_name(std::size_t index) { return "functional unit " + std::to_string(index + 1); }

} // namespace

FoonGraph parse_foon(std::string_view text) {
  FoonGraph g;
  PendingUnit cur;
  bool open = false;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    if (line == "//") {
      if (!open) throw ParseError("'//' without a functional unit", line_no);
      const auto idx = g.units.size();
      if (!cur.has_motion) throw ParseError(unit_name(idx) + " has no motion (M) line", line_no);
      if (cur.unit.inputs.empty()) throw ParseError(unit_name(idx) + " has no input object", line_no);
      if (cur.unit.outputs.empty()) throw ParseError(unit_name(idx) + " has no output object", line_no);
      g.units.push_back(std::move(cur.unit));
      cur = PendingUnit{};
      open = false;
      continue;
    }

    if (line.size() < 2 || line[1] != '\t')
      throw ParseError("malformed line, expected O/S/M followed by a tab", line_no);
    const char kind = line[0];
    const auto label = text::normalize_label(line.substr(2));
    if (label.empty()) throw ParseError("empty label", line_no);
    if (!open) {
      open = true;
      cur.first_line = line_no;
    }

    switch (kind) {
    case 'O': {
      auto &side = cur.has_motion ? cur.unit.outputs : cur.unit.inputs;
      side.push_back({label, {}});
      cur.last_object = &side.back();
      break;
    }
    case 'S':
      if (!cur.last_object) throw ParseError("state line before any object line", line_no);
      cur.last_object->states.push_back(label);
      break;
    case 'M':
      if (cur.has_motion)
        throw ParseError(unit_name(g.units.size()) + " has more than one motion (M) line", line_no);
      cur.has_motion = true;
      cur.unit.motion.label = label;
      cur.last_object = nullptr;
      break;
    default:
      throw ParseError(std::string("unknown line type '") + kind + "'", line_no);
    }
  }
  if (open)
    throw ParseError(unit_name(g.units.size()) + " starting at line " + std::to_string(cur.first_line) +
                     " is not terminated by '//'", line_no);
  return g;
}

FoonGraph load_foon(const std::string &path) { return parse_foon(text::read_file(path)); }

NodeCounts node_counts(const FoonGraph &g) {
  NodeCounts c;
  for (const auto &u : g.units) c.objects += u.inputs.size() + u.outputs.size();
  c.motions = g.units.size();
  c.total = c.objects + c.motions;
  return c;
}

FrequencyReport motion_frequency(const FoonGraph &g) {
  if (g.units.empty()) throw InvalidArgument("motion frequency of an empty graph");
  std::map<std::string, std::size_t> counts;
  for (const auto &u : g.units) ++counts[u.motion.label];

  FrequencyReport r;
  r.total_motion_nodes = g.units.size();
  for (const auto &[label, n] : counts)
    r.rows.push_back({label, n, static_cast<double>(n) / static_cast<double>(r.total_motion_nodes)});
  std::stable_sort(r.rows.begin(), r.rows.end(),
                   [](const FrequencyRow &a, const FrequencyRow &b) { return a.count > b.count; });
  return r;
}

double top_k_coverage(const FrequencyReport &report, int k) {
  if (k < 1) throw InvalidArgument("top-k coverage needs k >= 1");
  if (report.total_motion_nodes == 0) return 0.0;
  std::size_t covered = 0;
  const auto n = std::min(static_cast<std::size_t>(k), report.rows.size());
  for (std::size_t i = 0; i < n; ++i) covered += report.rows[i].count;
  return static_cast<double>(covered) / static_cast<double>(report.total_motion_nodes);
}

Annotation annotate_motions(const FoonGraph &g, const MotionLexicon &lex) {
  Annotation a{g, {}};
  std::set<std::string> missing;
  for (auto &u : a.graph.units) {
    u.motion.code = lex.find(u.motion.label);
    if (!u.motion.code && missing.insert(u.motion.label).second) a.unknown_labels.push_back(u.motion.label);
  }
  return a;
}

std::string frequency_csv(const FrequencyReport &report, const MotionLexicon *lex) {
  std::string out = lex ? "rank,label,count,share,code\n" : "rank,label,count,share\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto &row = report.rows[i];
    out += std::to_string(i + 1) + ',' + text::quote_csv(row.label) + ',' + std::to_string(row.count) + ',' +
           text::format_g(row.share);
    if (lex) {
      const auto code = lex->find(row.label);
      out += ',' + (code ? render_code(*code) : std::string());
    }
    out += '\n';
  }
  return out;
}

} // namespace mtax::foon
