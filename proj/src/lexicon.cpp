#include "mtax/lexicon.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "mtax/text.hpp"

namespace mtax {

namespace {

struct SeedRow {
  const char *code;
  std::vector<std::pair<const char *, std::vector<std::string>>> motions;
};

const std::vector<SeedRow> &seed_rows() {
  static const std::vector<SeedRow> rows = {
      {"00000100", {{"shake", {"sprinkle"}}}},
      {"00001000", {{"rotate", {}}, {"pour", {}}}},
      {"10111000", {{"poke", {}}}},
      {"10111010", {{"pick-and-place", {"pick and place"}}, {"push (rigid)", {}}}},
      {"10111100", {{"flip", {}}}},
      {"11001000", {{"dip", {}}}},
      {"11001010", {{"insert", {}}, {"pierce", {}}, {"mix", {}}, {"stir", {}}}},
      {"11001100", {{"scoop", {}}}},
      {"11101010", {{"brush", {}}, {"wipe", {}}, {"push (deforming)", {}}}},
      {"11110100", {{"tap", {}}, {"crack (egg)", {}}}},
      {"11110111", {{"twist (open/close container)", {}}}},
      {"11111010",
       {{"cut", {}}, {"slice", {}}, {"chop", {}}, {"mash", {}}, {"roll (unimanual)", {}},
        {"peel", {}}, {"scrape", {}}, {"shave", {}}, {"spread", {}}, {"squeeze", {}},
        {"press", {}}, {"flatten", {}}}},
      {"11111011", {{"roll (bimanual)", {}}, {"pull apart", {}}, {"grate", {}}}},
      {"11111110", {{"fold (wrap/unwrap)", {}}}},
  };
  return rows;
}

} // namespace

MotionLexicon::MotionLexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  for (const auto &e : entries_) {
    if (text::normalize_label(e.label).empty()) throw InvalidArgument("lexicon entry with empty label");
    if (!validate(e.code).ok())
      throw InvalidArgument("lexicon entry '" + e.label + "' has illegal code " + render_code(e.code));
    std::vector<std::string> names{e.label};
    names.insert(names.end(), e.aliases.begin(), e.aliases.end());
    for (const auto &name : names) {
      const auto key = text::normalize_label(name);
      if (key.empty()) throw InvalidArgument("lexicon entry '" + e.label + "' has an empty alias");
      const auto [it, inserted] = exact_.emplace(key, e.code);
      if (!inserted && it->second != e.code)
        throw InvalidArgument("label '" + key + "' maps to both " + render_code(it->second) + " and " +
                              render_code(e.code));
      auto &bucket = stripped_[text::strip_qualifiers(name)];
      if (std::none_of(bucket.begin(), bucket.end(), [&](const auto &p) { return p.first == key; }))
        bucket.emplace_back(key, e.code);
    }
  }
}

LookupResult MotionLexicon::resolve(std::string_view label) const {
  const auto key = text::normalize_label(label);
  if (const auto it = exact_.find(key); it != exact_.end())
    return {LookupStatus::found, it->second, {}};

  if (const auto it = stripped_.find(text::strip_qualifiers(key)); it != stripped_.end()) {
    const auto &bucket = it->second;
    const bool single_code = std::all_of(bucket.begin(), bucket.end(),
                                         [&](const auto &p) { return p.second == bucket.front().second; });
    if (single_code) return {LookupStatus::found, bucket.front().second, {}};
    LookupResult r{LookupStatus::ambiguous, std::nullopt, {}};
    for (const auto &p : bucket) r.candidates.push_back(p.first);
    return r;
  }
  return {LookupStatus::unknown, std::nullopt, nearest(key, 3)};
}

std::optional<MotionCode> MotionLexicon::find(std::string_view label) const {
  auto r = resolve(label);
  return r.status == LookupStatus::found ? r.code : std::nullopt;
}

std::vector<MotionCode> MotionLexicon::codes() const {
  std::set<MotionCode> seen;
  for (const auto &e : entries_) seen.insert(e.code);
  return {seen.begin(), seen.end()};
}

std::vector<std::string> MotionLexicon::nearest(const std::string &key, std::size_t count) const {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto &[name, code] : exact_) scored.emplace_back(text::edit_distance(key, name), name);
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(count, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

MotionLexicon paper_table_lexicon(LexiconVariant variant) {
  std::vector<LexiconEntry> entries;
  for (const auto &row : seed_rows()) {
    auto code = parse_code(row.code);
    if (variant == LexiconVariant::prose_corrected && !code.contact) std::swap(code.prismatic, code.revolute);
    for (const auto &[label, aliases] : row.motions)
      entries.push_back({label, aliases, code, EntrySource::paper_table});
  }
  return MotionLexicon(std::move(entries));
}

MotionLexicon parse_lexicon_json(std::string_view json, EntrySource source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(std::string("lexicon JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("lexicon JSON must be an array of entries");
  std::vector<LexiconEntry> entries;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto &item = doc[i];
    const auto where = "lexicon entry " + std::to_string(i) + ": ";
    if (!item.is_object() || !item.contains("label") || !item["label"].is_string() ||
        !item.contains("code") || !item["code"].is_string())
      throw ParseError(where + "needs string fields \"label\" and \"code\"");
    LexiconEntry e;
    e.label = item["label"].get<std::string>();
    e.code = parse_code(item["code"].get<std::string>());
    e.source = source;
    if (item.contains("aliases")) {
      if (!item["aliases"].is_array()) throw ParseError(where + "\"aliases\" must be an array");
      for (const auto &a : item["aliases"]) {
        if (!a.is_string()) throw ParseError(where + "aliases must be strings");
        e.aliases.push_back(a.get<std::string>());
      }
    }
    entries.push_back(std::move(e));
  }
  return MotionLexicon(std::move(entries));
}

MotionLexicon load_lexicon(const std::string &path, EntrySource source) {
  return parse_lexicon_json(text::read_file(path), source);
}

std::string lexicon_to_json(const MotionLexicon &lex) {
  auto doc = nlohmann::json::array();
  for (const auto &e : lex.entries())
    doc.push_back({{"label", e.label}, {"aliases", e.aliases}, {"code", render_code(e.code)}});
  return doc.dump(2) + "\n";
}

UnknownLabel::UnknownLabel(std::string label, LookupStatus status, std::vector<std::string> candidates)
    : Error([&] {
        std::string msg = (status == LookupStatus::ambiguous ? "ambiguous label '" : "unknown label '") + label + "'";
        if (!candidates.empty()) {
          msg += status == LookupStatus::ambiguous ? "; candidates: " : "; nearest: ";
          for (std::size_t i = 0; i < candidates.size(); ++i) msg += (i ? ", " : "") + candidates[i];
        }
        return msg;
      }()),
      label_(std::move(label)), status_(status), candidates_(std::move(candidates)) {}

MotionCode lookup(std::string_view label, const MotionLexicon &lex) {
  auto r = lex.resolve(label);
  if (r.status != LookupStatus::found) throw UnknownLabel(std::string(label), r.status, std::move(r.candidates));
  return *r.code;
}

Consolidation consolidate(std::span<const std::string> labels, const MotionLexicon &lex) {
  Consolidation out;
  std::set<std::string> seen;
  for (const auto &raw : labels) {
    auto key = text::normalize_label(raw);
    if (key.empty() || !seen.insert(key).second) continue;
    if (auto code = lex.find(key)) {
      out.groups[*code].push_back(std::move(key));
    } else {
      out.unknowns.push_back(std::move(key));
    }
  }
  return out;
}

} // namespace mtax
