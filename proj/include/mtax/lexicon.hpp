#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtax/error.hpp"
#include "mtax/taxonomy.hpp"

namespace mtax {

enum class EntrySource { paper_table, user };

struct LexiconEntry {
  std::string label;
  std::vector<std::string> aliases;
  MotionCode code;
  EntrySource source = EntrySource::user;
};

/// Which reading of the two non-contact table rows to seed.
///
/// `verbatim` stores the printed codes (shake 00000100, rotate/pour 00001000).
/// `prose_corrected` swaps their trajectory bits so that pouring is revolute.
enum class LexiconVariant { verbatim, prose_corrected };

enum class LookupStatus { found, ambiguous, unknown };

struct LookupResult {
  LookupStatus status = LookupStatus::unknown;
  std::optional<MotionCode> code;
  /// Matching labels when ambiguous, nearest labels by edit distance when unknown.
  std::vector<std::string> candidates;
};

/**
 * Immutable label -> code dictionary.
 *
 * Queries are normalized (case-folded, trimmed, whitespace collapsed) and
 * matched against labels and aliases first. A query with no exact match is
 * retried with parenthetical qualifiers stripped on both sides, so "crack"
 * finds "crack (egg)"; when the stripped form spans several codes, as with
 * "push", the lookup is ambiguous.
 */
class MotionLexicon {
public:
  MotionLexicon() = default;
  /// Throws InvalidArgument on an illegal code, an empty label, or a label or
  /// alias that would resolve to two different codes.
  explicit MotionLexicon(std::vector<LexiconEntry> entries);

  const std::vector<LexiconEntry> &entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  LookupResult resolve(std::string_view label) const;
  std::optional<MotionCode> find(std::string_view label) const;

  /// Distinct codes present, ascending.
  std::vector<MotionCode> codes() const;

private:
  std::vector<std::string> nearest(const std::string &key, std::size_t count) const;

  std::vector<LexiconEntry> entries_;
  std::map<std::string, MotionCode> exact_;
  std::map<std::string, std::vector<std::pair<std::string, MotionCode>>> stripped_;
};

/// The fourteen-row table as printed, or with the prose-corrected trajectory bits.
MotionLexicon paper_table_lexicon(LexiconVariant variant = LexiconVariant::verbatim);

MotionLexicon parse_lexicon_json(std::string_view json, EntrySource source = EntrySource::user);
MotionLexicon load_lexicon(const std::string &path, EntrySource source = EntrySource::user);
std::string lexicon_to_json(const MotionLexicon &lex);

class UnknownLabel : public Error {
public:
  UnknownLabel(std::string label, LookupStatus status, std::vector<std::string> candidates);
  const std::string &label() const noexcept { return label_; }
  LookupStatus status() const noexcept { return status_; }
  const std::vector<std::string> &candidates() const noexcept { return candidates_; }

private:
  std::string label_;
  LookupStatus status_;
  std::vector<std::string> candidates_;
};

/// Throws UnknownLabel (listing nearest or competing labels) if the label does not resolve.
MotionCode lookup(std::string_view label, const MotionLexicon &lex);

struct Consolidation {
  std::map<MotionCode, std::vector<std::string>> groups;
  /// Labels that are unknown or ambiguous.
  std::vector<std::string> unknowns;
};

/// Groups normalized, deduplicated labels by code, preserving first-seen order.
Consolidation consolidate(std::span<const std::string> labels, const MotionLexicon &lex);

} // namespace mtax
