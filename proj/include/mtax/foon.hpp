#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtax/lexicon.hpp"
#include "mtax/taxonomy.hpp"

namespace mtax::foon {

struct ObjectNode {
  std::string label;
  std::vector<std::string> states;
};

struct MotionNode {
  std::string label;
  std::optional<MotionCode> code;
};

/// One manipulation step: inputs, exactly one motion, outputs.
struct FunctionalUnit {
  std::vector<ObjectNode> inputs;
  MotionNode motion;
  std::vector<ObjectNode> outputs;
};

struct FoonGraph {
  std::vector<FunctionalUnit> units;
};

/**
 * Parses the line-oriented FOON text format.
 *
 *   O<TAB>label     object node (input before the unit's M line, output after)
 *   S<TAB>state     state attached to the preceding object node
 *   M<TAB>label     the unit's motion node
 *   //              ends the functional unit
 *
 * Empty lines are ignored. Labels are normalized (case-folded, whitespace
 * collapsed). Errors carry the 1-based line number.
 */
FoonGraph parse_foon(std::string_view text);
FoonGraph load_foon(const std::string &path);

struct NodeCounts {
  std::size_t objects = 0;
  std::size_t motions = 0;
  std::size_t total = 0;
};

/// Object nodes are counted per occurrence.
NodeCounts node_counts(const FoonGraph &g);

struct FrequencyRow {
  std::string label;
  std::size_t count = 0;
  double share = 0.0;
};

struct FrequencyReport {
  std::vector<FrequencyRow> rows;  ///< count descending, then label ascending
  std::size_t total_motion_nodes = 0;
};

/// Throws InvalidArgument on an empty graph.
FrequencyReport motion_frequency(const FoonGraph &g);

/// Fraction of motion nodes covered by the first min(k, rows) rows.
double top_k_coverage(const FrequencyReport &report, int k);

struct Annotation {
  FoonGraph graph;
  std::vector<std::string> unknown_labels;  ///< first-seen order, each once
};

Annotation annotate_motions(const FoonGraph &g, const MotionLexicon &lex);

/// CSV with columns rank,label,count,share[,code].
std::string frequency_csv(const FrequencyReport &report, const MotionLexicon *lex = nullptr);

} // namespace mtax::foon
