#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "parsetalk/checks.hpp"
#include "parsetalk/grammar.hpp"
#include "parsetalk/kb.hpp"
#include "parsetalk/phrase.hpp"

namespace parsetalk {

enum class ChartMode { Contiguous, Disc };

struct ChartOptions {
  ChartMode mode = ChartMode::Contiguous;
  std::uint64_t edge_budget = 1'000'000;
  std::string parser_tag = "CP";
};

struct ChartResult {
  // Complete analyses (no unfilled Obligatory valency) of maximal coverage
  // cardinality, canonically ordered by signature.
  std::vector<PhrasePtr> analyses;
  std::uint64_t edges = 0;
  bool aborted = false;  // edge budget exhausted
  std::string abort_note;
};

// Exhaustive bottom-up active chart parse over the token sequence. Every
// edge is licensed by the same SYNTAXCHECK/CONCEPTCHECK predicates as the
// incremental parser; no packing, duplicate suppression only for
// structurally identical trees. Contiguous mode additionally requires the
// combined coverage to be a gap-free interval with adjacent parts.
ChartResult chart_parse(const std::vector<std::string>& tokens, const Grammar& g,
                        const KnowledgeBase& kb, CheckCounters& counters,
                        const ChartOptions& options = {});

}  // namespace parsetalk
