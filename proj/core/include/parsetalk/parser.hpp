#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parsetalk/checks.hpp"
#include "parsetalk/grammar.hpp"
#include "parsetalk/kb.hpp"
#include "parsetalk/phrase.hpp"
#include "parsetalk/runtime.hpp"

namespace parsetalk {

// Sentence delimiters produce boundary containers that skipping never
// crosses.
bool is_sentence_delimiter(const std::string& token);

struct ParseDiagnostics {
  struct SkipEvent {
    Position token;                      // the token whose search skipped
    std::vector<Position> skipped_span;  // span of the container skipped over
  };
  // A reanalysis roll-back: a retained container was reopened and the
  // current analysis path abandoned.
  struct BacktrackEvent {
    Position token;
  };
  // GiveUpFragment: the token's container was parked unattached.
  struct ParkEvent {
    Position token;
  };
  std::vector<SkipEvent> skips;
  std::vector<BacktrackEvent> backtracks;
  std::vector<ParkEvent> parked;
  // "<pos> <role>" per unfilled Obligatory valency in the returned phrases.
  std::vector<std::string> unfilled_obligatory;
};

struct ParseResult {
  // Phrases of maximal coverage among everything produced, canonically
  // ordered; alternatives (if any) share the same coverage.
  std::vector<PhrasePtr> analyses;
  // Remaining unattached phrases, pairwise disjoint in coverage.
  std::vector<PhrasePtr> fragments;
  ParseDiagnostics diagnostics;
  std::uint64_t messages_delivered = 0;
  // Every created receipt handler must reach a terminal status; equality of
  // these two is the empirical termination-detection check.
  std::uint64_t handlers_created = 0;
  std::uint64_t handlers_terminal = 0;
  std::vector<std::string> dead_letters;
  std::vector<rt::TraceEntry> trace;  // filled only when tracing is enabled
};

struct ParseOptions {
  std::uint64_t seed = 1;
  std::string parser_tag = "PT";
  bool trace = false;
};

// Runs the restricted-parallel parse: per token, word actor initialization,
// head search against the left context, modifier search on failure, skipping
// on both failing, and restricted backtracking when skipping hits a
// boundary. Quiesces on every input; robustness comes from the UNKNOWN
// fallback reading and the skip/park machinery.
ParseResult parse(const std::vector<std::string>& tokens, const Grammar& g,
                  const KnowledgeBase& kb, CheckCounters& counters,
                  const ParseOptions& options = {});

}  // namespace parsetalk
