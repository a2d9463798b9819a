#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "parsetalk/grammar.hpp"
#include "parsetalk/kb.hpp"
#include "parsetalk/phrase.hpp"

namespace parsetalk {

enum class Predicate { Syn, Con };

// Per (parser tag, predicate) invocation tallies — the experiment's unit of
// measurement. Increments are safe from concurrent activities; totals are
// read at quiescence.
class CheckCounters {
 public:
  void increment(const std::string& parser_tag, Predicate p);
  std::uint64_t get(const std::string& parser_tag, Predicate p) const;
  // (tag, predicate, count) rows in deterministic order.
  std::vector<std::tuple<std::string, Predicate, std::uint64_t>> snapshot() const;
  void reset();

 private:
  struct Cell {
    std::atomic<std::uint64_t> syn{0};
    std::atomic<std::uint64_t> con{0};
  };
  Cell& cell(const std::string& tag);
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Cell>> cells_;
};

struct ValencyMatch {
  Position head_pos;
  Position modifier_root;
  std::string role_name;
  FeatureBundle unified_agreement;
  std::optional<std::string> sem_role;  // resolved against the head reading
};

// SYNTAXCHECK. Returns the first valency (in declared order) of the head
// word's resolved class that can accept the modifier phrase's root:
// unsaturated, class-subsumed, direction and same-side precedence respected,
// agreement and modifier feature constraints unifiable. Increments the SYN
// counter exactly once per call.
std::optional<ValencyMatch> syntax_check(const Grammar& g, const PhraseState& head_phrase,
                                         Position head_pos, const PhraseState& modifier_phrase,
                                         CheckCounters& counters, const std::string& parser_tag);

struct ConceptOutcome {
  // Present iff consistent: the merged context extended with the new
  // assertion, plus the instance-id offset applied to the modifier side.
  std::optional<std::pair<InterpretationContext, InstanceId>> consistent;
};

// CONCEPTCHECK. Precondition: match.sem_role is set (callers skip the call —
// and the counter — for purely syntactic valencies). Merges the two phrase
// contexts and delegates to assert_role_filler. Increments the CON counter
// exactly once per call.
ConceptOutcome concept_check(const KnowledgeBase& kb, const PhraseState& head_phrase,
                             const PhraseState& modifier_phrase, const ValencyMatch& match,
                             CheckCounters& counters, const std::string& parser_tag);

// Convenience wrapper running SYNTAXCHECK and, where a sem role is present,
// CONCEPTCHECK; returns the fully attached phrase on success. Both parsers
// license every edge through this same pair of predicates.
std::optional<PhraseState> check_and_attach(const Grammar& g, const KnowledgeBase& kb,
                                            const PhraseState& head_phrase, Position head_pos,
                                            const PhraseState& modifier_phrase,
                                            CheckCounters& counters,
                                            const std::string& parser_tag);

}  // namespace parsetalk
