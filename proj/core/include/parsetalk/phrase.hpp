#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "parsetalk/grammar.hpp"
#include "parsetalk/kb.hpp"

namespace parsetalk {

using Position = std::uint32_t;

// One word in a dependency tree. Node ids are token positions, which are
// unique within a phrase.
struct WordNode {
  Position position = 0;
  Reading reading;
  FeatureBundle features;  // resolved class features overlaid with lexeme features
  std::optional<std::pair<Position, std::string>> head;     // (head position, role)
  std::vector<std::pair<Position, std::string>> modifiers;  // (modifier position, role)
  std::optional<InstanceId> instance;

  bool operator==(const WordNode&) const = default;
};

// An immutable dependency tree over a (possibly discontinuous) set of token
// positions, together with its interpretation context. All modification goes
// through copying; published phrases are never touched again.
struct PhraseState {
  std::map<Position, WordNode> nodes;
  Position root = 0;
  InterpretationContext context;

  bool operator==(const PhraseState&) const = default;

  std::set<Position> coverage() const {
    std::set<Position> out;
    for (const auto& [pos, _] : nodes) out.insert(pos);
    return out;
  }
  const WordNode& at(Position pos) const { return nodes.at(pos); }
  Position leftmost() const { return nodes.begin()->first; }
  Position rightmost() const { return nodes.rbegin()->first; }

  // Head chain from the rightmost word up to the root: the only legal
  // attachment sites for following material.
  std::vector<Position> right_rim() const { return rim_from(rightmost()); }
  // Mirror image for the modifier search.
  std::vector<Position> left_rim() const { return rim_from(leftmost()); }

  std::uint32_t filler_count(Position head_pos, const std::string& role) const;

 private:
  std::vector<Position> rim_from(Position start) const;
};

using PhrasePtr = std::shared_ptr<const PhraseState>;

// Builds a single-word phrase for one reading, instantiating its concept
// (if any) in a fresh context.
PhraseState make_lexical_phrase(const Grammar& g, const KnowledgeBase& kb, Position pos,
                                const Reading& reading);

// Checks treeness, coverage and filler-count bookkeeping.
bool well_formed(const Grammar& g, const PhraseState& p);

// Canonical structural encoding: equal strings iff equal trees (positions,
// classes and role labels). Used for result comparison, duplicate
// suppression and the publication-hash invariant.
std::string tree_signature(const PhraseState& p);

// Fowler–Noll–Vo hash of the signature.
std::uint64_t tree_hash(const PhraseState& p);

// The non-destructive attachment: deep-copies head and modifier phrases,
// adds the role edge, narrows agreement features on both endpoints and
// merges the interpretation contexts (extended with `assertion_ctx` when the
// edge carried a sem role). Sources remain untouched.
// `mod_instance_offset` is the renumbering applied to the modifier context
// by merge_contexts and is replayed onto the copied modifier nodes.
PhraseState attach_phrases(const PhraseState& head_phrase, Position head_pos,
                           const PhraseState& mod_phrase, const std::string& role,
                           const FeatureBundle& unified_agreement,
                           const InterpretationContext& merged_context,
                           InstanceId mod_instance_offset);

}  // namespace parsetalk
