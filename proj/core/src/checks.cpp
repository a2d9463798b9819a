#include "parsetalk/checks.hpp"

#include <mutex>

namespace parsetalk {

CheckCounters::Cell& CheckCounters::cell(const std::string& tag) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cells_.find(tag);
  if (it == cells_.end()) it = cells_.emplace(tag, std::make_unique<Cell>()).first;
  return *it->second;
}

void CheckCounters::increment(const std::string& parser_tag, Predicate p) {
  Cell& c = cell(parser_tag);
  (p == Predicate::Syn ? c.syn : c.con).fetch_add(1, std::memory_order_relaxed);
}

std::uint64_t CheckCounters::get(const std::string& parser_tag, Predicate p) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cells_.find(parser_tag);
  if (it == cells_.end()) return 0;
  return (p == Predicate::Syn ? it->second->syn : it->second->con).load();
}

std::vector<std::tuple<std::string, Predicate, std::uint64_t>> CheckCounters::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::tuple<std::string, Predicate, std::uint64_t>> out;
  for (const auto& [tag, c] : cells_) {
    out.emplace_back(tag, Predicate::Syn, c->syn.load());
    out.emplace_back(tag, Predicate::Con, c->con.load());
  }
  return out;
}

void CheckCounters::reset() {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& [tag, c] : cells_) {
    c->syn.store(0);
    c->con.store(0);
  }
}

std::optional<ValencyMatch> syntax_check(const Grammar& g, const PhraseState& head_phrase,
                                         Position head_pos, const PhraseState& modifier_phrase,
                                         CheckCounters& counters, const std::string& parser_tag) {
  counters.increment(parser_tag, Predicate::Syn);
  const WordNode& head = head_phrase.at(head_pos);
  const WordNode& mod_root = modifier_phrase.at(modifier_phrase.root);
  auto resolved = resolve_class(g, head.reading.word_class);
  auto mod_class = resolve_class(g, mod_root.reading.word_class);
  if (!mod_class.governable) return std::nullopt;
  for (const ValencySpec& v : resolved.valencies) {
    if (head_phrase.filler_count(head_pos, v.role_name) >= v.max_fillers) continue;
    if (!is_subclass(g, mod_root.reading.word_class, v.modifier_class)) continue;
    if (v.direction == Direction::Left ? mod_root.position >= head.position
                                       : mod_root.position <= head.position)
      continue;
    // Same-side precedence against already-attached co-modifiers.
    bool ordered = true;
    for (const auto& [before, after] : resolved.order) {
      if (v.role_name == before) {
        for (const auto& [mpos, role] : head.modifiers)
          if (role == after && mod_root.position > mpos) ordered = false;
      } else if (v.role_name == after) {
        for (const auto& [mpos, role] : head.modifiers)
          if (role == before && mod_root.position < mpos) ordered = false;
      }
    }
    if (!ordered) continue;
    auto agreed = unify_on(head.features, mod_root.features, v.agreement);
    if (!agreed) continue;
    if (!v.modifier_features.attributes.empty() &&
        !unify(mod_root.features, v.modifier_features))
      continue;
    ValencyMatch match;
    match.head_pos = head_pos;
    match.modifier_root = mod_root.position;
    match.role_name = v.role_name;
    match.unified_agreement = std::move(*agreed);
    match.sem_role = head.reading.sem_role_for(v);
    return match;
  }
  return std::nullopt;
}

ConceptOutcome concept_check(const KnowledgeBase& kb, const PhraseState& head_phrase,
                             const PhraseState& modifier_phrase, const ValencyMatch& match,
                             CheckCounters& counters, const std::string& parser_tag) {
  counters.increment(parser_tag, Predicate::Con);
  const WordNode& head = head_phrase.at(match.head_pos);
  const WordNode& mod_root = modifier_phrase.at(match.modifier_root);
  if (!head.instance || !mod_root.instance)
    throw KbError("sem role '" + *match.sem_role +
                  "' on words without concept instances (grammar/KB mismatch)");
  auto [merged, offset] = merge_contexts(head_phrase.context, modifier_phrase.context);
  auto result =
      assert_role_filler(kb, merged, *head.instance, *match.sem_role, *mod_root.instance + offset);
  if (auto* ok = std::get_if<Consistent>(&result))
    return ConceptOutcome{std::make_pair(std::move(ok->ctx), offset)};
  return ConceptOutcome{};
}

std::optional<PhraseState> check_and_attach(const Grammar& g, const KnowledgeBase& kb,
                                            const PhraseState& head_phrase, Position head_pos,
                                            const PhraseState& modifier_phrase,
                                            CheckCounters& counters,
                                            const std::string& parser_tag) {
  auto match = syntax_check(g, head_phrase, head_pos, modifier_phrase, counters, parser_tag);
  if (!match) return std::nullopt;
  InterpretationContext merged;
  InstanceId offset;
  if (match->sem_role) {
    auto outcome = concept_check(kb, head_phrase, modifier_phrase, *match, counters, parser_tag);
    if (!outcome.consistent) return std::nullopt;
    std::tie(merged, offset) = std::move(*outcome.consistent);
  } else {
    std::tie(merged, offset) = merge_contexts(head_phrase.context, modifier_phrase.context);
  }
  return attach_phrases(head_phrase, head_pos, modifier_phrase, match->role_name,
                        match->unified_agreement, merged, offset);
}

}  // namespace parsetalk
