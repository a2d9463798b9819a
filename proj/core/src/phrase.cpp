#include "parsetalk/phrase.hpp"

#include <algorithm>
#include <sstream>

namespace parsetalk {

std::uint32_t PhraseState::filler_count(Position head_pos, const std::string& role) const {
  std::uint32_t n = 0;
  for (const auto& [pos, r] : at(head_pos).modifiers)
    if (r == role) ++n;
  return n;
}

std::vector<Position> PhraseState::rim_from(Position start) const {
  std::vector<Position> out;
  Position cur = start;
  for (;;) {
    out.push_back(cur);
    const auto& node = at(cur);
    if (!node.head) break;
    cur = node.head->first;
  }
  return out;
}

PhraseState make_lexical_phrase(const Grammar& g, const KnowledgeBase& kb, Position pos,
                                const Reading& reading) {
  PhraseState p;
  p.root = pos;
  WordNode node;
  node.position = pos;
  node.reading = reading;
  auto resolved = resolve_class(g, reading.word_class);
  node.features = resolved.features;
  for (const auto& [fname, values] : reading.features.attributes)
    node.features.attributes[fname] = values;  // lexeme overrides class
  if (reading.concept_name) {
    auto [ctx, id] = instantiate(kb, InterpretationContext{}, *reading.concept_name);
    p.context = std::move(ctx);
    node.instance = id;
  }
  p.nodes.emplace(pos, std::move(node));
  return p;
}

bool well_formed(const Grammar& g, const PhraseState& p) {
  if (p.nodes.empty()) return false;
  if (!p.nodes.count(p.root)) return false;
  if (p.at(p.root).head) return false;
  std::size_t reached = 0;
  std::vector<Position> stack{p.root};
  std::set<Position> visited;
  while (!stack.empty()) {
    Position cur = stack.back();
    stack.pop_back();
    if (!visited.insert(cur).second) return false;
    ++reached;
    const auto& node = p.at(cur);
    auto resolved = resolve_class(g, node.reading.word_class);
    std::map<std::string, std::uint32_t> counts;
    for (const auto& [mpos, role] : node.modifiers) {
      auto it = p.nodes.find(mpos);
      if (it == p.nodes.end()) return false;
      if (!it->second.head || it->second.head->first != cur || it->second.head->second != role)
        return false;
      const auto* v = resolved.find_valency(role);
      if (!v || ++counts[role] > v->max_fillers) return false;
      stack.push_back(mpos);
    }
  }
  return reached == p.nodes.size();
}

namespace {

void signature_rec(const PhraseState& p, Position pos, std::ostream& out) {
  const auto& node = p.at(pos);
  out << node.position << ':' << node.reading.word_class << '(';
  auto mods = node.modifiers;
  std::sort(mods.begin(), mods.end());
  for (const auto& [mpos, role] : mods) {
    out << role << "->";
    signature_rec(p, mpos, out);
    out << ' ';
  }
  out << ')';
}

}  // namespace

std::string tree_signature(const PhraseState& p) {
  std::ostringstream out;
  signature_rec(p, p.root, out);
  return out.str();
}

std::uint64_t tree_hash(const PhraseState& p) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : tree_signature(p)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

PhraseState attach_phrases(const PhraseState& head_phrase, Position head_pos,
                           const PhraseState& mod_phrase, const std::string& role,
                           const FeatureBundle& unified_agreement,
                           const InterpretationContext& merged_context,
                           InstanceId mod_instance_offset) {
  PhraseState out;
  out.root = head_phrase.root;
  out.context = merged_context;
  for (const auto& [pos, node] : head_phrase.nodes) out.nodes.emplace(pos, node);
  for (const auto& [pos, node] : mod_phrase.nodes) {
    WordNode copy = node;
    if (copy.instance) copy.instance = *copy.instance + mod_instance_offset;
    out.nodes.emplace(pos, std::move(copy));
  }
  WordNode& head_node = out.nodes.at(head_pos);
  WordNode& mod_root = out.nodes.at(mod_phrase.root);
  head_node.modifiers.emplace_back(mod_phrase.root, role);
  mod_root.head = {head_pos, role};
  // Agreement results are propagated onto both endpoints of the new edge.
  for (const auto& [fname, values] : unified_agreement.attributes) {
    head_node.features.attributes[fname] = values;
    mod_root.features.attributes[fname] = values;
  }
  return out;
}

}  // namespace parsetalk
