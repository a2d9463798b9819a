#include "parsetalk/chart.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "parsetalk/parser.hpp"

namespace parsetalk {

namespace {

bool coverages_disjoint(const std::set<Position>& a, const std::set<Position>& b) {
  for (Position p : b)
    if (a.count(p)) return false;
  return true;
}

bool contiguous_union(const std::set<Position>& a, const std::set<Position>& b) {
  Position lo = std::min(*a.begin(), *b.begin());
  Position hi = std::max(*a.rbegin(), *b.rbegin());
  return static_cast<std::size_t>(hi - lo + 1) == a.size() + b.size();
}

bool complete(const Grammar& g, const PhraseState& p) {
  for (const auto& [pos, node] : p.nodes) {
    auto resolved = resolve_class(g, node.reading.word_class);
    for (const auto& v : resolved.valencies)
      if (v.obligatory && p.filler_count(pos, v.role_name) == 0) return false;
  }
  return true;
}

}  // namespace

ChartResult chart_parse(const std::vector<std::string>& tokens, const Grammar& g,
                        const KnowledgeBase& kb, CheckCounters& counters,
                        const ChartOptions& options) {
  ChartResult result;
  std::vector<PhrasePtr> edges;
  std::set<std::string> seen;
  std::deque<std::size_t> agenda;

  auto add_edge = [&](PhraseState state) {
    auto sig = tree_signature(state);
    if (!seen.insert(sig).second) return;
    edges.push_back(std::make_shared<PhraseState>(std::move(state)));
    agenda.push_back(edges.size() - 1);
  };

  for (Position pos = 0; pos < tokens.size(); ++pos) {
    if (is_sentence_delimiter(tokens[pos])) continue;
    for (const Reading& r : lexical_lookup(g, tokens[pos]))
      add_edge(make_lexical_phrase(g, kb, pos, r));
  }

  std::vector<std::size_t> processed;
  while (!agenda.empty()) {
    if (edges.size() > options.edge_budget) {
      result.aborted = true;
      result.abort_note = "edge budget of " + std::to_string(options.edge_budget) +
                          " exhausted after " + std::to_string(edges.size()) + " edges";
      break;
    }
    std::size_t i = agenda.front();
    agenda.pop_front();
    auto cov_i = edges[i]->coverage();
    for (std::size_t j : processed) {
      auto cov_j = edges[j]->coverage();
      if (!coverages_disjoint(cov_i, cov_j)) continue;
      if (options.mode == ChartMode::Contiguous && !contiguous_union(cov_i, cov_j)) continue;
      // Both orders: i governing j and j governing i, always at the head
      // edge's root.
      for (auto [h, m] : {std::pair{i, j}, std::pair{j, i}}) {
        auto combined = check_and_attach(g, kb, *edges[h], edges[h]->root, *edges[m], counters,
                                         options.parser_tag);
        if (combined) add_edge(std::move(*combined));
      }
    }
    processed.push_back(i);
  }

  result.edges = edges.size();
  if (result.aborted) return result;

  std::size_t best = 0;
  for (const auto& e : edges)
    if (complete(g, *e)) best = std::max(best, e->coverage().size());
  std::map<std::string, PhrasePtr> ranked;
  for (const auto& e : edges)
    if (complete(g, *e) && e->coverage().size() == best) ranked.emplace(tree_signature(*e), e);
  for (auto& [_, e] : ranked) result.analyses.push_back(std::move(e));
  return result;
}

}  // namespace parsetalk
