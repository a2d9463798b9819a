#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "oracle.hpp"
#include "parsetalk/chart.hpp"
#include "parsetalk/parser.hpp"
#include "testutil.hpp"

using namespace parsetalk;

namespace {

std::set<std::string> signatures(const std::vector<PhrasePtr>& phrases) {
  std::set<std::string> out;
  for (const auto& p : phrases) out.insert(tree_signature(*p));
  return out;
}

ChartResult chart(const std::string& sentence, ChartMode mode,
                  std::uint64_t budget = 1'000'000) {
  CheckCounters counters;
  ChartOptions options;
  options.mode = mode;
  options.edge_budget = budget;
  return chart_parse(testutil::tokenize(sentence), testutil::toy_grammar(), testutil::toy_kb(),
                     counters, options);
}

}  // namespace

TEST_CASE("unambiguous sentence: one analysis, same tree as the incremental parser") {
  auto result = chart("the fast server crashes", ChartMode::Contiguous);
  REQUIRE(result.analyses.size() == 1);
  CheckCounters counters;
  auto pt = parse(testutil::tokenize("the fast server crashes"), testutil::toy_grammar(),
                  testutil::toy_kb(), counters);
  REQUIRE(pt.analyses.size() == 1);
  CHECK(tree_signature(*result.analyses[0]) == tree_signature(*pt.analyses[0]));
}

TEST_CASE("contiguous mode stops at the unknown token") {
  auto result = chart("the blorp server crashes", ChartMode::Contiguous);
  // No interval through position 1 parses, so the best complete edges cover
  // the two-token interval {2,3}.
  REQUIRE_FALSE(result.analyses.empty());
  for (const auto& p : result.analyses) CHECK(p->coverage() == std::set<Position>{2, 3});
}

TEST_CASE("discontinuous analyses include every contiguous one") {
  for (const char* s : {"the fast server crashes", "the server on the disk crashes",
                        "the server on the disk on the server"}) {
    auto c = chart(s, ChartMode::Contiguous);
    auto d = chart(s, ChartMode::Disc);
    auto cs = signatures(c.analyses);
    auto ds = signatures(d.analyses);
    // Maximal-coverage filtering applies to both, and coverage agrees on
    // these fully parsable sentences.
    for (const auto& sig : cs) CHECK(ds.count(sig) == 1);
  }
}

TEST_CASE("edge budget abort is reported, not silently truncated") {
  auto result = chart("the fast new server on the fast new disk crashes", ChartMode::Disc, 50);
  CHECK(result.aborted);
  CHECK(result.analyses.empty());
  CHECK_FALSE(result.abort_note.empty());
  CHECK(result.edges >= 50);
}

TEST_CASE("chart analyses equal the brute-force enumeration") {
  const Grammar& g = testutil::toy_grammar();
  const KnowledgeBase& kb = testutil::toy_kb();
  for (const char* s :
       {"the server", "the crashes stop", "the server sleeps", "the fast server crashes",
        "the blorp server crashes", "the fast new server crashes",
        "the server on the disk crashes"}) {
    auto tokens = testutil::tokenize(s);
    if (tokens.size() <= 6) {
      CAPTURE(s);
      auto c = chart(s, ChartMode::Contiguous);
      CHECK(signatures(c.analyses) == oracle::enumerate_analyses(tokens, g, kb, true));
      auto d = chart(s, ChartMode::Disc);
      CHECK(signatures(d.analyses) == oracle::enumerate_analyses(tokens, g, kb, false));
    }
  }
}

TEST_CASE("discontinuous search does at least as much checking") {
  for (const char* s : {"the fast server crashes", "the server on the disk crashes"}) {
    CheckCounters counters;
    auto tokens = testutil::tokenize(s);
    ChartOptions contiguous;
    contiguous.parser_tag = "CP";
    chart_parse(tokens, testutil::toy_grammar(), testutil::toy_kb(), counters, contiguous);
    ChartOptions disc;
    disc.mode = ChartMode::Disc;
    disc.parser_tag = "CP.disc";
    chart_parse(tokens, testutil::toy_grammar(), testutil::toy_kb(), counters, disc);
    CHECK(counters.get("CP.disc", Predicate::Syn) >= counters.get("CP", Predicate::Syn));
    CHECK(counters.get("CP.disc", Predicate::Con) >= counters.get("CP", Predicate::Con));
  }
}
