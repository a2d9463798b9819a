#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "parsetalk/checks.hpp"
#include "parsetalk/parser.hpp"
#include "testutil.hpp"

using namespace parsetalk;

namespace {

PhraseState lex(const std::string& token, Position pos, std::size_t reading_index = 0) {
  const Grammar& g = testutil::toy_grammar();
  return make_lexical_phrase(g, testutil::toy_kb(), pos,
                             lexical_lookup(g, token).at(reading_index));
}

}  // namespace

TEST_CASE("syntax_check finds the first matching valency") {
  const Grammar& g = testutil::toy_grammar();
  CheckCounters counters;
  PhraseState the = lex("the", 0);
  PhraseState server = lex("server", 1);

  auto match = syntax_check(g, server, 1, the, counters, "T");
  REQUIRE(match);
  CHECK(match->role_name == "det");
  CHECK(match->head_pos == 1);
  CHECK(match->modifier_root == 0);
  CHECK_FALSE(match->sem_role);
  CHECK(counters.get("T", Predicate::Syn) == 1);

  // Determiners govern nothing.
  CHECK_FALSE(syntax_check(g, the, 0, server, counters, "T"));
  CHECK(counters.get("T", Predicate::Syn) == 2);
}

TEST_CASE("saturated valency rejects a second filler") {
  const Grammar& g = testutil::toy_grammar();
  const KnowledgeBase& kb = testutil::toy_kb();
  CheckCounters counters;
  PhraseState the = lex("the", 0);
  PhraseState server = lex("server", 1);
  auto combined = check_and_attach(g, kb, server, 1, the, counters, "T");
  REQUIRE(combined);

  // A second determiner from the left: det slot (max=1) already saturated.
  PhraseState a_left = lex("a", 0);
  CHECK_FALSE(syntax_check(g, *combined, 1, a_left, counters, "T"));
}

TEST_CASE("direction constraint") {
  const Grammar& g = testutil::toy_grammar();
  CheckCounters counters;
  PhraseState server = lex("server", 0);
  PhraseState the = lex("the", 1);  // determiner to the right of the noun
  CHECK_FALSE(syntax_check(g, server, 0, the, counters, "T"));
}

TEST_CASE("same-side precedence: det before attr") {
  const Grammar& g = testutil::toy_grammar();
  const KnowledgeBase& kb = testutil::toy_kb();
  CheckCounters counters;
  // fast(0) the(1) server(2): attaching fast first, then "the" at position 1
  // would place det after attr — rejected.
  PhraseState fast = lex("fast", 0);
  PhraseState the = lex("the", 1);
  PhraseState server = lex("server", 2);
  auto with_attr = check_and_attach(g, kb, server, 2, fast, counters, "T");
  REQUIRE(with_attr);
  CHECK_FALSE(syntax_check(g, *with_attr, 2, the, counters, "T"));

  // the(0) fast(1) server(2) is fine in either attachment order.
  PhraseState the0 = lex("the", 0);
  PhraseState fast1 = lex("fast", 1);
  auto ok1 = check_and_attach(g, kb, server, 2, fast1, counters, "T");
  REQUIRE(ok1);
  CHECK(syntax_check(g, *ok1, 2, the0, counters, "T"));
}

TEST_CASE("agreement narrows through unify_on") {
  const Grammar& g = testutil::toy_grammar();
  CheckCounters counters;
  PhraseState a = lex("a", 0);        // number=sg
  PhraseState servers = lex("servers", 1);  // number=pl
  CHECK_FALSE(syntax_check(g, servers, 1, a, counters, "T"));

  PhraseState the = lex("the", 0);  // sg|pl
  auto match = syntax_check(g, servers, 1, the, counters, "T");
  REQUIRE(match);
  CHECK(match->unified_agreement.attributes.at("number") == std::set<std::string>{"pl"});
}

TEST_CASE("concept_check asserts the sem role on merged contexts") {
  const Grammar& g = testutil::toy_grammar();
  const KnowledgeBase& kb = testutil::toy_kb();
  CheckCounters counters;
  PhraseState the = lex("the", 0);
  PhraseState server = lex("server", 1);
  auto np = check_and_attach(g, kb, server, 1, the, counters, "T");
  REQUIRE(np);

  PhraseState crashes = lex("crashes", 2, 0);  // VERB_FIN reading
  auto match = syntax_check(g, crashes, 2, *np, counters, "T");
  REQUIRE(match);
  REQUIRE(match->sem_role);
  CHECK(*match->sem_role == "crash-patient");

  auto outcome = concept_check(kb, crashes, *np, *match, counters, "T");
  REQUIRE(outcome.consistent);
  CHECK(counters.get("T", Predicate::Con) == 1);
  CHECK(validate_context(kb, outcome.consistent->first));

  // sleeps: range violation (SERVER is not ANIMATE).
  PhraseState sleeps = lex("sleeps", 2);
  auto match2 = syntax_check(g, sleeps, 2, *np, counters, "T");
  REQUIRE(match2);
  auto outcome2 = concept_check(kb, sleeps, *np, *match2, counters, "T");
  CHECK_FALSE(outcome2.consistent);
}

TEST_CASE("sem role cardinality: second has-reference is inconsistent") {
  // Custom grammar: determiners with concepts assert has-reference (max=1 in
  // the KB) and the det slot takes two fillers so that syntax alone passes.
  const char* src =
      "class WORD\n"
      "  feature number = sg|pl\n"
      "class NOUN : WORD\n"
      "  valency det dir=L class=DETERMINER opt max=2 sem=has-reference\n"
      "class DETERMINER : WORD\n"
      "class UNKNOWN : WORD nogov\n"
      "lex \"the\" class=DETERMINER concept=NEW\n"
      "lex \"server\" class=NOUN concept=SERVER\n";
  Grammar g = load_grammar(src);
  const KnowledgeBase& kb = testutil::toy_kb();
  CheckCounters counters;
  PhraseState the1 = make_lexical_phrase(g, kb, 0, lexical_lookup(g, "the")[0]);
  PhraseState the2 = make_lexical_phrase(g, kb, 1, lexical_lookup(g, "the")[0]);
  PhraseState server = make_lexical_phrase(g, kb, 2, lexical_lookup(g, "server")[0]);

  auto first = check_and_attach(g, kb, server, 2, the1, counters, "T");
  REQUIRE(first);
  auto match = syntax_check(g, *first, 2, the2, counters, "T");
  REQUIRE(match);  // syntax allows a second det (max=2)
  auto outcome = concept_check(kb, *first, the2, *match, counters, "T");
  CHECK_FALSE(outcome.consistent);  // KB has-reference max=1
}

TEST_CASE("valencies without sem role bypass the concept counter") {
  const Grammar& g = testutil::toy_grammar();
  const KnowledgeBase& kb = testutil::toy_kb();
  CheckCounters counters;
  PhraseState the = lex("the", 0);
  PhraseState server = lex("server", 1);
  auto np = check_and_attach(g, kb, server, 1, the, counters, "T");
  REQUIRE(np);
  CHECK(counters.get("T", Predicate::Syn) == 1);
  CHECK(counters.get("T", Predicate::Con) == 0);
}

TEST_CASE("counters: zero init, frozen regression values, reset") {
  CheckCounters counters;
  CHECK(counters.get("PT", Predicate::Syn) == 0);
  CHECK(counters.get("PT", Predicate::Con) == 0);
  CHECK(counters.snapshot().empty());

  auto result = parse(testutil::tokenize("the server crashes"), testutil::toy_grammar(),
                      testutil::toy_kb(), counters);
  REQUIRE(result.analyses.size() == 1);
  // Frozen regression values recorded from an instrumented run.
  CHECK(counters.get("PT", Predicate::Syn) == 6);
  CHECK(counters.get("PT", Predicate::Con) == 1);
  CHECK(counters.get("PT", Predicate::Con) <= counters.get("PT", Predicate::Syn));

  counters.reset();
  for (const auto& [tag, pred, count] : counters.snapshot()) CHECK(count == 0);
}

TEST_CASE("purity: equal inputs give equal outputs, one increment per call") {
  const Grammar& g = testutil::toy_grammar();
  CheckCounters counters;
  PhraseState the = lex("the", 0);
  PhraseState server = lex("server", 1);
  auto m1 = syntax_check(g, server, 1, the, counters, "T");
  auto before = counters.get("T", Predicate::Syn);
  auto m2 = syntax_check(g, server, 1, the, counters, "T");
  CHECK(counters.get("T", Predicate::Syn) == before + 1);
  REQUIRE(m1);
  REQUIRE(m2);
  CHECK(m1->role_name == m2->role_name);
  CHECK(m1->unified_agreement == m2->unified_agreement);
}

TEST_CASE("counter exactness") {
  const Grammar& g = testutil::toy_grammar();
  CheckCounters counters;
  PhraseState the = lex("the", 0);
  PhraseState server = lex("server", 1);
  const int calls = 17;
  for (int i = 0; i < calls; ++i) (void)syntax_check(g, server, 1, the, counters, "N");
  CHECK(counters.get("N", Predicate::Syn) == calls);
}

TEST_CASE("check_and_attach builds the combined phrase non-destructively") {
  const Grammar& g = testutil::toy_grammar();
  const KnowledgeBase& kb = testutil::toy_kb();
  CheckCounters counters;
  PhraseState the = lex("the", 0);
  PhraseState server = lex("server", 1);
  PhraseState the_copy = the;
  PhraseState server_copy = server;
  auto np = check_and_attach(g, kb, server, 1, the, counters, "T");
  REQUIRE(np);
  CHECK(np->coverage() == std::set<Position>{0, 1});
  CHECK(np->root == 1);
  CHECK(the == the_copy);
  CHECK(server == server_copy);
  CHECK(well_formed(g, *np));

  // An unknown modifier is never licensed.
  PhraseState blorp = lex("blorp", 0);
  CHECK_FALSE(check_and_attach(g, kb, server, 1, blorp, counters, "T"));
}
