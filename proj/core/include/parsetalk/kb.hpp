#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace parsetalk {

inline constexpr const char* kTopConcept = "TOP";

struct RoleDef {
  std::string name;
  std::string domain;
  std::string range;
  std::uint32_t max_fillers = 0xffffffffu;  // unbounded by default

  bool operator==(const RoleDef&) const = default;
};

class KbError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Terminological layer: a concept DAG under TOP plus typed, number-restricted
// roles. Immutable after load.
struct KnowledgeBase {
  std::map<std::string, std::set<std::string>> isa;  // concept -> direct parents
  std::map<std::string, RoleDef> roles;

  bool has_concept(const std::string& name) const { return isa.count(name) != 0; }
};

KnowledgeBase load_kb(const std::string& source_text);

// Reflexive-transitive subsumption: true iff `specific` reaches `general`
// via isa links. Throws KbError on unknown concepts.
bool subsumes(const KnowledgeBase& kb, const std::string& general, const std::string& specific);

using InstanceId = std::uint32_t;

struct RoleAssertion {
  InstanceId holder;
  std::string role;
  InstanceId filler;

  bool operator==(const RoleAssertion&) const = default;
};

// A persistent set of concept instances plus role-filler assertions.
// Operations take contexts by const reference and return new values; inputs
// are never mutated, so alternative interpretation variants share freely.
struct InterpretationContext {
  std::map<InstanceId, std::string> instances;
  std::vector<RoleAssertion> assertions;
  InstanceId next_id = 0;

  bool operator==(const InterpretationContext&) const = default;
};

// Adds a fresh instance of `concept_name`; ids are assigned sequentially
// within a context. Throws KbError on an unknown concept.
std::pair<InterpretationContext, InstanceId> instantiate(const KnowledgeBase& kb,
                                                         const InterpretationContext& ctx,
                                                         const std::string& concept_name);

enum class Violation { Domain, Range, Cardinality };

struct Consistent {
  InterpretationContext ctx;
};
struct Inconsistent {
  Violation reason;
};
using AssertResult = std::variant<Consistent, Inconsistent>;

// Checks domain, range and number restrictions of `role` and, on success,
// returns a new context extended with the assertion.
AssertResult assert_role_filler(const KnowledgeBase& kb, const InterpretationContext& ctx,
                                InstanceId holder, const std::string& role, InstanceId filler);

// Re-validates every assertion of `ctx` from scratch; used as the
// independent check that contexts built through Consistent results satisfy
// all invariants.
bool validate_context(const KnowledgeBase& kb, const InterpretationContext& ctx);

// Merges two independently built contexts, renumbering `b`'s instances by
// `a.next_id()`. Returns the merged context and the id offset applied to b.
std::pair<InterpretationContext, InstanceId> merge_contexts(const InterpretationContext& a,
                                                            const InterpretationContext& b);

}  // namespace parsetalk
