#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "parsetalk/features.hpp"

namespace parsetalk {

enum class Direction { Left, Right };

inline constexpr std::uint32_t kUnbounded = 0xffffffffu;
inline constexpr const char* kUnknownClass = "UNKNOWN";

// One government slot of a word class: which class it may govern, on which
// side, how often, under which agreement, and which KB role (if any) the
// attachment asserts.
struct ValencySpec {
  std::string role_name;
  Direction direction = Direction::Left;
  std::string modifier_class;
  FeatureBundle modifier_features;
  std::vector<std::string> agreement;
  bool obligatory = false;
  std::uint32_t max_fillers = kUnbounded;
  std::optional<std::string> sem_role;

  bool operator==(const ValencySpec&) const = default;
};

struct WordClassDef {
  std::string name;
  std::optional<std::string> parent;
  FeatureBundle own_features;
  std::vector<ValencySpec> own_valencies;
  // Same-side precedence constraints over role names: first must precede
  // second in surface order among co-modifiers.
  std::vector<std::pair<std::string, std::string>> own_order;
  bool governable = true;

  bool operator==(const WordClassDef&) const = default;
};

// A word class with the parent chain merged in. Child valencies with a role
// name already declared upstream replace the inherited spec in place; child
// feature values override the parent's per attribute.
struct ResolvedWordClass {
  std::string name;
  FeatureBundle features;
  std::vector<ValencySpec> valencies;
  std::vector<std::pair<std::string, std::string>> order;
  bool governable = true;

  const ValencySpec* find_valency(const std::string& role) const;
};

// One lexicon entry. `features` overrides/extends the class features,
// `sem_overrides` rebinds a valency's sem role for this lexeme (e.g. the
// subject of "crashes" maps to crash-patient).
struct Reading {
  std::string surface;
  std::string word_class;
  FeatureBundle features;
  std::optional<std::string> concept_name;
  std::map<std::string, std::string> sem_overrides;

  bool operator==(const Reading&) const = default;

  // The sem role asserted by `valency` when this reading is the head.
  std::optional<std::string> sem_role_for(const ValencySpec& valency) const {
    auto it = sem_overrides.find(valency.role_name);
    if (it != sem_overrides.end()) return it->second;
    return valency.sem_role;
  }
};

struct Grammar {
  std::map<std::string, WordClassDef> classes;
  std::map<std::string, std::set<std::string>> feature_inventory;
  std::map<std::string, std::vector<Reading>> lexicon;
  std::string top_class;

  bool operator==(const Grammar&) const = default;
};

class GrammarError : public std::runtime_error {
 public:
  GrammarError(std::size_t line, const std::string& what)
      : std::runtime_error("grammar:" + std::to_string(line) + ": " + what), line_(line) {}
  explicit GrammarError(const std::string& what) : std::runtime_error(what), line_(0) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Parses and validates the line-oriented grammar format. Throws GrammarError
// with a line number on syntax errors, dangling references and inheritance
// cycles.
Grammar load_grammar(const std::string& source_text);

// Serializes back into the grammar file format; load_grammar(serialize(g))
// is structurally equal to g.
std::string serialize_grammar(const Grammar& g);

// Merges features/valencies/order constraints along the parent chain.
// Throws GrammarError for an unknown class name.
ResolvedWordClass resolve_class(const Grammar& g, const std::string& name);

// True iff `sub` equals `super` or reaches it via parent links.
bool is_subclass(const Grammar& g, const std::string& sub, const std::string& super);

// All lexicon readings for a token; unknown tokens yield a single synthetic
// UNKNOWN reading so that parsing can skip instead of failing.
std::vector<Reading> lexical_lookup(const Grammar& g, const std::string& token);

}  // namespace parsetalk
