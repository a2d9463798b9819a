#include "parsetalk/grammar.hpp"

#include <algorithm>
#include <sstream>

namespace parsetalk {

std::optional<FeatureBundle> unify(const FeatureBundle& a, const FeatureBundle& b) {
  FeatureBundle out = a;
  for (const auto& [name, values] : b.attributes) {
    auto it = out.attributes.find(name);
    if (it == out.attributes.end()) {
      out.attributes.emplace(name, values);
      continue;
    }
    std::set<std::string> meet;
    std::set_intersection(it->second.begin(), it->second.end(), values.begin(), values.end(),
                          std::inserter(meet, meet.begin()));
    if (meet.empty()) return std::nullopt;
    it->second = std::move(meet);
  }
  return out;
}

std::optional<FeatureBundle> unify_on(const FeatureBundle& a, const FeatureBundle& b,
                                      const std::vector<std::string>& names) {
  FeatureBundle out;
  for (const auto& name : names) {
    const auto* va = a.find(name);
    const auto* vb = b.find(name);
    if (va && vb) {
      std::set<std::string> meet;
      std::set_intersection(va->begin(), va->end(), vb->begin(), vb->end(),
                            std::inserter(meet, meet.begin()));
      if (meet.empty()) return std::nullopt;
      out.attributes.emplace(name, std::move(meet));
    } else if (va) {
      out.attributes.emplace(name, *va);
    } else if (vb) {
      out.attributes.emplace(name, *vb);
    }
  }
  return out;
}

const ValencySpec* ResolvedWordClass::find_valency(const std::string& role) const {
  for (const auto& v : valencies)
    if (v.role_name == role) return &v;
  return nullptr;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::set<std::string> split_values(const std::string& s) {
  std::set<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '|') {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Splits "key=value", returning false when there is no '='.
bool split_kv(const std::string& tok, std::string& key, std::string& value) {
  auto eq = tok.find('=');
  if (eq == std::string::npos) return false;
  key = tok.substr(0, eq);
  value = tok.substr(eq + 1);
  return true;
}

struct Loader {
  Grammar g;
  WordClassDef* current = nullptr;
  std::size_t lineno = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw GrammarError(lineno, msg); }

  void feature_values(const std::string& name, const std::set<std::string>& values) {
    if (values.empty()) fail("feature '" + name + "' has no values");
    auto& inv = g.feature_inventory[name];
    inv.insert(values.begin(), values.end());
  }

  void parse_class(const std::vector<std::string>& toks) {
    if (toks.size() < 2) fail("expected: class <Name> [: <Parent>] [nogov]");
    WordClassDef def;
    def.name = toks[1];
    std::size_t i = 2;
    if (i < toks.size() && toks[i] == ":") {
      if (i + 1 >= toks.size()) fail("missing parent class name after ':'");
      def.parent = toks[i + 1];
      i += 2;
    }
    for (; i < toks.size(); ++i) {
      if (toks[i] == "nogov")
        def.governable = false;
      else
        fail("unexpected token '" + toks[i] + "' in class declaration");
    }
    if (g.classes.count(def.name)) fail("duplicate class '" + def.name + "'");
    current = &g.classes.emplace(def.name, std::move(def)).first->second;
  }

  void parse_feature(const std::vector<std::string>& toks) {
    // feature <name> = <v1|v2|...>
    if (!current) fail("'feature' outside a class block");
    if (toks.size() != 4 || toks[2] != "=") fail("expected: feature <name> = <v1|v2|...>");
    auto values = split_values(toks[3]);
    feature_values(toks[1], values);
    if (current->own_features.attributes.count(toks[1]))
      fail("duplicate feature '" + toks[1] + "' in class " + current->name);
    current->own_features.attributes.emplace(toks[1], std::move(values));
  }

  void parse_valency(const std::vector<std::string>& toks) {
    if (!current) fail("'valency' outside a class block");
    if (toks.size() < 3) fail("expected: valency <role> dir=<L|R> class=<Name> ...");
    ValencySpec v;
    v.role_name = toks[1];
    bool have_dir = false, have_class = false;
    for (std::size_t i = 2; i < toks.size(); ++i) {
      std::string key, value;
      if (toks[i] == "opt") {
        v.obligatory = false;
      } else if (toks[i] == "obl") {
        v.obligatory = true;
      } else if (split_kv(toks[i], key, value)) {
        if (key == "dir") {
          if (value == "L")
            v.direction = Direction::Left;
          else if (value == "R")
            v.direction = Direction::Right;
          else
            fail("dir must be L or R");
          have_dir = true;
        } else if (key == "class") {
          v.modifier_class = value;
          have_class = true;
        } else if (key == "agree") {
          v.agreement = split_commas(value);
        } else if (key == "max") {
          long n = std::stol(value);
          if (n < 1) fail("max must be >= 1");
          v.max_fillers = static_cast<std::uint32_t>(n);
        } else if (key == "sem") {
          v.sem_role = value;
        } else if (key == "feature") {
          fail("use mod.<name>=<values> for modifier feature constraints");
        } else if (key.rfind("mod.", 0) == 0) {
          auto values = split_values(value);
          feature_values(key.substr(4), values);
          v.modifier_features.attributes.emplace(key.substr(4), std::move(values));
        } else {
          fail("unknown valency attribute '" + key + "'");
        }
      } else {
        fail("unexpected token '" + toks[i] + "' in valency");
      }
    }
    if (!have_dir || !have_class) fail("valency needs dir= and class=");
    for (const auto& other : current->own_valencies)
      if (other.role_name == v.role_name)
        fail("duplicate valency role '" + v.role_name + "' in class " + current->name);
    current->own_valencies.push_back(std::move(v));
  }

  void parse_order(const std::vector<std::string>& toks) {
    if (!current) fail("'order' outside a class block");
    if (toks.size() != 4 || toks[2] != "<") fail("expected: order <role1> < <role2>");
    current->own_order.emplace_back(toks[1], toks[3]);
  }

  void parse_lex(const std::string& line) {
    auto q1 = line.find('"');
    auto q2 = line.find('"', q1 == std::string::npos ? q1 : q1 + 1);
    if (q1 == std::string::npos || q2 == std::string::npos)
      fail("expected: lex \"<surface>\" class=<Name> ...");
    Reading r;
    r.surface = line.substr(q1 + 1, q2 - q1 - 1);
    auto toks = split_ws(line.substr(q2 + 1));
    for (std::size_t i = 0; i < toks.size(); ++i) {
      std::string key, value;
      if (toks[i] == "feature") {
        if (i + 1 >= toks.size() || !split_kv(toks[i + 1], key, value))
          fail("expected: feature <f>=<v>");
        auto values = split_values(value);
        feature_values(key, values);
        r.features.attributes[key] = std::move(values);
        ++i;
      } else if (toks[i] == "sem") {
        if (i + 1 >= toks.size() || !split_kv(toks[i + 1], key, value))
          fail("expected: sem <role>=<kb-role>");
        r.sem_overrides[key] = value;
        ++i;
      } else if (split_kv(toks[i], key, value)) {
        if (key == "class")
          r.word_class = value;
        else if (key == "concept")
          r.concept_name = value;
        else
          fail("unknown lexicon attribute '" + key + "'");
      } else {
        fail("unexpected token '" + toks[i] + "' in lexicon entry");
      }
    }
    if (r.word_class.empty()) fail("lexicon entry without class=");
    g.lexicon[r.surface].push_back(std::move(r));
  }

  void validate() {
    lineno = 0;
    // Inheritance links form a tree rooted at a unique top class.
    int roots = 0;
    for (const auto& [name, def] : g.classes) {
      if (!def.parent) {
        ++roots;
        g.top_class = name;
        continue;
      }
      if (!g.classes.count(*def.parent))
        throw GrammarError("class " + name + ": unknown parent '" + *def.parent + "'");
    }
    if (roots != 1)
      throw GrammarError("expected exactly one top class, found " + std::to_string(roots));
    for (const auto& [name, def] : g.classes) {
      std::set<std::string> seen{name};
      const WordClassDef* cur = &def;
      while (cur->parent) {
        if (!seen.insert(*cur->parent).second)
          throw GrammarError("inheritance cycle through class '" + name + "'");
        cur = &g.classes.at(*cur->parent);
      }
      for (const auto& v : def.own_valencies) {
        if (!g.classes.count(v.modifier_class))
          throw GrammarError("class " + name + ", valency " + v.role_name +
                             ": unknown modifier class '" + v.modifier_class + "'");
        for (const auto& f : v.agreement)
          if (!g.feature_inventory.count(f))
            throw GrammarError("class " + name + ", valency " + v.role_name +
                               ": unknown agreement feature '" + f + "'");
      }
    }
    // Resolution must succeed everywhere (also checks role-name uniqueness
    // after merging and order references).
    for (const auto& [name, def] : g.classes) {
      auto resolved = resolve_class(g, name);
      for (const auto& [r1, r2] : resolved.order) {
        if (!resolved.find_valency(r1))
          throw GrammarError("class " + name + ": order references unknown role '" + r1 + "'");
        if (!resolved.find_valency(r2))
          throw GrammarError("class " + name + ": order references unknown role '" + r2 + "'");
      }
    }
    if (g.lexicon.empty()) throw GrammarError("empty lexicon");
    for (const auto& [surface, readings] : g.lexicon) {
      for (const auto& r : readings) {
        if (!g.classes.count(r.word_class))
          throw GrammarError("lex \"" + surface + "\": unknown class '" + r.word_class + "'");
        for (const auto& [fname, values] : r.features.attributes) {
          const auto& inv = g.feature_inventory.at(fname);
          for (const auto& v : values)
            if (!inv.count(v))
              throw GrammarError("lex \"" + surface + "\": value '" + v +
                                 "' not in inventory of feature '" + fname + "'");
        }
        for (const auto& [role, sem] : r.sem_overrides)
          if (!resolve_class(g, r.word_class).find_valency(role))
            throw GrammarError("lex \"" + surface + "\": sem override for unknown role '" + role +
                               "'");
      }
    }
    if (!g.classes.count(kUnknownClass))
      throw GrammarError("grammar must declare class UNKNOWN for unknown-token fallback");
  }
};

}  // namespace

Grammar load_grammar(const std::string& source_text) {
  Loader loader;
  std::istringstream in(source_text);
  std::string line;
  while (std::getline(in, line)) {
    ++loader.lineno;
    auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    const std::string& head = toks[0];
    if (head == "class")
      loader.parse_class(toks);
    else if (head == "feature")
      loader.parse_feature(toks);
    else if (head == "valency")
      loader.parse_valency(toks);
    else if (head == "order")
      loader.parse_order(toks);
    else if (head == "lex")
      loader.parse_lex(line);
    else
      loader.fail("unknown directive '" + head + "'");
  }
  loader.validate();
  return std::move(loader.g);
}

std::string serialize_grammar(const Grammar& g) {
  std::ostringstream out;
  // Emit parents before children so the file also reads top-down.
  std::vector<const WordClassDef*> ordered;
  std::set<std::string> emitted;
  while (ordered.size() < g.classes.size()) {
    for (const auto& [name, def] : g.classes) {
      if (emitted.count(name)) continue;
      if (def.parent && !emitted.count(*def.parent)) continue;
      ordered.push_back(&def);
      emitted.insert(name);
    }
  }
  auto join_values = [](const std::set<std::string>& values) {
    std::string s;
    for (const auto& v : values) {
      if (!s.empty()) s += '|';
      s += v;
    }
    return s;
  };
  for (const auto* def : ordered) {
    out << "class " << def->name;
    if (def->parent) out << " : " << *def->parent;
    if (!def->governable) out << " nogov";
    out << "\n";
    for (const auto& [fname, values] : def->own_features.attributes)
      out << "  feature " << fname << " = " << join_values(values) << "\n";
    for (const auto& v : def->own_valencies) {
      out << "  valency " << v.role_name << " dir=" << (v.direction == Direction::Left ? "L" : "R")
          << " class=" << v.modifier_class;
      if (!v.agreement.empty()) {
        out << " agree=";
        for (std::size_t i = 0; i < v.agreement.size(); ++i)
          out << (i ? "," : "") << v.agreement[i];
      }
      out << (v.obligatory ? " obl" : " opt");
      if (v.max_fillers != kUnbounded) out << " max=" << v.max_fillers;
      if (v.sem_role) out << " sem=" << *v.sem_role;
      for (const auto& [fname, values] : v.modifier_features.attributes)
        out << " mod." << fname << "=" << join_values(values);
      out << "\n";
    }
    for (const auto& [r1, r2] : def->own_order) out << "  order " << r1 << " < " << r2 << "\n";
  }
  for (const auto& [surface, readings] : g.lexicon) {
    for (const auto& r : readings) {
      out << "lex \"" << surface << "\" class=" << r.word_class;
      for (const auto& [fname, values] : r.features.attributes)
        out << " feature " << fname << "=" << join_values(values);
      if (r.concept_name) out << " concept=" << *r.concept_name;
      for (const auto& [role, sem] : r.sem_overrides) out << " sem " << role << "=" << sem;
      out << "\n";
    }
  }
  return out.str();
}

ResolvedWordClass resolve_class(const Grammar& g, const std::string& name) {
  auto it = g.classes.find(name);
  if (it == g.classes.end()) throw GrammarError("unknown class '" + name + "'");
  // Collect the chain top-down.
  std::vector<const WordClassDef*> chain;
  for (const WordClassDef* cur = &it->second;;) {
    chain.push_back(cur);
    if (!cur->parent) break;
    cur = &g.classes.at(*cur->parent);
  }
  std::reverse(chain.begin(), chain.end());
  ResolvedWordClass out;
  out.name = name;
  out.governable = it->second.governable;
  for (const auto* def : chain) {
    for (const auto& [fname, values] : def->own_features.attributes)
      out.features.attributes[fname] = values;  // child overrides per attribute
    for (const auto& v : def->own_valencies) {
      auto slot = std::find_if(out.valencies.begin(), out.valencies.end(),
                               [&](const ValencySpec& o) { return o.role_name == v.role_name; });
      if (slot != out.valencies.end())
        *slot = v;  // override keeps the inherited position
      else
        out.valencies.push_back(v);
    }
    for (const auto& o : def->own_order) out.order.push_back(o);
  }
  return out;
}

bool is_subclass(const Grammar& g, const std::string& sub, const std::string& super) {
  auto it = g.classes.find(sub);
  if (it == g.classes.end()) throw GrammarError("unknown class '" + sub + "'");
  for (const WordClassDef* cur = &it->second;;) {
    if (cur->name == super) return true;
    if (!cur->parent) return false;
    cur = &g.classes.at(*cur->parent);
  }
}

std::vector<Reading> lexical_lookup(const Grammar& g, const std::string& token) {
  auto it = g.lexicon.find(token);
  if (it != g.lexicon.end()) return it->second;
  Reading unknown;
  unknown.surface = token;
  unknown.word_class = kUnknownClass;
  return {unknown};
}

}  // namespace parsetalk
