#include "parsetalk/kb.hpp"

#include <sstream>

namespace parsetalk {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
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

}  // namespace

KnowledgeBase load_kb(const std::string& source_text) {
  KnowledgeBase kb;
  std::istringstream in(source_text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw KbError("kb:" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks[0] == "concept") {
      // concept <Name> [isa <Parent>[,<Parent>...]]
      if (toks.size() != 2 && (toks.size() != 4 || toks[2] != "isa"))
        fail("expected: concept <Name> [isa <P1>[,<P2>...]]");
      if (kb.isa.count(toks[1])) fail("duplicate concept '" + toks[1] + "'");
      std::set<std::string> parents;
      if (toks.size() == 4)
        for (const auto& p : split_commas(toks[3])) parents.insert(p);
      kb.isa.emplace(toks[1], std::move(parents));
    } else if (toks[0] == "role") {
      // role <name> domain=<C> range=<C> [max=<n>]
      if (toks.size() < 4) fail("expected: role <name> domain=<C> range=<C> [max=<n>]");
      RoleDef role;
      role.name = toks[1];
      for (std::size_t i = 2; i < toks.size(); ++i) {
        auto eq = toks[i].find('=');
        if (eq == std::string::npos) fail("unexpected token '" + toks[i] + "'");
        auto key = toks[i].substr(0, eq);
        auto value = toks[i].substr(eq + 1);
        if (key == "domain")
          role.domain = value;
        else if (key == "range")
          role.range = value;
        else if (key == "max") {
          long n = std::stol(value);
          if (n < 1) fail("max must be >= 1");
          role.max_fillers = static_cast<std::uint32_t>(n);
        } else
          fail("unknown role attribute '" + key + "'");
      }
      if (role.domain.empty() || role.range.empty()) fail("role needs domain= and range=");
      if (kb.roles.count(role.name)) fail("duplicate role '" + role.name + "'");
      kb.roles.emplace(role.name, std::move(role));
    } else {
      fail("unknown directive '" + toks[0] + "'");
    }
  }
  // Validation: parents declared, DAG, unique top, role endpoints declared.
  for (const auto& [name, parents] : kb.isa) {
    if (name == kTopConcept) {
      if (!parents.empty()) throw KbError("TOP must have no parents");
      continue;
    }
    if (parents.empty()) throw KbError("concept '" + name + "' has no parent and is not TOP");
    for (const auto& p : parents)
      if (!kb.isa.count(p)) throw KbError("concept '" + name + "': unknown parent '" + p + "'");
  }
  if (!kb.isa.count(kTopConcept)) throw KbError("kb must declare concept TOP");
  // Acyclicity: every concept must reach TOP without revisiting a node.
  for (const auto& [name, _] : kb.isa) {
    std::set<std::string> visited;
    std::vector<std::string> stack{name};
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      if (!visited.insert(cur).second) continue;
      for (const auto& p : kb.isa.at(cur)) {
        if (p == name) throw KbError("isa cycle through concept '" + name + "'");
        stack.push_back(p);
      }
    }
    if (!visited.count(kTopConcept))
      throw KbError("concept '" + name + "' does not reach TOP");
  }
  for (const auto& [name, role] : kb.roles) {
    if (!kb.isa.count(role.domain))
      throw KbError("role '" + name + "': unknown domain '" + role.domain + "'");
    if (!kb.isa.count(role.range))
      throw KbError("role '" + name + "': unknown range '" + role.range + "'");
  }
  return kb;
}

bool subsumes(const KnowledgeBase& kb, const std::string& general, const std::string& specific) {
  if (!kb.has_concept(general)) throw KbError("unknown concept '" + general + "'");
  if (!kb.has_concept(specific)) throw KbError("unknown concept '" + specific + "'");
  std::set<std::string> visited;
  std::vector<std::string> stack{specific};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (cur == general) return true;
    if (!visited.insert(cur).second) continue;
    for (const auto& p : kb.isa.at(cur)) stack.push_back(p);
  }
  return false;
}

std::pair<InterpretationContext, InstanceId> instantiate(const KnowledgeBase& kb,
                                                         const InterpretationContext& ctx,
                                                         const std::string& concept_name) {
  if (!kb.has_concept(concept_name)) throw KbError("unknown concept '" + concept_name + "'");
  InterpretationContext out = ctx;
  InstanceId id = out.next_id++;
  out.instances.emplace(id, concept_name);
  return {std::move(out), id};
}

AssertResult assert_role_filler(const KnowledgeBase& kb, const InterpretationContext& ctx,
                                InstanceId holder, const std::string& role, InstanceId filler) {
  auto rit = kb.roles.find(role);
  if (rit == kb.roles.end()) throw KbError("unknown role '" + role + "'");
  auto hit = ctx.instances.find(holder);
  auto fit = ctx.instances.find(filler);
  if (hit == ctx.instances.end() || fit == ctx.instances.end())
    throw KbError("unknown instance in assertion of role '" + role + "'");
  const RoleDef& def = rit->second;
  if (!subsumes(kb, def.domain, hit->second)) return Inconsistent{Violation::Domain};
  if (!subsumes(kb, def.range, fit->second)) return Inconsistent{Violation::Range};
  std::uint32_t count = 0;
  for (const auto& a : ctx.assertions)
    if (a.holder == holder && a.role == role) ++count;
  if (count + 1 > def.max_fillers) return Inconsistent{Violation::Cardinality};
  InterpretationContext out = ctx;
  out.assertions.push_back({holder, role, filler});
  return Consistent{std::move(out)};
}

bool validate_context(const KnowledgeBase& kb, const InterpretationContext& ctx) {
  std::map<std::pair<InstanceId, std::string>, std::uint32_t> filler_counts;
  for (const auto& a : ctx.assertions) {
    auto rit = kb.roles.find(a.role);
    if (rit == kb.roles.end()) return false;
    auto hit = ctx.instances.find(a.holder);
    auto fit = ctx.instances.find(a.filler);
    if (hit == ctx.instances.end() || fit == ctx.instances.end()) return false;
    if (!subsumes(kb, rit->second.domain, hit->second)) return false;
    if (!subsumes(kb, rit->second.range, fit->second)) return false;
    if (++filler_counts[{a.holder, a.role}] > rit->second.max_fillers) return false;
  }
  return true;
}

std::pair<InterpretationContext, InstanceId> merge_contexts(const InterpretationContext& a,
                                                            const InterpretationContext& b) {
  InterpretationContext out = a;
  InstanceId offset = a.next_id;
  for (const auto& [id, concept_name] : b.instances)
    out.instances.emplace(id + offset, concept_name);
  for (const auto& as : b.assertions)
    out.assertions.push_back({as.holder + offset, as.role, as.filler + offset});
  out.next_id = offset + b.next_id;
  return {std::move(out), offset};
}

}  // namespace parsetalk
