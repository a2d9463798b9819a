#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace parsetalk {

// A flat bundle of morphosyntactic attributes. Each attribute maps to a
// non-empty set of atomic values; a set with more than one element encodes
// underspecification.
struct FeatureBundle {
  std::map<std::string, std::set<std::string>> attributes;

  bool operator==(const FeatureBundle&) const = default;

  const std::set<std::string>* find(const std::string& name) const {
    auto it = attributes.find(name);
    return it == attributes.end() ? nullptr : &it->second;
  }
};

// Flat unification: per-attribute intersection of value sets. Attributes
// present in only one operand pass through unchanged. Fails iff any shared
// attribute intersects to the empty set.
std::optional<FeatureBundle> unify(const FeatureBundle& a, const FeatureBundle& b);

// Unifies only the named attributes of the two bundles. An attribute missing
// on either side is unconstrained there and passes through. Fails iff any
// named attribute has an empty intersection.
std::optional<FeatureBundle> unify_on(const FeatureBundle& a, const FeatureBundle& b,
                                      const std::vector<std::string>& names);

}  // namespace parsetalk
