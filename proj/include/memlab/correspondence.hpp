#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "memlab/ambient.hpp"
#include "memlab/brane.hpp"
#include "memlab/engine.hpp"

// Operational correspondence between a source calculus and its membrane
// encoding: every source reduction must be mirrored by exactly one membrane
// step, and every membrane step must mirror some source reduction.

namespace memlab {

struct CorrespondenceEntry {
  enum class Direction { Forward, Backward };
  Direction direction = Direction::Forward;
  std::string source;  ///< printed source term
  std::string target;  ///< printed reduct (forward) or membrane key (backward)
  bool matched = false;
  std::size_t steps = 0;             ///< membrane steps used when matched
  std::vector<std::size_t> rules;    ///< rule indices that realize the match
};

struct CorrespondenceReport {
  std::vector<CorrespondenceEntry> entries;
  std::set<std::size_t> rules_used;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  std::size_t terms_explored = 0;
  bool success() const { return unmatched == 0; }
};

struct CorrespondenceOptions {
  std::size_t depth = 1;
  /// Rule deleted from the generated system before checking (negative
  /// control); the index refers to the unmodified translation.
  std::optional<std::size_t> removed_rule;
};

namespace detail {

struct AmbientSide {
  using Term = AmbientTerm;
  static std::string print(const Term& t) { return print_ambient(t); }
  static std::vector<Term> reduce(const Term& t) { return reduce_ambient(t); }
  static Configuration encode(const Term& t) { return encode_ambient(t); }
  static SystemDefinition translate(const Term& t) { return translate_ambient(t); }
};

struct BraneSide {
  using Term = BraneSystem;
  static std::string print(const Term& t) { return print_brane(t); }
  static std::vector<Term> reduce(const Term& t) { return reduce_brane(t); }
  static Configuration encode(const Term& t) { return encode_brane(t); }
  static SystemDefinition translate(const Term& t) { return translate_brane(t); }
};

// Single-instance membrane steps: the calculi interleave, so each source
// reduction is compared with one rule application.
inline std::map<std::string, std::vector<std::size_t>> single_steps(const Configuration& c,
                                                                    const SystemDefinition& s,
                                                                    const std::vector<std::size_t>& ids) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (const auto& inst : find_instances(c, s)) {
    auto& rules = out[canonical_encoding(apply_instance(c, inst, s))];
    rules.push_back(ids[inst.rule]);
  }
  for (auto& [k, v] : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

template <class Side>
CorrespondenceReport check(const typename Side::Term& source, const CorrespondenceOptions& opts) {
  CorrespondenceReport rep;
  SystemDefinition sys = Side::translate(source);
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < sys.rules.size(); ++i) ids.push_back(i);
  if (opts.removed_rule && *opts.removed_rule < sys.rules.size()) {
    sys.rules.erase(sys.rules.begin() + static_cast<std::ptrdiff_t>(*opts.removed_rule));
    ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(*opts.removed_rule));
  }

  using Term = typename Side::Term;
  std::deque<std::pair<Term, std::size_t>> work{{source, 0}};
  std::set<std::string> seen{Side::print(source)};
  while (!work.empty()) {
    auto [term, level] = std::move(work.front());
    work.pop_front();
    if (level >= opts.depth) continue;
    ++rep.terms_explored;
    const std::string from = Side::print(term);
    const auto reducts = Side::reduce(term);
    const auto steps = single_steps(Side::encode(term), sys, ids);

    std::set<std::string> mirrored;
    for (const auto& r : reducts) {
      CorrespondenceEntry e;
      e.source = from;
      e.target = Side::print(r);
      const std::string key = canonical_encoding(Side::encode(r));
      mirrored.insert(key);
      if (auto it = steps.find(key); it != steps.end()) {
        e.matched = true;
        e.steps = 1;
        e.rules = it->second;
        rep.rules_used.insert(it->second.begin(), it->second.end());
        ++rep.matched;
      } else {
        ++rep.unmatched;
      }
      rep.entries.push_back(std::move(e));
      if (seen.insert(Side::print(r)).second) work.emplace_back(r, level + 1);
    }
    for (const auto& [key, rules] : steps) {
      if (mirrored.count(key)) continue;
      CorrespondenceEntry e;
      e.direction = CorrespondenceEntry::Direction::Backward;
      e.source = from;
      e.target = key;
      e.steps = 1;
      e.rules = rules;
      ++rep.unmatched;
      rep.entries.push_back(std::move(e));
    }
  }
  return rep;
}

}  // namespace detail

/// Checks reductions reachable from `source` within `opts.depth` levels.
/// Throws UnsupportedFragment when the source cannot be encoded.
inline CorrespondenceReport check_correspondence(const AmbientTerm& source,
                                                 const CorrespondenceOptions& opts = {}) {
  return detail::check<detail::AmbientSide>(source, opts);
}

inline CorrespondenceReport check_correspondence(const BraneSystem& source,
                                                 const CorrespondenceOptions& opts = {}) {
  return detail::check<detail::BraneSide>(source, opts);
}

}  // namespace memlab
