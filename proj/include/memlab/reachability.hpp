#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memlab/mem_format.hpp"
#include "memlab/timed.hpp"

namespace memlab {

struct MobilityClass {
  /// Every rule preserves object and membrane counts and no timers occur.
  bool pure = false;
  /// Some rule rewrites its trigger into a different symbol of the same
  /// count (still a finite state space, but beyond plain identity moves).
  bool relabeling = false;
};

inline MobilityClass classify_mobility(const SystemDefinition& s) {
  MobilityClass out;
  if (has_timers(s)) return out;
  bool pure = true;
  auto same = [&](const Object& a, const Multiset& w) {
    if (w.size() != 1) {
      pure = false;
      return;
    }
    if (!(w.begin()->first == Object{a.symbol, std::nullopt})) out.relabeling = true;
  };
  for (const auto& r : s.rules) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, MutualEndo> || std::is_same_v<T, MutualExo>) {
            same(x.a, x.u);
            same(x.partner, x.v);
          } else if constexpr (std::is_same_v<T, Pino> || std::is_same_v<T, SurfaceExo> ||
                               std::is_same_v<T, Phago>) {
            pure = false;
          } else {
            same(x.a, x.w);
          }
        },
        r.schema);
  }
  out.pure = pure;
  if (!pure) out.relabeling = false;
  return out;
}

/// True iff no rule creates or destroys objects or membranes and no timers
/// occur, so the reachable state space is finite.
inline bool is_pure_mobility(const SystemDefinition& s) { return classify_mobility(s).pure; }

inline constexpr std::size_t kDefaultStateCap = 1000000;

struct Predecessor {
  std::string from;  ///< empty for the initial state
  ApplicationMultiset step;
  std::size_t depth = 0;
};

struct ReachableSet {
  std::vector<std::string> order;  ///< BFS discovery order
  std::map<std::string, Configuration> states;
  std::map<std::string, Predecessor> preds;
  bool complete = true;
  std::size_t frontier_peak = 0;
};

namespace detail {

// BFS from the initial configuration; stops early once `stop_at` is seen.
inline ReachableSet bfs(const SystemDefinition& s, std::size_t cap, const EngineOptions& opts,
                        const std::string* stop_at) {
  ReachableSet rs;
  const std::string init = canonical_encoding(s.initial);
  rs.order.push_back(init);
  rs.states.emplace(init, s.initial);
  rs.preds.emplace(init, Predecessor{});
  if (stop_at && *stop_at == init) return rs;
  std::deque<std::string> frontier{init};
  while (!frontier.empty()) {
    rs.frontier_peak = std::max(rs.frontier_peak, frontier.size());
    std::string key = frontier.front();
    frontier.pop_front();
    const Configuration cur = rs.states.at(key);
    auto e = timed_successors(cur, s, opts);
    if (!e.complete) rs.complete = false;
    const std::size_t depth = rs.preds.at(key).depth + 1;
    for (auto& o : e.outcomes) {
      if (rs.states.count(o.key)) continue;
      if (rs.states.size() >= cap) {
        rs.complete = false;
        return rs;
      }
      rs.order.push_back(o.key);
      rs.preds.emplace(o.key, Predecessor{key, o.step, depth});
      rs.states.emplace(o.key, std::move(o.successor));
      if (stop_at && *stop_at == o.key) return rs;
      frontier.push_back(o.key);
    }
  }
  return rs;
}

}  // namespace detail

/// BFS closure of the initial configuration under maximally parallel steps.
/// `complete` is false if the state cap or the per-step enumeration cap was
/// hit.
inline ReachableSet reachable_set(const SystemDefinition& s, std::size_t cap = kDefaultStateCap,
                                  const EngineOptions& opts = {}) {
  return detail::bfs(s, cap, opts, nullptr);
}

/// Step sequence from the initial configuration to `key`, rebuilt from
/// predecessor links.
inline std::vector<TraceStep> witness_path(const ReachableSet& rs, const std::string& key) {
  std::vector<TraceStep> out;
  std::string cur = key;
  while (!rs.preds.at(cur).from.empty()) {
    const auto& p = rs.preds.at(cur);
    TraceStep st;
    st.config = rs.states.at(p.from);
    st.report.fired = p.step;
    st.successor = rs.states.at(cur);
    out.push_back(std::move(st));
    cur = p.from;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

enum class ReachOutcome { Reached, Unreachable, BoundExceeded };

struct ReachabilityVerdict {
  ReachOutcome outcome = ReachOutcome::BoundExceeded;
  std::vector<TraceStep> path;
  std::size_t depth = 0;  ///< BFS depth reached (BoundExceeded) or path length
  std::size_t explored = 0;
  std::size_t frontier_peak = 0;
};

/// Throws if `target` cannot belong to `s` at all (kind mismatch, unknown
/// label or symbol).
inline void check_target(const SystemDefinition& s, const Configuration& target) {
  const auto labels = label_set(s);
  const auto symbols = alphabet(s);
  if (target.skin.label != s.initial.skin.label)
    throw Error("target skin '" + target.skin.label + "' differs from the system skin '" +
                s.initial.skin.label + "'");
  for_each_node(target, [&](const Path& p, const Membrane& m) {
    if (s.kind == SystemKind::Plain && !m.surface.empty())
      throw Error("kind mismatch: target has surface objects at " + path_string(p) +
                  " but the system is plain");
    if (s.kind == SystemKind::Surface && !m.contents.empty())
      throw Error("kind mismatch: target has inner objects at " + path_string(p) +
                  " but the system is a surface system");
    if (!labels.count(m.label)) throw Error("target uses undeclared label '" + m.label + "'");
    for (const auto* bag : {&m.contents, &m.surface})
      for (const auto& [o, n] : *bag)
        if (!symbols.count(o.symbol))
          throw Error("target uses symbol '" + to_string(Object{o.symbol, std::nullopt}) +
                      "' outside the alphabet");
  });
}

/// Decides whether `target` is reachable (up to structural congruence).
/// `Unreachable` is only returned after a completed closure; the witness of
/// `Reached` has minimal length.
inline ReachabilityVerdict decide_reachability(const SystemDefinition& s,
                                               const Configuration& target,
                                               std::size_t cap = kDefaultStateCap,
                                               const EngineOptions& opts = {}) {
  check_target(s, target);
  const std::string goal = canonical_encoding(target);
  ReachableSet rs = detail::bfs(s, cap, opts, &goal);
  ReachabilityVerdict v;
  v.explored = rs.states.size();
  v.frontier_peak = rs.frontier_peak;
  if (rs.states.count(goal)) {
    v.outcome = ReachOutcome::Reached;
    v.path = witness_path(rs, goal);
    v.depth = v.path.size();
    return v;
  }
  std::size_t deepest = 0;
  for (const auto& [k, p] : rs.preds) deepest = std::max(deepest, p.depth);
  v.depth = deepest;
  v.outcome = rs.complete ? ReachOutcome::Unreachable : ReachOutcome::BoundExceeded;
  return v;
}

}  // namespace memlab
