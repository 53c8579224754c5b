#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "memlab/engine.hpp"

namespace memlab {

/// Resources a step involved: consumed object occurrences and every membrane
/// matched by a fired rule.
struct TouchedSet {
  std::map<std::tuple<Path, bool, Object>, int> objects;
  std::set<Path> membranes;
};

inline TouchedSet touched_by(const std::vector<RuleInstance>& instances) {
  TouchedSet t;
  for (const auto& i : instances) {
    for (const auto& p : i.roles) t.membranes.insert(p);
    for (const auto& cl : i.claims) t.objects[{cl.at, cl.on_surface, cl.key}] += cl.count;
  }
  return t;
}

struct TimedStepReport {
  ApplicationMultiset fired;
  std::size_t decremented = 0;
  Multiset expired_objects;
  std::vector<std::string> dissolved;
};

namespace detail {

// Decrements idle timed items with t > 0. Idle items already at 0 are
// removed (objects) or returned for dissolution (membranes) when
// `expire_zeros` is set, and left untouched otherwise.
inline std::vector<int> tick_tree(WorkTree& t, const TouchedSet& touched, bool expire_zeros,
                                  TimedStepReport& report) {
  std::vector<int> doomed;
  std::map<int, Path> path_of;
  for (const auto& [p, id] : t.ids) path_of[id] = p;
  for (const auto& [id, path] : path_of) {
    auto& node = t.at(id);
    for (bool surf : {false, true}) {
      Multiset& bag = surf ? node.surface : node.contents;
      Multiset next;
      for (const auto& [o, n] : bag) {
        if (!o.timer) {
          next.add(o, n);
          continue;
        }
        auto it = touched.objects.find({path, surf, o});
        int busy = it == touched.objects.end() ? 0 : std::min(it->second, n);
        int idle = n - busy;
        next.add(o, busy);
        if (*o.timer > 0) {
          next.add(Object{o.symbol, *o.timer - 1}, idle);
          report.decremented += static_cast<std::size_t>(idle);
        } else if (expire_zeros) {
          report.expired_objects.add(o, idle);
        } else {
          next.add(o, idle);
        }
      }
      bag = std::move(next);
    }
    if (node.timer && !path.empty() && !touched.membranes.count(path)) {
      if (*node.timer > 0) {
        node.timer = *node.timer - 1;
        ++report.decremented;
      } else if (expire_zeros) {
        doomed.push_back(id);
      }
    }
  }
  return doomed;
}

// Dissolves the given membranes, deepest first.
inline void dissolve_all(WorkTree& t, std::vector<int> doomed, TimedStepReport& report) {
  std::sort(doomed.begin(), doomed.end(), [&](int a, int b) {
    int da = t.depth(a), db = t.depth(b);
    return da != db ? da > db : a < b;
  });
  for (int id : doomed) {
    report.dissolved.push_back(t.at(id).label);
    t.dissolve(id);
  }
}

}  // namespace detail

/// Decrements every timed object and non-skin membrane that is neither in
/// `touched` nor already at zero.
inline Configuration tick(const Configuration& c, const TouchedSet& touched = {}) {
  detail::WorkTree t(c);
  TimedStepReport ignored;
  detail::tick_tree(t, touched, false, ignored);
  return t.to_configuration();
}

/// Removes objects at timer 0 and dissolves non-skin membranes at timer 0,
/// innermost first, until none remain.
inline Configuration expire(const Configuration& c, TimedStepReport* report = nullptr) {
  TimedStepReport local;
  TimedStepReport& rep = report ? *report : local;
  detail::WorkTree t(c);
  std::vector<int> doomed;
  for (std::size_t id = 0; id < t.nodes.size(); ++id) {
    auto& node = t.nodes[id];
    for (bool surf : {false, true}) {
      Multiset& bag = surf ? node.surface : node.contents;
      Multiset next;
      for (const auto& [o, n] : bag) {
        if (o.timer && *o.timer == 0) rep.expired_objects.add(o, n);
        else next.add(o, n);
      }
      bag = std::move(next);
    }
    if (id != 0 && node.timer && *node.timer == 0) doomed.push_back(static_cast<int>(id));
  }
  // objects lifted out of dissolved membranes were already filtered above
  detail::dissolve_all(t, doomed, rep);
  return t.to_configuration();
}

/// Applies a chosen step under timed semantics: idle items with t > 0 tick,
/// idle items that were already at 0 expire (objects vanish, membranes
/// dissolve into their parent after the step's rewrites), and everything the
/// step touched or produced keeps its timer.
inline Configuration apply_timed_step(const Configuration& c, const ApplicationMultiset& step,
                                      const SystemDefinition& s, TimedStepReport* report = nullptr) {
  TimedStepReport local;
  TimedStepReport& rep = report ? *report : local;
  rep.fired = step;
  detail::WorkTree t(c);
  auto doomed = detail::tick_tree(t, touched_by(step.instances), true, rep);
  t.consume(step.instances);
  for (const auto& i : step.instances) t.rewrite(i, s);
  detail::dissolve_all(t, doomed, rep);
  return t.to_configuration();
}

/// One full timed step with the given strategy. For untimed configurations
/// this coincides with a plain maximally parallel step.
inline std::pair<Configuration, TimedStepReport> timed_step(const Configuration& c,
                                                            const SystemDefinition& s,
                                                            Strategy strategy, StepRng* rng,
                                                            const EngineOptions& opts = {}) {
  TimedStepReport rep;
  auto step = choose_step(c, s, strategy, rng, opts);
  Configuration next = apply_timed_step(c, step, s, &rep);
  return {std::move(next), std::move(rep)};
}

/// Every timed successor (one per maximal multiset), deduplicated by key.
/// A configuration with no applicable rule but live timers has exactly the
/// pure-tick successor.
inline Enumeration timed_successors(const Configuration& c, const SystemDefinition& s,
                                    const EngineOptions& opts = {}) {
  Enumeration plain = enumerate_maximal_steps(c, s, opts);
  Enumeration out;
  out.complete = plain.complete;
  if (!has_timers(c)) return plain;
  std::map<std::string, StepOutcome> found;
  if (plain.outcomes.empty() && plain.complete) {
    ApplicationMultiset none{{}, true};
    Configuration next = apply_timed_step(c, none, s);
    std::string key = canonical_encoding(next);
    found.emplace(key, StepOutcome{none, next, key});
  }
  for (const auto& o : plain.outcomes) {
    Configuration next = apply_timed_step(c, o.step, s);
    std::string key = canonical_encoding(next);
    if (!found.count(key)) found.emplace(key, StepOutcome{o.step, next, key});
  }
  for (auto& [k, v] : found) out.outcomes.push_back(std::move(v));
  return out;
}

/// Drops every timer in the configuration.
inline Configuration erase_timers(const Configuration& c) {
  Configuration out = c;
  auto rec = [](auto& self, Membrane& m) -> void {
    m.timer.reset();
    m.contents = m.contents.erase_timers();
    m.surface = m.surface.erase_timers();
    for (auto& ch : m.children) self(self, ch);
  };
  rec(rec, out.skin);
  return normalize(std::move(out));
}

inline SystemDefinition erase_timers(const SystemDefinition& s) {
  SystemDefinition out = s;
  out.initial = erase_timers(s.initial);
  for (auto& r : out.rules) {
    std::visit(
        [](auto& x) {
          using T = std::decay_t<decltype(x)>;
          auto strip = [](Multiset& m) { m = m.erase_timers(); };
          x.a.timer.reset();
          if constexpr (std::is_same_v<T, MutualEndo> || std::is_same_v<T, MutualExo>) {
            x.partner.timer.reset();
            strip(x.u);
            strip(x.v);
          } else if constexpr (std::is_same_v<T, Pino>) {
            strip(x.inner);
            strip(x.outer);
            strip(x.b);
          } else if constexpr (std::is_same_v<T, SurfaceExo>) {
            x.partner.timer.reset();
            strip(x.b);
          } else if constexpr (std::is_same_v<T, Phago>) {
            x.partner.timer.reset();
            strip(x.c);
            strip(x.d);
            strip(x.b);
          } else {
            strip(x.w);
          }
        },
        r.schema);
  }
  return out;
}

/// A recorded run. `steps[i].successor == steps[i + 1].config`.
struct TraceStep {
  Configuration config;
  TimedStepReport report;
  Configuration successor;
};

struct Trace {
  std::vector<TraceStep> steps;
  bool halted = false;
  std::uint64_t seed = 0;
  Configuration final_config;
};

/// Executes up to `max_steps` steps. Halts when no rule applies and no timer
/// is live.
inline Trace run(const SystemDefinition& s, Strategy strategy, std::size_t max_steps,
                 std::uint64_t seed = 0, const EngineOptions& opts = {}) {
  Trace tr;
  tr.seed = seed;
  StepRng rng(seed);
  Configuration cur = s.initial;
  for (std::size_t n = 0; n < max_steps; ++n) {
    if (find_instances(cur, s, opts).empty() && !has_timers(cur)) {
      tr.halted = true;
      break;
    }
    auto [next, rep] = timed_step(cur, s, strategy, &rng, opts);
    tr.steps.push_back({cur, rep, next});
    cur = std::move(next);
  }
  if (!tr.halted && find_instances(cur, s, opts).empty() && !has_timers(cur)) tr.halted = true;
  tr.final_config = cur;
  return tr;
}

/// Breadth-first frontiers: element d holds the distinct configurations
/// reachable in exactly d steps (d = 0 is the initial configuration).
inline std::vector<std::vector<Configuration>> run_all_breadth(const SystemDefinition& s,
                                                               std::size_t depth,
                                                               const EngineOptions& opts = {},
                                                               bool* complete = nullptr) {
  std::vector<std::vector<Configuration>> frontiers{{s.initial}};
  if (complete) *complete = true;
  for (std::size_t d = 0; d < depth; ++d) {
    std::map<std::string, Configuration> next;
    for (const auto& c : frontiers.back()) {
      auto e = timed_successors(c, s, opts);
      if (!e.complete && complete) *complete = false;
      for (auto& o : e.outcomes) next.emplace(o.key, std::move(o.successor));
    }
    if (next.empty()) break;
    std::vector<Configuration> layer;
    for (auto& [k, c] : next) layer.push_back(std::move(c));
    frontiers.push_back(std::move(layer));
  }
  return frontiers;
}

}  // namespace memlab
