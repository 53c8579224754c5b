#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "memlab/configuration.hpp"
#include "memlab/rules.hpp"

namespace memlab {

/// One consumed object occurrence (or several of the same key).
struct ObjectClaim {
  Path at;
  bool on_surface = false;
  Object key;
  int count = 1;

  auto operator<=>(const ObjectClaim&) const = default;
  bool operator==(const ObjectClaim&) const = default;
};

/// A rule matched at concrete positions of a normalized configuration.
///
/// `roles` holds the matched membranes in rule order (mover/at first, then
/// target/host/outer/engulfer). `moving` membranes may take part in no other
/// instance of the same step; `anchored` membranes stay in place and may be
/// shared between instances.
struct RuleInstance {
  std::size_t rule = 0;
  std::vector<Path> roles;
  std::vector<ObjectClaim> claims;
  std::vector<Path> moving;
  std::vector<Path> anchored;

  auto operator<=>(const RuleInstance&) const = default;
  bool operator==(const RuleInstance&) const = default;
};

/// A multiset of instances applied together in one step (repeats allowed).
struct ApplicationMultiset {
  std::vector<RuleInstance> instances;
  bool maximal = false;
};

struct EngineOptions {
  bool elementary_only = false;
  /// Bound on search nodes while enumerating maximal multisets.
  std::size_t cap = 100000;
};

namespace detail {

inline Path parent_of(const Path& p) { return Path(p.begin(), p.end() - 1); }

inline Path child_path(const Path& p, std::size_t i) {
  Path out = p;
  out.push_back(i);
  return out;
}

struct NodeRef {
  Path path;
  const Membrane* node;
};

inline std::vector<NodeRef> all_nodes(const Configuration& c) {
  std::vector<NodeRef> out;
  for_each_node(c, [&](const Path& p, const Membrane& m) { out.push_back({p, &m}); });
  return out;
}

}  // namespace detail

/// Every instance whose structural preconditions hold, sorted by
/// (rule index, matched positions).
inline std::vector<RuleInstance> find_instances(const Configuration& c, const SystemDefinition& s,
                                                const EngineOptions& opts = {}) {
  using detail::child_path;
  std::vector<RuleInstance> out;
  const auto nodes = detail::all_nodes(c);
  auto can_move = [&](const Membrane& m) { return !opts.elementary_only || m.children.empty(); };

  // (mover, partner) pairs: siblings for endo-like rules, child/parent for exo-like
  auto siblings = [&](const std::string& first, const std::string& second, auto&& emit) {
    for (const auto& parent : nodes) {
      const auto& kids = parent.node->children;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (kids[i].label != first) continue;
        for (std::size_t j = 0; j < kids.size(); ++j) {
          if (i == j || kids[j].label != second) continue;
          emit(child_path(parent.path, i), kids[i], child_path(parent.path, j), kids[j]);
        }
      }
    }
  };
  auto nested = [&](const std::string& inner, const std::string& outer, auto&& emit) {
    for (const auto& host : nodes) {
      if (host.path.empty() || host.node->label != outer) continue;
      const auto& kids = host.node->children;
      for (std::size_t i = 0; i < kids.size(); ++i)
        if (kids[i].label == inner) emit(child_path(host.path, i), kids[i], host.path, *host.node);
    }
  };

  for (std::size_t ri = 0; ri < s.rules.size(); ++ri) {
    const RuleSchema& rs = s.rules[ri].schema;
    auto claim = [](const Path& p, bool surf, const Object& k) {
      return ObjectClaim{p, surf, k, 1};
    };
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Evo>) {
            for (const auto& n : nodes) {
              if (n.node->label != x.at) continue;
              for (const auto& k : n.node->contents.matching(x.a))
                out.push_back({ri, {n.path}, {claim(n.path, false, k)}, {}, {}});
            }
          } else if constexpr (std::is_same_v<T, Endo>) {
            siblings(x.mover, x.target, [&](const Path& mp, const Membrane& m, const Path& tp,
                                            const Membrane&) {
              if (!can_move(m)) return;
              for (const auto& k : m.contents.matching(x.a))
                out.push_back({ri, {mp, tp}, {claim(mp, false, k)}, {mp}, {tp}});
            });
          } else if constexpr (std::is_same_v<T, Exo>) {
            nested(x.mover, x.host, [&](const Path& mp, const Membrane& m, const Path& hp,
                                        const Membrane&) {
              if (!can_move(m)) return;
              for (const auto& k : m.contents.matching(x.a))
                out.push_back({ri, {mp, hp}, {claim(mp, false, k)}, {mp}, {hp}});
            });
          } else if constexpr (std::is_same_v<T, Fendo>) {
            siblings(x.mover, x.target, [&](const Path& mp, const Membrane& m, const Path& tp,
                                            const Membrane& t) {
              if (!can_move(m)) return;
              for (const auto& k : t.contents.matching(x.a))
                out.push_back({ri, {mp, tp}, {claim(tp, false, k)}, {mp}, {tp}});
            });
          } else if constexpr (std::is_same_v<T, Fexo>) {
            nested(x.mover, x.host, [&](const Path& mp, const Membrane& m, const Path& hp,
                                        const Membrane& h) {
              if (!can_move(m)) return;
              for (const auto& k : h.contents.matching(x.a))
                out.push_back({ri, {mp, hp}, {claim(hp, false, k)}, {mp}, {hp}});
            });
          } else if constexpr (std::is_same_v<T, MutualEndo>) {
            siblings(x.mover, x.target, [&](const Path& mp, const Membrane& m, const Path& tp,
                                            const Membrane& t) {
              if (!can_move(m)) return;
              for (const auto& k : m.contents.matching(x.a))
                for (const auto& q : t.contents.matching(x.partner))
                  out.push_back(
                      {ri, {mp, tp}, {claim(mp, false, k), claim(tp, false, q)}, {mp}, {tp}});
            });
          } else if constexpr (std::is_same_v<T, MutualExo>) {
            nested(x.mover, x.host, [&](const Path& mp, const Membrane& m, const Path& hp,
                                        const Membrane& h) {
              if (!can_move(m)) return;
              for (const auto& k : m.contents.matching(x.a))
                for (const auto& q : h.contents.matching(x.partner))
                  out.push_back(
                      {ri, {mp, hp}, {claim(mp, false, k), claim(hp, false, q)}, {mp}, {hp}});
            });
          } else if constexpr (std::is_same_v<T, Pino>) {
            for (const auto& n : nodes) {
              if (n.node->label != x.at) continue;
              for (const auto& k : n.node->surface.matching(x.a)) {
                Multiset need = x.inner;
                need.add(k);
                if (!n.node->surface.contains(need)) continue;
                std::vector<ObjectClaim> cl{claim(n.path, true, k)};
                for (const auto& [o, cnt] : x.inner) cl.push_back({n.path, true, o, cnt});
                out.push_back({ri, {n.path}, cl, {}, {n.path}});
              }
            }
          } else if constexpr (std::is_same_v<T, SurfaceExo>) {
            nested(x.inner, x.outer, [&](const Path& ip, const Membrane& in, const Path& op,
                                         const Membrane& o) {
              for (const auto& k : in.surface.matching(x.a))
                for (const auto& q : o.surface.matching(x.partner))
                  out.push_back(
                      {ri, {ip, op}, {claim(ip, true, k), claim(op, true, q)}, {ip}, {op}});
            });
          } else if constexpr (std::is_same_v<T, Phago>) {
            siblings(x.victim, x.engulfer, [&](const Path& vp, const Membrane& v, const Path& ep,
                                               const Membrane& e) {
              if (!can_move(v)) return;
              for (const auto& k : v.surface.matching(x.a))
                for (const auto& q : e.surface.matching(x.partner))
                  out.push_back(
                      {ri, {vp, ep}, {claim(vp, true, k), claim(ep, true, q)}, {vp}, {ep}});
            });
          }
        },
        rs);
  }

  // merge claims on identical keys so that counts are exact
  for (auto& inst : out) {
    std::map<std::tuple<Path, bool, Object>, int> merged;
    for (const auto& cl : inst.claims) merged[{cl.at, cl.on_surface, cl.key}] += cl.count;
    inst.claims.clear();
    for (const auto& [k, n] : merged)
      inst.claims.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), n});
  }
  std::sort(out.begin(), out.end(), [](const RuleInstance& a, const RuleInstance& b) {
    return std::tie(a.rule, a.roles, a.claims) < std::tie(b.rule, b.roles, b.claims);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Incremental resource bookkeeping for building one application multiset.
class ResourceLedger {
public:
  explicit ResourceLedger(const Configuration& c) : config_(&c) {}

  /// True if `i` can be added without double-claiming any resource.
  bool admits(const RuleInstance& i) const {
    for (const auto& p : i.moving)
      if (count(moving_, p) || count(anchored_, p) || count(claim_sites_, p)) return false;
    for (const auto& p : i.anchored)
      if (count(moving_, p)) return false;
    for (const auto& cl : i.claims) {
      if (count(moving_, cl.at)) return false;
      if (!has_node(*config_, cl.at)) return false;
      const Membrane& m = node_at(*config_, cl.at);
      int avail = (cl.on_surface ? m.surface : m.contents).count(cl.key);
      auto it = used_.find({cl.at, cl.on_surface, cl.key});
      int used = it == used_.end() ? 0 : it->second;
      if (used + cl.count > avail) return false;
    }
    return true;
  }

  void add(const RuleInstance& i) { adjust(i, +1); }
  void remove(const RuleInstance& i) { adjust(i, -1); }

private:
  using ClaimKey = std::tuple<Path, bool, Object>;

  static int count(const std::map<Path, int>& m, const Path& p) {
    auto it = m.find(p);
    return it == m.end() ? 0 : it->second;
  }

  static void bump(std::map<Path, int>& m, const Path& p, int d) {
    if ((m[p] += d) == 0) m.erase(p);
  }

  void adjust(const RuleInstance& i, int d) {
    for (const auto& p : i.moving) bump(moving_, p, d);
    for (const auto& p : i.anchored) bump(anchored_, p, d);
    for (const auto& cl : i.claims) {
      bump(claim_sites_, cl.at, d);
      ClaimKey k{cl.at, cl.on_surface, cl.key};
      if ((used_[k] += d * cl.count) == 0) used_.erase(k);
    }
  }

  const Configuration* config_;
  std::map<Path, int> moving_;
  std::map<Path, int> anchored_;
  std::map<Path, int> claim_sites_;
  std::map<ClaimKey, int> used_;
};

/// True iff the instances are pairwise compatible and jointly applicable.
inline bool is_compatible(const Configuration& c, const std::vector<RuleInstance>& instances) {
  ResourceLedger ledger(c);
  for (const auto& i : instances) {
    if (!ledger.admits(i)) return false;
    ledger.add(i);
  }
  return true;
}

/// True iff no instance from `candidates` can be added to `chosen`.
inline bool is_maximal(const Configuration& c, const std::vector<RuleInstance>& chosen,
                       const std::vector<RuleInstance>& candidates) {
  ResourceLedger ledger(c);
  for (const auto& i : chosen) ledger.add(i);
  for (const auto& i : candidates)
    if (ledger.admits(i)) return false;
  return true;
}

namespace detail {

/// Mutable id-addressed copy of a configuration used while rewriting. Paths
/// of the source configuration resolve to stable ids, so instances of one
/// step can be applied one after another.
struct WorkTree {
  struct Node {
    std::string label;
    Multiset contents;
    Multiset surface;
    Timer timer;
    int parent = -1;
    std::vector<int> kids;
    bool alive = true;
  };
  std::vector<Node> nodes;
  std::map<Path, int> ids;
  std::vector<int> pre_parent;

  explicit WorkTree(const Configuration& c) {
    Path path;
    auto rec = [&](auto& self, const Membrane& m, int parent) -> int {
      int id = static_cast<int>(nodes.size());
      nodes.push_back(Node{m.label, m.contents, m.surface, m.timer, parent, {}, true});
      ids[path] = id;
      for (std::size_t i = 0; i < m.children.size(); ++i) {
        path.push_back(i);
        int kid = self(self, m.children[i], id);
        path.pop_back();
        nodes[static_cast<std::size_t>(id)].kids.push_back(kid);
      }
      return id;
    };
    rec(rec, c.skin, -1);
    for (const auto& n : nodes) pre_parent.push_back(n.parent);
  }

  Node& at(int id) { return nodes[static_cast<std::size_t>(id)]; }

  int id_of(const Path& p) const {
    auto it = ids.find(p);
    if (it == ids.end()) throw Error("stale rule instance: no membrane at " + path_string(p));
    return it->second;
  }

  void detach(int id) {
    Node& p = at(at(id).parent);
    p.kids.erase(std::find(p.kids.begin(), p.kids.end(), id));
    at(id).parent = -1;
  }

  void attach(int id, int dest) {
    at(dest).kids.push_back(id);
    at(id).parent = dest;
  }

  void move(int id, int dest) {
    detach(id);
    attach(id, dest);
  }

  int create(std::string label, Multiset surface, int dest) {
    int id = static_cast<int>(nodes.size());
    nodes.push_back(Node{std::move(label), {}, std::move(surface), std::nullopt, -1, {}, true});
    attach(id, dest);
    return id;
  }

  /// Lifts objects and children of `id` into its parent and drops it.
  void dissolve(int id) {
    int parent = at(id).parent;
    if (parent < 0) throw Error("cannot dissolve the skin");
    Node& n = at(id);
    at(parent).contents += n.contents;
    at(parent).surface += n.surface;
    std::vector<int> kids = n.kids;
    for (int k : kids) move(k, parent);
    detach(id);
    at(id).alive = false;
  }

  int depth(int id) {
    int d = 0;
    for (int p = at(id).parent; p >= 0; p = at(p).parent) ++d;
    return d;
  }

  Configuration to_configuration() {
    auto rec = [&](auto& self, int id) -> Membrane {
      Node& n = at(id);
      Membrane m{n.label, n.contents, n.surface, n.timer, {}};
      for (int k : n.kids) m.children.push_back(self(self, k));
      return m;
    };
    return normalize(Configuration{rec(rec, 0)});
  }

  void consume(const std::vector<RuleInstance>& instances) {
    for (const auto& inst : instances)
      for (const auto& cl : inst.claims) {
        Node& n = at(id_of(cl.at));
        Multiset& m = cl.on_surface ? n.surface : n.contents;
        if (m.count(cl.key) < cl.count)
          throw Error("stale rule instance: object " + to_string(cl.key) + " absent at " +
                      path_string(cl.at));
        m.remove(cl.key, cl.count);
      }
  }

  /// Structural rewrite and right-hand sides; claims must be consumed first.
  void rewrite(const RuleInstance& inst, const SystemDefinition& s) {
    if (inst.rule >= s.rules.size()) throw Error("rule instance refers to an unknown rule");
    auto role = [&](std::size_t k) { return id_of(inst.roles.at(k)); };
    auto outer_parent = [&](int host) {
      int p = pre_parent[static_cast<std::size_t>(host)];
      if (p < 0) throw Error("cannot expel a membrane past the skin");
      return p;
    };
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Evo>) {
            at(role(0)).contents += x.w;
          } else if constexpr (std::is_same_v<T, Endo>) {
            move(role(0), role(1));
            at(role(0)).contents += x.w;
          } else if constexpr (std::is_same_v<T, Exo>) {
            move(role(0), outer_parent(role(1)));
            at(role(0)).contents += x.w;
          } else if constexpr (std::is_same_v<T, Fendo>) {
            move(role(0), role(1));
            at(role(1)).contents += x.w;
          } else if constexpr (std::is_same_v<T, Fexo>) {
            move(role(0), outer_parent(role(1)));
            at(role(1)).contents += x.w;
          } else if constexpr (std::is_same_v<T, MutualEndo>) {
            move(role(0), role(1));
            at(role(0)).contents += x.u;
            at(role(1)).contents += x.v;
          } else if constexpr (std::is_same_v<T, MutualExo>) {
            move(role(0), outer_parent(role(1)));
            at(role(0)).contents += x.u;
            at(role(1)).contents += x.v;
          } else if constexpr (std::is_same_v<T, Pino>) {
            int host = role(0);
            create(x.child, x.b + x.inner, host);
            at(host).surface += x.outer;
          } else if constexpr (std::is_same_v<T, SurfaceExo>) {
            int inner = role(0);
            int outer = role(1);
            int dest = outer_parent(outer);
            Node& in = at(inner);
            at(outer).surface += x.b;
            at(outer).surface += in.surface;
            at(dest).contents += in.contents;
            std::vector<int> kids = in.kids;
            for (int k : kids) move(k, dest);
            detach(inner);
            at(inner).alive = false;
          } else if constexpr (std::is_same_v<T, Phago>) {
            int victim = role(0);
            int engulfer = role(1);
            int wrapper = create(x.wrap, x.b, engulfer);
            move(victim, wrapper);
            at(victim).surface += x.c;
            at(engulfer).surface += x.d;
          }
        },
        s.rules[inst.rule].schema);
  }
};

}  // namespace detail

/// Applies every instance of one step simultaneously. Destinations are
/// resolved against the pre-step tree.
inline Configuration apply_step(const Configuration& c, const std::vector<RuleInstance>& instances,
                                const SystemDefinition& s) {
  detail::WorkTree t(c);
  t.consume(instances);
  for (const auto& i : instances) t.rewrite(i, s);
  return t.to_configuration();
}

inline Configuration apply_instance(const Configuration& c, const RuleInstance& i,
                                    const SystemDefinition& s) {
  return apply_step(c, {i}, s);
}

struct StepOutcome {
  ApplicationMultiset step;
  Configuration successor;
  std::string key;
};

struct Enumeration {
  std::vector<StepOutcome> outcomes;  ///< sorted by successor key
  bool complete = true;
};

/// All maximal application multisets with their successors, deduplicated by
/// canonical key. Empty iff no rule applies.
inline Enumeration enumerate_maximal_steps(const Configuration& c, const SystemDefinition& s,
                                           const EngineOptions& opts = {}) {
  Enumeration out;
  const auto instances = find_instances(c, s, opts);
  if (instances.empty()) return out;
  if (instances.size() > opts.cap) {
    out.complete = false;
    return out;
  }
  ResourceLedger ledger(c);
  std::vector<RuleInstance> chosen;
  std::map<std::string, StepOutcome> found;
  std::size_t budget = opts.cap;

  auto rec = [&](auto& self, std::size_t idx) -> void {
    if (!out.complete) return;
    if (budget-- == 0) {
      out.complete = false;
      return;
    }
    if (idx == instances.size()) {
      for (const auto& i : instances)
        if (ledger.admits(i)) return;
      Configuration next = apply_step(c, chosen, s);
      std::string key = canonical_encoding(next);
      if (!found.count(key))
        found.emplace(key, StepOutcome{{chosen, true}, std::move(next), key});
      return;
    }
    const RuleInstance& inst = instances[idx];
    std::size_t added = 0;
    while (ledger.admits(inst)) {
      ledger.add(inst);
      chosen.push_back(inst);
      ++added;
    }
    // try the largest multiplicity first, down to zero
    for (;;) {
      self(self, idx + 1);
      if (added == 0) break;
      ledger.remove(inst);
      chosen.pop_back();
      --added;
    }
  };
  rec(rec, 0);
  for (auto& [k, v] : found) out.outcomes.push_back(std::move(v));
  return out;
}

/// Portable seeded generator; draws use plain modulo reduction so traces are
/// reproducible across standard library implementations.
class StepRng {
public:
  explicit StepRng(std::uint64_t seed) : gen_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

private:
  std::mt19937_64 gen_;
};

enum class Strategy { First, Random, AllBreadth };

/// One maximal multiset. `First` adds instances greedily in
/// (rule index, position) order; `Random` repeatedly picks a uniformly
/// random admissible instance.
inline ApplicationMultiset choose_step(const Configuration& c, const SystemDefinition& s,
                                       Strategy strategy, StepRng* rng,
                                       const EngineOptions& opts = {}) {
  const auto instances = find_instances(c, s, opts);
  ApplicationMultiset step;
  ResourceLedger ledger(c);
  if (strategy == Strategy::Random && rng) {
    for (;;) {
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < instances.size(); ++i)
        if (ledger.admits(instances[i])) open.push_back(i);
      if (open.empty()) break;
      const auto& pick = instances[open[rng->below(open.size())]];
      ledger.add(pick);
      step.instances.push_back(pick);
    }
  } else {
    for (const auto& i : instances)
      while (ledger.admits(i)) {
        ledger.add(i);
        step.instances.push_back(i);
      }
  }
  step.maximal = true;
  return step;
}

/// Machine-readable rule list of a step, e.g. `r0,r0,r2`; `-` when empty.
inline std::string rule_ids(const ApplicationMultiset& step) {
  std::vector<std::size_t> ids;
  for (const auto& i : step.instances) ids.push_back(i.rule);
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) return "-";
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out += ',';
    out += "r" + std::to_string(ids[k]);
  }
  return out;
}

}  // namespace memlab
