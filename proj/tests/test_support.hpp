#pragma once

// Shared fixtures for the unit and acceptance suites: text helpers, random
// generators and brute-force oracles that do not go through the library's
// canonical encoding or step enumeration.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "memlab/memlab.hpp"

namespace memlab::testing {

inline SystemDefinition sys(const std::string& text) {
  auto r = parse_system(text);
  if (!r.ok()) {
    std::string msg = "test system failed to parse:";
    for (const auto& d : r.diagnostics) msg += "\n  " + to_string(d);
    throw Error(msg);
  }
  return *r.system;
}

inline Configuration conf(const std::string& text) {
  std::vector<Diagnostic> ds;
  auto c = parse_configuration(text, &ds);
  if (!c) throw Error("test configuration failed to parse: " + to_string(ds.at(0)));
  return *c;
}

inline std::string key(const std::string& text) { return canonical_encoding(conf(text)); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> corpus_files(const std::string& ext) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(MEMLAB_CORPUS_DIR))
    if (e.path().extension() == ext) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force unordered tree isomorphism: tries every matching of children.

inline bool same_decoration(const Membrane& a, const Membrane& b) {
  return a.label == b.label && a.timer == b.timer && a.contents == b.contents &&
         a.surface == b.surface && a.children.size() == b.children.size();
}

inline bool brute_isomorphic(const Membrane& a, const Membrane& b) {
  if (!same_decoration(a, b)) return false;
  const std::size_t n = a.children.size();
  std::vector<bool> used(n, false);
  auto match = [&](auto& self, std::size_t i) -> bool {
    if (i == n) return true;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || !brute_isomorphic(a.children[i], b.children[j])) continue;
      used[j] = true;
      if (self(self, i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return match(match, 0);
}

inline bool brute_isomorphic(const Configuration& a, const Configuration& b) {
  return brute_isomorphic(a.skin, b.skin);
}

// ---------------------------------------------------------------------------
// Random generation.

using Rng = std::mt19937;

inline int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <class T>
const T& pick_of(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(v.size()) - 1))];
}

inline Multiset random_bag(Rng& rng, const std::vector<Object>& pool, int max_size) {
  Multiset m;
  int n = pick(rng, 0, max_size);
  for (int i = 0; i < n; ++i) m.add(pick_of(rng, pool));
  return m;
}

/// Random tree with `nodes` membranes (skin included).
inline Configuration random_tree(Rng& rng, int nodes, const std::vector<std::string>& labels,
                                 const std::vector<Object>& pool, int max_objects_per_node,
                                 bool timers = false) {
  std::vector<Membrane> flat(static_cast<std::size_t>(nodes));
  std::vector<int> parent(static_cast<std::size_t>(nodes), -1);
  for (int i = 0; i < nodes; ++i) {
    auto& m = flat[static_cast<std::size_t>(i)];
    m.label = i == 0 ? "skin" : pick_of(rng, labels);
    m.contents = random_bag(rng, pool, max_objects_per_node);
    if (timers && i > 0 && pick(rng, 0, 2) == 0) m.timer = pick(rng, 0, 3);
    if (i > 0) parent[static_cast<std::size_t>(i)] = pick(rng, 0, i - 1);
  }
  for (int i = nodes - 1; i > 0; --i)
    flat[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])].children.push_back(
        flat[static_cast<std::size_t>(i)]);
  return normalize(Configuration{flat[0]});
}

/// The same tree with every child list randomly permuted (not normalized).
inline Membrane shuffled(const Membrane& m, Rng& rng) {
  Membrane out = m;
  for (auto& c : out.children) c = shuffled(c, rng);
  std::shuffle(out.children.begin(), out.children.end(), rng);
  return out;
}

inline std::vector<Object> plain_pool() {
  return {make_object("a"), make_object("a", true), make_object("b")};
}

/// Places `total` objects drawn from `pool` uniformly over the nodes.
inline void scatter_objects(Rng& rng, Configuration& c, const std::vector<Object>& pool, int total) {
  std::vector<Membrane*> all;
  auto rec = [&](auto& self, Membrane& m) -> void {
    all.push_back(&m);
    for (auto& ch : m.children) self(self, ch);
  };
  rec(rec, c.skin);
  for (int i = 0; i < total; ++i)
    all[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(all.size()) - 1))]->contents.add(
        pick_of(rng, pool));
}

/// Random plain rule over the given labels; `family` indexes
/// evo, endo, exo, fendo, fexo, mendo, mexo.
inline RuleSchema random_plain_rule(Rng& rng, int family, const std::vector<std::string>& labels,
                                    const std::vector<Object>& pool, bool conservative) {
  auto L = [&] { return pick_of(rng, labels); };
  auto O = [&] { return pick_of(rng, pool); };
  auto rhs = [&](const Object& a) {
    if (conservative) return Multiset{Object{a.symbol, std::nullopt}};
    return random_bag(rng, pool, 2);
  };
  auto dual = [&](const Object& a) { return Object{a.symbol.dual(), std::nullopt}; };
  switch (family) {
    case 0: {
      Object a = O();
      return Evo{L(), a, rhs(a)};
    }
    case 1: {
      Object a = O();
      return Endo{L(), a, L(), rhs(a)};
    }
    case 2: {
      Object a = O();
      return Exo{L(), a, L(), rhs(a)};
    }
    case 3: {
      Object a = O();
      return Fendo{L(), L(), a, rhs(a)};
    }
    case 4: {
      Object a = O();
      return Fexo{L(), L(), a, rhs(a)};
    }
    case 5: {
      Object a = O();
      return MutualEndo{L(), a, rhs(a), L(), dual(a), rhs(dual(a))};
    }
    default: {
      Object a = O();
      return MutualExo{L(), a, rhs(a), L(), dual(a), rhs(dual(a))};
    }
  }
}

/// A plain rule of the given family whose pattern occurs at a randomly chosen
/// site of `skin`; a missing dual partner object is added to the tree.
/// Returns nullopt when the tree has no site of the right shape.
inline std::optional<RuleSchema> anchored_plain_rule(Rng& rng, int family, Membrane& skin,
                                                     const std::vector<Object>& pool,
                                                     bool conservative) {
  struct Site {
    Membrane* node;
    Membrane* parent;
  };
  std::vector<Site> sites;
  auto rec = [&](auto& self, Membrane& m, Membrane* parent) -> void {
    sites.push_back({&m, parent});
    for (auto& ch : m.children) self(self, ch, &m);
  };
  rec(rec, skin, nullptr);
  auto rhs = [&](const Object& a) {
    if (conservative) return Multiset{Object{a.symbol, std::nullopt}};
    return random_bag(rng, pool, 2);
  };
  auto object_in = [&](const Membrane& m) -> std::optional<Object> {
    if (m.contents.empty()) return std::nullopt;
    std::vector<Object> objs;
    for (const auto& [o, n] : m.contents) objs.push_back(o);
    return Object{pick_of(rng, objs).symbol, std::nullopt};
  };
  std::shuffle(sites.begin(), sites.end(), rng);
  for (const auto& [h, parent] : sites) {
    if (family == 0) {
      if (auto a = object_in(*h)) return Evo{h->label, *a, rhs(*a)};
      continue;
    }
    if (!parent) continue;  // every other family moves h
    std::vector<Membrane*> siblings;
    for (auto& ch : parent->children)
      if (&ch != h) siblings.push_back(&ch);
    const bool nested = parent != &skin;
    switch (family) {
      case 1:
        if (auto a = object_in(*h); a && !siblings.empty())
          return Endo{h->label, *a, pick_of(rng, siblings)->label, rhs(*a)};
        break;
      case 2:
        if (auto a = object_in(*h); a && nested) return Exo{h->label, *a, parent->label, rhs(*a)};
        break;
      case 3:
        if (!siblings.empty()) {
          Membrane* m = pick_of(rng, siblings);
          if (auto a = object_in(*m)) return Fendo{h->label, m->label, *a, rhs(*a)};
        }
        break;
      case 4:
        if (auto a = object_in(*parent); a && nested)
          return Fexo{h->label, parent->label, *a, rhs(*a)};
        break;
      case 5:
      case 6: {
        Membrane* m = nullptr;
        if (family == 5 && !siblings.empty()) m = pick_of(rng, siblings);
        if (family == 6 && nested) m = parent;
        auto a = object_in(*h);
        if (!m || !a) break;
        Object d{a->symbol.dual(), std::nullopt};
        if (!m->contents.count(d)) m->contents.add(d);
        if (family == 5) return MutualEndo{h->label, *a, rhs(*a), m->label, d, rhs(d)};
        return MutualExo{h->label, *a, rhs(*a), m->label, d, rhs(d)};
      }
      default:
        break;
    }
  }
  return std::nullopt;
}

/// Random valid plain system: at most `max_membranes` membranes, at most
/// `max_objects` objects (before dual partners are added), at most
/// `max_rules` rules. Most rules are anchored at an existing site so that
/// steps are rarely empty.
inline SystemDefinition random_plain_system(Rng& rng, int max_membranes, int max_objects,
                                            int max_rules, bool conservative = false,
                                            int forced_family = -1) {
  const std::vector<std::string> labels{"h", "m"};
  const auto pool = plain_pool();
  for (;;) {
    SystemDefinition s;
    s.name = "R";
    int nodes = pick(rng, 2, max_membranes);
    s.initial = random_tree(rng, nodes, labels, pool, 0);
    scatter_objects(rng, s.initial, pool, pick(rng, 1, max_objects));
    std::vector<std::string> rule_labels = labels;
    rule_labels.push_back("skin");
    int nrules = pick(rng, 1, max_rules);
    for (int i = 0; i < nrules; ++i) {
      int fam = (i == 0 && forced_family >= 0) ? forced_family : pick(rng, 0, 6);
      std::optional<RuleSchema> r;
      if (pick(rng, 0, 3) != 0) r = anchored_plain_rule(rng, fam, s.initial.skin, pool, conservative);
      if (!r) r = random_plain_rule(rng, fam, rule_labels, pool, conservative);
      s.rules.push_back(Rule{*r, {}});
    }
    s.initial = normalize(s.initial);
    if (!has_errors(validate(s))) return s;
  }
}

/// Puts random timers (0..max_timer) on about a third of the non-skin
/// membranes and object occurrences.
inline void add_random_timers(Rng& rng, Configuration& c, int max_timer) {
  auto rec = [&](auto& self, Membrane& m, bool skin) -> void {
    if (!skin && pick(rng, 0, 2) == 0) m.timer = pick(rng, 0, max_timer);
    Multiset next;
    for (const auto& [o, n] : m.contents)
      for (int k = 0; k < n; ++k) {
        Object x = o;
        if (pick(rng, 0, 2) == 0) x.timer = pick(rng, 0, max_timer);
        next.add(x);
      }
    m.contents = std::move(next);
    for (auto& ch : m.children) self(self, ch, false);
  };
  rec(rec, c.skin, true);
  c = normalize(std::move(c));
}

/// Random plain system with timers on the initial configuration.
inline SystemDefinition random_timed_system(Rng& rng, int max_membranes, int max_objects,
                                            int max_rules, int max_timer = 3) {
  SystemDefinition s = random_plain_system(rng, max_membranes, max_objects, max_rules);
  add_random_timers(rng, s.initial, max_timer);
  return s;
}

// ---------------------------------------------------------------------------
// Brute-force maximal-parallelism oracle. Resource usage of an instance is
// recomputed from the rule schema and the matched roles rather than taken
// from the instance's own claim lists.

struct OracleUse {
  std::map<std::tuple<Path, bool, Symbol, Timer>, int> objects;
  std::set<Path> movers;
  std::set<Path> stationary;
  std::set<Path> object_sites;
};

inline OracleUse oracle_use(const RuleInstance& inst, const SystemDefinition& s) {
  OracleUse u;
  const auto& r = s.rules.at(inst.rule).schema;
  const auto& roles = inst.roles;
  // the concrete key of each trigger occurrence comes from the instance; its
  // location is derived from the rule family
  auto key_in = [&](const Path& at, bool surf, const Object& pattern) -> Object {
    for (const auto& c : inst.claims)
      if (c.at == at && c.on_surface == surf && c.key.symbol == pattern.symbol) return c.key;
    throw Error("oracle: trigger not claimed");
  };
  auto use = [&](const Path& at, bool surf, const Object& pattern) {
    Object k = key_in(at, surf, pattern);
    u.objects[{at, surf, k.symbol, k.timer}] += 1;
    u.object_sites.insert(at);
  };
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Evo>) {
          use(roles[0], false, x.a);
        } else if constexpr (std::is_same_v<T, Endo> || std::is_same_v<T, Exo>) {
          use(roles[0], false, x.a);
          u.movers.insert(roles[0]);
          u.stationary.insert(roles[1]);
        } else if constexpr (std::is_same_v<T, Fendo> || std::is_same_v<T, Fexo>) {
          use(roles[1], false, x.a);
          u.movers.insert(roles[0]);
          u.stationary.insert(roles[1]);
        } else if constexpr (std::is_same_v<T, MutualEndo> || std::is_same_v<T, MutualExo>) {
          use(roles[0], false, x.a);
          use(roles[1], false, x.partner);
          u.movers.insert(roles[0]);
          u.stationary.insert(roles[1]);
        } else {
          throw Error("oracle handles plain rules only");
        }
      },
      r);
  return u;
}

inline bool oracle_valid(const Configuration& c, const std::vector<const RuleInstance*>& set,
                         const SystemDefinition& s) {
  std::vector<OracleUse> uses;
  for (auto* i : set) uses.push_back(oracle_use(*i, s));
  std::map<std::tuple<Path, bool, Symbol, Timer>, int> total;
  for (std::size_t i = 0; i < uses.size(); ++i) {
    for (const auto& [k, n] : uses[i].objects) total[k] += n;
    for (std::size_t j = 0; j < uses.size(); ++j) {
      if (i == j) continue;
      for (const auto& m : uses[i].movers) {
        if (uses[j].movers.count(m) || uses[j].stationary.count(m) || uses[j].object_sites.count(m))
          return false;
      }
    }
  }
  for (const auto& [k, n] : total) {
    const auto& [at, surf, sym, timer] = k;
    const Membrane& m = node_at(c, at);
    if ((surf ? m.surface : m.contents).count(Object{sym, timer}) < n) return false;
  }
  return true;
}

/// Successor keys of every inclusion-maximal valid subset of instance
/// copies. Each instance is replicated as many times as its objects allow.
inline std::set<std::string> oracle_successors(const Configuration& c, const SystemDefinition& s) {
  const auto instances = find_instances(c, s);
  std::vector<const RuleInstance*> units;
  for (const auto& i : instances) {
    int copies = 1;
    while (copies < 4) {
      std::vector<const RuleInstance*> rep(static_cast<std::size_t>(copies + 1), &i);
      if (!oracle_valid(c, rep, s)) break;
      ++copies;
    }
    for (int k = 0; k < copies; ++k) units.push_back(&i);
  }
  std::set<std::string> out;
  if (units.empty()) return out;
  if (units.size() > 20) throw Error("oracle: too many units");
  const std::size_t n = units.size();
  std::vector<bool> valid(std::size_t{1} << n, false);
  for (std::size_t mask = 1; mask < valid.size(); ++mask) {
    std::vector<const RuleInstance*> set;
    for (std::size_t b = 0; b < n; ++b)
      if (mask >> b & 1) set.push_back(units[b]);
    valid[mask] = oracle_valid(c, set, s);
  }
  for (std::size_t mask = 1; mask < valid.size(); ++mask) {
    if (!valid[mask]) continue;
    bool maximal = true;
    for (std::size_t b = 0; b < n && maximal; ++b)
      if (!(mask >> b & 1) && valid[mask | (std::size_t{1} << b)]) maximal = false;
    if (!maximal) continue;
    std::vector<RuleInstance> chosen;
    for (std::size_t b = 0; b < n; ++b)
      if (mask >> b & 1) chosen.push_back(*units[b]);
    out.insert(canonical_encoding(apply_step(c, chosen, s)));
  }
  return out;
}

inline std::set<std::string> engine_successors(const Configuration& c, const SystemDefinition& s) {
  std::set<std::string> out;
  for (const auto& o : enumerate_maximal_steps(c, s).outcomes) out.insert(o.key);
  return out;
}

// ---- source calculi generators ----

inline const std::vector<std::string>& calculus_names() {
  static const std::vector<std::string> names{"n", "m", "k"};
  return names;
}

/// Prefix chain ending in 0 (or in a small parallel of chains when deep).
inline AmbientTerm random_program(Rng& rng, int depth, bool allow_open) {
  const int kinds = allow_open ? 6 : 4;
  Capability cap{static_cast<CapKind>(pick(rng, 0, kinds - 1)),
                 calculus_names()[static_cast<std::size_t>(pick(rng, 0, 2))]};
  AmbientTerm cont = amb::nil();
  if (depth > 1 && pick(rng, 0, 2) > 0) {
    if (pick(rng, 0, 3) == 0)
      cont = amb::par({random_program(rng, depth - 1, allow_open),
                       random_program(rng, depth - 1, allow_open)});
    else
      cont = random_program(rng, depth - 1, allow_open);
  }
  return amb::prefix(cap, cont);
}

/// Random ambient term of nesting depth <= depth. Ambients never sit under
/// prefixes, so the open-free results are always encodable.
inline AmbientTerm random_ambient(Rng& rng, int depth, bool allow_open = false) {
  std::vector<AmbientTerm> xs;
  const int n = pick(rng, depth > 2 ? 1 : 0, 3);
  for (int i = 0; i < n; ++i) {
    if (depth > 1 && pick(rng, 0, 1) == 0)
      xs.push_back(amb::ambient(calculus_names()[static_cast<std::size_t>(pick(rng, 0, 2))],
                                random_ambient(rng, depth - 1, allow_open)));
    else
      xs.push_back(random_program(rng, std::min(depth, 3), allow_open));
  }
  return amb::par(std::move(xs));
}

/// Random term with one to three planted in or out redexes, so that the
/// reduction relation is rarely empty.
inline AmbientTerm random_ambient_with_redexes(Rng& rng, int depth) {
  auto name = [&] { return calculus_names()[static_cast<std::size_t>(pick(rng, 0, 2))]; };
  auto filler = [&] { return random_ambient(rng, std::max(1, depth - 2)); };
  auto program = [&](CapKind k, const std::string& target) {
    AmbientTerm cont = pick(rng, 0, 1) ? random_program(rng, 2, false) : amb::nil();
    return amb::prefix({k, target}, cont);
  };
  std::vector<AmbientTerm> xs{random_ambient(rng, depth - 1)};
  for (int i = pick(rng, 1, 3); i > 0; --i) {
    const std::string mover = name();
    const std::string host = name();
    if (pick(rng, 0, 1) == 0) {
      xs.push_back(amb::ambient(mover, amb::par({program(CapKind::In, host), filler()})));
      xs.push_back(amb::ambient(host, amb::par({program(CapKind::CoIn, host), filler()})));
    } else {
      auto inner = amb::ambient(mover, amb::par({program(CapKind::Out, host), filler()}));
      xs.push_back(amb::ambient(host, amb::par({inner, program(CapKind::CoOut, host), filler()})));
    }
  }
  return amb::par(std::move(xs));
}

inline Brane random_brane(Rng& rng, int depth) {
  std::vector<Brane> xs;
  const int n = pick(rng, 0, 2);
  for (int i = 0; i < n; ++i) {
    const auto kind = static_cast<ActionKind>(pick(rng, 0, 4));
    const std::string name =
        kind == ActionKind::Pino ? "" : calculus_names()[static_cast<std::size_t>(pick(rng, 0, 1))];
    Brane cont = depth > 1 && pick(rng, 0, 1) ? random_brane(rng, depth - 1) : pep::zero();
    Brane arg = depth > 1 && pick(rng, 0, 2) == 0 ? random_brane(rng, depth - 1) : pep::zero();
    xs.push_back(pep::action(kind, name, cont, arg));
  }
  return pep::par(std::move(xs));
}

inline BraneSystem random_brane_system(Rng& rng, int depth) {
  std::vector<BraneSystem> xs;
  const int n = pick(rng, 1, 2);
  for (int i = 0; i < n; ++i) {
    BraneSystem inner = depth > 1 && pick(rng, 0, 1) ? random_brane_system(rng, depth - 1)
                                                     : pep::void_system();
    xs.push_back(pep::vesicle(random_brane(rng, std::min(depth, 3)), inner));
  }
  return pep::compose(std::move(xs));
}

/// Same term with every parallel composition shuffled and left unnormalized.
inline AmbientTerm shuffled(Rng& rng, AmbientTerm t) {
  for (auto& s : t.sub) s = shuffled(rng, s);
  if (t.kind == AmbientTerm::Kind::Par) std::shuffle(t.sub.begin(), t.sub.end(), rng);
  return t;
}

inline Brane shuffled(Rng& rng, Brane b) {
  for (auto& s : b.sub) s = shuffled(rng, s);
  if (b.kind == Brane::Kind::Par) std::shuffle(b.sub.begin(), b.sub.end(), rng);
  return b;
}

inline BraneSystem shuffled(Rng& rng, BraneSystem s) {
  for (auto& m : s.membrane) m = shuffled(rng, m);
  for (auto& x : s.sub) x = shuffled(rng, x);
  if (s.kind == BraneSystem::Kind::Par) std::shuffle(s.sub.begin(), s.sub.end(), rng);
  return s;
}

}  // namespace memlab::testing
