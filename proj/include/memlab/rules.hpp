#pragma once

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "memlab/configuration.hpp"
#include "memlab/lexer.hpp"

namespace memlab {

// Rule schemas. Left-hand trigger objects written without a timer match an
// occurrence of the symbol carrying any timer.

/// [a]_at -> [w]_at
struct Evo {
  std::string at;
  Object a;
  Multiset w;
  bool operator==(const Evo&) const = default;
};

/// [a]_h [ ]_m -> [[w]_h]_m
struct Endo {
  std::string mover;
  Object a;
  std::string target;
  Multiset w;
  bool operator==(const Endo&) const = default;
};

/// [[a]_h]_m -> [w]_h [ ]_m
struct Exo {
  std::string mover;
  Object a;
  std::string host;
  Multiset w;
  bool operator==(const Exo&) const = default;
};

/// [ ]_h [a]_m -> [[ ]_h w]_m  (trigger in the target)
struct Fendo {
  std::string mover;
  std::string target;
  Object a;
  Multiset w;
  bool operator==(const Fendo&) const = default;
};

/// [[ ]_h a]_m -> [ ]_h [w]_m  (trigger in the host)
struct Fexo {
  std::string mover;
  std::string host;
  Object a;
  Multiset w;
  bool operator==(const Fexo&) const = default;
};

/// [a]_h [abar]_m -> [[u]_h v]_m
struct MutualEndo {
  std::string mover;
  Object a;
  Multiset u;
  std::string target;
  Object partner;
  Multiset v;
  bool operator==(const MutualEndo&) const = default;
};

/// [[a]_h abar]_m -> [u]_h [v]_m
struct MutualExo {
  std::string mover;
  Object a;
  Multiset u;
  std::string host;
  Object partner;
  Multiset v;
  bool operator==(const MutualExo&) const = default;
};

/// [ ]_{a.inner.rest} -> [ [ ]_{b.inner} as child ]_{outer.rest}
struct Pino {
  std::string at;
  Object a;
  Multiset inner;
  Multiset outer;
  std::string child;
  Multiset b;
  bool operator==(const Pino&) const = default;
};

/// [[Q]_{a.u} P]_{abar.v} -> Q [P]_{b.u.v}
struct SurfaceExo {
  std::string inner;
  Object a;
  std::string outer;
  Object partner;
  Multiset b;
  bool operator==(const SurfaceExo&) const = default;
};

/// [ ]_{a.u} [ ]_{abar.v} -> [ [ [ ]_{c.u} ]_{b} ]_{d.v}
struct Phago {
  std::string victim;
  Object a;
  Multiset c;
  std::string engulfer;
  Object partner;
  Multiset d;
  std::string wrap;
  Multiset b;
  bool operator==(const Phago&) const = default;
};

using RuleSchema =
    std::variant<Evo, Endo, Exo, Fendo, Fexo, MutualEndo, MutualExo, Pino, SurfaceExo, Phago>;

struct Rule {
  RuleSchema schema;
  SourceLoc loc;

  /// Structural equality; source locations are ignored.
  bool operator==(const Rule& o) const { return schema == o.schema; }
};

/// Concrete-syntax keyword of a rule family.
inline std::string family(const RuleSchema& r) {
  static const char* const kNames[] = {"evo",  "endo", "exo",  "fendo", "fexo",
                                       "mendo", "mexo", "pino", "sexo",  "phago"};
  return kNames[r.index()];
}

inline bool is_surface_rule(const RuleSchema& r) {
  return std::holds_alternative<Pino>(r) || std::holds_alternative<SurfaceExo>(r) ||
         std::holds_alternative<Phago>(r);
}

/// Labels a rule needs to find in the configuration.
inline std::vector<std::string> matched_labels(const RuleSchema& r) {
  return std::visit(
      [](const auto& x) -> std::vector<std::string> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Evo> || std::is_same_v<T, Pino>) return {x.at};
        else if constexpr (std::is_same_v<T, Endo> || std::is_same_v<T, Fendo> ||
                           std::is_same_v<T, MutualEndo>)
          return {x.mover, x.target};
        else if constexpr (std::is_same_v<T, Exo> || std::is_same_v<T, Fexo> ||
                           std::is_same_v<T, MutualExo>)
          return {x.mover, x.host};
        else if constexpr (std::is_same_v<T, SurfaceExo>) return {x.inner, x.outer};
        else return {x.victim, x.engulfer};
      },
      r);
}

/// Labels of membranes a rule creates.
inline std::vector<std::string> created_labels(const RuleSchema& r) {
  if (auto* p = std::get_if<Pino>(&r)) return {p->child};
  if (auto* p = std::get_if<Phago>(&r)) return {p->wrap};
  return {};
}

/// Left-hand objects, as written.
inline std::vector<Object> consumed_objects(const RuleSchema& r) {
  return std::visit(
      [](const auto& x) -> std::vector<Object> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, MutualEndo> || std::is_same_v<T, MutualExo> ||
                      std::is_same_v<T, SurfaceExo> || std::is_same_v<T, Phago>)
          return {x.a, x.partner};
        else if constexpr (std::is_same_v<T, Pino>) {
          std::vector<Object> out{x.a};
          for (const auto& [o, c] : x.inner)
            for (int i = 0; i < c; ++i) out.push_back(o);
          return out;
        } else
          return {x.a};
      },
      r);
}

/// Union of every right-hand multiset of the rule.
inline Multiset produced_objects(const RuleSchema& r) {
  return std::visit(
      [](const auto& x) -> Multiset {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, MutualEndo> || std::is_same_v<T, MutualExo>)
          return x.u + x.v;
        else if constexpr (std::is_same_v<T, Pino>) return x.outer + x.inner + x.b;
        else if constexpr (std::is_same_v<T, SurfaceExo>) return x.b;
        else if constexpr (std::is_same_v<T, Phago>) return x.c + x.d + x.b;
        else return x.w;
      },
      r);
}

enum class SystemKind { Plain, Surface };

inline std::string to_string(SystemKind k) { return k == SystemKind::Plain ? "plain" : "surface"; }

/// A membrane system: initial configuration plus rules. The alphabet and
/// label set are derived (see `alphabet` and `label_set`).
struct SystemDefinition {
  std::string name;
  SystemKind kind = SystemKind::Plain;
  Configuration initial;
  std::vector<Rule> rules;
};

/// Symbols of the initial configuration and of all right-hand sides, closed
/// under duality.
inline std::set<Symbol> alphabet(const SystemDefinition& s) {
  std::set<Symbol> out;
  auto add = [&](const Multiset& m) {
    for (const auto& [o, c] : m) {
      out.insert(o.symbol);
      out.insert(o.symbol.dual());
    }
  };
  for_each_node(s.initial, [&](const Path&, const Membrane& m) {
    add(m.contents);
    add(m.surface);
  });
  for (const auto& r : s.rules) add(produced_objects(r.schema));
  return out;
}

/// Labels present initially plus labels created by pino/phago.
inline std::set<std::string> label_set(const SystemDefinition& s) {
  std::set<std::string> out;
  for_each_node(s.initial, [&](const Path&, const Membrane& m) { out.insert(m.label); });
  for (const auto& r : s.rules)
    for (auto& l : created_labels(r.schema)) out.insert(l);
  return out;
}

inline bool has_timers(const Configuration& c) {
  bool found = false;
  for_each_node(c, [&](const Path&, const Membrane& m) {
    if (m.timer) found = true;
    for (const auto& [o, n] : m.contents)
      if (o.timer) found = true;
    for (const auto& [o, n] : m.surface)
      if (o.timer) found = true;
  });
  return found;
}

inline bool has_timers(const SystemDefinition& s) {
  if (has_timers(s.initial)) return true;
  for (const auto& r : s.rules)
    for (const auto& [o, n] : produced_objects(r.schema))
      if (o.timer) return true;
  return false;
}

}  // namespace memlab
