#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "memlab/lexer.hpp"
#include "memlab/mem_format.hpp"

// The PEP fragment of the brane calculus (pino, exo, phago with their
// co-actions): parsing, one-step reduction and the encoding into membranes
// with objects on surface.

namespace memlab {

enum class ActionKind { Pino, Exo, CoExo, Phago, CoPhago };

/// A brane: Zero, a parallel composition (`sub` = components) or an action
/// prefix (`sub[0]` = continuation, `sub[1]` = argument of pino/cophago).
struct Brane {
  enum class Kind { Zero, Par, Action };
  Kind kind = Kind::Zero;
  ActionKind action = ActionKind::Pino;
  std::string name;  // exo, coexo, phago, cophago
  std::vector<Brane> sub;

  const Brane& continuation() const { return sub.at(0); }
  const Brane& argument() const { return sub.at(1); }
  bool has_argument() const { return action == ActionKind::Pino || action == ActionKind::CoPhago; }
  bool operator==(const Brane&) const = default;
};

/// A system: Void, a parallel composition (`sub` = components) or a vesicle
/// `membrane<sub[0]>`.
struct BraneSystem {
  enum class Kind { Void, Par, Vesicle };
  Kind kind = Kind::Void;
  std::vector<Brane> membrane;  // one element for a vesicle
  std::vector<BraneSystem> sub;

  const Brane& brane() const { return membrane.at(0); }
  const BraneSystem& interior() const { return sub.at(0); }
  bool operator==(const BraneSystem&) const = default;
};

inline std::string print_brane(const Brane& b);
inline std::string print_brane(const BraneSystem& s);
inline Brane normalize(Brane b);
inline BraneSystem normalize(BraneSystem s);

namespace pep {

inline Brane zero() { return {}; }
inline Brane par(std::vector<Brane> items) {
  Brane b;
  b.kind = Brane::Kind::Par;
  b.sub = std::move(items);
  return normalize(std::move(b));
}
inline Brane action(ActionKind k, std::string name, Brane cont, Brane arg = {}) {
  Brane b;
  b.kind = Brane::Kind::Action;
  b.action = k;
  b.name = std::move(name);
  b.sub.push_back(normalize(std::move(cont)));
  if (b.has_argument()) b.sub.push_back(normalize(std::move(arg)));
  return b;
}
inline BraneSystem void_system() { return {}; }
inline BraneSystem compose(std::vector<BraneSystem> items) {
  BraneSystem s;
  s.kind = BraneSystem::Kind::Par;
  s.sub = std::move(items);
  return normalize(std::move(s));
}
inline BraneSystem vesicle(Brane b, BraneSystem interior) {
  BraneSystem s;
  s.kind = BraneSystem::Kind::Vesicle;
  s.membrane.push_back(normalize(std::move(b)));
  s.sub.push_back(normalize(std::move(interior)));
  return s;
}

inline std::vector<Brane> items(const Brane& b) {
  if (b.kind == Brane::Kind::Zero) return {};
  if (b.kind == Brane::Kind::Par) return b.sub;
  return {b};
}
inline std::vector<BraneSystem> items(const BraneSystem& s) {
  if (s.kind == BraneSystem::Kind::Void) return {};
  if (s.kind == BraneSystem::Kind::Par) return s.sub;
  return {s};
}

inline std::string action_head(const Brane& b) {
  switch (b.action) {
    case ActionKind::Pino: return "pino";
    case ActionKind::Exo: return "exo";
    case ActionKind::CoExo: return "coexo";
    case ActionKind::Phago: return "phago";
    case ActionKind::CoPhago: return "cophago";
  }
  return "?";
}

inline bool is_co(ActionKind k) { return k == ActionKind::CoExo || k == ActionKind::CoPhago; }

}  // namespace pep

inline std::string print_brane(const Brane& b) {
  using K = Brane::Kind;
  switch (b.kind) {
    case K::Zero: return "0";
    case K::Par: {
      std::string out;
      for (std::size_t i = 0; i < b.sub.size(); ++i) {
        if (i) out += " | ";
        out += print_brane(b.sub[i]);
      }
      return out;
    }
    case K::Action: {
      std::string out = pep::action_head(b);
      if (b.action != ActionKind::Pino) out += " " + quote_identifier(b.name);
      if (b.has_argument()) out += "(" + print_brane(b.argument()) + ")";
      const Brane& c = b.continuation();
      if (c.kind == K::Action) out += "." + print_brane(c);
      else if (c.kind == K::Par) out += ".(" + print_brane(c) + ")";
      return out;
    }
  }
  return "";
}

inline std::string print_brane(const BraneSystem& s) {
  using K = BraneSystem::Kind;
  switch (s.kind) {
    case K::Void: return "void";
    case K::Par: {
      std::string out;
      for (std::size_t i = 0; i < s.sub.size(); ++i) {
        if (i) out += " & ";
        out += print_brane(s.sub[i]);
      }
      return out;
    }
    case K::Vesicle: {
      std::string b = print_brane(s.brane());
      if (s.brane().kind == Brane::Kind::Par) b = "(" + b + ")";
      std::string in = s.interior().kind == K::Void ? std::string() : print_brane(s.interior());
      return b + "<" + in + ">";
    }
  }
  return "";
}

namespace detail {

template <class T, class Print>
std::vector<T> sorted_components(std::vector<T> flat, Print print) {
  std::vector<std::pair<std::string, T>> keyed;
  for (auto& x : flat) keyed.emplace_back(print(x), std::move(x));
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<T> out;
  for (auto& [k, x] : keyed) out.push_back(std::move(x));
  return out;
}

}  // namespace detail

inline Brane normalize(Brane b) {
  using K = Brane::Kind;
  if (b.kind == K::Action) {
    for (auto& x : b.sub) x = normalize(std::move(x));
    return b;
  }
  if (b.kind != K::Par) return b;
  std::vector<Brane> flat;
  for (auto& x : b.sub) {
    Brane n = normalize(std::move(x));
    if (n.kind == K::Par) {
      for (auto& y : n.sub) flat.push_back(std::move(y));
    } else if (n.kind != K::Zero) {
      flat.push_back(std::move(n));
    }
  }
  if (flat.empty()) return pep::zero();
  if (flat.size() == 1) return std::move(flat[0]);
  b.sub = detail::sorted_components(std::move(flat), [](const Brane& x) { return print_brane(x); });
  return b;
}

inline BraneSystem normalize(BraneSystem s) {
  using K = BraneSystem::Kind;
  if (s.kind == K::Vesicle) {
    s.membrane[0] = normalize(std::move(s.membrane[0]));
    s.sub[0] = normalize(std::move(s.sub[0]));
    return s;
  }
  if (s.kind != K::Par) return s;
  std::vector<BraneSystem> flat;
  for (auto& x : s.sub) {
    BraneSystem n = normalize(std::move(x));
    if (n.kind == K::Par) {
      for (auto& y : n.sub) flat.push_back(std::move(y));
    } else if (n.kind != K::Void) {
      flat.push_back(std::move(n));
    }
  }
  if (flat.empty()) return pep::void_system();
  if (flat.size() == 1) return std::move(flat[0]);
  s.sub = detail::sorted_components(std::move(flat),
                                    [](const BraneSystem& x) { return print_brane(x); });
  return s;
}

namespace detail {

class BraneParser {
public:
  explicit BraneParser(std::string_view text) : cur_(Lexer(text).tokenize()) {}

  BraneSystem parse() {
    BraneSystem s = system();
    if (!cur_.at_end()) cur_.fail("expected '&' or end of input");
    return normalize(std::move(s));
  }

private:
  BraneSystem system() {
    std::vector<BraneSystem> items{system_atom()};
    while (cur_.accept("&")) items.push_back(system_atom());
    return pep::compose(std::move(items));
  }

  BraneSystem system_atom() {
    reject_replication();
    if (cur_.accept_word("void")) return pep::void_system();
    if (cur_.peek().is("(")) {
      // either a parenthesized brane followed by '<', or a grouped system
      const std::size_t m = cur_.mark();
      try {
        Brane b = brane_atom();
        if (cur_.peek().is("<")) return vesicle_body(std::move(b));
      } catch (const ParseFailure&) {
      }
      cur_.reset(m);
      cur_.expect("(");
      BraneSystem s = system();
      cur_.expect(")");
      return s;
    }
    Brane b = brane_atom();
    if (!cur_.peek().is("<")) cur_.fail("expected '<' after a vesicle membrane");
    return vesicle_body(std::move(b));
  }

  BraneSystem vesicle_body(Brane b) {
    cur_.expect("<");
    BraneSystem inner = pep::void_system();
    if (!cur_.peek().is(">")) inner = system();
    cur_.expect(">");
    return pep::vesicle(std::move(b), std::move(inner));
  }

  Brane brane() {
    std::vector<Brane> items{brane_atom()};
    while (cur_.accept("|")) items.push_back(brane_atom());
    return pep::par(std::move(items));
  }

  void reject_replication() {
    if (cur_.peek().is("!"))
      TokenCursor::fail_at(cur_.peek(), "unsupported fragment: replication is outside PEP");
  }

  Brane brane_atom() {
    reject_replication();
    if (cur_.peek().kind == TokenKind::Nat) {
      if (cur_.peek().text != "0") cur_.fail("expected '0'");
      cur_.take();
      return pep::zero();
    }
    if (cur_.accept("(")) {
      Brane b = brane();
      cur_.expect(")");
      return b;
    }
    const Token& head = cur_.peek();
    if (head.kind != TokenKind::Ident) cur_.fail("expected a brane");
    std::string word = head.text;
    if (word == "co" && cur_.peek(1).is("-") && cur_.peek(2).kind == TokenKind::Ident) {
      cur_.take();
      cur_.take();
      word = "co" + cur_.peek().text;
    }
    static const std::map<std::string, ActionKind> words{{"pino", ActionKind::Pino},
                                                         {"exo", ActionKind::Exo},
                                                         {"coexo", ActionKind::CoExo},
                                                         {"phago", ActionKind::Phago},
                                                         {"cophago", ActionKind::CoPhago}};
    auto it = words.find(word);
    if (it == words.end()) {
      static const char* outside[] = {"mate", "comate", "bud", "cobud", "drip"};
      for (const char* w : outside)
        if (word == w) TokenCursor::fail_at(cur_.peek(), "unsupported fragment: '" + word + "' is outside PEP");
      TokenCursor::fail_at(cur_.peek(), "unknown action '" + word + "'");
    }
    cur_.take();
    const ActionKind k = it->second;
    std::string name;
    if (k != ActionKind::Pino) name = cur_.expect_name("action name");
    Brane arg;
    if (k == ActionKind::Pino || k == ActionKind::CoPhago) {
      cur_.expect("(");
      if (!cur_.peek().is(")")) arg = brane();
      cur_.expect(")");
    }
    Brane cont;
    if (cur_.accept(".")) cont = brane_atom();
    return pep::action(k, std::move(name), std::move(cont), std::move(arg));
  }

  TokenCursor cur_;
};

}  // namespace detail

/// Reads `.brn` syntax. Systems: `void`, `S & T`, `(S)`, vesicles `B<S>`
/// (an empty interior may be written `<>`). Branes: `0`, `B | C`, `(B)` and
/// actions `pino(B)`, `exo n`, `coexo n`, `phago n`, `cophago n(B)`, each
/// optionally followed by `.continuation`.
inline Parsed<BraneSystem> parse_brane(std::string_view text) {
  Parsed<BraneSystem> out;
  try {
    detail::BraneParser p(text);
    out.value = p.parse();
  } catch (const ParseFailure& f) {
    out.diagnostics.push_back(f.diag);
  }
  return out;
}

namespace detail {

template <class T>
std::vector<T> without_items(const std::vector<T>& v, std::initializer_list<std::size_t> drop) {
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::find(drop.begin(), drop.end(), i) == drop.end()) out.push_back(v[i]);
  return out;
}

inline bool is_action(const Brane& b, ActionKind k) {
  return b.kind == Brane::Kind::Action && b.action == k;
}

// Brane of the vesicle after action `i` of `actions` fires: the other
// actions plus its continuation (and any extra components).
inline Brane after(const std::vector<Brane>& actions, std::size_t i, std::vector<Brane> extra = {}) {
  auto rest = without_items(actions, {i});
  rest.push_back(actions[i].continuation());
  for (auto& e : extra) rest.push_back(std::move(e));
  return pep::par(std::move(rest));
}

inline void reduce_system_items(const std::vector<BraneSystem>& xs,
                                std::vector<std::vector<BraneSystem>>& out) {
  using V = BraneSystem::Kind;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].kind != V::Vesicle) continue;
    const auto acts = pep::items(xs[i].brane());
    const auto inner = pep::items(xs[i].interior());

    // pino(r).s | s0 <P>  ->  s | s0 <r<> & P>
    for (std::size_t p = 0; p < acts.size(); ++p) {
      if (!is_action(acts[p], ActionKind::Pino)) continue;
      auto contents = inner;
      contents.push_back(pep::vesicle(acts[p].argument(), pep::void_system()));
      auto next = xs;
      next[i] = pep::vesicle(after(acts, p), pep::compose(std::move(contents)));
      out.push_back(std::move(next));
    }

    // coexo n.t | t0 < exo n.s | s0 <P> & Q >  ->  P & s | s0 | t | t0 <Q>
    for (std::size_t q = 0; q < acts.size(); ++q) {
      if (!is_action(acts[q], ActionKind::CoExo)) continue;
      for (std::size_t j = 0; j < inner.size(); ++j) {
        if (inner[j].kind != V::Vesicle) continue;
        const auto jacts = pep::items(inner[j].brane());
        for (std::size_t p = 0; p < jacts.size(); ++p) {
          if (!is_action(jacts[p], ActionKind::Exo) || jacts[p].name != acts[q].name) continue;
          Brane merged = after(acts, q, {after(jacts, p)});
          auto next = without_items(xs, {i});
          next.push_back(inner[j].interior());
          next.push_back(pep::vesicle(std::move(merged),
                                      pep::compose(without_items(inner, {j}))));
          out.push_back(std::move(next));
        }
      }
    }

    // phago n.s | s0 <P>  &  cophago n(r).t | t0 <Q>  ->  t | t0 < r< s | s0 <P> > & Q >
    for (std::size_t p = 0; p < acts.size(); ++p) {
      if (!is_action(acts[p], ActionKind::Phago)) continue;
      for (std::size_t j = 0; j < xs.size(); ++j) {
        if (j == i || xs[j].kind != V::Vesicle) continue;
        const auto jacts = pep::items(xs[j].brane());
        for (std::size_t q = 0; q < jacts.size(); ++q) {
          if (!is_action(jacts[q], ActionKind::CoPhago) || jacts[q].name != acts[p].name) continue;
          BraneSystem victim = pep::vesicle(after(acts, p), xs[i].interior());
          BraneSystem wrap = pep::vesicle(jacts[q].argument(), victim);
          auto contents = pep::items(xs[j].interior());
          contents.push_back(std::move(wrap));
          auto next = without_items(xs, {i, j});
          next.push_back(pep::vesicle(after(jacts, q), pep::compose(std::move(contents))));
          out.push_back(std::move(next));
        }
      }
    }

    // reductions inside the vesicle
    std::vector<std::vector<BraneSystem>> deeper;
    reduce_system_items(inner, deeper);
    for (auto& d : deeper) {
      auto next = xs;
      next[i] = pep::vesicle(xs[i].brane(), pep::compose(std::move(d)));
      out.push_back(std::move(next));
    }
  }
}

}  // namespace detail

/// All one-step reducts under the pino, exo and phago rules, deduplicated up
/// to structural congruence and sorted by print.
inline std::vector<BraneSystem> reduce_brane(const BraneSystem& s) {
  std::vector<std::vector<BraneSystem>> raw;
  detail::reduce_system_items(pep::items(normalize(s)), raw);
  std::map<std::string, BraneSystem> uniq;
  for (auto& xs : raw) {
    BraneSystem r = pep::compose(std::move(xs));
    uniq.emplace(print_brane(r), std::move(r));
  }
  std::vector<BraneSystem> out;
  for (auto& [k, v] : uniq) out.push_back(std::move(v));
  return out;
}

// ---------------------------------------------------------------------------
// Encoding into membranes with objects on surface. Every vesicle becomes a
// membrane labeled `v`; each action on a brane becomes one surface object
// named by the action and its remaining program, barred for co-actions.

inline constexpr const char* kVesicleLabel = "v";

namespace detail {

inline std::string compact_brane(const Brane& b);

inline std::string compact_action(const Brane& a) {
  std::string out = pep::action_head(a);
  if (a.action != ActionKind::Pino) out += "_" + a.name;
  if (a.has_argument()) out += "(" + compact_brane(a.argument()) + ")";
  const Brane& c = a.continuation();
  if (c.kind == Brane::Kind::Action) out += "." + compact_action(c);
  else if (c.kind == Brane::Kind::Par) out += ".(" + compact_brane(c) + ")";
  return out;
}

inline std::string compact_brane(const Brane& b) {
  if (b.kind == Brane::Kind::Zero) return "0";
  if (b.kind == Brane::Kind::Action) return compact_action(b);
  std::string out;
  for (std::size_t i = 0; i < b.sub.size(); ++i) {
    if (i) out += "|";
    out += compact_action(b.sub[i]);
  }
  return out;
}

inline Object action_object(const Brane& a) {
  return make_object(compact_action(a), pep::is_co(a.action));
}

inline Multiset encode_surface(const Brane& b) {
  Multiset m;
  for (const auto& a : pep::items(b)) m.add(action_object(a));
  return m;
}

inline void encode_into(const BraneSystem& s, Membrane& parent) {
  for (const auto& x : pep::items(s)) {
    Membrane m;
    m.label = kVesicleLabel;
    m.surface = encode_surface(x.brane());
    encode_into(x.interior(), m);
    parent.children.push_back(std::move(m));
  }
}

inline void collect_actions(const BraneSystem& s, std::map<std::string, Brane>& pool) {
  for (const auto& x : pep::items(s)) {
    for (const auto& a : pep::items(x.brane())) pool.emplace(compact_action(a), a);
    collect_actions(x.interior(), pool);
  }
}

}  // namespace detail

inline Configuration encode_brane(const BraneSystem& s) {
  Configuration c;
  c.skin.label = "skin";
  detail::encode_into(normalize(s), c.skin);
  return normalize(std::move(c));
}

/// The surface system for `s`: its configuration plus one pino rule per
/// reachable pino action and one exo or phago rule per action/co-action pair
/// that can ever meet, closed under the objects the rules produce.
inline SystemDefinition translate_brane(const BraneSystem& source) {
  const BraneSystem s = normalize(source);
  SystemDefinition sd;
  sd.name = "brane";
  sd.kind = SystemKind::Surface;
  sd.initial = encode_brane(s);

  const std::string v = kVesicleLabel;
  std::map<std::string, Brane> pool;
  detail::collect_actions(normalize(s), pool);
  std::map<std::string, Rule> rules;
  for (bool grew = true; grew;) {
    grew = false;
    const auto snapshot = pool;
    auto absorb = [&](const Brane& b) {
      for (const auto& a : pep::items(b))
        if (pool.emplace(detail::compact_action(a), a).second) grew = true;
    };
    auto add = [&](RuleSchema r) {
      std::string key = print_rule(r);
      rules.emplace(std::move(key), Rule{std::move(r), {}});
    };
    for (const auto& [xn, x] : snapshot) {
      const Object a = detail::action_object(x);
      const Multiset sigma = detail::encode_surface(x.continuation());
      if (x.action == ActionKind::Pino) {
        add(Pino{v, a, {}, sigma, v, detail::encode_surface(x.argument())});
        absorb(x.continuation());
        absorb(x.argument());
        continue;
      }
      const bool exo = x.action == ActionKind::Exo;
      if (!exo && x.action != ActionKind::Phago) continue;
      for (const auto& [yn, y] : snapshot) {
        if (y.action != (exo ? ActionKind::CoExo : ActionKind::CoPhago) || y.name != x.name) continue;
        const Object partner = detail::action_object(y);
        const Multiset tau = detail::encode_surface(y.continuation());
        if (exo) {
          add(SurfaceExo{v, a, v, partner, sigma + tau});
        } else {
          add(Phago{v, a, sigma, v, partner, tau, v, detail::encode_surface(y.argument())});
          absorb(y.argument());
        }
        absorb(x.continuation());
        absorb(y.continuation());
      }
    }
  }
  for (auto& [k, r] : rules) sd.rules.push_back(std::move(r));
  return sd;
}

}  // namespace memlab
