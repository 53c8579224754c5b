#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "memlab/lexer.hpp"
#include "memlab/mem_format.hpp"

// Pure public safe ambients: parsing, one-step reduction and the encoding
// into mutual mobile membranes.

namespace memlab {

enum class CapKind { In, CoIn, Out, CoOut, Open, CoOpen };

struct Capability {
  CapKind kind = CapKind::In;
  std::string target;

  bool co() const {
    return kind == CapKind::CoIn || kind == CapKind::CoOut || kind == CapKind::CoOpen;
  }
  auto operator<=>(const Capability&) const = default;
  bool operator==(const Capability&) const = default;
};

inline std::string cap_keyword(CapKind k) {
  switch (k) {
    case CapKind::In: return "in";
    case CapKind::CoIn: return "coin";
    case CapKind::Out: return "out";
    case CapKind::CoOut: return "coout";
    case CapKind::Open: return "open";
    case CapKind::CoOpen: return "coopen";
  }
  return "?";
}

/// `sub` holds the parallel components of a Par, the body of an Amb, or the
/// continuation of a Prefix.
struct AmbientTerm {
  enum class Kind { Nil, Par, Amb, Prefix };
  Kind kind = Kind::Nil;
  std::string name;  // Amb
  Capability cap;    // Prefix
  std::vector<AmbientTerm> sub;

  const AmbientTerm& body() const { return sub.at(0); }
  bool operator==(const AmbientTerm&) const = default;
};

inline std::string print_ambient(const AmbientTerm& t);
inline AmbientTerm normalize(AmbientTerm t);

namespace amb {

inline AmbientTerm nil() { return {}; }
inline AmbientTerm par(std::vector<AmbientTerm> items) {
  AmbientTerm t;
  t.kind = AmbientTerm::Kind::Par;
  t.sub = std::move(items);
  return normalize(std::move(t));
}
inline AmbientTerm ambient(std::string name, AmbientTerm body) {
  AmbientTerm t;
  t.kind = AmbientTerm::Kind::Amb;
  t.name = std::move(name);
  t.sub.push_back(normalize(std::move(body)));
  return t;
}
inline AmbientTerm prefix(Capability cap, AmbientTerm cont) {
  AmbientTerm t;
  t.kind = AmbientTerm::Kind::Prefix;
  t.cap = std::move(cap);
  t.sub.push_back(normalize(std::move(cont)));
  return t;
}

/// Parallel components of a normalized term.
inline std::vector<AmbientTerm> items(const AmbientTerm& t) {
  if (t.kind == AmbientTerm::Kind::Nil) return {};
  if (t.kind == AmbientTerm::Kind::Par) return t.sub;
  return {t};
}

}  // namespace amb

inline std::string print_ambient(const AmbientTerm& t) {
  using K = AmbientTerm::Kind;
  switch (t.kind) {
    case K::Nil: return "0";
    case K::Par: {
      std::string out;
      for (std::size_t i = 0; i < t.sub.size(); ++i) {
        if (i) out += " | ";
        out += print_ambient(t.sub[i]);
      }
      return out;
    }
    case K::Amb:
      return quote_identifier(t.name) + "[" +
             (t.body().kind == K::Nil ? std::string() : print_ambient(t.body())) + "]";
    case K::Prefix: {
      std::string cont = print_ambient(t.body());
      if (t.body().kind == K::Par) cont = "(" + cont + ")";
      return cap_keyword(t.cap.kind) + " " + quote_identifier(t.cap.target) + "." + cont;
    }
  }
  return "";
}

/// Flattens nested Par, drops Nil components and sorts components by their
/// printed form; a Par of one component is that component.
inline AmbientTerm normalize(AmbientTerm t) {
  using K = AmbientTerm::Kind;
  if (t.kind == K::Amb || t.kind == K::Prefix) {
    t.sub[0] = normalize(std::move(t.sub[0]));
    return t;
  }
  if (t.kind != K::Par) return t;
  std::vector<AmbientTerm> flat;
  for (auto& s : t.sub) {
    AmbientTerm n = normalize(std::move(s));
    if (n.kind == K::Par) {
      for (auto& x : n.sub) flat.push_back(std::move(x));
    } else if (n.kind != K::Nil) {
      flat.push_back(std::move(n));
    }
  }
  if (flat.empty()) return amb::nil();
  if (flat.size() == 1) return std::move(flat[0]);
  std::vector<std::pair<std::string, AmbientTerm>> keyed;
  for (auto& x : flat) keyed.emplace_back(print_ambient(x), std::move(x));
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  t.sub.clear();
  for (auto& [k, x] : keyed) t.sub.push_back(std::move(x));
  return t;
}

namespace detail {

class AmbientParser {
public:
  explicit AmbientParser(std::string_view text) : cur_(Lexer(text).tokenize()) {}

  AmbientTerm parse() {
    AmbientTerm t = parallel();
    if (!cur_.at_end()) cur_.fail("expected '|' or end of input");
    return normalize(std::move(t));
  }

private:
  AmbientTerm parallel() {
    std::vector<AmbientTerm> items{atom()};
    while (cur_.accept("|")) items.push_back(atom());
    return amb::par(std::move(items));
  }

  std::optional<CapKind> capability_keyword() {
    const Token& t = cur_.peek();
    if (t.kind != TokenKind::Ident || cur_.peek(1).is("[")) return std::nullopt;
    static const std::map<std::string, CapKind> words{
        {"in", CapKind::In},     {"coin", CapKind::CoIn},   {"out", CapKind::Out},
        {"coout", CapKind::CoOut}, {"open", CapKind::Open}, {"coopen", CapKind::CoOpen}};
    if (t.text == "co" && cur_.peek(1).is("-")) {
      auto it = words.find("co" + cur_.peek(2).text);
      if (cur_.peek(2).kind != TokenKind::Ident || it == words.end())
        TokenCursor::fail_at(cur_.peek(2), "unknown capability 'co-" + cur_.peek(2).text + "'");
      cur_.take();
      cur_.take();
      cur_.take();
      return it->second;
    }
    auto it = words.find(t.text);
    if (it == words.end()) return std::nullopt;
    cur_.take();
    return it->second;
  }

  AmbientTerm atom() {
    if (cur_.peek().kind == TokenKind::Nat) {
      if (cur_.peek().text != "0") cur_.fail("expected '0'");
      cur_.take();
      return amb::nil();
    }
    if (cur_.accept("(")) {
      AmbientTerm t = parallel();
      cur_.expect(")");
      return t;
    }
    if (cur_.peek().is("!")) TokenCursor::fail_at(cur_.peek(), "replication is not supported");
    if (auto cap = capability_keyword()) {
      std::string target = cur_.expect_name("ambient name after capability");
      AmbientTerm cont = amb::nil();
      if (cur_.accept(".")) cont = atom();
      return amb::prefix(Capability{*cap, std::move(target)}, std::move(cont));
    }
    if (cur_.peek().is_name()) {
      const Token& head = cur_.peek();
      if (!cur_.peek(1).is("["))
        TokenCursor::fail_at(head, "unknown capability or missing '[' after '" + head.text + "'");
      std::string name = cur_.take().text;
      cur_.expect("[");
      AmbientTerm body = cur_.peek().is("]") ? amb::nil() : parallel();
      cur_.expect("]");
      return amb::ambient(std::move(name), std::move(body));
    }
    cur_.fail("expected a process");
  }

  TokenCursor cur_;
};

}  // namespace detail

/// Reads `.amb` syntax: `0`, `P | Q`, `(P)`, `n[P]` and prefixes
/// `in n.P`, `out n.P`, `open n.P` with co-forms `coin`/`co-in` and so on.
inline Parsed<AmbientTerm> parse_ambient(std::string_view text) {
  Parsed<AmbientTerm> out;
  try {
    detail::AmbientParser p(text);
    out.value = p.parse();
  } catch (const ParseFailure& f) {
    out.diagnostics.push_back(f.diag);
  }
  return out;
}

namespace detail {

inline void add_reduct(std::map<std::string, AmbientTerm>& out, AmbientTerm t) {
  t = normalize(std::move(t));
  std::string k = print_ambient(t);
  out.emplace(std::move(k), std::move(t));
}

inline std::vector<AmbientTerm> without(const std::vector<AmbientTerm>& v,
                                        std::initializer_list<std::size_t> drop) {
  std::vector<AmbientTerm> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::find(drop.begin(), drop.end(), i) == drop.end()) out.push_back(v[i]);
  return out;
}

inline bool is_prefix(const AmbientTerm& t, CapKind k, const std::string& target) {
  return t.kind == AmbientTerm::Kind::Prefix && t.cap.kind == k && t.cap.target == target;
}

// Reductions among the parallel components `xs`, including those inside
// ambients; each result is the full replacement component list.
inline void reduce_items(const std::vector<AmbientTerm>& xs,
                         std::vector<std::vector<AmbientTerm>>& out) {
  using K = AmbientTerm::Kind;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].kind == K::Amb) {
      const std::string& n = xs[i].name;
      const auto nb = amb::items(xs[i].body());
      // n[in m.P | R] | m[coin m.Q | S] -> m[n[P | R] | Q | S]
      for (std::size_t p = 0; p < nb.size(); ++p) {
        if (nb[p].kind != K::Prefix || nb[p].cap.kind != CapKind::In) continue;
        const std::string& m = nb[p].cap.target;
        for (std::size_t j = 0; j < xs.size(); ++j) {
          if (j == i || xs[j].kind != K::Amb || xs[j].name != m) continue;
          const auto mb = amb::items(xs[j].body());
          for (std::size_t q = 0; q < mb.size(); ++q) {
            if (!is_prefix(mb[q], CapKind::CoIn, m)) continue;
            auto inner = without(nb, {p});
            inner.push_back(nb[p].body());
            auto host = without(mb, {q});
            host.push_back(mb[q].body());
            host.push_back(amb::ambient(n, amb::par(inner)));
            auto next = without(xs, {i, j});
            next.push_back(amb::ambient(m, amb::par(host)));
            out.push_back(std::move(next));
          }
        }
      }
      // m[n[out m.P | R] | coout m.Q | S] -> n[P | R] | m[Q | S]
      for (std::size_t c = 0; c < nb.size(); ++c) {
        if (nb[c].kind != K::Amb) continue;
        const auto cb = amb::items(nb[c].body());
        for (std::size_t p = 0; p < cb.size(); ++p) {
          if (!is_prefix(cb[p], CapKind::Out, n)) continue;
          for (std::size_t q = 0; q < nb.size(); ++q) {
            if (!is_prefix(nb[q], CapKind::CoOut, n)) continue;
            auto child = without(cb, {p});
            child.push_back(cb[p].body());
            auto host = without(nb, {c, q});
            host.push_back(nb[q].body());
            auto next = without(xs, {i});
            next.push_back(amb::ambient(nb[c].name, amb::par(child)));
            next.push_back(amb::ambient(n, amb::par(host)));
            out.push_back(std::move(next));
          }
        }
      }
      // reductions inside n
      std::vector<std::vector<AmbientTerm>> inside;
      reduce_items(nb, inside);
      for (auto& body : inside) {
        auto next = xs;
        next[i] = amb::ambient(n, amb::par(std::move(body)));
        out.push_back(std::move(next));
      }
    } else if (xs[i].kind == K::Prefix && xs[i].cap.kind == CapKind::Open) {
      // open n.P | n[coopen n.Q | R] -> P | Q | R
      const std::string& n = xs[i].cap.target;
      for (std::size_t j = 0; j < xs.size(); ++j) {
        if (xs[j].kind != K::Amb || xs[j].name != n) continue;
        const auto nb = amb::items(xs[j].body());
        for (std::size_t q = 0; q < nb.size(); ++q) {
          if (!is_prefix(nb[q], CapKind::CoOpen, n)) continue;
          auto next = without(xs, {i, j});
          next.push_back(xs[i].body());
          next.push_back(nb[q].body());
          for (auto& r : without(nb, {q})) next.push_back(std::move(r));
          out.push_back(std::move(next));
        }
      }
    }
  }
}

}  // namespace detail

/// All one-step reducts of `t` under the safe-ambient rules for in, out and
/// open, deduplicated up to structural congruence and sorted by print.
inline std::vector<AmbientTerm> reduce_ambient(const AmbientTerm& t) {
  std::vector<std::vector<AmbientTerm>> raw;
  detail::reduce_items(amb::items(normalize(t)), raw);
  std::map<std::string, AmbientTerm> uniq;
  for (auto& xs : raw) detail::add_reduct(uniq, amb::par(std::move(xs)));
  std::vector<AmbientTerm> out;
  for (auto& [k, v] : uniq) out.push_back(std::move(v));
  return out;
}

// ---------------------------------------------------------------------------
// Encoding into mutual mobile membranes. A prefix becomes one object named by
// its whole remaining program; co-capabilities become barred objects.

namespace detail {

inline std::string compact_program(const AmbientTerm& t) {
  using K = AmbientTerm::Kind;
  std::string head = cap_keyword(t.cap.kind) + "_" + t.cap.target;
  const AmbientTerm& c = t.body();
  if (c.kind == K::Nil) return head;
  if (c.kind == K::Prefix) return head + "." + compact_program(c);
  std::string out = head + ".(";
  for (std::size_t i = 0; i < c.sub.size(); ++i) {
    if (i) out += "|";
    out += compact_program(c.sub[i]);
  }
  return out + ")";
}

inline Object program_object(const AmbientTerm& prefix) {
  return make_object(compact_program(prefix), prefix.cap.co());
}

inline Multiset encode_programs(const AmbientTerm& t) {
  Multiset m;
  for (const auto& x : amb::items(t))
    if (x.kind == AmbientTerm::Kind::Prefix) m.add(program_object(x));
  return m;
}

inline void check_fragment(const AmbientTerm& t, bool under_prefix) {
  using K = AmbientTerm::Kind;
  switch (t.kind) {
    case K::Nil: return;
    case K::Par:
      for (const auto& x : t.sub) check_fragment(x, under_prefix);
      return;
    case K::Amb:
      if (under_prefix)
        throw UnsupportedFragment("ambient '" + t.name +
                                  "' under a capability prefix cannot be encoded");
      if (t.name == "skin")
        throw UnsupportedFragment("ambient name 'skin' is reserved for the enclosing membrane");
      check_fragment(t.body(), false);
      return;
    case K::Prefix:
      if (t.cap.kind == CapKind::Open || t.cap.kind == CapKind::CoOpen)
        throw UnsupportedFragment("capability '" + cap_keyword(t.cap.kind) + " " + t.cap.target +
                                  "' has no mutual-membrane counterpart");
      check_fragment(t.body(), true);
      return;
  }
}

inline Membrane encode_region(const std::string& label, const AmbientTerm& body) {
  Membrane m;
  m.label = label;
  for (const auto& x : amb::items(body)) {
    if (x.kind == AmbientTerm::Kind::Prefix) m.contents.add(program_object(x));
    else if (x.kind == AmbientTerm::Kind::Amb) m.children.push_back(encode_region(x.name, x.body()));
  }
  return m;
}

inline void collect_programs(const AmbientTerm& body, const std::string& label,
                             std::map<std::string, std::map<std::string, AmbientTerm>>& out) {
  for (const auto& x : amb::items(body)) {
    if (x.kind == AmbientTerm::Kind::Prefix) out[label].emplace(compact_program(x), x);
    else if (x.kind == AmbientTerm::Kind::Amb) collect_programs(x.body(), x.name, out);
  }
}

}  // namespace detail

/// The membrane configuration of an open-free term: ambients become
/// membranes labeled by their names under a skin labeled `skin`.
inline Configuration encode_ambient(const AmbientTerm& t) {
  detail::check_fragment(t, false);
  return normalize(Configuration{detail::encode_region("skin", normalize(t))});
}

/// The full system for `t`: its configuration plus one mutual rule per
/// capability/co-capability pair that can ever meet. Objects produced by
/// rules are added to the pool until nothing new appears.
inline SystemDefinition translate_ambient(const AmbientTerm& source) {
  const AmbientTerm t = normalize(source);
  SystemDefinition s;
  s.name = "ambient";
  s.kind = SystemKind::Plain;
  s.initial = encode_ambient(t);

  std::map<std::string, std::map<std::string, AmbientTerm>> pool;
  detail::collect_programs(t, "skin", pool);
  std::map<std::string, Rule> rules;
  auto absorb = [&](const std::string& label, const AmbientTerm& cont, bool& grew) {
    for (const auto& x : amb::items(cont))
      if (x.kind == AmbientTerm::Kind::Prefix && pool[label].emplace(detail::compact_program(x), x).second)
        grew = true;
  };
  for (bool grew = true; grew;) {
    grew = false;
    const auto snapshot = pool;
    for (const auto& [n, progs] : snapshot) {
      if (n == "skin") continue;  // the skin never moves
      for (const auto& [xn, x] : progs) {
        const bool in = x.cap.kind == CapKind::In;
        if (!in && x.cap.kind != CapKind::Out) continue;
        const std::string& m = x.cap.target;
        auto host = snapshot.find(m);
        if (m == "skin" || host == snapshot.end()) continue;
        for (const auto& [yn, y] : host->second) {
          if (!detail::is_prefix(y, in ? CapKind::CoIn : CapKind::CoOut, m)) continue;
          Object a = detail::program_object(x);
          Object partner = detail::program_object(y);
          Multiset u = detail::encode_programs(x.body());
          Multiset v = detail::encode_programs(y.body());
          RuleSchema r = in ? RuleSchema{MutualEndo{n, a, u, m, partner, v}}
                            : RuleSchema{MutualExo{n, a, u, m, partner, v}};
          rules.emplace(print_rule(r), Rule{r, {}});
          absorb(n, x.body(), grew);
          absorb(m, y.body(), grew);
        }
      }
    }
  }
  for (auto& [k, r] : rules) s.rules.push_back(std::move(r));
  return s;
}

}  // namespace memlab
