#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memlab/lexer.hpp"
#include "memlab/rules.hpp"

namespace memlab {

struct ValidationOptions {
  /// Warn about movable membranes that are not elementary in the initial
  /// configuration (the engine refuses to move them under this option).
  bool elementary_only = false;
};

/// Checks every well-formedness invariant of a system. Errors make the system
/// unusable; warnings and notes are informational.
inline std::vector<Diagnostic> validate(const SystemDefinition& s,
                                        const ValidationOptions& opts = {}) {
  std::vector<Diagnostic> out;
  auto error = [&](SourceLoc loc, std::string msg) {
    out.push_back(Diagnostic{Severity::Error, std::move(msg), loc});
  };
  const SourceLoc top{};

  if (s.initial.skin.timer) error(top, "the skin membrane cannot carry a timer");

  for_each_node(s.initial, [&](const Path& p, const Membrane& m) {
    if (s.kind == SystemKind::Plain && !m.surface.empty())
      error(top, "membrane '" + m.label + "' at " + path_string(p) +
                     " has surface objects in a plain system");
    if (s.kind == SystemKind::Surface && !m.contents.empty())
      error(top, "membrane '" + m.label + "' at " + path_string(p) +
                     " has inner objects in a surface system");
  });

  const auto labels = label_set(s);
  const auto symbols = alphabet(s);
  bool has_evo = false;
  bool has_mutual = false;

  for (std::size_t i = 0; i < s.rules.size(); ++i) {
    const Rule& r = s.rules[i];
    const std::string tag = "rule " + std::to_string(i) + " (" + family(r.schema) + ")";
    if (is_surface_rule(r.schema) && s.kind == SystemKind::Plain)
      error(r.loc, tag + ": surface rule in a plain system");
    if (!is_surface_rule(r.schema) && s.kind == SystemKind::Surface)
      error(r.loc, tag + ": plain rule in a surface system");
    for (const auto& l : matched_labels(r.schema))
      if (!labels.count(l)) error(r.loc, tag + ": undeclared label '" + l + "'");
    for (const auto& o : consumed_objects(r.schema))
      if (!symbols.count(o.symbol))
        error(r.loc, tag + ": symbol '" + to_string(Object{o.symbol, std::nullopt}) +
                         "' is not in the alphabet");
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, MutualEndo> || std::is_same_v<T, MutualExo> ||
                        std::is_same_v<T, SurfaceExo> || std::is_same_v<T, Phago>) {
            if (x.partner.symbol.barred == x.a.symbol.barred)
              error(r.loc, tag + ": partner trigger must have the opposite polarity of '" +
                               to_string(x.a) + "'");
          }
        },
        r.schema);
    if (std::holds_alternative<Evo>(r.schema)) has_evo = true;
    if (std::holds_alternative<MutualEndo>(r.schema) ||
        std::holds_alternative<MutualExo>(r.schema))
      has_mutual = true;
  }

  if (has_evo && has_mutual)
    out.push_back(Diagnostic{Severity::Note,
                             "system mixes contextual evolution with mutual mobility rules", top});

  if (opts.elementary_only) {
    std::set<std::string> movers;
    for (const auto& r : s.rules) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Evo> || std::is_same_v<T, Pino>) return;
            else if constexpr (std::is_same_v<T, SurfaceExo>) movers.insert(x.inner);
            else if constexpr (std::is_same_v<T, Phago>) movers.insert(x.victim);
            else movers.insert(x.mover);
          },
          r.schema);
    }
    for_each_node(s.initial, [&](const Path& p, const Membrane& m) {
      if (!p.empty() && movers.count(m.label) && !m.children.empty())
        out.push_back(Diagnostic{Severity::Warning,
                                 "membrane '" + m.label + "' at " + path_string(p) +
                                     " is not elementary and cannot move",
                                 top});
    });
  }
  return out;
}

struct ParseResult {
  std::optional<SystemDefinition> system;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return system.has_value(); }
};

namespace detail {

class MemParser {
public:
  explicit MemParser(std::string_view text) : cur_(Lexer(text, true).tokenize()) {}

  SystemDefinition system() {
    SystemDefinition s;
    cur_.expect_word("system");
    s.name = cur_.expect_name("system name");
    cur_.expect("{");
    if (cur_.peek().is_word("kind") &&
        (cur_.peek(1).is_word("plain") || cur_.peek(1).is_word("surface"))) {
      cur_.take();
      s.kind = cur_.take().text == "plain" ? SystemKind::Plain : SystemKind::Surface;
    }
    s.initial.skin = membrane(true);
    cur_.expect_word("rules");
    cur_.expect("{");
    while (!cur_.peek().is("}")) {
      if (cur_.at_end()) cur_.fail("expected '}'");
      s.rules.push_back(rule());
    }
    cur_.expect("}");
    cur_.expect("}");
    if (!cur_.at_end()) cur_.fail("unexpected text after system");
    s.initial = normalize(std::move(s.initial));
    return s;
  }

  Configuration configuration() {
    Configuration c;
    c.skin = membrane(true);
    if (!cur_.at_end()) cur_.fail("unexpected text after membrane");
    return normalize(std::move(c));
  }

  bool starts_with_system() const { return cur_.peek().is_word("system"); }

private:
  Timer timer() {
    if (!cur_.accept("@")) return std::nullopt;
    return cur_.expect_nat();
  }

  Object object() {
    bool barred = cur_.accept("~");
    std::string name = cur_.expect_name("object name");
    return Object{Symbol{std::move(name), barred}, timer()};
  }

  // objlist terminated by any token in `stops` (not consumed)
  Multiset objects_until(std::initializer_list<std::string_view> stops) {
    Multiset m;
    auto stop = [&] {
      for (auto s : stops)
        if (cur_.peek().is(s)) return true;
      return false;
    };
    if (stop()) return m;
    m.add(object());
    while (cur_.accept(",")) m.add(object());
    return m;
  }

  Membrane membrane(bool is_skin) {
    Membrane m;
    m.label = cur_.expect_name("membrane label");
    if (cur_.peek().is("@")) {
      if (is_skin) TokenCursor::fail_at(cur_.peek(), "the skin membrane cannot carry a timer");
      m.timer = timer();
    }
    if (cur_.accept("(")) {
      m.surface = objects_until({")"});
      cur_.expect(")");
    }
    cur_.expect("{");
    m.contents = objects_until({";", "}"});
    if (cur_.accept(";")) {
      while (!cur_.peek().is("}")) {
        if (cur_.at_end()) cur_.fail("expected '}'");
        m.children.push_back(membrane(false));
      }
    }
    cur_.expect("}");
    return m;
  }

  // "(" trigger ["->" rhs] ")"
  std::pair<Object, Multiset> guarded(bool rhs_allowed = true) {
    cur_.expect("(");
    Object a = object();
    Multiset rhs;
    if (rhs_allowed && cur_.accept("->")) rhs = objects_until({")"});
    cur_.expect(")");
    return {a, rhs};
  }

  std::pair<Object, Multiset> rewrite() {
    cur_.expect("(");
    Object a = object();
    cur_.expect("->");
    Multiset rhs = objects_until({")"});
    cur_.expect(")");
    return {a, rhs};
  }

  Multiset optional_bag() {
    Multiset m;
    if (cur_.accept("(")) {
      m = objects_until({")"});
      cur_.expect(")");
    }
    return m;
  }

  Rule rule() {
    const Token kw = cur_.peek();
    if (kw.kind != TokenKind::Ident) cur_.fail("expected a rule keyword");
    cur_.take();
    Rule r;
    r.loc = kw.loc;
    const std::string& k = kw.text;
    if (k == "evo") {
      Evo x;
      x.at = cur_.expect_name("label");
      std::tie(x.a, x.w) = rewrite();
      r.schema = x;
    } else if (k == "endo") {
      Endo x;
      x.mover = cur_.expect_name("label");
      std::tie(x.a, x.w) = rewrite();
      cur_.expect_word("into");
      x.target = cur_.expect_name("label");
      r.schema = x;
    } else if (k == "exo") {
      Exo x;
      x.mover = cur_.expect_name("label");
      std::tie(x.a, x.w) = rewrite();
      cur_.expect_word("out");
      x.host = cur_.expect_name("label");
      r.schema = x;
    } else if (k == "fendo") {
      Fendo x;
      x.mover = cur_.expect_name("label");
      cur_.expect_word("into");
      x.target = cur_.expect_name("label");
      std::tie(x.a, x.w) = rewrite();
      r.schema = x;
    } else if (k == "fexo") {
      Fexo x;
      x.mover = cur_.expect_name("label");
      cur_.expect_word("out");
      x.host = cur_.expect_name("label");
      std::tie(x.a, x.w) = rewrite();
      r.schema = x;
    } else if (k == "mendo") {
      MutualEndo x;
      x.mover = cur_.expect_name("label");
      std::tie(x.a, x.u) = rewrite();
      cur_.accept_word("into");
      x.target = cur_.expect_name("label");
      std::tie(x.partner, x.v) = rewrite();
      r.schema = x;
    } else if (k == "mexo") {
      MutualExo x;
      x.mover = cur_.expect_name("label");
      std::tie(x.a, x.u) = rewrite();
      cur_.accept_word("out");
      x.host = cur_.expect_name("label");
      std::tie(x.partner, x.v) = rewrite();
      r.schema = x;
    } else if (k == "pino") {
      Pino x;
      x.at = cur_.expect_name("label");
      cur_.expect("(");
      x.a = object();
      if (cur_.accept(";")) x.inner = objects_until({"->", ")"});
      if (cur_.accept("->")) x.outer = objects_until({")"});
      cur_.expect(")");
      cur_.expect_word("new");
      x.child = cur_.expect_name("label");
      x.b = optional_bag();
      r.schema = x;
    } else if (k == "sexo") {
      SurfaceExo x;
      x.inner = cur_.expect_name("label");
      cur_.expect("(");
      x.a = object();
      cur_.expect(")");
      cur_.expect_word("out");
      x.outer = cur_.expect_name("label");
      x.partner = Object{x.a.symbol.dual(), std::nullopt};
      if (cur_.peek().is("(")) std::tie(x.partner, x.b) = guarded();
      r.schema = x;
    } else if (k == "phago") {
      Phago x;
      x.victim = cur_.expect_name("label");
      std::tie(x.a, x.c) = guarded();
      cur_.expect_word("by");
      x.engulfer = cur_.expect_name("label");
      x.partner = Object{x.a.symbol.dual(), std::nullopt};
      if (cur_.peek().is("(")) std::tie(x.partner, x.d) = guarded();
      cur_.expect_word("wrap");
      x.wrap = cur_.expect_name("label");
      x.b = optional_bag();
      r.schema = x;
    } else {
      TokenCursor::fail_at(kw, "unknown rule keyword '" + k + "'");
    }
    return r;
  }

  TokenCursor cur_;
};

}  // namespace detail

/// Syntax-only parse; no validation.
inline ParseResult parse_system_unchecked(std::string_view text) {
  ParseResult res;
  try {
    detail::MemParser p(text);
    res.system = p.system();
  } catch (const ParseFailure& f) {
    res.diagnostics.push_back(f.diag);
  }
  return res;
}

/// Parses and validates a `.mem` system. `system` is set iff no error-level
/// diagnostic was produced.
inline ParseResult parse_system(std::string_view text, const ValidationOptions& opts = {}) {
  ParseResult res = parse_system_unchecked(text);
  if (!res.system) return res;
  auto diags = validate(*res.system, opts);
  res.diagnostics.insert(res.diagnostics.end(), diags.begin(), diags.end());
  if (has_errors(res.diagnostics)) res.system.reset();
  return res;
}

/// Reads a bare membrane term, or the initial configuration of a full system.
inline std::optional<Configuration> parse_configuration(std::string_view text,
                                                        std::vector<Diagnostic>* diags = nullptr) {
  try {
    detail::MemParser p(text);
    if (p.starts_with_system()) return p.system().initial;
    return p.configuration();
  } catch (const ParseFailure& f) {
    if (diags) diags->push_back(f.diag);
  }
  return std::nullopt;
}

inline std::string print_rule(const RuleSchema& r) {
  auto obj = [](const Object& o) { return to_string(o); };
  auto lbl = [](const std::string& l) { return quote_identifier(l); };
  auto rw = [&](const Object& a, const Multiset& w) {
    std::string s = "(" + obj(a) + " -> ";
    std::string rhs = to_string(w);
    if (rhs.empty()) s.pop_back();
    return s + rhs + ")";
  };
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Evo>) return "evo " + lbl(x.at) + rw(x.a, x.w);
        else if constexpr (std::is_same_v<T, Endo>)
          return "endo " + lbl(x.mover) + rw(x.a, x.w) + " into " + lbl(x.target);
        else if constexpr (std::is_same_v<T, Exo>)
          return "exo " + lbl(x.mover) + rw(x.a, x.w) + " out " + lbl(x.host);
        else if constexpr (std::is_same_v<T, Fendo>)
          return "fendo " + lbl(x.mover) + " into " + lbl(x.target) + rw(x.a, x.w);
        else if constexpr (std::is_same_v<T, Fexo>)
          return "fexo " + lbl(x.mover) + " out " + lbl(x.host) + rw(x.a, x.w);
        else if constexpr (std::is_same_v<T, MutualEndo>)
          return "mendo " + lbl(x.mover) + rw(x.a, x.u) + " " + lbl(x.target) +
                 rw(x.partner, x.v);
        else if constexpr (std::is_same_v<T, MutualExo>)
          return "mexo " + lbl(x.mover) + rw(x.a, x.u) + " " + lbl(x.host) + rw(x.partner, x.v);
        else if constexpr (std::is_same_v<T, Pino>) {
          std::string s = "pino " + lbl(x.at) + "(" + obj(x.a);
          if (!x.inner.empty()) s += "; " + to_string(x.inner);
          if (!x.outer.empty()) s += " -> " + to_string(x.outer);
          return s + ") new " + lbl(x.child) + "(" + to_string(x.b) + ")";
        } else if constexpr (std::is_same_v<T, SurfaceExo>)
          return "sexo " + lbl(x.inner) + "(" + obj(x.a) + ") out " + lbl(x.outer) +
                 rw(x.partner, x.b);
        else
          return "phago " + lbl(x.victim) + rw(x.a, x.c) + " by " + lbl(x.engulfer) +
                 rw(x.partner, x.d) + " wrap " + lbl(x.wrap) + "(" + to_string(x.b) + ")";
      },
      r);
}

/// Pretty-prints a system in `.mem` syntax; the output re-parses to a
/// congruent system.
inline std::string print_system(const SystemDefinition& s) {
  std::string out = "system " + quote_identifier(s.name) + " {\n";
  out += "  kind " + to_string(s.kind) + "\n";
  out += "  " + canonical_encoding(s.initial) + "\n";
  out += "  rules {\n";
  for (const auto& r : s.rules) out += "    " + print_rule(r.schema) + "\n";
  out += "  }\n}\n";
  return out;
}

}  // namespace memlab
