#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "memlab/multiset.hpp"

namespace memlab {

/// One compartment of the membrane tree. Children are an unordered bag; the
/// stored order is only meaningful after `normalize`.
struct Membrane {
  std::string label;
  Multiset contents;
  Multiset surface;
  Timer timer;
  std::vector<Membrane> children;

  bool operator==(const Membrane&) const = default;
};

/// Index path from the skin; the empty path addresses the skin itself.
using Path = std::vector<std::size_t>;

namespace detail {

inline std::string node_key(const Membrane& m, const std::vector<std::string>& child_keys) {
  std::string out = quote_identifier(m.label);
  if (m.timer) out += "@" + std::to_string(*m.timer);
  if (!m.surface.empty()) out += "(" + to_string(m.surface) + ")";
  out += "{" + to_string(m.contents);
  if (!child_keys.empty()) {
    out += ";";
    for (std::size_t i = 0; i < child_keys.size(); ++i) {
      if (i) out += ' ';
      out += child_keys[i];
    }
  }
  out += "}";
  return out;
}

// Sorts children by their canonical key, bottom-up; returns the node's key.
inline std::string normalize_node(Membrane& m) {
  std::vector<std::pair<std::string, Membrane>> keyed;
  keyed.reserve(m.children.size());
  for (auto& c : m.children) {
    std::string k = normalize_node(c);
    keyed.emplace_back(std::move(k), std::move(c));
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> keys;
  m.children.clear();
  for (auto& [k, c] : keyed) {
    keys.push_back(std::move(k));
    m.children.push_back(std::move(c));
  }
  return node_key(m, keys);
}

inline std::string key_of(const Membrane& m) {
  std::vector<std::string> keys;
  keys.reserve(m.children.size());
  for (const auto& c : m.children) keys.push_back(key_of(c));
  std::sort(keys.begin(), keys.end());
  return node_key(m, keys);
}

}  // namespace detail

/// A membrane system state rooted at the skin. Values are immutable in
/// practice: every operation in this library returns a fresh configuration.
struct Configuration {
  Membrane skin;

  bool operator==(const Configuration&) const = default;
};

/// Canonical one-line text key; equal iff the two trees are isomorphic as
/// unordered labeled trees with identical multisets and timers. The key is
/// itself valid membrane syntax.
inline std::string canonical_encoding(const Configuration& c) { return detail::key_of(c.skin); }

inline bool is_congruent(const Configuration& a, const Configuration& b) {
  return canonical_encoding(a) == canonical_encoding(b);
}

/// Puts children of every node into canonical order so that index paths are
/// stable across congruent configurations.
inline Configuration normalize(Configuration c) {
  detail::normalize_node(c.skin);
  return c;
}

inline const Membrane& node_at(const Configuration& c, const Path& p) {
  const Membrane* m = &c.skin;
  for (auto i : p) {
    if (i >= m->children.size()) throw Error("membrane path out of range");
    m = &m->children[i];
  }
  return *m;
}

inline Membrane& node_at(Configuration& c, const Path& p) {
  return const_cast<Membrane&>(node_at(std::as_const(c), p));
}

inline bool has_node(const Configuration& c, const Path& p) {
  const Membrane* m = &c.skin;
  for (auto i : p) {
    if (i >= m->children.size()) return false;
    m = &m->children[i];
  }
  return true;
}

inline std::string path_string(const Path& p) {
  std::string out = "/";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += '/';
    out += std::to_string(p[i]);
  }
  return out;
}

/// Calls f(path, membrane) for every node in pre-order.
template <class F>
void for_each_node(const Configuration& c, F&& f) {
  Path path;
  auto rec = [&](auto& self, const Membrane& m) -> void {
    f(std::as_const(path), m);
    for (std::size_t i = 0; i < m.children.size(); ++i) {
      path.push_back(i);
      self(self, m.children[i]);
      path.pop_back();
    }
  };
  rec(rec, c.skin);
}

inline std::size_t membrane_count(const Configuration& c) {
  std::size_t n = 0;
  for_each_node(c, [&](const Path&, const Membrane&) { ++n; });
  return n;
}

/// Union of every contents and surface multiset in the tree.
inline Multiset total_objects(const Configuration& c) {
  Multiset out;
  for_each_node(c, [&](const Path&, const Membrane& m) {
    out += m.contents;
    out += m.surface;
  });
  return out;
}

/// Removes the membrane at `target`; its objects and children become elements
/// of the parent. Surface objects of the dissolved membrane join the parent's
/// surface.
inline Configuration dissolve(Configuration c, const Path& target) {
  if (target.empty()) throw Error("cannot dissolve the skin");
  Path parent_path(target.begin(), target.end() - 1);
  Membrane& parent = node_at(c, parent_path);
  std::size_t idx = target.back();
  if (idx >= parent.children.size()) throw Error("membrane path out of range");
  Membrane gone = std::move(parent.children[idx]);
  parent.children.erase(parent.children.begin() + static_cast<std::ptrdiff_t>(idx));
  parent.contents += gone.contents;
  parent.surface += gone.surface;
  for (auto& ch : gone.children) parent.children.push_back(std::move(ch));
  return normalize(std::move(c));
}

/// Indented multi-line rendering for human-readable traces.
inline std::string render_tree(const Configuration& c) {
  std::string out;
  auto rec = [&](auto& self, const Membrane& m, int depth) -> void {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += quote_identifier(m.label);
    if (m.timer) out += "@" + std::to_string(*m.timer);
    if (!m.surface.empty()) out += " (" + to_string(m.surface) + ")";
    out += " {" + to_string(m.contents) + "}\n";
    for (const auto& ch : m.children) self(self, ch, depth + 1);
  };
  rec(rec, c.skin, 0);
  return out;
}

}  // namespace memlab
