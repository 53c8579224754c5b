#pragma once

#include <cctype>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace memlab {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A source term uses a construct the translators do not cover.
class UnsupportedFragment : public Error {
public:
  using Error::Error;
};

/// Remaining lifetime in ticks. An empty optional means the item never expires.
using Timer = std::optional<int>;

/// An object name together with its polarity; `barred` marks a co-object.
struct Symbol {
  std::string name;
  bool barred = false;

  Symbol dual() const { return Symbol{name, !barred}; }

  auto operator<=>(const Symbol&) const = default;
  bool operator==(const Symbol&) const = default;
};

/// One multiset key: a symbol occurrence with its (optional) timer.
/// Occurrences with different timers are distinct resources.
struct Object {
  Symbol symbol;
  Timer timer;

  auto operator<=>(const Object& o) const {
    if (auto c = symbol <=> o.symbol; c != 0) return c;
    // untimed sorts after every timed value
    if (timer.has_value() != o.timer.has_value())
      return timer.has_value() ? std::strong_ordering::less : std::strong_ordering::greater;
    if (!timer) return std::strong_ordering::equal;
    return *timer <=> *o.timer;
  }
  bool operator==(const Object&) const = default;
};

inline Object make_object(std::string name, bool barred = false, Timer timer = std::nullopt) {
  return Object{Symbol{std::move(name), barred}, timer};
}

/// Finite multiset of objects. Entries never hold a multiplicity <= 0.
class Multiset {
public:
  using Map = std::map<Object, int>;

  Multiset() = default;
  Multiset(std::initializer_list<Object> objs) {
    for (const auto& o : objs) add(o);
  }

  void add(const Object& o, int count = 1) {
    if (count <= 0) return;
    counts_[o] += count;
  }

  /// Removes `count` occurrences; throws if fewer are present.
  void remove(const Object& o, int count = 1) {
    if (count <= 0) return;
    auto it = counts_.find(o);
    if (it == counts_.end() || it->second < count)
      throw Error("multiset removal of absent object");
    it->second -= count;
    if (it->second == 0) counts_.erase(it);
  }

  int count(const Object& o) const {
    auto it = counts_.find(o);
    return it == counts_.end() ? 0 : it->second;
  }

  /// Total number of occurrences.
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [o, c] : counts_) n += static_cast<std::size_t>(c);
    return n;
  }

  bool empty() const { return counts_.empty(); }

  bool contains(const Multiset& sub) const {
    for (const auto& [o, c] : sub.counts_)
      if (count(o) < c) return false;
    return true;
  }

  Multiset& operator+=(const Multiset& other) {
    for (const auto& [o, c] : other.counts_) add(o, c);
    return *this;
  }

  /// Multiset difference; throws unless `other` is contained in *this.
  Multiset& operator-=(const Multiset& other) {
    for (const auto& [o, c] : other.counts_) remove(o, c);
    return *this;
  }

  friend Multiset operator+(Multiset a, const Multiset& b) { return a += b; }
  friend Multiset operator-(Multiset a, const Multiset& b) { return a -= b; }

  bool operator==(const Multiset&) const = default;

  const Map& entries() const { return counts_; }
  Map::const_iterator begin() const { return counts_.begin(); }
  Map::const_iterator end() const { return counts_.end(); }

  /// Every stored key whose symbol equals `pattern.symbol`; a timed pattern
  /// selects only the key with exactly that timer.
  std::vector<Object> matching(const Object& pattern) const {
    std::vector<Object> out;
    if (pattern.timer) {
      if (count(pattern) > 0) out.push_back(pattern);
      return out;
    }
    for (const auto& [o, c] : counts_)
      if (o.symbol == pattern.symbol) out.push_back(o);
    return out;
  }

  /// The same multiset with every timer removed.
  Multiset erase_timers() const {
    Multiset out;
    for (const auto& [o, c] : counts_) out.add(Object{o.symbol, std::nullopt}, c);
    return out;
  }

  template <class F>
  void transform_keys(F&& f) {
    Map next;
    for (const auto& [o, c] : counts_) next[f(o)] += c;
    counts_ = std::move(next);
  }

private:
  Map counts_;
};

/// Identifier characters accepted unquoted in `.mem` text.
inline bool is_plain_identifier(const std::string& s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!(std::isalpha(head) || s[0] == '_')) return false;
  for (char ch : s) {
    auto u = static_cast<unsigned char>(ch);
    if (!(std::isalnum(u) || ch == '_' || ch == '.' || ch == '\'')) return false;
  }
  return true;
}

inline std::string quote_identifier(const std::string& s) {
  if (is_plain_identifier(s)) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  out += '"';
  return out;
}

inline std::string to_string(const Object& o) {
  std::string out;
  if (o.symbol.barred) out += '~';
  out += quote_identifier(o.symbol.name);
  if (o.timer) out += "@" + std::to_string(*o.timer);
  return out;
}

/// Comma-separated occurrences in key order, repeated per multiplicity.
inline std::string to_string(const Multiset& m) {
  std::string out;
  bool first = true;
  for (const auto& [o, c] : m) {
    for (int i = 0; i < c; ++i) {
      if (!first) out += ',';
      first = false;
      out += to_string(o);
    }
  }
  return out;
}

}  // namespace memlab
