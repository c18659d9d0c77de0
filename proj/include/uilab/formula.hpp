#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uilab/error.hpp"

namespace uilab {

inline constexpr std::size_t kDefaultMaxPropositions = 20;

/// Ordered set of named boolean propositions.
///
/// Bit i of an atom index is the truth value of proposition i, in declaration
/// order. Serialized distributions rely on this ordering.
class PropositionSpace {
 public:
  PropositionSpace() = default;

  explicit PropositionSpace(std::vector<std::string> names,
                            std::size_t max_props = kDefaultMaxPropositions)
      : names_(std::move(names)) {
    if (names_.empty()) throw InvalidArgument("proposition space must not be empty");
    if (names_.size() > max_props)
      throw InvalidArgument("proposition space exceeds the cap of " +
                            std::to_string(max_props) + " propositions");
    std::set<std::string_view> seen;
    for (const auto& n : names_) {
      if (n.empty()) throw InvalidArgument("proposition names must be non-empty");
      if (!seen.insert(n).second) throw InvalidArgument("duplicate proposition '" + n + "'");
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  std::size_t atom_count() const noexcept { return std::size_t{1} << names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const noexcept {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  std::size_t index_of(std::string_view name) const {
    auto i = find(name);
    if (!i) throw UnknownProposition(std::string(name));
    return *i;
  }

  bool contains(std::string_view name) const noexcept { return find(name).has_value(); }

  friend bool operator==(const PropositionSpace&, const PropositionSpace&) = default;

 private:
  std::vector<std::string> names_;
};

/// Immutable boolean expression over proposition names.
class Formula {
 public:
  enum class Kind { Atom, Not, And, Or };

  static Formula atom(std::string name) {
    if (!is_identifier(name)) throw InvalidArgument("invalid proposition name '" + name + "'");
    return Formula(std::make_shared<const Node>(Node{Kind::Atom, std::move(name), {}}));
  }

  static Formula negate(Formula child) {
    return Formula(std::make_shared<const Node>(Node{Kind::Not, {}, {std::move(child)}}));
  }

  static Formula conj(std::vector<Formula> children) { return nary(Kind::And, std::move(children)); }
  static Formula disj(std::vector<Formula> children) { return nary(Kind::Or, std::move(children)); }

  /// Tautology over one proposition, `(name | !name)`.
  static Formula tautology(const std::string& name) { return disj({atom(name), negate(atom(name))}); }

  Kind kind() const noexcept { return node_->kind; }
  bool is_atom() const noexcept { return node_->kind == Kind::Atom; }
  const std::string& name() const noexcept { return node_->name; }
  std::span<const Formula> children() const noexcept { return node_->children; }
  const Formula& child() const { return node_->children.front(); }

  /// Distinct proposition names mentioned, sorted.
  std::set<std::string> mentions() const {
    std::set<std::string> out;
    collect(out);
    return out;
  }

  bool mentions(std::string_view name) const {
    if (is_atom()) return node_->name == name;
    return std::any_of(children().begin(), children().end(),
                       [&](const Formula& c) { return c.mentions(name); });
  }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    if (a.is_atom()) return a.name() == b.name();
    return std::equal(a.children().begin(), a.children().end(), b.children().begin(),
                      b.children().end());
  }

  static bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
  }

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::vector<Formula> children;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static Formula nary(Kind kind, std::vector<Formula> children) {
    std::vector<Formula> flat;
    for (auto& c : children) {
      if (c.kind() == kind) {
        flat.insert(flat.end(), c.children().begin(), c.children().end());
      } else {
        flat.push_back(std::move(c));
      }
    }
    if (flat.size() < 2) throw InvalidArgument("and/or formulas need at least two operands");
    return Formula(std::make_shared<const Node>(Node{kind, {}, std::move(flat)}));
  }

  void collect(std::set<std::string>& out) const {
    if (is_atom()) {
      out.insert(node_->name);
      return;
    }
    for (const auto& c : children()) c.collect(out);
  }

  std::shared_ptr<const Node> node_;
};

inline Formula operator!(const Formula& f) { return Formula::negate(f); }
inline Formula operator&(const Formula& a, const Formula& b) { return Formula::conj({a, b}); }
inline Formula operator|(const Formula& a, const Formula& b) { return Formula::disj({a, b}); }

/// Canonical text: binary operators fully parenthesized, left-nested.
inline std::string to_string(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return f.name();
    case Formula::Kind::Not:
      return "!" + to_string(f.child());
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      const char* op = f.kind() == Formula::Kind::And ? " & " : " | ";
      auto kids = f.children();
      std::string acc = to_string(kids[0]);
      for (std::size_t i = 1; i < kids.size(); ++i) acc = "(" + acc + op + to_string(kids[i]) + ")";
      return acc;
    }
  }
  return {};
}

namespace detail {

// Recursive-descent parser. Accepts the strict parenthesized grammar and the
// usual infix precedence (! binds tighter than &, & tighter than |).
class FormulaParser {
 public:
  FormulaParser(std::string_view text, std::size_t line, std::size_t column_offset)
      : text_(text), line_(line), offset_(column_offset) {}

  Formula parse_all() {
    Formula f = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

  Formula parse_prefix() { return parse_or(); }
  std::size_t position() const noexcept { return pos_; }

 private:
  Formula parse_or() {
    std::vector<Formula> terms{parse_and()};
    while (accept('|')) terms.push_back(parse_and());
    return terms.size() == 1 ? terms.front() : Formula::disj(std::move(terms));
  }

  Formula parse_and() {
    std::vector<Formula> terms{parse_unary()};
    while (accept('&')) terms.push_back(parse_unary());
    return terms.size() == 1 ? terms.front() : Formula::conj(std::move(terms));
  }

  Formula parse_unary() {
    if (accept('!')) return Formula::negate(parse_unary());
    if (accept('(')) {
      Formula inner = parse_or();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail(pos_ < text_.size() ? "expected proposition name" : "unexpected end of formula");
    std::string_view ident = text_.substr(start, pos_ - start);
    if (!Formula::is_identifier(ident)) {
      pos_ = start;
      fail("invalid proposition name '" + std::string(ident) + "'");
    }
    return Formula::atom(std::string(ident));
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line_, offset_ + pos_ + 1);
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t offset_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse_formula(std::string_view text) {
  return detail::FormulaParser(text, 0, 0).parse_all();
}

/// Per-atom truth values of a formula; entry k is 1 when the formula holds
/// under truth assignment k.
using EventMask = std::vector<std::uint8_t>;

inline EventMask truth_table(const PropositionSpace& space, const Formula& f) {
  const std::size_t m = space.atom_count();
  EventMask mask(m);
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const std::size_t bit = space.index_of(f.name());
      for (std::size_t k = 0; k < m; ++k) mask[k] = static_cast<std::uint8_t>((k >> bit) & 1u);
      break;
    }
    case Formula::Kind::Not: {
      mask = truth_table(space, f.child());
      for (auto& v : mask) v ^= 1u;
      break;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      const bool is_and = f.kind() == Formula::Kind::And;
      mask = truth_table(space, f.children()[0]);
      for (std::size_t i = 1; i < f.children().size(); ++i) {
        EventMask other = truth_table(space, f.children()[i]);
        for (std::size_t k = 0; k < m; ++k) mask[k] = is_and ? (mask[k] & other[k]) : (mask[k] | other[k]);
      }
      break;
    }
  }
  return mask;
}

/// Throws UnknownProposition if `f` mentions a name outside `space`.
inline void check_formula(const PropositionSpace& space, const Formula& f) {
  for (const auto& n : f.mentions()) space.index_of(n);
}

}  // namespace uilab
