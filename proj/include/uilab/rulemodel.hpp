#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "uilab/calculi.hpp"
#include "uilab/error.hpp"
#include "uilab/formula.hpp"
#include "uilab/joint.hpp"
#include "uilab/maxent.hpp"

namespace uilab {

/// A rule strength, either a certainty factor relative to the consequent's
/// prior or an absolute conditional probability.
struct Strength {
  enum class Form { CertaintyFactor, Probability };
  Form form;
  double value;

  static Strength cf(double v) {
    if (!(v >= -1.0 && v <= 1.0)) throw InvalidArgument("cf strength must lie in [-1, 1]");
    return {Form::CertaintyFactor, v};
  }
  static Strength prob(double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("prob strength must lie in [0, 1]");
    return {Form::Probability, v};
  }

  friend bool operator==(const Strength&, const Strength&) = default;
};

struct Rule {
  std::string consequent;
  Formula antecedent;
  Strength upper;
  std::optional<Strength> lower;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct LeafPrior {
  std::string name;
  double value;
  friend bool operator==(const LeafPrior&, const LeafPrior&) = default;
};

struct RuleSetLimits {
  std::size_t max_rules = 12;
  std::size_t max_propositions = kDefaultMaxPropositions;
};

/// Propositions, leaf priors, rules, and extra correlation constraints.
///
/// The rule graph (antecedent propositions -> consequent) must be acyclic;
/// undirected cycles are fine. Every leaf (a proposition that is never a
/// consequent) needs a prior.
class RuleSet {
 public:
  RuleSet(PropositionSpace space, std::vector<LeafPrior> leaf_priors, std::vector<Rule> rules,
          std::vector<Constraint> extra_constraints, const RuleSetLimits& limits = {})
      : space_(std::move(space)),
        leaf_priors_(std::move(leaf_priors)),
        rules_(std::move(rules)),
        extra_(std::move(extra_constraints)) {
    validate(limits);
  }

  const PropositionSpace& space() const noexcept { return space_; }
  const std::vector<LeafPrior>& leaf_priors() const noexcept { return leaf_priors_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const std::vector<Constraint>& extra_constraints() const noexcept { return extra_; }

  bool is_consequent(std::string_view name) const {
    return std::any_of(rules_.begin(), rules_.end(), [&](const Rule& r) { return r.consequent == name; });
  }

  /// Leaves in declaration order.
  std::vector<std::string> leaves() const {
    std::vector<std::string> out;
    for (const auto& n : space_.names())
      if (!is_consequent(n)) out.push_back(n);
    return out;
  }

  double leaf_prior(std::string_view leaf) const {
    for (const auto& p : leaf_priors_)
      if (p.name == leaf) return p.value;
    throw UnboundLeaf(std::string(leaf));
  }

  /// Consequents ordered so that every antecedent is computed before use.
  const std::vector<std::string>& consequents() const noexcept { return order_; }

  /// Consequents that feed no other rule: the nodes a sweep scores.
  std::vector<std::string> query_nodes() const {
    std::vector<std::string> out;
    for (const auto& c : order_) {
      const bool used = std::any_of(rules_.begin(), rules_.end(),
                                    [&](const Rule& r) { return r.antecedent.mentions(c); });
      if (!used) out.push_back(c);
    }
    return out;
  }

  std::vector<const Rule*> rules_for(std::string_view consequent) const {
    std::vector<const Rule*> out;
    for (const auto& r : rules_)
      if (r.consequent == consequent) out.push_back(&r);
    return out;
  }

  friend bool operator==(const RuleSet& a, const RuleSet& b) {
    return a.space_ == b.space_ && a.leaf_priors_ == b.leaf_priors_ && a.rules_ == b.rules_ &&
           a.extra_ == b.extra_;
  }

 private:
  void validate(const RuleSetLimits& limits) {
    if (rules_.size() > limits.max_rules)
      throw SemanticError("too many rules (limit " + std::to_string(limits.max_rules) + ")",
                          std::to_string(rules_.size()));
    if (space_.size() > limits.max_propositions)
      throw SemanticError("too many propositions", std::to_string(space_.size()));

    auto known = [&](const std::string& n) {
      if (!space_.contains(n)) throw SemanticError("unknown proposition", n);
    };
    auto known_formula = [&](const Formula& f) {
      for (const auto& n : f.mentions()) known(n);
    };

    for (const auto& r : rules_) {
      known(r.consequent);
      known_formula(r.antecedent);
      if (r.antecedent.mentions(r.consequent)) throw DirectedCycle(r.consequent);
    }
    for (const auto& c : extra_) {
      known_formula(c.target);
      if (c.given) known_formula(*c.given);
    }

    std::set<std::string> seen;
    for (const auto& p : leaf_priors_) {
      known(p.name);
      if (!seen.insert(p.name).second) throw SemanticError("duplicate prior", p.name);
      if (is_consequent(p.name)) throw SemanticError("prior declared on a consequent", p.name);
      if (!(p.value >= 0.0 && p.value <= 1.0)) throw SemanticError("prior outside [0, 1]", p.name);
    }
    for (const auto& leaf : leaves())
      if (!seen.count(leaf)) throw SemanticError("leaf has no prior", leaf);

    topological_sort();
  }

  void topological_sort() {
    // 0 = unvisited, 1 = on stack, 2 = done
    std::map<std::string, int, std::less<>> state;
    order_.clear();
    auto visit = [&](auto&& self, const std::string& node) -> void {
      int& s = state[node];
      if (s == 2) return;
      if (s == 1) throw DirectedCycle(node);
      s = 1;
      for (const auto& r : rules_) {
        if (r.consequent != node) continue;
        for (const auto& dep : r.antecedent.mentions()) self(self, dep);
      }
      state[node] = 2;
      if (is_consequent(node)) order_.push_back(node);
    };
    for (const auto& n : space_.names()) visit(visit, n);
  }

  PropositionSpace space_;
  std::vector<LeafPrior> leaf_priors_;
  std::vector<Rule> rules_;
  std::vector<Constraint> extra_;
  std::vector<std::string> order_;
};

namespace detail {

class LineCursor {
 public:
  LineCursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  bool accept(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }
  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }
  bool accept_keyword(std::string_view word) {
    skip_ws();
    if (text_.substr(pos_, word.size()) != word) return false;
    const std::size_t end = pos_ + word.size();
    if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
      return false;
    pos_ = end;
    return true;
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string id(text_.substr(start, pos_ - start));
    if (!Formula::is_identifier(id)) {
      pos_ = start;
      fail("expected identifier");
    }
    return id;
  }
  double number(double lo, double hi) {
    skip_ws();
    const std::size_t start = pos_;
    std::size_t p = pos_;
    if (p < text_.size() && text_[p] == '+') ++p;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + p, text_.data() + text_.size(), v);
    if (ec != std::errc{} || !std::isfinite(v)) fail("expected number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    if (!(v >= lo && v <= hi)) {
      pos_ = start;
      fail(fmt::format("number {} outside [{}, {}]", v, lo, hi));
    }
    return v;
  }
  Formula formula() {
    skip_ws();
    FormulaParser parser(text_.substr(pos_), line_, pos_);
    Formula f = parser.parse_prefix();
    pos_ += parser.position();
    return f;
  }
  Formula formula_exact(std::string_view piece, std::size_t offset) const {
    return FormulaParser(piece, line_, offset).parse_all();
  }
  std::size_t pos() const noexcept { return pos_; }
  void seek(std::size_t p) noexcept { pos_ = p; }
  std::string_view text() const noexcept { return text_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, pos_ + 1); }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline Strength parse_strength(LineCursor& cur) {
  if (cur.accept_keyword("cf")) return Strength::cf(cur.number(-1.0, 1.0));
  if (cur.accept_keyword("prob")) return Strength::prob(cur.number(0.0, 1.0));
  cur.fail("expected 'cf' or 'prob'");
}

// "p(" formula ")" or "p(" formula "|" formula ")". A '|' at parenthesis
// depth zero is the conditioning bar; disjunctions must be parenthesized.
inline Constraint parse_probability_expression(LineCursor& cur) {
  cur.skip_ws();
  if (!cur.accept("p(")) cur.fail("expected 'p('");
  const std::size_t open = cur.pos();
  const auto text = cur.text();
  int depth = 0;
  std::size_t bar = std::string_view::npos, close = std::string_view::npos;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '(') ++depth;
    if (ch == ')') {
      if (depth == 0) {
        close = i;
        break;
      }
      --depth;
    }
    if (ch == '|' && depth == 0) {
      if (bar != std::string_view::npos) {
        cur.seek(i);
        cur.fail("more than one '|' in p(...)");
      }
      bar = i;
    }
  }
  if (close == std::string_view::npos) cur.fail("unterminated p(...)");
  cur.seek(close + 1);
  cur.expect("=");
  const double value = cur.number(0.0, 1.0);
  if (bar == std::string_view::npos) {
    return Constraint::marginal(cur.formula_exact(text.substr(open, close - open), open), value);
  }
  Formula target = cur.formula_exact(text.substr(open, bar - open), open);
  Formula given = cur.formula_exact(text.substr(bar + 1, close - bar - 1), bar + 1);
  return Constraint::conditional(std::move(target), std::move(given), value);
}

inline std::string format_number(double v) { return fmt::format("{}", v); }

inline std::string format_strength(const Strength& s) {
  return (s.form == Strength::Form::CertaintyFactor ? "cf " : "prob ") + format_number(s.value);
}

}  // namespace detail

/// Parses the line-oriented rule-set format. Syntax errors carry line and
/// column; semantic errors name the offending identifier.
inline RuleSet parse_ruleset(std::string_view text, const RuleSetLimits& limits = {}) {
  std::vector<std::string> props;
  std::vector<LeafPrior> priors;
  std::vector<Rule> rules;
  std::vector<Constraint> constraints;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    detail::LineCursor cur(line, line_no);
    if (cur.at_end()) {
      if (end == text.size()) break;
      continue;
    }
    if (cur.accept_keyword("prop")) {
      std::string name = cur.ident();
      if (std::find(props.begin(), props.end(), name) != props.end())
        throw SemanticError("duplicate proposition", name);
      props.push_back(std::move(name));
    } else if (cur.accept_keyword("prior")) {
      std::string name = cur.ident();
      cur.expect("=");
      priors.push_back({std::move(name), cur.number(0.0, 1.0)});
    } else if (cur.accept_keyword("constrain")) {
      constraints.push_back(detail::parse_probability_expression(cur));
    } else if (cur.accept_keyword("rule")) {
      std::string consequent = cur.ident();
      cur.expect("<-");
      Formula antecedent = cur.formula();
      Strength upper = detail::parse_strength(cur);
      std::optional<Strength> lower;
      if (cur.accept_keyword("lower")) lower = detail::parse_strength(cur);
      rules.push_back({std::move(consequent), std::move(antecedent), upper, lower});
    } else {
      cur.fail("expected 'prop', 'prior', 'constrain' or 'rule'");
    }
    if (!cur.at_end()) cur.fail("unexpected trailing text");
    if (end == text.size()) break;
  }

  if (props.empty()) throw SemanticError("rule set declares no propositions", "");
  if (props.size() > limits.max_propositions)
    throw SemanticError("too many propositions", std::to_string(props.size()));
  return RuleSet(PropositionSpace(std::move(props), limits.max_propositions), std::move(priors),
                 std::move(rules), std::move(constraints), limits);
}

inline std::string serialize(const RuleSet& rs) {
  std::ostringstream out;
  for (const auto& n : rs.space().names()) out << "prop " << n << "\n";
  for (const auto& p : rs.leaf_priors()) out << "prior " << p.name << " = " << detail::format_number(p.value) << "\n";
  for (const auto& c : rs.extra_constraints()) {
    out << "constrain p(" << to_string(c.target);
    if (c.given) out << " | " << to_string(*c.given);
    out << ") = " << detail::format_number(c.value) << "\n";
  }
  for (const auto& r : rs.rules()) {
    out << "rule " << r.consequent << " <- " << to_string(r.antecedent) << " " << detail::format_strength(r.upper);
    if (r.lower) out << " lower " << detail::format_strength(*r.lower);
    out << "\n";
  }
  return out.str();
}

/// A constraint whose value follows the consequent's prior through a CF.
struct CfBinding {
  std::size_t constraint_index;
  std::string consequent;
  double cf;
};

/// Constraints for prior fitting. Bound entries hold placeholder values until
/// `fit_prior` resolves them.
struct ConstraintPlan {
  std::vector<Constraint> constraints;
  std::vector<CfBinding> cf_bindings;
};

inline ConstraintPlan compile_constraints(const RuleSet& rs) {
  ConstraintPlan plan;
  for (const auto& p : rs.leaf_priors()) plan.constraints.push_back(Constraint::marginal(Formula::atom(p.name), p.value));
  for (const auto& c : rs.extra_constraints()) plan.constraints.push_back(c);
  auto add = [&](const Rule& r, const Formula& given, const Strength& s) {
    const Formula target = Formula::atom(r.consequent);
    if (s.form == Strength::Form::Probability) {
      plan.constraints.push_back(Constraint::conditional(target, given, s.value));
    } else {
      plan.cf_bindings.push_back({plan.constraints.size(), r.consequent, s.value});
      plan.constraints.push_back(Constraint::conditional(target, given, 0.5));
    }
  };
  for (const auto& r : rs.rules()) {
    add(r, r.antecedent, r.upper);
    if (r.lower) add(r, Formula::negate(r.antecedent), *r.lower);
  }
  return plan;
}

struct OuterLoopOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 100;
};

struct FittedPrior {
  JointDistribution distribution;
  std::vector<Constraint> constraints;  // with CF-form strengths resolved
  FitReport report;
  std::size_t outer_iterations = 0;
};

/// Maximum-entropy prior for a rule set. CF-form strengths are resolved by
/// fixed point: target p(C|ant) = prob_from_cf(s, p(C)), refit, and repeat
/// until every bound consequent's p(C) moves less than the outer tolerance.
inline FittedPrior fit_prior(const RuleSet& rs, const FitOptions& fit = {}, const OuterLoopOptions& outer = {}) {
  ConstraintPlan plan = compile_constraints(rs);
  if (plan.cf_bindings.empty()) {
    auto r = fit_max_entropy_prior(rs.space(), plan.constraints, fit);
    return {std::move(r.distribution), std::move(plan.constraints), r.report, 0};
  }

  std::vector<Constraint> fixed;
  std::set<std::size_t> bound;
  for (const auto& b : plan.cf_bindings) bound.insert(b.constraint_index);
  for (std::size_t i = 0; i < plan.constraints.size(); ++i)
    if (!bound.count(i)) fixed.push_back(plan.constraints[i]);

  std::map<std::string, double> current;
  {
    auto start = fit_max_entropy_prior(rs.space(), fixed, fit);
    for (const auto& b : plan.cf_bindings)
      current[b.consequent] = probability(start.distribution, Formula::atom(b.consequent));
  }

  for (std::size_t it = 1; it <= outer.max_iterations; ++it) {
    for (const auto& b : plan.cf_bindings)
      plan.constraints[b.constraint_index].value = prob_from_cf(CertaintyFactor(b.cf), current[b.consequent]);
    auto r = fit_max_entropy_prior(rs.space(), plan.constraints, fit);
    double moved = 0.0;
    for (auto& [name, p] : current) {
      const double next = probability(r.distribution, Formula::atom(name));
      moved = std::max(moved, std::abs(next - p));
      p = next;
    }
    if (moved < outer.tolerance) return {std::move(r.distribution), std::move(plan.constraints), r.report, it};
  }
  throw OuterLoopDiverged("CF strength resolution did not settle within " +
                          std::to_string(outer.max_iterations) + " outer iterations");
}

}  // namespace uilab
