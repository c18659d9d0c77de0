#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "uilab/error.hpp"
#include "uilab/formula.hpp"
#include "uilab/maxent.hpp"
#include "uilab/rulemodel.hpp"

namespace uilab {

/// Stand-in strengths and priors for the experiment families. Each value can
/// be overridden per call.
struct FamilyParams {
  double upper = 0.8;
  double lower = -0.3;
  double leaf_prior = 0.5;
  double positive_pair = 0.45;  // p(Bi & Bj) for positively correlated antecedents
  double negative_pair2 = 0.05;  // p(B1 & B2) for two negatively correlated antecedents
  double negative_pair3 = 0.2;   // pairwise p(Bi & Bj) among three
  double cnd_ind_lower = -0.8;   // lower strength forced down on the shared-conclusion rules
  // Position of p(A1 & A2) inside its Frechet range [max(0, a1 + a2 - 1), min(a1, a2)].
  double min_overlap = 0.1;
  double max_overlap = 0.9;
  FitOptions fit;
  OuterLoopOptions outer;
};

struct FamilyCase {
  std::string name;
  std::string group;
};

/// Every generated case, grouped into the eight experiment families.
inline const std::vector<FamilyCase>& family_cases() {
  static const std::vector<FamilyCase> cases = {
      {"dpth-2", "depth"},
      {"dpth-1", "depth"},
      {"bsh2-upr", "bushiness"},
      {"bsh2-u&l", "bushiness"},
      {"bsh3-upr", "bushiness"},
      {"bsh3-u&l", "bushiness"},
      {"2cnc-2rls-pos", "shared-antecedent"},
      {"2cnc-2rls-neg", "shared-antecedent"},
      {"1cnc-2rls-pos", "shared-conclusion"},
      {"1cnc-2rls-neg", "shared-conclusion"},
      {"1cnc-2lyrs-pos", "extra-layer"},
      {"1cnc-2lyrs-neg", "extra-layer"},
      {"cnd-ind-2", "conditional-independence"},
      {"cnd-ind-3", "conditional-independence"},
      {"bsh2-upr-pos", "bushiness-correlation"},
      {"bsh2-upr-neg", "bushiness-correlation"},
      {"bsh2-u&l-pos", "bushiness-correlation"},
      {"bsh2-u&l-neg", "bushiness-correlation"},
      {"bsh3-upr-pos", "bushiness-correlation"},
      {"bsh3-upr-neg", "bushiness-correlation"},
      {"bsh3-u&l-pos", "bushiness-correlation"},
      {"bsh3-u&l-neg", "bushiness-correlation"},
      {"2cnc-min-shr-ruls-pos", "extreme-correlation"},
      {"2cnc-min-shr-ruls-neg", "extreme-correlation"},
      {"2cnc-max-shr-ruls-pos", "extreme-correlation"},
      {"2cnc-max-shr-ruls-neg", "extreme-correlation"},
  };
  return cases;
}

/// File-system friendly case name: '&' becomes '_'.
inline std::string family_file_stem(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '&', '_');
  return s;
}

namespace detail {

inline std::string canonical_family(std::string_view name) {
  std::string s(name);
  for (std::size_t i = 0; i + 2 < s.size(); ++i)
    if (s.compare(i, 3, "u_l") == 0) s[i + 1] = '&';
  return s;
}

inline bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }
inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

class FamilyBuilder {
 public:
  explicit FamilyBuilder(const FamilyParams& p) : p_(p) {}

  FamilyBuilder& props(std::initializer_list<const char*> names) {
    for (const char* n : names) props_.emplace_back(n);
    return *this;
  }
  FamilyBuilder& prior(const std::string& name, double v) {
    priors_.push_back({name, v});
    return *this;
  }
  FamilyBuilder& leaves(std::initializer_list<const char*> names) {
    for (const char* n : names) prior(n, p_.leaf_prior);
    return *this;
  }
  FamilyBuilder& rule(const std::string& consequent, Formula antecedent, bool with_lower) {
    Rule r{consequent, std::move(antecedent), Strength::cf(p_.upper), std::nullopt};
    if (with_lower) r.lower = Strength::cf(p_.lower);
    rules_.push_back(std::move(r));
    return *this;
  }
  FamilyBuilder& constrain(Formula f, double v) {
    extra_.push_back(Constraint::marginal(std::move(f), v));
    return *this;
  }
  RuleSet build() const { return RuleSet(PropositionSpace(props_), priors_, rules_, extra_); }

 private:
  FamilyParams p_;
  std::vector<std::string> props_;
  std::vector<LeafPrior> priors_;
  std::vector<Rule> rules_;
  std::vector<Constraint> extra_;
};

inline Formula at(const char* n) { return Formula::atom(n); }

}  // namespace detail

/// Builds one experiment case by name. Accepts '&' or '_' in "u&l".
inline RuleSet generate_family(std::string_view requested, const FamilyParams& p = {}) {
  using detail::at;
  const std::string name = detail::canonical_family(requested);
  const auto& cases = family_cases();
  if (std::none_of(cases.begin(), cases.end(), [&](const FamilyCase& c) { return c.name == name; }))
    throw InvalidArgument("unknown family '" + std::string(requested) + "'");
  for (double v : {p.leaf_prior, p.positive_pair, p.negative_pair2, p.negative_pair3, p.min_overlap, p.max_overlap})
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("family probabilities must lie in [0, 1]");
  for (double v : {p.upper, p.lower, p.cnd_ind_lower})
    if (!(v >= -1.0 && v <= 1.0)) throw InvalidArgument("family strengths must lie in [-1, 1]");

  detail::FamilyBuilder b(p);
  const bool lower = name.find("u&l") != std::string::npos;

  if (name == "dpth-2") {
    return b.props({"A", "B1", "B2", "C1", "C2", "C3", "C4"})
        .leaves({"C1", "C2", "C3", "C4"})
        .rule("A", at("B1") & at("B2"), false)
        .rule("B1", at("C1") & at("C2"), false)
        .rule("B2", at("C3") & at("C4"), false)
        .build();
  }
  if (name == "dpth-1") {
    const auto deep = fit_prior(generate_family("dpth-2", p), p.fit, p.outer);
    return b.props({"A", "B1", "B2"})
        .prior("B1", probability(deep.distribution, at("B1")))
        .prior("B2", probability(deep.distribution, at("B2")))
        .rule("A", at("B1") & at("B2"), false)
        .build();
  }
  if (detail::starts_with(name, "bsh2")) {
    b.props({"A", "B1", "B2"}).leaves({"B1", "B2"}).rule("A", at("B1") & at("B2"), lower);
    if (detail::ends_with(name, "-pos")) b.constrain(at("B1") & at("B2"), p.positive_pair);
    if (detail::ends_with(name, "-neg")) b.constrain(at("B1") & at("B2"), p.negative_pair2);
    return b.build();
  }
  if (detail::starts_with(name, "bsh3")) {
    b.props({"A", "B1", "B2", "B3"}).leaves({"B1", "B2", "B3"}).rule("A", at("B1") & at("B2") & at("B3"), lower);
    const bool pos = detail::ends_with(name, "-pos"), neg = detail::ends_with(name, "-neg");
    if (pos || neg) {
      const double v = pos ? p.positive_pair : p.negative_pair3;
      b.constrain(at("B1") & at("B2"), v).constrain(at("B1") & at("B3"), v).constrain(at("B2") & at("B3"), v);
    }
    return b.build();
  }

  const bool neg = detail::ends_with(name, "-neg");
  const Formula shared = neg ? Formula::negate(at("B2")) : at("B2");
  if (detail::starts_with(name, "2cnc-2rls") || detail::starts_with(name, "2cnc-m")) {
    b.props({"A1", "A2", "B1", "B2", "B3"})
        .leaves({"B1", "B2", "B3"})
        .rule("A1", at("B1") & at("B2"), false)
        .rule("A2", shared & at("B3"), false);
    if (detail::starts_with(name, "2cnc-2rls")) return b.build();
    const auto free = fit_prior(b.build(), p.fit, p.outer);
    const double a1 = probability(free.distribution, at("A1"));
    const double a2 = probability(free.distribution, at("A2"));
    const double lo = std::max(0.0, a1 + a2 - 1.0), hi = std::min(a1, a2);
    const double k = detail::starts_with(name, "2cnc-min") ? p.min_overlap : p.max_overlap;
    return b.constrain(at("A1") & at("A2"), lo + k * (hi - lo)).build();
  }
  if (detail::starts_with(name, "1cnc-2rls")) {
    return b.props({"A", "B1", "B2", "B3"})
        .leaves({"B1", "B2", "B3"})
        .rule("A", at("B1") & at("B2"), false)
        .rule("A", shared & at("B3"), false)
        .build();
  }
  if (detail::starts_with(name, "1cnc-2lyrs")) {
    return b.props({"D", "A1", "A2", "B1", "B2", "B3"})
        .leaves({"B1", "B2", "B3"})
        .rule("A1", at("B1") & at("B2"), false)
        .rule("A2", shared & at("B3"), false)
        .rule("D", at("A1") & at("A2"), false)
        .build();
  }
  FamilyParams forced = p;
  forced.lower = p.cnd_ind_lower;
  detail::FamilyBuilder c(forced);
  if (name == "cnd-ind-2") {
    return c.props({"A", "B1", "B2"}).leaves({"B1", "B2"}).rule("A", at("B1"), true).rule("A", at("B2"), true).build();
  }
  // cnd-ind-3
  return c.props({"A", "B1", "B2", "B3"})
      .leaves({"B1", "B2", "B3"})
      .rule("A", at("B1"), true)
      .rule("A", at("B2"), true)
      .rule("A", at("B3"), true)
      .build();
}

}  // namespace uilab
