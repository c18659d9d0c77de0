#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uilab/calculi.hpp"
#include "uilab/error.hpp"
#include "uilab/formula.hpp"
#include "uilab/joint.hpp"
#include "uilab/rulemodel.hpp"

namespace uilab {

using PosteriorMap = std::map<std::string, double, std::less<>>;

struct EvaluateOptions {
  /// TSM normally mirrors the upper strength on the negative side unless the
  /// rule declares a lower strength. When set, every rule's lower strength is
  /// read off the prior instead.
  bool tsm_lower_from_prior = false;
};

/// Rule strengths and CI likelihoods read off a fitted prior. Built once per
/// (rule set, prior) and reused for every trial.
class InferenceModel {
 public:
  struct RuleStrengths {
    Formula antecedent;
    CertaintyFactor upper;                         // cf(p0(C|ant), p0(C))
    std::optional<CertaintyFactor> declared_lower;  // set when the rule has a lower strength
    std::optional<CertaintyFactor> prior_lower;     // cf(p0(C|!ant), p0(C)) when p0(!ant) > 0
  };

  struct Node {
    std::string name;
    double prior;
    std::vector<RuleStrengths> rules;
    CIParameters ci;
    std::vector<Formula> ci_terms;  // parallel to ci.factors
  };

  static InferenceModel extract(const RuleSet& rs, const JointDistribution& prior) {
    InferenceModel m;
    for (const auto& leaf : rs.leaves()) m.leaf_priors_[leaf] = rs.leaf_prior(leaf);
    for (const auto& name : rs.consequents()) {
      const Formula c = Formula::atom(name);
      Node node{name, probability(prior, c), {}, {}, {}};
      node.ci.prior = node.prior;
      for (const Rule* r : rs.rules_for(name)) {
        const Formula& ant = r->antecedent;
        RuleStrengths s{ant, cf_from_probs(conditional_probability(prior, c, ant), node.prior), std::nullopt,
                        std::nullopt};
        const Formula not_ant = Formula::negate(ant);
        if (probability(prior, not_ant) > 0.0)
          s.prior_lower = cf_from_probs(conditional_probability(prior, c, not_ant), node.prior);
        if (r->lower) {
          if (!s.prior_lower) throw ZeroConditioningEvent(to_string(not_ant));
          s.declared_lower = s.prior_lower;
        }
        node.rules.push_back(std::move(s));

        // Conjunctions contribute one odds factor per conjunct; anything
        // else is a single compound term.
        std::vector<Formula> terms;
        if (ant.kind() == Formula::Kind::And) {
          terms.assign(ant.children().begin(), ant.children().end());
        } else {
          terms.push_back(ant);
        }
        for (auto& t : terms) {
          node.ci.factors.push_back({to_string(t), conditional_probability(prior, t, c),
                                     conditional_probability(prior, t, Formula::negate(c))});
          node.ci_terms.push_back(std::move(t));
        }
      }
      m.nodes_.push_back(std::move(node));
    }
    return m;
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::map<std::string, double, std::less<>>& leaf_priors() const noexcept { return leaf_priors_; }

  const Node& node(std::string_view name) const {
    for (const auto& n : nodes_)
      if (n.name == name) return n;
    throw UnknownProposition(std::string(name));
  }

 private:
  std::vector<Node> nodes_;
  std::map<std::string, double, std::less<>> leaf_priors_;
};

namespace detail {

inline CertaintyFactor formula_cf(const Formula& f, const std::map<std::string, CertaintyFactor, std::less<>>& cfs) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      auto it = cfs.find(f.name());
      if (it == cfs.end()) throw UnboundLeaf(f.name());
      return it->second;
    }
    case Formula::Kind::Not:
      return cf_not(formula_cf(f.child(), cfs));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<CertaintyFactor> parts;
      for (const auto& c : f.children()) parts.push_back(formula_cf(c, cfs));
      return f.kind() == Formula::Kind::And ? cf_and(parts) : cf_or(parts);
    }
  }
  return CertaintyFactor(0.0);
}

// Posterior of a CI term. Literals are read directly; compound terms combine
// their parts as if independent.
inline double term_posterior(const Formula& f, const PosteriorMap& posteriors) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      auto it = posteriors.find(f.name());
      if (it == posteriors.end()) throw UnboundLeaf(f.name());
      return it->second;
    }
    case Formula::Kind::Not:
      return 1.0 - term_posterior(f.child(), posteriors);
    case Formula::Kind::And: {
      double p = 1.0;
      for (const auto& c : f.children()) p *= term_posterior(c, posteriors);
      return p;
    }
    case Formula::Kind::Or: {
      double q = 1.0;
      for (const auto& c : f.children()) q *= 1.0 - term_posterior(c, posteriors);
      return 1.0 - q;
    }
  }
  return 0.0;
}

inline PosteriorMap evaluate_cf(UISKind uis, const InferenceModel& model, const PosteriorMap& leaf_posteriors,
                                const EvaluateOptions& options) {
  std::map<std::string, CertaintyFactor, std::less<>> cfs;
  for (const auto& [leaf, prior] : model.leaf_priors()) {
    auto it = leaf_posteriors.find(leaf);
    if (it == leaf_posteriors.end()) throw UnboundLeaf(leaf);
    cfs[leaf] = cf_from_probs(it->second, prior);
  }
  PosteriorMap out;
  for (const auto& node : model.nodes()) {
    std::optional<CertaintyFactor> acc;
    for (const auto& r : node.rules) {
      const CertaintyFactor ant = formula_cf(r.antecedent, cfs);
      CertaintyFactor result;
      if (uis == UISKind::MYC) {
        result = myc_modus_ponens(r.upper, ant);
      } else {
        const auto lower = options.tsm_lower_from_prior ? r.prior_lower : r.declared_lower;
        result = tsm_modus_ponens(r.upper, lower, ant);
      }
      acc = acc ? combine_parallel(*acc, result) : result;
    }
    const CertaintyFactor cf = acc.value_or(CertaintyFactor(0.0));
    cfs[node.name] = cf;
    out[node.name] = prob_from_cf(cf, node.prior);
  }
  return out;
}

inline PosteriorMap evaluate_ci(const InferenceModel& model, const PosteriorMap& leaf_posteriors) {
  PosteriorMap known;
  for (const auto& [leaf, prior] : model.leaf_priors()) {
    auto it = leaf_posteriors.find(leaf);
    if (it == leaf_posteriors.end()) throw UnboundLeaf(leaf);
    known[leaf] = it->second;
  }
  PosteriorMap out;
  for (const auto& node : model.nodes()) {
    PosteriorMap terms;
    for (std::size_t i = 0; i < node.ci_terms.size(); ++i)
      terms[node.ci.factors[i].term] = term_posterior(node.ci_terms[i], known);
    const double p = ci_update(node.ci, terms);
    known[node.name] = p;
    out[node.name] = p;
  }
  return out;
}

}  // namespace detail

/// Propagates leaf posteriors up the rule tree with one inference system and
/// returns the posterior of every consequent.
inline PosteriorMap evaluate(UISKind uis, const InferenceModel& model, const PosteriorMap& leaf_posteriors,
                             const EvaluateOptions& options = {}) {
  if (uis == UISKind::CI) return detail::evaluate_ci(model, leaf_posteriors);
  return detail::evaluate_cf(uis, model, leaf_posteriors, options);
}

inline PosteriorMap evaluate(UISKind uis, const RuleSet& rs, const JointDistribution& prior,
                             const PosteriorMap& leaf_posteriors, const EvaluateOptions& options = {}) {
  return evaluate(uis, InferenceModel::extract(rs, prior), leaf_posteriors, options);
}

/// CF of an antecedent expression under MYC's and/or/not.
inline CertaintyFactor antecedent_cf(const Formula& f, const std::map<std::string, CertaintyFactor, std::less<>>& cfs) {
  return detail::formula_cf(f, cfs);
}

}  // namespace uilab
