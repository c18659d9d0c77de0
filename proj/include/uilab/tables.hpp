#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uilab/harness.hpp"
#include "uilab/report.hpp"

namespace uilab {

/// The CF grid {-1, -0.75, ..., 1} used by the diagnostics.
inline std::vector<CfPair> cf_grid() {
  std::vector<CfPair> out;
  for (int i = -4; i <= 4; ++i)
    for (int j = -4; j <= 4; ++j) out.push_back({i * 0.25, j * 0.25});
  return out;
}

inline PairPrior named_pair_prior(std::string_view name) {
  if (name == "negative") return PairPrior::negative_correlation();
  if (name == "independent" || name == "flat") return PairPrior::independent();
  if (name == "positive") return PairPrior::positive_correlation();
  throw InvalidArgument("unknown prior '" + std::string(name) + "' (negative, independent, positive)");
}

struct BiasTableDef {
  std::string id;
  std::string title;
  PairPrior prior;
  BiasMode mode;
  std::vector<CfPair> pairs;
};

inline const std::vector<BiasTableDef>& bias_table_defs() {
  static const std::vector<BiasTableDef> defs = {
      {"3-1", "Negative correlation: MYC vs MXE and", PairPrior::negative_correlation(), BiasMode::And,
       {{0.8, 0.8}, {-0.8, 0.8}, {-0.8, -0.8}}},
      {"3-2", "Positive correlation: MYC vs MXE and", PairPrior::positive_correlation(), BiasMode::And,
       {{0.8, 0.8}, {0.8, -0.8}, {-0.8, -0.8}}},
      {"3-3", "Independence: MYC or, rule-or, MXE or", PairPrior::independent(), BiasMode::Or,
       {{0.8, 0.8}, {0.8, -0.8}, {0.4, 0.4}, {-0.8, -0.8}}},
  };
  return defs;
}

namespace detail {
inline std::string cf_cell(double v, int digits) {
  if (std::abs(v) < 0.5 * std::pow(10.0, -digits)) return fmt::format("{:.{}f}", 0.0, digits);
  return fmt::format("{:+.{}f}", v, digits);
}
}  // namespace detail

inline Table named_table(std::string_view id, const FitOptions& fit = {}) {
  if (id == "3-4") {
    const std::vector<PairPrior> priors = {PairPrior::negative_correlation(), PairPrior::independent(),
                                           PairPrior::positive_correlation()};
    const std::vector<CfPair> pairs = {{-0.8, -0.8}};
    Table t{"Rule-or against MXE or under three correlations",
            {"CF(A)", "CF(B)", "rule-or", "MXE_minus", "MXE_indep", "MXE_plus"},
            {}};
    for (const auto& r : rule_or_correlation_table(priors, pairs, fit)) {
      std::vector<std::string> row = {detail::cf_cell(r.cf1, 2), detail::cf_cell(r.cf2, 2),
                                      detail::cf_cell(r.cf_rule_or, 4)};
      for (double v : r.cf_mxe) row.push_back(detail::cf_cell(v, 4));
      t.rows.push_back(std::move(row));
    }
    return t;
  }
  for (const auto& def : bias_table_defs()) {
    if (def.id != id) continue;
    const auto rows = bias_table(def.prior, def.pairs, def.mode, fit);
    Table t{def.title, {}, {}};
    if (def.mode == BiasMode::And) {
      t.columns = {"CF(A1)", "CF(A2)", "CF_myc(A1&A2)", "CF_mxe(A1&A2)", "p_myc(A1&A2)", "p_mxe(A1&A2)"};
      for (const auto& r : rows)
        t.rows.push_back({detail::cf_cell(r.cf1, 2), detail::cf_cell(r.cf2, 2), detail::cf_cell(r.cf_myc, 4),
                          detail::cf_cell(r.cf_mxe, 4), fmt::format("{:.6f}", r.p_myc),
                          fmt::format("{:.6f}", r.p_mxe)});
    } else {
      t.columns = {"CF(A1)", "CF(A2)", "CF_myc-or", "CF_rule-or", "CF_mxe-or"};
      for (const auto& r : rows)
        t.rows.push_back({detail::cf_cell(r.cf1, 2), detail::cf_cell(r.cf2, 2), detail::cf_cell(r.cf_myc, 4),
                          detail::cf_cell(r.cf_rule_or, 4), detail::cf_cell(r.cf_mxe, 4)});
    }
    return t;
  }
  throw InvalidArgument("unknown table '" + std::string(id) + "' (3-1, 3-2, 3-3, 3-4)");
}

inline Table demorgan_table(const PairPrior& prior, const FitOptions& fit = {}) {
  const auto grid = cf_grid();
  const auto rule = demorgan_audit(prior, grid, DisjunctionRoute::RuleOr, fit);
  const auto mxe = demorgan_audit(prior, grid, DisjunctionRoute::Mxe, fit);
  Table t{fmt::format("DeMorgan audit on the {} prior (max rule-or {:.6f}, max MXE {:.3e}, skipped {})", prior.name,
                      rule.max_discrepancy, mxe.max_discrepancy, rule.skipped),
          {"CF(A)", "CF(B)", "rule-or direct", "rule-or dual", "rule-or gap", "MXE gap"},
          {}};
  std::size_t k = 0;
  for (const auto& r : rule.rows) {
    while (k < mxe.rows.size() && (mxe.rows[k].cf1 != r.cf1 || mxe.rows[k].cf2 != r.cf2)) ++k;
    const double mgap = k < mxe.rows.size() ? mxe.rows[k].discrepancy : 0.0;
    t.rows.push_back({detail::cf_cell(r.cf1, 2), detail::cf_cell(r.cf2, 2), fmt::format("{:.6f}", r.p_direct),
                      fmt::format("{:.6f}", r.p_dual), fmt::format("{:.6f}", r.discrepancy),
                      fmt::format("{:.3e}", mgap)});
  }
  return t;
}

inline Table one_datum_table(const PairPrior& prior, BiasMode mode, const FitOptions& fit = {}) {
  Table t{fmt::format("One-datum equivalence, {} mode, {} prior", mode == BiasMode::And ? "and" : "or", prior.name),
          {"CF(A1)", "CF(A2)", "branch", "p_myc", "p_reference", "gap", "p_mxe_both"},
          {}};
  for (const auto& pair : cf_grid()) {
    const auto r = one_datum_diagnostic(prior, pair, mode, fit);
    t.rows.push_back({detail::cf_cell(pair.first, 2), detail::cf_cell(pair.second, 2), std::string(to_string(r.branch)),
                      fmt::format("{:.9f}", r.p_myc), fmt::format("{:.9f}", r.p_reference),
                      fmt::format("{:.2e}", r.discrepancy), fmt::format("{:.9f}", r.p_mxe_full)});
  }
  return t;
}

inline Table rule_or_check_table(std::size_t samples, std::uint64_t seed) {
  const auto r = rule_or_independence_check(samples, seed);
  return {"Rule-or as independence",
          {"samples", "max_identity_error", "negative_counterexamples", "min_negative_gap", "passed"},
          {{std::to_string(r.samples), fmt::format("{:.3e}", r.max_identity_error),
            std::to_string(r.negative_counterexamples), fmt::format("{:.6g}", r.min_negative_gap),
            r.passed ? "true" : "false"}}};
}

}  // namespace uilab
