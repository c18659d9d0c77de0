#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "uilab/calculi.hpp"
#include "uilab/error.hpp"
#include "uilab/evaluate.hpp"
#include "uilab/formula.hpp"
#include "uilab/joint.hpp"
#include "uilab/maxent.hpp"
#include "uilab/rulemodel.hpp"

namespace uilab {

// ---------------------------------------------------------------------------
// Performance metric
// ---------------------------------------------------------------------------

/// Expected squared error of a CF picked uniformly from [-1, 1] and converted
/// against `p0`, measured from `p_m1`.
inline double expected_sq_error(double p_m1, double p0) {
  detail::check_probability(p_m1, "p_m1");
  detail::check_probability(p0, "p0");
  return (2.0 * p0 * p0 - 6.0 * p_m1 * p0 + 6.0 * p_m1 * p_m1 + 1.0 + p0 - 3.0 * p_m1) / 6.0;
}

/// Normalized score: 1 at zero error, 0 at the random-guess expected squared
/// error, -1 at the worst possible squared error. Piecewise linear in the
/// squared error between those anchors.
inline double zeta(double p_u1, double p_m1, double p0) {
  detail::check_probability(p_u1, "p_u1");
  const double mu = expected_sq_error(p_m1, p0);
  const double err = (p_u1 - p_m1) * (p_u1 - p_m1);
  const double worst = std::max(p_m1, 1.0 - p_m1) * std::max(p_m1, 1.0 - p_m1);
  if (!(mu > 0.0) || !(worst > mu)) {
    if (err == 0.0) return 1.0;
    throw DegenerateMetric("zeta is undefined when the expected error is 0 or not below the worst error");
  }
  if (err <= mu) return 1.0 - err / mu;
  return std::max(-1.0, -(err - mu) / (worst - mu));
}

// ---------------------------------------------------------------------------
// Input grid
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxGridLeaves = 8;

struct GridOptions {
  std::vector<double> levels{0.05, 0.35, 0.65, 0.95};
  double jitter = 0.01;
};

namespace detail {
inline double unit_interval(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }
}  // namespace detail

/// Leaf value for one (trial, leaf) cell: the level picked by the trial's
/// mixed-radix digit, jittered uniformly within +/- jitter. Depends only on
/// (seed, trial, leaf).
inline double grid_value(std::uint64_t seed, std::size_t trial, std::size_t leaf, const GridOptions& opts) {
  const std::size_t radix = opts.levels.size();
  std::size_t digit = trial;
  for (std::size_t i = 0; i < leaf; ++i) digit /= radix;
  const double base = opts.levels[digit % radix];
  if (opts.jitter == 0.0) return base;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(leaf)};
  std::mt19937_64 engine(seq);
  const double u = detail::unit_interval(engine());
  return std::clamp(base + opts.jitter * (2.0 * u - 1.0), 0.0, 1.0);
}

/// The full levels^leaves cross product of leaf assignments, trial-major.
inline std::vector<std::vector<double>> input_grid(std::size_t leaves, std::uint64_t seed,
                                                   const GridOptions& opts = {}) {
  if (leaves == 0) throw InvalidArgument("input grid needs at least one leaf");
  if (leaves > kMaxGridLeaves) throw InvalidArgument("too many leaves for an input grid (max 8)");
  if (opts.levels.empty()) throw InvalidArgument("input grid needs at least one level");
  for (double l : opts.levels) detail::check_probability(l, "grid level");
  if (!(opts.jitter >= 0.0)) throw InvalidArgument("jitter must be >= 0");
  std::size_t trials = 1;
  for (std::size_t i = 0; i < leaves; ++i) trials *= opts.levels.size();
  std::vector<std::vector<double>> grid(trials, std::vector<double>(leaves));
  for (std::size_t t = 0; t < trials; ++t)
    for (std::size_t l = 0; l < leaves; ++l) grid[t][l] = grid_value(seed, t, l, opts);
  return grid;
}

// ---------------------------------------------------------------------------
// Regression of UIS shift on MXE shift
// ---------------------------------------------------------------------------

struct Regression {
  double slope;
  double intercept;
  double r_squared;
};

/// Ordinary least squares of y on x.
inline Regression least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("regression inputs differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw DegenerateRegression("regression needs at least 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scale += x[i] * x[i];
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 1e-24 * scale)) throw DegenerateRegression("MXE shift has zero variance");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    ss_res += r * r;
  }
  double r2;
  if (syy > 0.0) {
    r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  } else {
    r2 = ss_res == 0.0 ? 1.0 : 0.0;
  }
  return {slope, intercept, r2};
}

struct ConsequentResult {
  std::string name;
  double p0;
  double p_u1;
  double p_m1;
  double delta_u;
  double delta_m;
  double zeta;
};

struct TrialResult {
  std::size_t index = 0;
  std::vector<double> leaf_values;  // in RuleSet::leaves() order
  bool mixed_evidence = false;
  std::vector<ConsequentResult> consequents;
  double zeta = 0.0;  // unweighted mean over consequents
  std::optional<std::string> error;
};

/// Regresses delta_u on delta_m over every (trial, consequent) pair.
inline Regression shift_regression(std::span<const TrialResult> trials) {
  std::vector<double> dm, du;
  for (const auto& t : trials) {
    if (t.error) continue;
    for (const auto& c : t.consequents) {
      dm.push_back(c.delta_m);
      du.push_back(c.delta_u);
    }
  }
  return least_squares(dm, du);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepOptions {
  GridOptions grid;
  std::size_t threads = 1;
  FitOptions fit;
  OuterLoopOptions outer;
  EvaluateOptions evaluate;
  std::string case_name;
};

struct SweepReport {
  std::string case_name;
  UISKind uis;
  std::size_t trial_count = 0;
  std::size_t failed_trials = 0;
  double mean_zeta = 0.0;
  std::optional<double> mean_zeta_mixed;  // over trials with mixed-sign evidence
  std::optional<Regression> regression;
  std::uint64_t seed = 0;
};

struct SweepOutcome {
  std::vector<std::string> leaves;
  std::vector<std::string> queries;
  std::vector<SweepReport> reports;               // one per requested UIS
  std::vector<std::vector<TrialResult>> trials;  // [uis][trial]
};

/// Runs every grid trial through MXE and each requested UIS against a
/// fitted prior. Trials are independent; results are reduced in trial order
/// so any thread count gives identical output.
inline SweepOutcome run_sweep(const RuleSet& rs, const JointDistribution& prior, std::span<const UISKind> systems,
                              std::uint64_t seed, const SweepOptions& opts = {}) {
  SweepOutcome out;
  out.leaves = rs.leaves();
  out.queries = rs.query_nodes();
  if (out.queries.empty()) throw InvalidArgument("rule set has no consequents to score");
  const auto grid = input_grid(out.leaves.size(), seed, opts.grid);
  const InferenceModel model = InferenceModel::extract(rs, prior);

  std::vector<double> query_priors;
  for (const auto& q : out.queries) query_priors.push_back(probability(prior, Formula::atom(q)));
  std::vector<double> leaf_priors;
  for (const auto& l : out.leaves) leaf_priors.push_back(rs.leaf_prior(l));

  out.trials.assign(systems.size(), std::vector<TrialResult>(grid.size()));

  auto run_trial = [&](std::size_t t) {
    const auto& values = grid[t];
    bool up = false, down = false;
    PosteriorMap leaf_post;
    std::vector<Constraint> evidence;
    for (std::size_t l = 0; l < out.leaves.size(); ++l) {
      leaf_post[out.leaves[l]] = values[l];
      evidence.push_back(Constraint::marginal(Formula::atom(out.leaves[l]), values[l]));
      up = up || values[l] > leaf_priors[l];
      down = down || values[l] < leaf_priors[l];
    }
    std::vector<double> mxe;
    std::optional<std::string> mxe_error;
    try {
      const auto post = mxe_update(prior, evidence, opts.fit).distribution;
      for (const auto& q : out.queries) mxe.push_back(probability(post, Formula::atom(q)));
    } catch (const Error& e) {
      mxe_error = std::string("MXE update failed: ") + e.what();
    }
    for (std::size_t u = 0; u < systems.size(); ++u) {
      TrialResult& tr = out.trials[u][t];
      tr.index = t;
      tr.leaf_values = values;
      tr.mixed_evidence = up && down;
      if (mxe_error) {
        tr.error = mxe_error;
        continue;
      }
      try {
        const auto uis = evaluate(systems[u], model, leaf_post, opts.evaluate);
        double total = 0.0;
        for (std::size_t q = 0; q < out.queries.size(); ++q) {
          ConsequentResult c;
          c.name = out.queries[q];
          c.p0 = query_priors[q];
          c.p_m1 = mxe[q];
          c.p_u1 = uis.at(c.name);
          c.delta_u = c.p_u1 - c.p0;
          c.delta_m = c.p_m1 - c.p0;
          c.zeta = zeta(c.p_u1, c.p_m1, c.p0);
          total += c.zeta;
          tr.consequents.push_back(std::move(c));
        }
        tr.zeta = total / static_cast<double>(out.queries.size());
      } catch (const Error& e) {
        tr.consequents.clear();
        tr.error = std::string(to_string(systems[u])) + " evaluation failed: " + e.what();
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, grid.size()));
  if (threads == 1) {
    for (std::size_t t = 0; t < grid.size(); ++t) run_trial(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i)
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < grid.size(); t = next++) run_trial(t);
      });
    for (auto& th : pool) th.join();
  }

  for (std::size_t u = 0; u < systems.size(); ++u) {
    SweepReport rep;
    rep.case_name = opts.case_name;
    rep.uis = systems[u];
    rep.trial_count = grid.size();
    rep.seed = seed;
    double total = 0.0, mixed_total = 0.0;
    std::size_t ok = 0, mixed = 0;
    for (const auto& tr : out.trials[u]) {
      if (tr.error) {
        ++rep.failed_trials;
        continue;
      }
      total += tr.zeta;
      ++ok;
      if (tr.mixed_evidence) {
        mixed_total += tr.zeta;
        ++mixed;
      }
    }
    rep.mean_zeta = ok ? total / static_cast<double>(ok) : 0.0;
    if (mixed) rep.mean_zeta_mixed = mixed_total / static_cast<double>(mixed);
    try {
      rep.regression = shift_regression(out.trials[u]);
    } catch (const DegenerateRegression&) {
    }
    out.reports.push_back(std::move(rep));
  }
  return out;
}

inline SweepOutcome run_sweep(const RuleSet& rs, std::span<const UISKind> systems, std::uint64_t seed,
                              const SweepOptions& opts = {}) {
  const auto fitted = fit_prior(rs, opts.fit, opts.outer);
  return run_sweep(rs, fitted.distribution, systems, seed, opts);
}

// ---------------------------------------------------------------------------
// Two-proposition bias analyses
// ---------------------------------------------------------------------------

/// Prior over {A1, A2} given by both marginals and the conjunction.
struct PairPrior {
  std::string name;
  double p_a1;
  double p_a2;
  double p_both;

  static PairPrior negative_correlation() { return {"negative", 0.5, 0.5, 1.0 / 9.0}; }
  static PairPrior independent() { return {"independent", 0.5, 0.5, 0.25}; }
  static PairPrior positive_correlation() { return {"positive", 0.5, 0.5, 0.389}; }

  JointDistribution fit() const {
    const PropositionSpace space({"A1", "A2"});
    const Formula a1 = Formula::atom("A1"), a2 = Formula::atom("A2");
    return fit_max_entropy_prior(
               space, {Constraint::marginal(a1, p_a1), Constraint::marginal(a2, p_a2),
                       Constraint::marginal(a1 & a2, p_both)})
        .distribution;
  }
};

struct CfPair {
  double first;
  double second;
};

enum class BiasMode { And, Or, RuleOr };

struct BiasRow {
  double cf1;
  double cf2;
  double cf_myc;      // min (and), max (or), or rule-or
  double cf_rule_or;  // parallel combination, for comparison in every mode
  double cf_mxe;
  double p_myc;
  double p_mxe;
};

namespace detail {

inline Formula a1() { return Formula::atom("A1"); }
inline Formula a2() { return Formula::atom("A2"); }

// MXE posterior after both CFs are turned into marginal targets.
inline JointDistribution mxe_from_cfs(const JointDistribution& prior, double cf1, double cf2,
                                      const FitOptions& fit = {}) {
  const double p1 = prob_from_cf(CertaintyFactor(cf1), probability(prior, a1()));
  const double p2 = prob_from_cf(CertaintyFactor(cf2), probability(prior, a2()));
  return mxe_update(prior, {Constraint::marginal(a1(), p1), Constraint::marginal(a2(), p2)}, fit).distribution;
}

}  // namespace detail

inline std::vector<BiasRow> bias_table(const PairPrior& pair_prior, std::span<const CfPair> pairs, BiasMode mode,
                                       const FitOptions& fit = {}) {
  const JointDistribution prior = pair_prior.fit();
  const Formula event = mode == BiasMode::And ? detail::a1() & detail::a2() : detail::a1() | detail::a2();
  const double p0 = probability(prior, event);
  std::vector<BiasRow> rows;
  for (const auto& pair : pairs) {
    const CertaintyFactor x(pair.first), y(pair.second);
    BiasRow row{};
    row.cf1 = pair.first;
    row.cf2 = pair.second;
    row.cf_rule_or = combine_parallel(x, y).value();
    switch (mode) {
      case BiasMode::And: row.cf_myc = cf_and({x, y}).value(); break;
      case BiasMode::Or: row.cf_myc = cf_or({x, y}).value(); break;
      case BiasMode::RuleOr: row.cf_myc = row.cf_rule_or; break;
    }
    row.p_myc = prob_from_cf(CertaintyFactor(row.cf_myc), p0);
    row.p_mxe = probability(detail::mxe_from_cfs(prior, pair.first, pair.second, fit), event);
    row.cf_mxe = cf_from_probs(row.p_mxe, p0).value();
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<BiasRow> bias_table(const PairPrior& pair_prior, std::initializer_list<CfPair> pairs, BiasMode mode,
                                       const FitOptions& fit = {}) {
  return bias_table(pair_prior, std::span<const CfPair>(pairs.begin(), pairs.size()), mode, fit);
}

/// Rule-or against MXE disjunctions under several prior correlations.
struct CorrelationRow {
  double cf1;
  double cf2;
  double cf_rule_or;
  std::vector<double> cf_mxe;  // one per prior, in the order given
};

inline std::vector<CorrelationRow> rule_or_correlation_table(std::span<const PairPrior> priors,
                                                             std::span<const CfPair> pairs,
                                                             const FitOptions& fit = {}) {
  std::vector<CorrelationRow> rows;
  for (const auto& pair : pairs) {
    rows.push_back({pair.first, pair.second, combine_parallel(CertaintyFactor(pair.first), CertaintyFactor(pair.second)).value(), {}});
  }
  for (const auto& pair_prior : priors) {
    const auto table = bias_table(pair_prior, pairs, BiasMode::Or, fit);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].cf_mxe.push_back(table[i].cf_mxe);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// DeMorgan audit
// ---------------------------------------------------------------------------

enum class DisjunctionRoute { RuleOr, Mxe };

struct DeMorganRow {
  double cf1;
  double cf2;
  double p_direct;  // p1(A1 or A2)
  double p_dual;    // 1 - p1(!A1 & !A2), computed on the negated propositions
  double discrepancy;
};

struct DeMorganReport {
  std::vector<DeMorganRow> rows;
  std::size_t skipped = 0;  // pairs where rule-or is undefined (+1 with -1)
  double max_discrepancy = 0.0;
};

/// Computes belief in A1 or A2 directly and through !(!A1 & !A2).
///
/// The dual route renames the propositions: it combines cf(!A1) = -cf1 and
/// cf(!A2) = -cf2 into belief in (!A1 or !A2), recovers !A1 & !A2 by
/// inclusion-exclusion, and complements. Probability calculus makes both
/// routes agree; the rule-or calculus does not.
inline DeMorganReport demorgan_audit(const PairPrior& pair_prior, std::span<const CfPair> pairs, DisjunctionRoute route,
                                     const FitOptions& fit = {}) {
  const JointDistribution prior = pair_prior.fit();
  const Formula x = detail::a1(), y = detail::a2();
  const Formula nx = Formula::negate(x), ny = Formula::negate(y);
  const double p0_or = probability(prior, x | y);
  const double p0_nx = probability(prior, nx), p0_ny = probability(prior, ny);
  const double p0_nor = probability(prior, nx | ny);

  DeMorganReport rep;
  for (const auto& pair : pairs) {
    const CertaintyFactor a(pair.first), b(pair.second);
    DeMorganRow row{pair.first, pair.second, 0.0, 0.0, 0.0};
    if (route == DisjunctionRoute::RuleOr) {
      if (std::min(std::abs(pair.first), std::abs(pair.second)) >= 1.0 && pair.first * pair.second < 0.0) {
        ++rep.skipped;
        continue;
      }
      row.p_direct = prob_from_cf(combine_parallel(a, b), p0_or);
      const double q_nx = prob_from_cf(-a, p0_nx);
      const double q_ny = prob_from_cf(-b, p0_ny);
      const double q_nor = prob_from_cf(combine_parallel(-a, -b), p0_nor);
      row.p_dual = 1.0 - (q_nx + q_ny - q_nor);
    } else {
      const double pa = prob_from_cf(a, probability(prior, x));
      const double pb = prob_from_cf(b, probability(prior, y));
      const auto direct = mxe_update(prior, {Constraint::marginal(x, pa), Constraint::marginal(y, pb)}, fit);
      row.p_direct = probability(direct.distribution, x | y);
      const double q_nx = prob_from_cf(-a, p0_nx);
      const double q_ny = prob_from_cf(-b, p0_ny);
      const auto dual = mxe_update(prior, {Constraint::marginal(nx, q_nx), Constraint::marginal(ny, q_ny)}, fit);
      row.p_dual = 1.0 - probability(dual.distribution, nx & ny);
    }
    row.discrepancy = std::abs(row.p_direct - row.p_dual);
    rep.max_discrepancy = std::max(rep.max_discrepancy, row.discrepancy);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// One-datum equivalences of MYC's and/or
// ---------------------------------------------------------------------------

enum class OneDatumBranch {
  AndNegativeLead,  // lead cf <= 0: and equals MXE on the lead datum alone
  AndPositiveLead,  // 0 <= lead cf: !(A1 & A2) scales like !lead
  OrPositiveLead,   // lead cf >= 0: or equals MXE on the lead datum alone
  OrNegativeLead,   // 0 >= lead cf: (A1 or A2) scales like lead
};

inline std::string_view to_string(OneDatumBranch b) {
  switch (b) {
    case OneDatumBranch::AndNegativeLead: return "and/negative-lead";
    case OneDatumBranch::AndPositiveLead: return "and/positive-lead";
    case OneDatumBranch::OrPositiveLead: return "or/positive-lead";
    case OneDatumBranch::OrNegativeLead: return "or/negative-lead";
  }
  return "?";
}

struct OneDatumReport {
  OneDatumBranch branch;
  double lead_cf;
  double other_cf;
  double p_myc;        // MYC's and/or CF converted back against the prior
  double p_reference;  // one-datum Jeffrey/MXE answer for this branch
  double p_mxe_lead_only;
  double p_mxe_full;   // MXE with both data, for scale
  double discrepancy;
};

/// Checks that MYC's and/or reproduce a Jeffrey update that uses only one of
/// the two data: the lead (smaller CF for and, larger for or).
inline OneDatumReport one_datum_diagnostic(const PairPrior& pair_prior, CfPair pair, BiasMode mode,
                                           const FitOptions& fit = {}) {
  if (mode == BiasMode::RuleOr) throw InvalidArgument("one-datum diagnostic covers and/or only");
  const JointDistribution prior = pair_prior.fit();
  const bool is_and = mode == BiasMode::And;
  const bool first_leads = is_and ? pair.first <= pair.second : pair.first >= pair.second;
  const Formula lead = first_leads ? detail::a1() : detail::a2();
  const Formula event = is_and ? detail::a1() & detail::a2() : detail::a1() | detail::a2();

  OneDatumReport rep{};
  rep.lead_cf = first_leads ? pair.first : pair.second;
  rep.other_cf = first_leads ? pair.second : pair.first;
  const double p0_event = probability(prior, event);
  const double p0_lead = probability(prior, lead);
  const double p1_lead = prob_from_cf(CertaintyFactor(rep.lead_cf), p0_lead);

  const CertaintyFactor x(pair.first), y(pair.second);
  rep.p_myc = prob_from_cf(is_and ? cf_and({x, y}) : cf_or({x, y}), p0_event);
  rep.p_mxe_lead_only = probability(mxe_update(prior, {Constraint::marginal(lead, p1_lead)}, fit).distribution, event);
  rep.p_mxe_full = probability(detail::mxe_from_cfs(prior, pair.first, pair.second, fit), event);

  if (is_and) {
    if (rep.lead_cf <= 0.0) {
      rep.branch = OneDatumBranch::AndNegativeLead;
      rep.p_reference = rep.p_mxe_lead_only;
    } else {
      rep.branch = OneDatumBranch::AndPositiveLead;
      rep.p_reference = 1.0 - (1.0 - p0_event) * (1.0 - p1_lead) / (1.0 - p0_lead);
    }
  } else {
    if (rep.lead_cf >= 0.0) {
      rep.branch = OneDatumBranch::OrPositiveLead;
      rep.p_reference = rep.p_mxe_lead_only;
    } else {
      rep.branch = OneDatumBranch::OrNegativeLead;
      rep.p_reference = p0_event * p1_lead / p0_lead;
    }
  }
  rep.discrepancy = std::abs(rep.p_myc - rep.p_reference);
  return rep;
}

// ---------------------------------------------------------------------------
// Rule-or as an independence assumption
// ---------------------------------------------------------------------------

struct RuleOrCheck {
  std::size_t samples = 0;
  double max_identity_error = 0.0;       // positive side, in long double
  std::size_t negative_counterexamples = 0;
  double min_negative_gap = 0.0;         // min of (1/A1 + 1/B1) - (1/A0 + 1/B0)
  bool passed = false;
};

namespace detail {

// Positive-side identity: CF of (A or B) under independence equals rule-or
// of the two CFs. Arguments are prior/posterior probabilities.
inline long double independent_or_cf_positive(long double a0, long double a1, long double b0, long double b1) {
  return ((a1 + b1 - a1 * b1) - (a0 + b0 - a0 * b0)) / (1.0L - (a0 + b0 - a0 * b0));
}

inline long double rule_or_cf_positive(long double a0, long double a1, long double b0, long double b1) {
  const long double x = (a1 - a0) / (1.0L - a0);
  const long double y = (b1 - b0) / (1.0L - b0);
  return x + y - x * y;
}

}  // namespace detail

inline RuleOrCheck rule_or_independence_check(std::size_t samples, std::uint64_t seed = 1) {
  std::mt19937_64 engine(seed);
  // Open interval (0, 1).
  auto open_unit = [&] { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53; };
  RuleOrCheck rep;
  rep.samples = samples;
  rep.min_negative_gap = INFINITY;
  for (std::size_t i = 0; i < samples; ++i) {
    const double a0 = open_unit(), b0 = open_unit();
    const double a1 = a0 + (1.0 - a0) * open_unit();
    const double b1 = b0 + (1.0 - b0) * open_unit();
    const long double err = std::abs(detail::independent_or_cf_positive(a0, a1, b0, b1) -
                                     detail::rule_or_cf_positive(a0, a1, b0, b1));
    rep.max_identity_error = std::max(rep.max_identity_error, static_cast<double>(err));

    const double c0 = open_unit(), d0 = open_unit();
    const double c1 = c0 * open_unit(), d1 = d0 * open_unit();
    if (!(c1 < c0 && d1 < d0)) continue;
    const double gap = (1.0 / c1 + 1.0 / d1) - (1.0 / c0 + 1.0 / d0);
    rep.min_negative_gap = std::min(rep.min_negative_gap, gap);
    if (!(gap > 0.0)) ++rep.negative_counterexamples;
  }
  rep.passed = rep.max_identity_error <= 1e-12 && rep.negative_counterexamples == 0;
  return rep;
}

}  // namespace uilab
