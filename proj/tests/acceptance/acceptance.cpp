// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any failure.
#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "uilab/families.hpp"
#include "uilab/harness.hpp"
#include "uilab/tables.hpp"

using namespace uilab;

namespace {

int failures = 0;

void report(int id, const char* tag, bool ok, const std::string& detail) {
  fmt::print("AC{}{} {}: {}\n", id, tag, ok ? "PASS" : "FAIL", detail);
  if (!ok) ++failures;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& name) { return std::string(UILAB_FIXTURE_DIR) + "/" + name; }

RuleSet load(const std::string& name) { return parse_ruleset(read_file(fixture(name))); }

std::string capture(const std::string& args, int* status) {
  FILE* pipe = popen((std::string(UILAB_CLI) + " " + args).c_str(), "r");
  std::string out;
  if (!pipe) {
    *status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), pipe)) > 0;) out.append(buf.data(), n);
  const int rc = pclose(pipe);
  *status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return out;
}

void ac1() {
  const auto rows =
      bias_table(PairPrior::negative_correlation(), {{0.8, 0.8}, {-0.8, 0.8}, {-0.8, -0.8}}, BiasMode::And);
  const double cf[] = {0.776, -0.501, -0.991}, myc[] = {0.8, -0.8, -0.8};
  const double p[] = {0.801, 0.05543, 0.001}, ptol[] = {1e-3, 1e-4, 5e-4};
  bool ok = true;
  for (int i = 0; i < 3; ++i)
    ok = ok && near(rows[i].cf_mxe, cf[i], 0.002) && rows[i].cf_myc == myc[i] && near(rows[i].p_mxe, p[i], ptol[i]);
  report(1, "", ok,
         fmt::format("Table 3-1 MXE cf ({:+.4f}, {:+.4f}, {:+.4f}), p ({:.5f}, {:.5f}, {:.5f})", rows[0].cf_mxe,
                     rows[1].cf_mxe, rows[2].cf_mxe, rows[0].p_mxe, rows[1].p_mxe, rows[2].p_mxe));
}

void ac2() {
  const auto rows =
      bias_table(PairPrior::positive_correlation(), {{0.8, 0.8}, {0.8, -0.8}, {-0.8, -0.8}}, BiasMode::And);
  const double cf[] = {0.746, -0.746, -0.885};
  bool ok = true;
  for (int i = 0; i < 3; ++i) ok = ok && near(rows[i].cf_mxe, cf[i], 0.002);
  report(2, "", ok,
         fmt::format("Table 3-2 MXE cf ({:+.4f}, {:+.4f}, {:+.4f})", rows[0].cf_mxe, rows[1].cf_mxe, rows[2].cf_mxe));
}

void ac3() {
  const auto rows =
      bias_table(PairPrior::independent(), {{0.8, 0.8}, {0.8, -0.8}, {0.4, 0.4}, {-0.8, -0.8}}, BiasMode::Or);
  const double myc[] = {0.8, 0.8, 0.4, -0.8}, rule[] = {0.96, 0.0, 0.64, -0.96}, mxe[] = {0.96, 0.64, 0.64, -0.7467};
  bool ok = true;
  for (int i = 0; i < 4; ++i)
    ok = ok && rows[i].cf_myc == myc[i] && near(rows[i].cf_rule_or, rule[i], 1e-12) &&
         near(rows[i].cf_mxe, mxe[i], 0.002);
  report(3, "", ok,
         fmt::format("Table 3-3 rule-or ({:+.2f}, {:+.2f}, {:+.2f}, {:+.2f}), MXE-or ({:+.4f}, {:+.4f}, {:+.4f}, {:+.4f})",
                     rows[0].cf_rule_or, rows[1].cf_rule_or, rows[2].cf_rule_or, rows[3].cf_rule_or, rows[0].cf_mxe,
                     rows[1].cf_mxe, rows[2].cf_mxe, rows[3].cf_mxe));
}

void ac4() {
  const std::vector<PairPrior> priors = {PairPrior::negative_correlation(), PairPrior::independent(),
                                         PairPrior::positive_correlation()};
  const std::vector<CfPair> pairs = {{-0.8, -0.8}};
  const auto row = rule_or_correlation_table(priors, pairs)[0];
  const double mxe[] = {-0.776, -0.747, -0.746};
  bool ok = near(row.cf_rule_or, -0.96, 1e-12);
  for (int i = 0; i < 3; ++i)
    ok = ok && near(row.cf_mxe[i], mxe[i], 0.002) && std::abs(row.cf_rule_or) > std::abs(row.cf_mxe[i]);
  report(4, "", ok,
         fmt::format("Table 3-4 rule-or {:+.2f}, MXE ({:+.4f}, {:+.4f}, {:+.4f})", row.cf_rule_or, row.cf_mxe[0],
                     row.cf_mxe[1], row.cf_mxe[2]));
}

void ac5() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0), c(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double pm = u(rng), p0 = u(rng);
    double s = 0.0;
    for (int k = 0; k < 1000000; ++k) {
      const double e = prob_from_cf(CertaintyFactor(c(rng)), p0) - pm;
      s += e * e;
    }
    worst = std::max(worst, std::abs(s / 1e6 - expected_sq_error(pm, p0)));
  }
  const double spot1 = std::abs(expected_sq_error(0.5, 0.5) - 1.0 / 12);
  const double spot2 = std::abs(expected_sq_error(0.6, 0.2) - 0.92 / 6);
  report(5, "", worst <= 1e-3 && spot1 <= 1e-12 && spot2 <= 1e-12,
         fmt::format("max Monte-Carlo gap {:.2e} over 20 pairs, spot errors {:.1e}, {:.1e}", worst, spot1, spot2));
}

void ac6() {
  const auto r = rule_or_independence_check(100000, 2024);
  report(6, "", r.passed,
         fmt::format("{} tuples, max identity error {:.2e}, {} infeasibility counterexamples", r.samples,
                     r.max_identity_error, r.negative_counterexamples));
}

void ac7() {
  double worst = 0.0;
  std::array<std::size_t, 4> hits{};
  for (const auto& prior : {PairPrior::negative_correlation(), PairPrior::independent()}) {
    for (BiasMode mode : {BiasMode::And, BiasMode::Or}) {
      for (const auto& pair : cf_grid()) {
        const auto rep = one_datum_diagnostic(prior, pair, mode);
        worst = std::max(worst, rep.discrepancy);
        ++hits[static_cast<std::size_t>(rep.branch)];
      }
    }
  }
  const bool all_branches = hits[0] && hits[1] && hits[2] && hits[3];
  report(7, "", worst <= 1e-9 && all_branches,
         fmt::format("max discrepancy {:.2e} over 2 priors x 2 modes x 81 pairs (branch counts {}/{}/{}/{})", worst,
                     hits[0], hits[1], hits[2], hits[3]));
}

void ac8() {
  const auto grid = cf_grid();
  const double rule = demorgan_audit(PairPrior::independent(), grid, DisjunctionRoute::RuleOr).max_discrepancy;
  double mxe = 0.0;
  for (const auto& prior : {PairPrior::independent(), PairPrior::negative_correlation(), PairPrior::positive_correlation()})
    mxe = std::max(mxe, demorgan_audit(prior, grid, DisjunctionRoute::Mxe).max_discrepancy);
  report(8, "", rule > 0.05 && mxe <= 1e-9,
         fmt::format("rule-or max discrepancy {:.4f}, MXE max discrepancy {:.2e}", rule, mxe));
}

void ac9() {
  // Every shipped fixture except the one built to be infeasible.
  std::vector<std::string> names = {"table3-1.rules", "table3-2.rules", "table3-3.rules", "single-leaf.rules",
                                    "bayes-consistent.rules"};
  for (const auto& c : family_cases()) names.push_back(family_file_stem(c.name) + ".rules");
  double worst_residual = 0.0;
  bool converged = true;
  for (const auto& n : names) {
    try {
      const auto f = fit_prior(load(n));
      worst_residual = std::max(worst_residual, f.report.max_residual);
      converged = converged && f.report.converged;
    } catch (const Error&) {
      converged = false;
    }
  }
  bool infeasible_flagged = false;
  try {
    fit_prior(load("infeasible.rules"));
  } catch (const NotConverged&) {
    infeasible_flagged = true;
  }

  // KL minimality against projections of random starts.
  std::mt19937_64 rng(99);
  const PropositionSpace s3({"A", "B", "C"});
  const Formula a = Formula::atom("A"), b = Formula::atom("B"), c = Formula::atom("C");
  const std::vector<Constraint> cs = {Constraint::marginal(a, 0.7), Constraint::conditional(c, a & b, 0.2),
                                      Constraint::marginal(b | c, 0.6)};
  auto random_dist = [&] {
    std::uniform_real_distribution<double> u(1e-3, 1.0);
    std::vector<double> w(8);
    for (auto& x : w) x = u(rng);
    return JointDistribution::normalized(s3, std::move(w));
  };
  const auto prior = random_dist();
  const double kl_best = kl_divergence(mxe_update(prior, cs).distribution, prior);
  double min_gap = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const auto s = mxe_update(random_dist(), cs, {1e-11, 100000}).distribution;
    min_gap = std::min(min_gap, kl_divergence(s, prior) - kl_best);
  }

  const PropositionSpace s2({"A1", "A2"});
  const Formula a1 = Formula::atom("A1"), a2 = Formula::atom("A2");
  const JointDistribution t31(s2, {1.0 / 9, 7.0 / 18, 7.0 / 18, 1.0 / 9});
  const auto single = mxe_update(t31, {Constraint::marginal(a1 & !a2, 0.6)}).distribution;
  const auto jeff = jeffrey_update(t31, EventPartition(s2, {{a1 & !a2, 0.6}, {!(a1 & !a2), 0.4}}));
  bool jeffrey_exact = true;
  for (std::size_t k = 0; k < 4; ++k) jeffrey_exact = jeffrey_exact && single.atom(k) == jeff.atom(k);

  const auto ci = fit_prior(load("cnd-ind-2.rules")).distribution;
  const Formula ca = Formula::atom("A"), b1 = Formula::atom("B1"), b2 = Formula::atom("B2");
  double fact = 0.0;
  for (const Formula& given : {ca, !ca})
    fact = std::max(fact, std::abs(conditional_probability(ci, b1 & b2, given) -
                                   conditional_probability(ci, b1, given) * conditional_probability(ci, b2, given)));

  report(9, "", converged && worst_residual <= 1e-9 && infeasible_flagged && min_gap >= -1e-9 && jeffrey_exact &&
                    fact <= 1e-6,
         fmt::format("{} fixtures converged (max residual {:.1e}), infeasible flagged: {}, KL gap min {:.1e}, "
                     "Jeffrey exact: {}, factorization error {:.1e}",
                     names.size(), worst_residual, infeasible_flagged, min_gap, jeffrey_exact, fact));
}

void ac10() {
  const std::string args = "sweep --rules " + fixture("1cnc-2lyrs-pos.rules") + " --uis myc,tsm,ci --seed 424242 --format csv";
  int s1 = 0, s2 = 0, s3 = 0;
  const auto a = capture(args, &s1), b = capture(args, &s2), c = capture(args + " --threads 4", &s3);
  const bool ok = s1 == 0 && s2 == 0 && s3 == 0 && !a.empty() && a == b && a == c;
  report(10, "", ok, fmt::format("{} bytes of CSV, repeat identical: {}, 4 threads identical: {}", a.size(), a == b, a == c));
}

struct FamilyScore {
  std::string name;
  std::array<double, 3> mean{};
};

void ac11() {
  const std::vector<UISKind> systems = {UISKind::MYC, UISKind::TSM, UISKind::CI};

  // (a) pooled mixed-evidence trials over the bushiness-3 fixtures
  double sum_myc = 0.0, sum_tsm = 0.0;
  std::size_t n = 0;
  std::string per_case;
  for (const auto& c : family_cases()) {
    if (c.name.rfind("bsh3", 0) != 0) continue;
    const auto out = run_sweep(load(family_file_stem(c.name) + ".rules"), systems, 42);
    double m = 0.0, t = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < out.trials[0].size(); ++i) {
      const auto& tm = out.trials[0][i];
      const auto& tt = out.trials[1][i];
      if (!tm.mixed_evidence || tm.error || tt.error) continue;
      m += tm.zeta;
      t += tt.zeta;
      ++k;
    }
    sum_myc += m;
    sum_tsm += t;
    n += k;
    per_case += fmt::format(" {} {:.3f}/{:.3f};", c.name, m / k, t / k);
  }
  const double myc = sum_myc / n, tsm = sum_tsm / n;
  report(11, "a", myc > tsm,
         fmt::format("bsh3 mixed evidence, {} trials: mean zeta MYC {:.4f} > TSM {:.4f} (per case MYC/TSM:{})", n, myc,
                     tsm, per_case));

  // (b) worst-case family mean per system
  std::array<double, 3> worst = {INFINITY, INFINITY, INFINITY};
  std::array<std::string, 3> worst_name;
  for (const auto& c : family_cases()) {
    const auto out = run_sweep(load(family_file_stem(c.name) + ".rules"), systems, 42);
    for (std::size_t u = 0; u < 3; ++u) {
      if (out.reports[u].mean_zeta < worst[u]) {
        worst[u] = out.reports[u].mean_zeta;
        worst_name[u] = c.name;
      }
    }
  }
  report(11, "b", worst[2] > worst[0] && worst[0] > worst[1],
         fmt::format("worst family mean zeta CI {:+.3f} ({}) > MYC {:+.3f} ({}) > TSM {:+.3f} ({})", worst[2],
                     worst_name[2], worst[0], worst_name[0], worst[1], worst_name[1]));
}

}  // namespace

int main() {
  const std::vector<void (*)()> checks = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "", false, std::string("exception: ") + e.what());
    }
  }
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
