#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "uilab/maxent.hpp"
#include "uilab/rulemodel.hpp"

using namespace uilab;
using uilab::test::table31_prior;

namespace {

const Formula A1 = Formula::atom("A1");
const Formula A2 = Formula::atom("A2");

PropositionSpace two() { return PropositionSpace({"A1", "A2"}); }

double p_both_after(double a1, double a2) {
  const auto r = mxe_update(table31_prior(), {Constraint::marginal(A1, a1), Constraint::marginal(A2, a2)});
  return probability(r.distribution, A1 & A2);
}

}  // namespace

TEST(Project, UniformMarginal) {
  const auto d = project(JointDistribution::uniform(two()), Constraint::marginal(A1, 0.9));
  EXPECT_NEAR(probability(d, A1 & A2), 0.45, 1e-15);
}

TEST(Project, SatisfiedConstraintLeavesDistribution) {
  const auto prior = table31_prior();
  const auto d = project(prior, Constraint::conditional(A2, A1, 2.0 / 9));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(d.atom(k), prior.atom(k), 1e-15);
}

TEST(Project, ConditionalIsKlProjection) {
  const auto u = JointDistribution::uniform(two());
  const auto d = project(u, Constraint::conditional(A2, A1, 0.8));
  EXPECT_NEAR(conditional_probability(d, A2, A1), 0.8, 1e-12);
  EXPECT_NEAR(d.atom(0b00), d.atom(0b10), 1e-15);

  // Feasible family: p(A1) = g, split 0.8 / 0.2 inside A1, uniform outside.
  double best_g = 0.0, best_kl = INFINITY;
  for (int i = 1; i < 200000; ++i) {
    const double g = i / 200000.0;
    const JointDistribution f(two(), {(1 - g) / 2, 0.2 * g, (1 - g) / 2, 0.8 * g});
    const double kl = kl_divergence(f, u);
    if (kl < best_kl) best_kl = kl, best_g = g;
  }
  EXPECT_NEAR(probability(d, A1), best_g, 1e-5);
  EXPECT_NEAR(d.atom(0b11), 0.8 * best_g, 1e-5);
}

TEST(Project, ConditionalExtremeValues) {
  const auto u = JointDistribution::uniform(two());
  const auto one = project(u, Constraint::conditional(A2, A1, 1.0));
  EXPECT_DOUBLE_EQ(one.atom(0b01), 0.0);
  EXPECT_NEAR(one.atom(0b11), 1.0 / 3, 1e-15);
  const auto zero = project(u, Constraint::conditional(A2, A1, 0.0));
  EXPECT_DOUBLE_EQ(zero.atom(0b11), 0.0);
  const JointDistribution d(two(), {0.5, 0.0, 0.5, 0.0});
  EXPECT_THROW(project(d, Constraint::conditional(A2, A1, 0.5)), ZeroConditioningEvent);
}

TEST(Residual, Examples) {
  const auto u = JointDistribution::uniform(two());
  const std::vector<Constraint> ok = {Constraint::marginal(A1, 0.5)};
  EXPECT_DOUBLE_EQ(residual(u, ok), 0.0);
  const std::vector<Constraint> off = {Constraint::marginal(A1, 0.9)};
  EXPECT_NEAR(residual(u, off), 0.4, 1e-15);
  const JointDistribution d(two(), {0.5, 0.5, 0.0, 0.0});
  const std::vector<Constraint> cond = {Constraint::conditional(A1, A2, 0.3)};
  EXPECT_DOUBLE_EQ(residual(d, cond), 1.0);
}

TEST(MxeUpdate, Table31Posteriors) {
  EXPECT_NEAR(p_both_after(0.9, 0.9), 0.801, 1e-3);
  EXPECT_NEAR(p_both_after(0.9, 0.1), 0.05543, 1e-4);
  EXPECT_NEAR(p_both_after(0.1, 0.1), 0.001, 5e-4);
}

TEST(MxeUpdate, InfeasibleThrowsNotConverged) {
  try {
    mxe_update(JointDistribution::uniform(two()),
               {Constraint::marginal(A1, 0.9), Constraint::marginal(A1 & A2, 0.95)});
    FAIL() << "expected NotConverged";
  } catch (const NotConverged& e) {
    EXPECT_FALSE(e.report().converged);
    EXPECT_EQ(e.report().iterations, FitOptions{}.max_iterations);
    EXPECT_GT(e.report().max_residual, 1e-9);
  }
}

TEST(MxeUpdate, ReportsConvergence) {
  const auto r = mxe_update(table31_prior(), {Constraint::marginal(A1, 0.9), Constraint::marginal(A2, 0.9)});
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(r.report.max_residual, 1e-9);
}

TEST(FitMaxEntropyPrior, Table31Atoms) {
  const auto r = fit_max_entropy_prior(
      two(), {Constraint::marginal(A1, 0.5), Constraint::marginal(A2, 0.5), Constraint::marginal(A1 & A2, 1.0 / 9)},
      {1e-13, 10000});
  const auto expect = table31_prior();
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(r.distribution.atom(k), expect.atom(k), 1e-12);
}

TEST(FitMaxEntropyPrior, UnconstrainedPropositionsStayUniform) {
  const auto r = fit_max_entropy_prior(two(), {Constraint::marginal(A1, 0.5)});
  for (double a : r.distribution.atoms()) EXPECT_NEAR(a, 0.25, 1e-15);
  const PropositionSpace three({"A", "B", "C"});
  const auto r3 = fit_max_entropy_prior(three, {Constraint::marginal(Formula::atom("A"), 0.5),
                                                Constraint::marginal(Formula::atom("B"), 0.5),
                                                Constraint::marginal(Formula::atom("C"), 0.5)});
  for (double a : r3.distribution.atoms()) EXPECT_NEAR(a, 0.125, 1e-15);
}

namespace {

struct OracleCase {
  JointDistribution prior;
  std::vector<Constraint> constraints;
};

std::vector<OracleCase> oracle_cases() {
  std::mt19937_64 rng(21);
  const PropositionSpace s3({"A", "B", "C"});
  const Formula a = Formula::atom("A"), b = Formula::atom("B"), c = Formula::atom("C");
  return {
      {table31_prior(), {Constraint::marginal(A1, 0.9), Constraint::marginal(A2, 0.1)}},
      {test::random_distribution(s3, rng, 0.05),
       {Constraint::marginal(a, 0.7), Constraint::conditional(c, a & b, 0.2), Constraint::marginal(b | c, 0.6)}},
      {JointDistribution::uniform(s3),
       {Constraint::marginal(a, 0.3), Constraint::marginal(a & b, 0.2), Constraint::conditional(c, !b, 0.9)}},
  };
}

// A feasible point obtained by projecting a random start onto the constraints.
JointDistribution feasible_sample(const PropositionSpace& space, std::span<const Constraint> cs, std::mt19937_64& rng) {
  return mxe_update(test::random_distribution(space, rng, 1e-3), cs, {1e-11, 100000}).distribution;
}

}  // namespace

TEST(MaxentOracle, MxeMinimizesKl) {
  std::mt19937_64 rng(22);
  for (const auto& oc : oracle_cases()) {
    const auto best = mxe_update(oc.prior, oc.constraints).distribution;
    const double kl_best = kl_divergence(best, oc.prior);
    for (int i = 0; i < 1000; ++i) {
      const auto s = feasible_sample(oc.prior.space(), oc.constraints, rng);
      ASSERT_LE(kl_best, kl_divergence(s, oc.prior) + 1e-6);
    }
  }
}

TEST(MaxentOracle, MePriorMaximizesEntropy) {
  std::mt19937_64 rng(23);
  for (const auto& oc : oracle_cases()) {
    const auto me = fit_max_entropy_prior(oc.prior.space(), oc.constraints).distribution;
    const double h = entropy(me);
    for (int i = 0; i < 1000; ++i)
      ASSERT_GE(h + 1e-6, entropy(feasible_sample(oc.prior.space(), oc.constraints, rng)));
  }
}

TEST(MaxentProperties, SinglePartitionMatchesJeffreyInOneCycle) {
  const auto prior = table31_prior();
  const auto r = mxe_update(prior, {Constraint::marginal(A1 & !A2, 0.6)});
  EXPECT_EQ(r.report.iterations, 1u);
  const auto j = jeffrey_update(prior, EventPartition(two(), {{A1 & !A2, 0.6}, {!(A1 & !A2), 0.4}}));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(r.distribution.atom(k), j.atom(k));
}

TEST(MaxentProperties, IdempotentOnOwnOutput) {
  for (const auto& oc : oracle_cases()) {
    const auto first = mxe_update(oc.prior, oc.constraints).distribution;
    const auto again = mxe_update(first, oc.constraints);
    EXPECT_EQ(again.report.iterations, 1u);
    EXPECT_LE(again.report.max_residual, 1e-9);
  }
}

TEST(MaxentProperties, CycleOrderIndependence) {
  for (const auto& oc : oracle_cases()) {
    auto perm = oc.constraints;
    const auto base = mxe_update(oc.prior, perm).distribution;
    std::reverse(perm.begin(), perm.end());
    const auto other = mxe_update(oc.prior, perm).distribution;
    for (std::size_t k = 0; k < base.atoms().size(); ++k) EXPECT_NEAR(base.atom(k), other.atom(k), 10 * 1e-9);
  }
}

TEST(MaxentProperties, SharedConclusionPriorFactorizes) {
  const auto rs = parse_ruleset(test::read_fixture("cnd-ind-2.rules"));
  const auto d = fit_prior(rs).distribution;
  const Formula a = Formula::atom("A"), b1 = Formula::atom("B1"), b2 = Formula::atom("B2");
  for (const Formula& c : {a, !a}) {
    EXPECT_NEAR(conditional_probability(d, b1 & b2, c),
                conditional_probability(d, b1, c) * conditional_probability(d, b2, c), 1e-6);
  }
}
