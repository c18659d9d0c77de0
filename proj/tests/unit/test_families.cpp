#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "uilab/families.hpp"

using namespace uilab;

TEST(Families, EightGroupsListed) {
  std::set<std::string> groups;
  for (const auto& c : family_cases()) groups.insert(c.group);
  EXPECT_EQ(groups.size(), 8u);
}

TEST(Families, DepthOneIsCollapsedTopRule) {
  const auto deep = generate_family("dpth-2");
  const auto fitted = fit_prior(deep).distribution;
  const auto shallow = generate_family("dpth-1");
  ASSERT_EQ(shallow.rules().size(), 1u);
  EXPECT_EQ(shallow.rules()[0], deep.rules()[0]);
  EXPECT_EQ(shallow.leaves(), (std::vector<std::string>{"B1", "B2"}));
  for (const char* b : {"B1", "B2"})
    EXPECT_DOUBLE_EQ(shallow.leaf_prior(b), probability(fitted, Formula::atom(b)));
}

TEST(Families, Bsh3UpperAndLower) {
  const auto rs = generate_family("bsh3-u&l");
  ASSERT_EQ(rs.rules().size(), 1u);
  const Rule& r = rs.rules()[0];
  EXPECT_EQ(r.antecedent.kind(), Formula::Kind::And);
  EXPECT_EQ(r.antecedent.children().size(), 3u);
  EXPECT_TRUE(r.lower.has_value());
  EXPECT_FALSE(generate_family("bsh3-upr").rules()[0].lower.has_value());
}

TEST(Families, NegatedSharedAntecedent) {
  const auto rs = generate_family("2cnc-2rls-neg");
  ASSERT_EQ(rs.rules().size(), 2u);
  EXPECT_TRUE(rs.rules()[0].antecedent.mentions("B2"));
  EXPECT_EQ(rs.rules()[1].antecedent, (!Formula::atom("B2")) & Formula::atom("B3"));
  EXPECT_EQ(generate_family("2cnc-2rls-pos").rules()[1].antecedent, Formula::atom("B2") & Formula::atom("B3"));
}

TEST(Families, SharedConclusionsHaveMultipleRules) {
  EXPECT_EQ(generate_family("cnd-ind-2").rules_for("A").size(), 2u);
  EXPECT_EQ(generate_family("cnd-ind-3").rules_for("A").size(), 3u);
  EXPECT_EQ(generate_family("1cnc-2rls-pos").query_nodes(), (std::vector<std::string>{"A"}));
  EXPECT_EQ(generate_family("1cnc-2lyrs-neg").query_nodes(), (std::vector<std::string>{"D"}));
}

TEST(Families, ExtremeOverlapOrdering) {
  auto overlap = [](const char* name) {
    const auto rs = generate_family(name);
    return probability(fit_prior(rs).distribution, Formula::atom("A1") & Formula::atom("A2"));
  };
  EXPECT_LT(overlap("2cnc-min-shr-ruls-pos"), overlap("2cnc-max-shr-ruls-pos"));
  EXPECT_LT(overlap("2cnc-min-shr-ruls-neg"), overlap("2cnc-max-shr-ruls-neg"));
}

TEST(Families, CorrelatedVariantsCarryConstraints) {
  EXPECT_TRUE(generate_family("bsh2-upr").extra_constraints().empty());
  EXPECT_EQ(generate_family("bsh2-upr-pos").extra_constraints().size(), 1u);
  EXPECT_EQ(generate_family("bsh3-u&l-neg").extra_constraints().size(), 3u);
}

TEST(Families, UnknownAndInvalid) {
  EXPECT_THROW(generate_family("bsh4-upr"), InvalidArgument);
  FamilyParams p;
  p.upper = 1.5;
  EXPECT_THROW(generate_family("bsh2-upr", p), InvalidArgument);
  EXPECT_NO_THROW(generate_family("bsh2-u_l"));
}

TEST(Families, ShippedFixturesMatchGenerator) {
  for (const auto& c : family_cases()) {
    const auto shipped = parse_ruleset(test::read_fixture(family_file_stem(c.name) + ".rules"));
    EXPECT_EQ(shipped, generate_family(c.name)) << c.name;
  }
}

TEST(Families, AllFitAndRoundTrip) {
  for (const auto& c : family_cases()) {
    const auto rs = generate_family(c.name);
    EXPECT_EQ(parse_ruleset(serialize(rs)), rs) << c.name;
    const auto fitted = fit_prior(rs);
    EXPECT_TRUE(fitted.report.converged) << c.name;
    EXPECT_LE(fitted.report.max_residual, 1e-9) << c.name;
  }
}
