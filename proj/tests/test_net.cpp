#include <gtest/gtest.h>

#include "cosetnet/net.hpp"

using namespace cosetnet;

namespace {

struct Fixture {
  GroupOracle g;
  SubgroupSpec h;
  Ball ball;
  SubgroupBall hb;
  CosetTable ct;
  Fixture(GroupOracle grp, const std::string& sub, int R)
      : g(std::move(grp)), h(parse_subgroup(g, sub)), ball(build_ball(g, R)),
        hb(subgroup_elements(g, h, 2 * R)), ct(build_coset_table(ball, hb)) {}
  Word W(const char* t) const { return g.parse(t); }
};

bool ends_in_b(const Alphabet& al, const Word& w) {
  return w.empty() || w.back() == al.letter('b') || w.back() == al.letter('B');
}

}  // namespace

TEST(Sigma, FreeGroupExamples) {
  Fixture f(GroupOracle::free(2), "a", 6);
  EXPECT_EQ(sigma(f.g, f.hb, f.W("b")), 1);
  EXPECT_EQ(sigma(f.g, f.hb, f.W("baaa")), 1);
  EXPECT_EQ(sigma(f.g, f.hb, f.W("aaa")), 0);
}

TEST(Sigma, NeedsLargeEnoughSubgroupBall) {
  auto g = GroupOracle::free(2);
  auto hb = subgroup_elements(g, parse_subgroup(g, "a"), 2);
  EXPECT_THROW(sigma(g, hb, g.parse("bab")), InsufficientRadius);
}

TEST(BruteS, FreeGroupCyclicSubgroup) {
  Fixture f(GroupOracle::free(2), "a", 6);
  auto S = compute_S_bruteforce(f.ball, f.hb, 3);
  std::size_t want = 0;
  for (std::size_t i = 0; i < f.ball.count_within(3); ++i)
    if (ends_in_b(f.g.alphabet(), f.ball.word(static_cast<Element>(i)))) ++want;
  EXPECT_EQ(S.size(), want);
  for (Element e : S) EXPECT_TRUE(ends_in_b(f.g.alphabet(), f.ball.word(e)));
}

TEST(BruteS, TrivialAndWhole) {
  Fixture t(GroupOracle::free(2), "1", 4);
  EXPECT_EQ(compute_S_bruteforce(t.ball, t.hb, 4).size(), t.ball.size());
  Fixture w(GroupOracle::free(2), "a,b", 4);
  auto S = compute_S_bruteforce(w.ball, w.hb, 4);
  ASSERT_EQ(S.size(), 1u);
  EXPECT_EQ(S[0], 0);
}

TEST(Cosets, SameCosetIffQuotientInSubgroup) {
  Fixture f(GroupOracle::free_product_cyclic(2, 3), "b", 6);
  for (std::size_t i = 0; i < f.ball.size(); i += 7)
    for (std::size_t j = 0; j < f.ball.size(); j += 5) {
      Word q = f.g.normal_form(concat(f.g.alphabet().invert(f.ball.word(static_cast<Element>(i))),
                                      f.ball.word(static_cast<Element>(j))));
      EXPECT_EQ(f.ct.coset[i] == f.ct.coset[j], f.hb.contains(q));
    }
}

TEST(Cosets, SigmaAgreesWithMinimalCosetLength) {
  Fixture f(GroupOracle::free(2), "ab", 6);
  for (std::size_t i = 0; i < f.ball.count_within(3); ++i)
    EXPECT_EQ(f.ct.sigma_of(static_cast<Element>(i)), sigma(f.g, f.hb, f.ball.word(static_cast<Element>(i))));
}

TEST(Section, FreeGroupExamples) {
  Fixture f(GroupOracle::free(2), "a", 6);
  auto s = build_section(f.ct);
  EXPECT_EQ(s[static_cast<std::size_t>(f.ct.coset[0])], 0);
  Element b = f.ball.at(f.W("b"));
  EXPECT_EQ(s[static_cast<std::size_t>(f.ct.coset[static_cast<std::size_t>(b)])], b);
  EXPECT_TRUE(section_property_holds(f.ct, s, f.h.membership));
}

TEST(Section, FreeAbelianAxisComplement) {
  Fixture f(GroupOracle::free_abelian(2), "x", 6);
  auto s = build_section(f.ct);
  Element g = f.ball.at(f.W("xxxyy"));
  EXPECT_EQ(f.ball.word(s[static_cast<std::size_t>(f.ct.coset[static_cast<std::size_t>(g)])]), f.W("yy"));
}

TEST(Defect, FreeGroupIsOneAtEveryRadius) {
  Fixture f(GroupOracle::free(2), "a", 8);
  auto s = build_section(f.ct);
  for (int r = 2; r <= 8; ++r) EXPECT_EQ(net_defect(f.ball, section_image(f.ball, s, r), 1, r), 1) << r;
}

TEST(Defect, TrivialSubgroupIsZero) {
  Fixture f(GroupOracle::free(2), "1", 5);
  auto s = build_section(f.ct);
  EXPECT_EQ(net_defect(f.ball, section_image(f.ball, s, 5), 1, 5), 0);
}

TEST(Defect, FreeAbelianGrowsLinearly) {
  Fixture f(GroupOracle::free_abelian(2), "x", 8);
  auto s = build_section(f.ct);
  for (int r = 2; r <= 8; ++r) EXPECT_EQ(net_defect(f.ball, section_image(f.ball, s, r), 1, r), r - 1);
}

TEST(CosetSlack, FreeGroupSlackAndDiameter) {
  Fixture f(GroupOracle::free(2), "a", 6);
  auto rep = check_lemma_5A(f.ct, 6);
  EXPECT_LE(rep.max_slack, 8);
  EXPECT_EQ(rep.max_S_diameter, 0);
  EXPECT_GT(rep.pairs, 0u);
}

TEST(CosetSlack, FreeProductPasses) {
  Fixture f(GroupOracle::free_product_cyclic(2, 3), "b", 8);
  auto rep = check_lemma_5A(f.ct, 6);
  EXPECT_LE(rep.max_slack, 4 * 2 + 2 * 1 + 8);
}

TEST(Action, IdentityAndBound) {
  Fixture f(GroupOracle::free(2), "a", 6);
  auto s = build_section(f.ct);
  EXPECT_EQ(action_displacement(f.ct, s, 0, 8).max_displacement, 0);
  auto rep = action_displacement(f.ct, s, 2, 8);
  EXPECT_LE(rep.max_excess, 0);
  EXPECT_GT(rep.cosets_checked, 0u);
}

TEST(Crosscheck, DetectsDiscrepancy) {
  Fixture f(GroupOracle::free(2), "a", 6);
  auto brute = compute_S_bruteforce(f.ball, f.hb, 6);
  Automaton everything = minimize(geodesic_acceptor(compute_cone_types(f.ball, 2)));
  auto cc = oracle_crosscheck(everything, brute, f.ball, 4);
  EXPECT_FALSE(cc.agree);
  EXPECT_EQ(cc.witness, "a");
  EXPECT_EQ(cc.witness_side, "automaton");
}

TEST(RadiusTable, CsvShape) {
  Fixture f(GroupOracle::free(2), "a", 5);
  auto s = build_section(f.ct);
  auto rows = radius_table(f.ct, s, 1, check_lemma_5A(f.ct, 5));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1].defect, 1);
  auto csv = radius_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "R,coset_count,S_size,defect,lemma5A_max_slack");
}
