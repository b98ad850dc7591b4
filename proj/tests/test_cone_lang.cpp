#include <gtest/gtest.h>

#include <random>

#include "cosetnet/cone_lang.hpp"

using namespace cosetnet;

namespace {

struct Fixture {
  Ball ball;
  ConePipeline pipe;
  Fixture(const GroupOracle& g, int R, int k, int delta2 = 0)
      : ball(build_ball(g, R)), pipe(ball, compute_cone_types(ball, k), delta2) {}
};

Fixture& free2() {
  static Fixture s(GroupOracle::free(2), 8, 2);
  return s;
}

Fixture& fpc23() {
  static Fixture s(GroupOracle::free_product_cyclic(2, 3), 10, 3, 2);
  return s;
}

Word W(const Fixture& s, const char* text) { return s.ball.oracle().parse(text); }

bool seq_accepts(const Automaton& a, const Tuple& t) {
  return run_columns(a, sequential_columns(a.tape_alphabet(), t));
}

}  // namespace

TEST(ConeTypes, FreeGroupHasFiveClassesForSmallK) {
  auto b = build_ball(GroupOracle::free(2), 8);
  for (int k = 1; k <= 3; ++k) EXPECT_EQ(compute_cone_types(b, k).num_classes(), 5u) << "k=" << k;
}

TEST(ConeTypes, FreeAbelianHasNineClassesAtKOne) {
  auto b = build_ball(GroupOracle::free_abelian(2), 6);
  auto t = compute_cone_types(b, 1);
  EXPECT_EQ(t.num_classes(), 9u);
}

TEST(ConeTypes, SignatureIsClassInvariant) {
  auto b = build_ball(GroupOracle::free_product_cyclic(2, 3), 8);
  auto t = compute_cone_types(b, 2);
  for (std::size_t i = 0; i < b.count_within(t.region); ++i) {
    const auto& sig = t.signature[static_cast<std::size_t>(t.class_of(static_cast<Element>(i)))];
    for (std::size_t y = 0; y < b.count_within(2); ++y) {
      auto xy = b.walk(static_cast<Element>(i), b.word(static_cast<Element>(y)));
      const int step = b.length(*xy) - b.length(static_cast<Element>(i));
      const int ly = b.length(static_cast<Element>(y));
      EXPECT_EQ(ly <= 1 ? step : int(step == ly), sig[y]);
    }
  }
}

TEST(ConeTypes, FreeProductCountStabilizes) {
  std::vector<std::size_t> counts;
  for (int R = 6; R <= 9; ++R) counts.push_back(compute_cone_types(build_ball(GroupOracle::free_product_cyclic(2, 3), R), 2).num_classes());
  for (std::size_t i = 1; i < counts.size(); ++i) EXPECT_EQ(counts[i], counts[0]);
}

TEST(ConeTypes, RejectsOversizedK) {
  auto b = build_ball(GroupOracle::free(2), 3);
  EXPECT_THROW(compute_cone_types(b, 3), std::invalid_argument);
}

TEST(GeodesicAcceptor, FreeGroupExamples) {
  auto& s = free2();
  EXPECT_EQ(s.pipe.lambda().num_states(), 5u);
  EXPECT_TRUE(accepts(s.pipe.lambda(), {W(s, "abA")}));
  EXPECT_FALSE(accepts(s.pipe.lambda(), {W(s, "aA")}));
  auto counts = count_by_length(s.pipe.lambda(), 10);
  std::uint64_t p = 4;
  for (int n = 1; n <= 10; ++n, p *= 3) EXPECT_EQ(counts[static_cast<std::size_t>(n)], p);
}

TEST(GeodesicAcceptor, FreeProductExamples) {
  auto& s = fpc23();
  const auto& l = s.pipe.lambda();
  EXPECT_FALSE(accepts(l, {W(s, "bB")}));
  EXPECT_FALSE(accepts(l, {W(s, "bbb")}));
  EXPECT_FALSE(accepts(l, {W(s, "bb")}));
  EXPECT_TRUE(accepts(l, {W(s, "babab")}));
  EXPECT_FALSE(validate_acceptor(s.ball, l, s.pipe.table().region).has_value());
}

TEST(Multiplier, IdentityIsDiagonalInFreeGroup) {
  auto& s = free2();
  const auto& m = s.pipe.multiplier(Word{});
  auto words = geodesic_words_upto(s.ball, 4);
  for (const Word& u : words)
    for (const Word& v : words)
      EXPECT_EQ(run_columns(m, sync_columns(m.tape_alphabet(), {u, v})), u == v);
}

TEST(Multiplier, RightMultiplicationByLetter) {
  auto& s = free2();
  const auto& m = s.pipe.multiplier(W(s, "a"));
  EXPECT_TRUE(accepts(m, {W(s, "b"), W(s, "ba")}));
  EXPECT_FALSE(accepts(m, {W(s, "b"), W(s, "ab")}));
  EXPECT_TRUE(accepts(m, {W(s, "bA"), W(s, "b")}));
}

TEST(Multiplier, FreeAbelianCommutes) {
  auto b = build_ball(GroupOracle::free_abelian(2), 8);
  auto lambda = minimize(geodesic_acceptor(compute_cone_types(b, 2)));
  auto [m, D] = build_multiplier(b, lambda, Word{}, 2, 3);
  EXPECT_TRUE(accepts(m, {b.oracle().parse("xy"), b.oracle().parse("yx")}));
  EXPECT_GE(D, 1);
}

TEST(Multiplier, TooSmallBoundFailsLoudly) {
  auto b = build_ball(GroupOracle::free_abelian(2), 8);
  auto lambda = minimize(geodesic_acceptor(compute_cone_types(b, 2)));
  // the pair (x^3 y, y x^3) needs differences of length 2
  auto m = build_word_difference_machine(b, lambda, 1, Word{});
  EXPECT_THROW(validate_multiplier(b, m, Word{}, 4), DifferenceBoundExceeded);
}

TEST(P, FreeGroupPartition) {
  auto& s = free2();
  Letter a = s.ball.alphabet().letter('a'), A = s.ball.alphabet().letter('A');
  const auto& P = s.pipe.P(a);
  EXPECT_TRUE(is_empty(P[1]));
  for (const Word& x : geodesic_words_upto(s.ball, 5)) {
    bool ends_A = !x.empty() && x.back() == A;
    EXPECT_EQ(accepts(P[0], {x}), !ends_A);
    EXPECT_EQ(accepts(P[2], {x}), ends_A);
  }
}

TEST(P, PartitionAndDualRoute) {
  for (Fixture* s : {&free2(), &fpc23()}) {
    const auto& o = s->ball.oracle();
    for (Letter c = 0; c < s->ball.alphabet().size(); ++c) {
      const auto& P = s->pipe.P(c);
      for (const Word& x : geodesic_words_upto(s->ball, 5)) {
        int hits = 0;
        for (int i = 0; i < 3; ++i)
          if (accepts(P[static_cast<std::size_t>(i)], {x})) {
            ++hits;
            EXPECT_EQ(inner_product(o, x, Word{c}), i);
          }
        EXPECT_EQ(hits, 1);
      }
      EXPECT_TRUE(equivalent(P[2], s->pipe.P2_via_multiplier(c)));
    }
  }
}

TEST(P, FreeProductOrderThreeLetter) {
  auto& s = fpc23();
  Letter b = s.ball.alphabet().letter('b');
  EXPECT_TRUE(accepts(s.pipe.P(b)[1], {W(s, "b")}));
}

TEST(R, Examples) {
  auto& s = free2();
  const auto& r = s.pipe.R();
  EXPECT_TRUE(accepts(r, {W(s, "a"), W(s, "Ab"), W(s, "a"), W(s, "Ab")}));
  EXPECT_TRUE(accepts(r, {W(s, "a"), W(s, "b"), W(s, "ab"), Word{}}));
  EXPECT_TRUE(accepts(r, {Word{}, W(s, "bab"), W(s, "bab"), Word{}}));
  EXPECT_FALSE(accepts(r, {W(s, "a"), W(s, "b"), W(s, "a"), W(s, "b")}));
}

TEST(R, MatchesBruteForce) {
  for (Fixture* s : {&free2(), &fpc23()}) {
    auto got = enumerate(s->pipe.R(), 5);
    std::set<Tuple> gs(got.begin(), got.end());
    EXPECT_EQ(gs.size(), got.size());
    EXPECT_EQ(gs, brute_R(s->ball, 5));
  }
}

TEST(RPrime, MatchesBruteForce) {
  for (Fixture* s : {&free2(), &fpc23()}) {
    const auto& o = s->ball.oracle();
    auto base = brute_R(s->ball, 5);
    for (Letter c = 0; c < s->ball.alphabet().size(); ++c) {
      std::set<Tuple> want;
      for (const auto& t : base) {
        if (t[3].empty() || t[3][0] != c) continue;
        auto zc = s->ball.at(concat(t[2], Word{c}));
        for (const Word& zp : geodesic_words(s->ball, zc))
          want.insert(Tuple{t[0], t[1], t[2], t[3], zp, Word(t[3].begin() + 1, t[3].end())});
      }
      auto got = enumerate(s->pipe.R_prime(c), 5);
      EXPECT_EQ(std::set<Tuple>(got.begin(), got.end()), want) << "c=" << o.format(Word{c});
      auto rc = enumerate(s->pipe.R_c(c), 5);
      std::set<Tuple> want_c;
      for (const auto& t : base)
        if (!t[3].empty() && t[3][0] == c) want_c.insert(t);
      EXPECT_EQ(std::set<Tuple>(rc.begin(), rc.end()), want_c);
    }
  }
}

TEST(Ln, FreeGroupExamples) {
  auto& s = free2();
  EXPECT_TRUE(seq_accepts(s.pipe.L(0), {W(s, "a"), W(s, "b")}));
  EXPECT_TRUE(seq_accepts(s.pipe.L(2), {W(s, "a"), W(s, "A")}));
  EXPECT_TRUE(seq_accepts(s.pipe.L(2), {W(s, "a"), W(s, "Ab")}));
  EXPECT_TRUE(is_empty(s.pipe.L(1)));
}

TEST(Ln, FreeProductExample) {
  auto& s = fpc23();
  EXPECT_TRUE(seq_accepts(s.pipe.L(1), {W(s, "b"), W(s, "b")}));
}

TEST(Ln, PartitionMatchesInnerProduct) {
  for (Fixture* s : {&free2(), &fpc23()}) {
    const auto& o = s->ball.oracle();
    auto words = geodesic_words_upto(s->ball, 5);
    for (int n = 0; n <= 5; ++n) s->pipe.L(n);
    for (const Word& x : words)
      for (const Word& y : words) {
        if (x.size() + y.size() > 5) continue;
        int ip = inner_product(o, x, y);
        for (int n = 0; n <= 5; ++n) EXPECT_EQ(seq_accepts(s->pipe.L(n), {x, y}), n == ip);
      }
  }
}

TEST(InnerProduct, InductionIdentity) {
  std::mt19937_64 rng(3);
  for (auto g : {GroupOracle::free(2), GroupOracle::free_abelian(2), GroupOracle::free_product_cyclic(2, 3),
                 GroupOracle::surface(2)}) {
    const int r = g.family() == Family::Surface ? 2 : 4;
    auto b = build_ball(g, r);
    for (int t = 0; t < 200; ++t) {
      const Word& x = b.word(static_cast<Element>(rng() % b.size()));
      const Word& y = b.word(static_cast<Element>(rng() % b.size()));
      const Word& z = b.word(static_cast<Element>(rng() % b.size()));
      EXPECT_EQ(inner_product(g, x, y) + inner_product(g, concat(x, y), z) - inner_product(g, y, z),
                inner_product(g, x, concat(y, z)));
    }
  }
}

TEST(SubgroupGeodesics, CyclicSubgroupOfFreeGroup) {
  auto& s = free2();
  const auto& o = s.ball.oracle();
  auto h = parse_subgroup(o, "a");
  auto lh = subgroup_geodesics(s.ball, s.pipe.lambda(), h.membership, 0, 6);
  auto words = enumerate_words(lh.automaton, 4);
  EXPECT_EQ(words.size(), 9u);
  EXPECT_EQ(lh.K, 0);
}

TEST(SLanguage, FreeGroupCyclicSubgroup) {
  auto& s = free2();
  const auto& o = s.ball.oracle();
  auto h = parse_subgroup(o, "a");
  auto lh = subgroup_geodesics(s.ball, s.pipe.lambda(), h.membership, 0, 6);
  auto S = build_S_language(s.pipe, lh.automaton, 8, true);
  Letter b = o.alphabet().letter('b'), B = o.alphabet().letter('B');
  for (const Word& x : geodesic_words_upto(s.ball, 6)) {
    bool want = x.empty() || x.back() == b || x.back() == B;
    EXPECT_EQ(accepts(S.S, {x}), want) << o.format(x);
  }
  EXPECT_EQ(completion_distance(S.S), 1);
  EXPECT_TRUE(equivalent(S.S, combine(S.good, short_word_factor_literal(s.pipe, lh.automaton, 8), BoolOp::Intersect)));
  // the union over r contains r = 0, where only y = 1 constrains
  EXPECT_TRUE(equivalent(S.union_form, S.good));
}

TEST(SLanguage, TrivialAndWholeSubgroups) {
  auto& s = free2();
  const auto& o = s.ball.oracle();
  auto triv = subgroup_geodesics(s.ball, s.pipe.lambda(), parse_subgroup(o, "1").membership, 0, 6);
  auto S1 = build_S_language(s.pipe, triv.automaton, 8);
  EXPECT_TRUE(equivalent(S1.S, s.pipe.lambda()));
  auto whole = subgroup_geodesics(s.ball, s.pipe.lambda(), parse_subgroup(o, "a,b").membership, 0, 6);
  auto S2 = build_S_language(s.pipe, whole.automaton, 8);
  auto words = enumerate_words(S2.S, 8);
  ASSERT_EQ(words.size(), 1u);
  EXPECT_TRUE(words[0].empty());
}
