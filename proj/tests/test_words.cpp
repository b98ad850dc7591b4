#include <gtest/gtest.h>

#include "cosetnet/words.hpp"

using namespace cosetnet;

namespace {

Alphabet ab() { return Alphabet({'a', 'A', 'b', 'B'}, {1, 0, 3, 2}); }

}  // namespace

TEST(Alphabet, ParseAndFormatRoundTrip) {
  auto al = ab();
  EXPECT_EQ(al.format(al.parse("abAB")), "abAB");
  EXPECT_EQ(al.format(al.parse("1")), "1");
  EXPECT_EQ(al.format(Word{}), "1");
}

TEST(Alphabet, PowerSyntax) {
  auto al = ab();
  EXPECT_EQ(al.format(al.parse("a^3b")), "aaab");
  EXPECT_EQ(al.format(al.parse("a^-2")), "AA");
  EXPECT_EQ(al.format(al.parse("(ab)^2")), "abab");
  EXPECT_EQ(al.format(al.parse("(ab)^-1")), "BA");
}

TEST(Alphabet, RejectsUnknownLetters) {
  auto al = ab();
  EXPECT_THROW(al.parse("abz"), ParseError);
  EXPECT_THROW(al.parse("(ab"), ParseError);
}

TEST(Alphabet, RejectsNonInvolution) {
  EXPECT_THROW(Alphabet({'a', 'b'}, {1, 1}), std::invalid_argument);
}

TEST(Alphabet, InvertReversesAndInverts) {
  auto al = ab();
  EXPECT_EQ(al.format(al.invert(al.parse("abB"))), "bBA");
}

TEST(Shortlex, LengthThenLetterOrder) {
  auto al = ab();
  EXPECT_TRUE(shortlex_less(al.parse("B"), al.parse("aa")));
  EXPECT_TRUE(shortlex_less(al.parse("aA"), al.parse("ab")));
  EXPECT_TRUE(shortlex_less(al.parse("A"), al.parse("b")));
  EXPECT_FALSE(shortlex_less(al.parse("ab"), al.parse("ab")));
}
