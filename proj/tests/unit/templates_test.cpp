#include <gtest/gtest.h>

#include "confbandit/templates.hpp"

using confbandit::fill_template;

TEST(Templates, SubstitutesKnownPlaceholders) {
  EXPECT_EQ(fill_template("a {x} b {y}", {{"x", "1"}, {"y", "2"}}), "a 1 b 2");
}

TEST(Templates, KeepsUnknownBracesVerbatim) {
  EXPECT_EQ(fill_template("{\n  \"k\": 1\n} {z}", {{"x", "1"}}), "{\n  \"k\": 1\n} {z}");
  EXPECT_EQ(fill_template("open { only", {}), "open { only");
}

TEST(Templates, SinglePassDoesNotReexpandValues) {
  EXPECT_EQ(fill_template("{a}{b}", {{"a", "{b}"}, {"b", "x"}}), "{b}x");
}

TEST(Templates, RepeatedPlaceholder) {
  EXPECT_EQ(fill_template("{x}-{x}", {{"x", "q"}}), "q-q");
}
