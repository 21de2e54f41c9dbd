// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "rtcg/csyntax.hpp"

namespace cs = rtcg::csyntax;

TEST(Substitute, ReplacesEveryPlaceholder) {
  EXPECT_EQ(cs::substitute("${tp} *x, ${tp} *y", {{"tp", "float"}}), "float *x, float *y");
  EXPECT_EQ(cs::substitute("a${x}b${y}c", {{"x", "1"}, {"y", "2"}}), "a1b2c");
}

TEST(Substitute, TextWithoutPlaceholdersIsUnchanged) {
  EXPECT_EQ(cs::substitute("z[i] = x[i] + y[i];", {}), "z[i] = x[i] + y[i];");
  EXPECT_EQ(cs::substitute("", {{"unused", "v"}}), "");
  EXPECT_EQ(cs::substitute("$ {x} and $x", {}), "$ {x} and $x");
}

TEST(Substitute, UnboundPlaceholderThrows) {
  EXPECT_THROW(cs::substitute("${missing}", {}), rtcg::UnboundPlaceholder);
}

TEST(Substitute, MalformedPlaceholderThrows) {
  EXPECT_THROW(cs::substitute("${open", {{"open", "x"}}), rtcg::MalformedPlaceholder);
  EXPECT_THROW(cs::substitute("${}", {}), rtcg::MalformedPlaceholder);
  EXPECT_THROW(cs::substitute("${1abc}", {{"1abc", "x"}}), rtcg::MalformedPlaceholder);
}

TEST(Substitute, ReplacementTextIsNotRescanned) {
  EXPECT_EQ(cs::substitute("${a}", {{"a", "${b}"}, {"b", "no"}}), "${b}");
}

// substitute(substitute(t, B), B) == substitute(t, B) whenever the bound
// values contain no placeholders.
TEST(Substitute, IdempotentForPlaceholderFreeValues) {
  std::mt19937 rng(7);
  const std::vector<std::string> pieces{"${a}", "${b}", "x", "[i]", " ", "*", "$", "{", "}"};
  const cs::Bindings b{{"a", "float"}, {"b", "double *"}};
  for (int trial = 0; trial < 500; ++trial) {
    std::string t;
    const int len = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int k = 0; k < len; ++k)
      t += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
    std::string once;
    try {
      once = cs::substitute(t, b);
    } catch (const rtcg::TemplateError &) {
      continue; // random text may form a malformed placeholder
    }
    EXPECT_EQ(cs::substitute(once, b), once) << t;
  }
}

TEST(Render, ForLoopUnrollsHalfOpenRange) {
  EXPECT_EQ(cs::render("{% for k in 0..3 %}[${k}]{% endfor %}", {}), "[0][1][2]");
  EXPECT_EQ(cs::render("{% for k in 0..n %}${k},{% endfor %}", {{"n", std::int64_t{2}}}), "0,1,");
}

TEST(Render, EmptyRangeRendersNothing) {
  EXPECT_EQ(cs::render("a{% for k in 3..3 %}x{% endfor %}b", {}), "ab");
  EXPECT_EQ(cs::render("a{% for k in 5..2 %}x{% endfor %}b", {}), "ab");
}

TEST(Render, NestedLoopsAndConditionals) {
  const auto out = cs::render(
      "{% for r in 0..2 %}{% for c in 0..2 %}{% if c %}+{% endif %}${r}${c}{% endfor %};{% endfor %}",
      {});
  EXPECT_EQ(out, "00+01;10+11;");
}

TEST(Render, IfElseAndNegation) {
  const std::string t = "{% if flag %}yes{% else %}no{% endif %}/{% if not flag %}N{% endif %}";
  EXPECT_EQ(cs::render(t, {{"flag", true}}), "yes/");
  EXPECT_EQ(cs::render(t, {{"flag", false}}), "no/N");
  EXPECT_EQ(cs::render(t, {{"flag", std::int64_t{3}}}), "yes/");
  EXPECT_EQ(cs::render(t, {{"flag", std::int64_t{0}}}), "no/N");
}

TEST(Render, ValuesRenderAsText) {
  EXPECT_EQ(cs::render("${s} ${i} ${b}", {{"s", std::string("float")},
                                          {"i", std::int64_t{-4}},
                                          {"b", true}}),
            "float -4 1");
}

TEST(Render, UnboundVariableIsAnError) {
  EXPECT_THROW(cs::render("${nope}", {}), rtcg::UnboundVariable);
  EXPECT_THROW(cs::render("{% if nope %}x{% endif %}", {}), rtcg::UnboundVariable);
  EXPECT_THROW(cs::render("{% for k in 0..nope %}x{% endfor %}", {}), rtcg::UnboundVariable);
}

TEST(Render, NonIntegerBoundIsAnError) {
  EXPECT_THROW(cs::render("{% for k in 0..n %}x{% endfor %}", {{"n", std::string("4")}}),
               rtcg::NonIntegerBound);
}

TEST(Render, UnclosedBlocksAreErrors) {
  EXPECT_THROW(cs::render("{% for k in 0..2 %}x", {}), rtcg::UnclosedBlock);
  EXPECT_THROW(cs::render("{% if true %}x", {}), rtcg::UnclosedBlock);
  EXPECT_THROW(cs::render("{% for k in 0..2", {}), rtcg::UnclosedBlock);
}

TEST(Render, SyntaxErrors) {
  EXPECT_THROW(cs::render("{% endfor %}", {}), rtcg::TemplateSyntaxError);
  EXPECT_THROW(cs::render("{% while x %}{% endwhile %}", {}), rtcg::TemplateSyntaxError);
  EXPECT_THROW(cs::render("{% for k of 0..2 %}{% endfor %}", {}), rtcg::TemplateSyntaxError);
  EXPECT_THROW(cs::render("{% if a %}{% endfor %}", {{"a", true}}), rtcg::TemplateSyntaxError);
}

TEST(Render, LoopVariableShadowsAndRestores) {
  EXPECT_EQ(cs::render("${k}{% for k in 0..2 %}${k}{% endfor %}${k}", {{"k", std::int64_t{9}}}),
            "9019");
}

TEST(Template, ObjectFormMatchesFreeFunctions) {
  const cs::Template t("${a}{% for k in 0..2 %}${k}{% endfor %}");
  EXPECT_EQ(t.render({{"a", std::string("v")}}), "v01");
  EXPECT_THROW(t.substitute({{"a", "v"}}), rtcg::UnboundPlaceholder);
}
