#include "prefforge/verification.hpp"

#include "doctest.h"
#include "prefforge/errors.hpp"
#include "prefforge/rng.hpp"
#include "support/builders.hpp"

using namespace prefforge;
using verification::answers_equivalent;
using verification::extract_answer;

TEST_CASE("extract_answer takes the last balanced boxed group") {
  CHECK(extract_answer("so the result is \\boxed{42}.") == "42");
  CHECK(extract_answer("first \\boxed{1}, revised \\boxed{\\frac{1}{2}}") ==
        "\\frac{1}{2}");
  CHECK(!extract_answer("no box here"));
  CHECK(!extract_answer("broken \\boxed{1 + {2}"));
  // an earlier complete box does not rescue an unbalanced last one
  CHECK(!extract_answer("ok \\boxed{1} then \\boxed{2"));
  CHECK(extract_answer("empty \\boxed{}") == "");
}

TEST_CASE("extract_answer is idempotent through re-boxing") {
  rng::SplitMix64 gen(4);
  const std::string pool = "ax1+{}\\ ";
  for (int i = 0; i < 300; ++i) {
    std::string text = "noise ";
    for (int j = 0; j < 12; ++j) text += pool[gen.next_below(pool.size())];
    const auto first = extract_answer(text);
    if (!first) continue;
    const auto again = extract_answer("\\boxed{" + *first + "}");
    REQUIRE(again.has_value());
    CHECK(*again == *first);
  }
}

TEST_CASE("answers_equivalent canonicalizes and falls back to exact rationals") {
  CHECK(answers_equivalent("1/2", " $1/2$ "));
  CHECK(answers_equivalent("0.5", "1/2"));
  CHECK(!answers_equivalent("x+1", "1+x"));
  CHECK(answers_equivalent("0.50", "1/2"));
  CHECK(answers_equivalent("-3", "-3.0"));
  CHECK(answers_equivalent("-1/2", "-0.5"));
  CHECK(answers_equivalent("042", "42"));
  CHECK(answers_equivalent("a  b", "a b"));  // collapsed whitespace
  CHECK(!answers_equivalent("1/0", "2/0"));  // zero denominators never parse
  CHECK(!answers_equivalent("0.5", "0.51"));
  CHECK(!answers_equivalent("\\frac{1}{2}", "0.5"));  // no LaTeX rewriting
  CHECK_THROWS_AS(answers_equivalent("", "1"), Error);
}

TEST_CASE("answers_equivalent is symmetric and reflexive") {
  const std::vector<std::string> samples = {"1/2", "0.5",  "3",   "$3$", "-7",
                                            "x+1", "10/4", "2.5", "abc", "0.125"};
  for (const auto& a : samples) {
    CHECK(answers_equivalent(a, a));
    for (const auto& b : samples)
      CHECK(answers_equivalent(a, b) == answers_equivalent(b, a));
  }
}

TEST_CASE("label_outcome grades against the reference answer") {
  const datasets::QuestionRecord q42{"q1", "prompt", "42"};
  const datasets::QuestionRecord qhalf{"q2", "prompt", "1/2"};

  auto labeled = verification::label_outcome(
      testing::Resp("r1", "q1").text("thus \\boxed{42}").build(), q42);
  CHECK(*labeled.correct);
  CHECK(*labeled.answer == "42");

  labeled = verification::label_outcome(
      testing::Resp("r2", "q1").text("no final answer").build(), q42);
  CHECK(!*labeled.correct);  // unextractable counts as incorrect
  CHECK(!labeled.answer.has_value());

  labeled = verification::label_outcome(
      testing::Resp("r3", "q2").text("so \\boxed{0.50}").build(), qhalf);
  CHECK(*labeled.correct);
}

TEST_CASE("filter_annotations keeps only consistency-matched annotations") {
  using verification::StepAnnotation;
  const std::vector<StepAnnotation> input = {
      {"a", {true, true, true}, true},    // retained: matches + clean process
      {"b", {true, false, true}, true},   // dropped: inconsistent
      {"c", {true, true}, false},         // dropped: mismatch but clean process
      {"d", {true, false}, false},        // retained: mismatch + flagged step
  };
  const auto kept = verification::filter_annotations(input);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].rid == "a");
  CHECK(kept[1].rid == "d");
}

TEST_CASE("filter_annotations output is the exact predicate subset") {
  rng::SplitMix64 gen(11);
  std::vector<verification::StepAnnotation> input;
  for (int i = 0; i < 500; ++i) {
    verification::StepAnnotation a;
    a.rid = "r" + std::to_string(i);
    const std::size_t n = 1 + gen.next_below(5);
    for (std::size_t j = 0; j < n; ++j) a.step_labels.push_back(gen.next_below(2) == 0);
    a.outcome_matches_reference = gen.next_below(2) == 0;
    input.push_back(std::move(a));
  }
  const auto kept = verification::filter_annotations(input);
  auto predicate = [](const verification::StepAnnotation& a) {
    const bool all_ok =
        std::all_of(a.step_labels.begin(), a.step_labels.end(), [](bool b) { return b; });
    return a.outcome_matches_reference ? all_ok : !all_ok;
  };
  std::size_t expected = 0;
  for (const auto& a : input)
    if (predicate(a)) ++expected;
  CHECK(kept.size() == expected);
  for (const auto& a : kept) CHECK(predicate(a));
}
