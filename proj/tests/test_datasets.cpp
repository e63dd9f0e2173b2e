#include "prefforge/datasets.hpp"

#include <string>

#include "doctest.h"
#include "prefforge/errors.hpp"
#include "prefforge/rng.hpp"
#include "support/builders.hpp"
#include "support/tempdir.hpp"

using namespace prefforge;
using testing::Resp;
using testing::TempDir;

namespace {

const char* kValidResponses =
    R"({"rid":"r1","qid":"q1","text":"a \\boxed{4}","steps":["s1","s2"],"answer":"4","correct":true,"temperature":0.7,"epoch":1}
{"rid":"r2","qid":"q1","text":"b","steps":[],"temperature":1.0,"epoch":1}
{"rid":"r3","qid":"q2","text":"c","steps":["s"],"step_scores":[0.5],"orm_score":0.25,"temperature":1.2,"epoch":2}
)";

}  // namespace

TEST_CASE("parse_responses groups by qid preserving order") {
  TempDir tmp;
  const auto path = tmp.write("r.jsonl", kValidResponses);
  const auto groups = datasets::parse_responses(path);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].qid == "q1");
  CHECK(groups[0].responses.size() == 2);
  CHECK(groups[0].responses[0].rid == "r1");
  CHECK(groups[0].responses[1].rid == "r2");
  CHECK(groups[1].qid == "q2");
  CHECK(groups[1].responses.size() == 1);
  CHECK(*groups[1].responses[0].orm_score == doctest::Approx(0.25));
  // tri-state: r2 carries no label at all
  CHECK(!groups[0].responses[1].correct.has_value());
  CHECK(*groups[0].responses[0].correct);
}

TEST_CASE("parse_responses rejects step_scores/steps length mismatch with line number") {
  TempDir tmp;
  const auto path = tmp.write(
      "bad.jsonl",
      R"({"rid":"r1","qid":"q1","text":"","steps":["a","b"],"step_scores":[0.1],"temperature":1.0,"epoch":0})"
      "\n");
  CHECK_THROWS_WITH_AS(datasets::parse_responses(path),
                       doctest::Contains("step_scores"), ParseError);
  try {
    datasets::parse_responses(path);
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
}

TEST_CASE("parse_responses: empty file gives empty collection") {
  TempDir tmp;
  CHECK(datasets::parse_responses(tmp.write("empty.jsonl", "")).empty());
}

TEST_CASE("parse_responses rejects duplicate rid and malformed lines") {
  TempDir tmp;
  const auto dup = tmp.write(
      "dup.jsonl",
      R"({"rid":"r1","qid":"q1","text":"","steps":[],"temperature":1.0,"epoch":0})"
      "\n"
      R"({"rid":"r1","qid":"q2","text":"","steps":[],"temperature":1.0,"epoch":0})"
      "\n");
  CHECK_THROWS_WITH_AS(datasets::parse_responses(dup), doctest::Contains("duplicate rid"),
                       ParseError);

  const auto bad = tmp.write("bad.jsonl", "{not json\n");
  CHECK_THROWS_WITH_AS(datasets::parse_responses(bad), doctest::Contains(":1:"),
                       ParseError);
}

TEST_CASE("unknown keys are schema errors") {
  TempDir tmp;
  const auto path = tmp.write(
      "typo.jsonl",
      R"({"rid":"r1","qid":"q1","text":"","steps":[],"temperatur":1.0,"epoch":0})"
      "\n");
  CHECK_THROWS_WITH_AS(datasets::parse_responses(path), doctest::Contains("temperatur"),
                       ParseError);
}

TEST_CASE("write_pairs round-trips and is atomic about invariants") {
  TempDir tmp;
  std::vector<datasets::PreferencePair> pairs{
      {"q1", "r1", "r2", datasets::Strategy::Vp, false},
      {"q1", "r3", "r4", datasets::Strategy::PrmOffset, true},
      {"q2", "r5", "r6", datasets::Strategy::Outcome, false},
  };
  const auto path = tmp.file("pairs.jsonl");
  datasets::write_pairs(pairs, path);
  CHECK(datasets::parse_pairs(path) == pairs);

  SUBCASE("empty list yields empty file") {
    datasets::write_pairs({}, tmp.file("none.jsonl"));
    CHECK(datasets::parse_pairs(tmp.file("none.jsonl")).empty());
  }
  SUBCASE("degenerate pair is rejected before write") {
    pairs.push_back({"q3", "r7", "r7", datasets::Strategy::Vp, false});
    CHECK_THROWS_AS(datasets::write_pairs(pairs, tmp.file("bad.jsonl")), Error);
    CHECK(!std::filesystem::exists(tmp.file("bad.jsonl")));
  }
}

TEST_CASE("response round-trip is field-for-field over randomized records") {
  TempDir tmp;
  rng::SplitMix64 gen(99);
  std::vector<datasets::ResponseRecord> records;
  for (int i = 0; i < 200; ++i) {
    Resp b("r" + std::to_string(i), "q" + std::to_string(gen.next_below(20)));
    b.text("text " + std::to_string(gen.next()));
    b.temperature(0.1 + gen.next_double());
    b.epoch(static_cast<int>(gen.next_below(5)));
    if (gen.next_below(2)) b.answer(std::to_string(gen.next_below(100)));
    if (gen.next_below(2)) b.correct(gen.next_below(2) == 0);
    if (gen.next_below(2)) b.orm(gen.next_double());
    if (gen.next_below(2)) {
      const std::size_t n = 1 + gen.next_below(4);
      std::vector<double> scores;
      for (std::size_t s = 0; s < n; ++s) scores.push_back(gen.next_double());
      b.scores(scores);
    }
    records.push_back(b.build());
  }
  const auto path = tmp.file("roundtrip.jsonl");
  datasets::write_responses(records, path);
  const auto groups = datasets::parse_responses(path);

  // Grouping is a partition: every record appears exactly once.
  std::size_t total = 0;
  std::vector<datasets::ResponseRecord> flat;
  for (const auto& g : groups) {
    total += g.responses.size();
    for (const auto& r : g.responses) {
      CHECK(r.qid == g.qid);
      flat.push_back(r);
    }
  }
  CHECK(total == records.size());
  for (const auto& original : records) {
    const auto it = std::find_if(flat.begin(), flat.end(), [&](const auto& r) {
      return r.rid == original.rid;
    });
    REQUIRE(it != flat.end());
    CHECK(*it == original);
  }
}

TEST_CASE("validate_schema reports violations instead of throwing") {
  TempDir tmp;
  SUBCASE("valid file yields empty report") {
    const auto path = tmp.write("ok.jsonl", kValidResponses);
    CHECK(datasets::validate_schema(path, datasets::RecordKind::Responses).ok());
  }
  SUBCASE("temperature = 0 is flagged by field name") {
    const auto path = tmp.write(
        "temp.jsonl",
        R"({"rid":"r1","qid":"q1","text":"","steps":[],"temperature":0.0,"epoch":0})"
        "\n");
    const auto report = datasets::validate_schema(path, datasets::RecordKind::Responses);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].field == "temperature");
    CHECK(report.violations[0].line == 1);
  }
  SUBCASE("dangling pair reference against a responses file") {
    const auto responses = tmp.write(
        "r.jsonl",
        R"({"rid":"r1","qid":"q1","text":"","steps":[],"temperature":1.0,"epoch":0})"
        "\n"
        R"({"rid":"r2","qid":"q1","text":"","steps":[],"temperature":1.0,"epoch":0})"
        "\n");
    const auto pairs = tmp.write(
        "p.jsonl",
        R"({"qid":"q1","chosen_rid":"r1","rejected_rid":"r2","strategy":"vp","is_offset":false})"
        "\n"
        R"({"qid":"q1","chosen_rid":"r1","rejected_rid":"missing","strategy":"vp","is_offset":false})"
        "\n");
    const auto report =
        datasets::validate_schema(pairs, datasets::RecordKind::Pairs, responses);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].line == 2);
    CHECK(report.violations[0].message.find("dangling") != std::string::npos);
  }
}

TEST_CASE("questions parse and enforce uniqueness") {
  TempDir tmp;
  const auto path = tmp.write("q.jsonl",
                              R"({"qid":"q1","prompt":"p","reference_answer":"4"})"
                              "\n"
                              R"({"qid":"q1","prompt":"p2","reference_answer":"5"})"
                              "\n");
  CHECK_THROWS_WITH_AS(datasets::parse_questions(path), doctest::Contains("duplicate qid"),
                       ParseError);
}
