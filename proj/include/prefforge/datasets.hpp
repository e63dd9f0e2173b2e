#ifndef PREFFORGE_DATASETS_HPP_
#define PREFFORGE_DATASETS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace prefforge::datasets {

// One question with its canonical answer. qids are unique within a file.
struct QuestionRecord {
  std::string qid;
  std::string prompt;
  std::string reference_answer;

  bool operator==(const QuestionRecord&) const = default;
};

// One sampled answer to a question. Optional fields are omitted keys on
// disk, never nulls, so `correct` keeps a real tri-state.
struct ResponseRecord {
  std::string rid;
  std::string qid;
  std::string text;
  std::vector<std::string> steps;
  std::optional<std::string> answer;
  std::optional<bool> correct;
  std::optional<double> orm_score;
  std::optional<std::vector<double>> step_scores;  // in [0,1], one per step
  double temperature = 1.0;                        // > 0
  int epoch = 0;                                   // >= 0

  bool operator==(const ResponseRecord&) const = default;
};

enum class Strategy { Outcome, Orm, Prm, PrmOffset, Vp };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

// A (chosen, rejected) response pair plus the strategy that produced it.
struct PreferencePair {
  std::string qid;
  std::string chosen_rid;
  std::string rejected_rid;
  Strategy strategy = Strategy::Outcome;
  bool is_offset = false;

  bool operator==(const PreferencePair&) const = default;
};

// All responses of one question, in file order.
struct ResponseGroup {
  std::string qid;
  std::vector<ResponseRecord> responses;

  bool operator==(const ResponseGroup&) const = default;
};

// ---- parsing / serialization (JSON Lines, UTF-8) --------------------------

std::vector<QuestionRecord> parse_questions(const std::filesystem::path& path);

// Groups preserve qid first-appearance order and file order within a group.
// Malformed lines and duplicate rids raise ParseError.
std::vector<ResponseGroup> parse_responses(const std::filesystem::path& path);

std::vector<PreferencePair> parse_pairs(const std::filesystem::path& path);

// Writers validate record invariants first, then write atomically
// (temp file + rename). parse(write(x)) == x field-for-field.
void write_questions(const std::vector<QuestionRecord>& records,
                     const std::filesystem::path& path);
void write_responses(const std::vector<ResponseRecord>& records,
                     const std::filesystem::path& path);
void write_pairs(const std::vector<PreferencePair>& pairs,
                 const std::filesystem::path& path);

// Single-record JSON codecs, exposed for report tooling and tests.
std::string to_json_line(const QuestionRecord& r);
std::string to_json_line(const ResponseRecord& r);
std::string to_json_line(const PreferencePair& r);

// ---- validation ------------------------------------------------------------

enum class RecordKind { Questions, Responses, Pairs };

RecordKind record_kind_from_name(const std::string& name);

struct Violation {
  std::size_t line = 0;  // 1-based; 0 = whole-file problem
  std::string field;
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Collects every violating line with its reason; a valid file yields an
// empty report. Violations are data, not errors: nothing is thrown for
// them. When `crosscheck_responses` is given and kind == Pairs, pair rids
// are also checked against that responses file (dangling references).
ValidationReport validate_schema(
    const std::filesystem::path& path, RecordKind kind,
    const std::optional<std::filesystem::path>& crosscheck_responses = {});

}  // namespace prefforge::datasets

#endif  // PREFFORGE_DATASETS_HPP_
