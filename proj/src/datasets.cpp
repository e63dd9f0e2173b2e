#include "prefforge/datasets.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "prefforge/errors.hpp"

namespace prefforge::datasets {

using ordered_json = nlohmann::ordered_json;

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Outcome: return "outcome";
    case Strategy::Orm: return "orm";
    case Strategy::Prm: return "prm";
    case Strategy::PrmOffset: return "prm_offset";
    case Strategy::Vp: return "vp";
  }
  throw Error("unreachable strategy value");
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "outcome") return Strategy::Outcome;
  if (name == "orm") return Strategy::Orm;
  if (name == "prm") return Strategy::Prm;
  if (name == "prm_offset") return Strategy::PrmOffset;
  if (name == "vp") return Strategy::Vp;
  throw Error("unknown strategy '" + name +
              "' (expected outcome|orm|prm|prm_offset|vp)");
}

RecordKind record_kind_from_name(const std::string& name) {
  if (name == "questions") return RecordKind::Questions;
  if (name == "responses") return RecordKind::Responses;
  if (name == "pairs") return RecordKind::Pairs;
  throw Error("unknown record kind '" + name + "'");
}

namespace {

// Field-level schema check of one parsed object. Returns the violated
// field + message, or nothing when the record is valid. Shared between the
// throwing parsers and the collecting validator.
struct FieldIssue {
  std::string field;
  std::string message;
};

std::optional<FieldIssue> expect_string(const ordered_json& j, const char* key,
                                        bool non_empty = false) {
  if (!j.contains(key)) return FieldIssue{key, "missing required key"};
  if (!j.at(key).is_string()) return FieldIssue{key, "expected a string"};
  if (non_empty && j.at(key).get<std::string>().empty())
    return FieldIssue{key, "must be non-empty"};
  return std::nullopt;
}

std::optional<FieldIssue> check_question(const ordered_json& j) {
  if (!j.is_object()) return FieldIssue{"", "record is not a JSON object"};
  static const std::set<std::string> known = {"qid", "prompt", "reference_answer"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) return FieldIssue{key, "unknown key"};
  if (auto i = expect_string(j, "qid", true)) return i;
  if (auto i = expect_string(j, "prompt")) return i;
  if (auto i = expect_string(j, "reference_answer", true)) return i;
  return std::nullopt;
}

std::optional<FieldIssue> check_response(const ordered_json& j) {
  if (!j.is_object()) return FieldIssue{"", "record is not a JSON object"};
  static const std::set<std::string> known = {
      "rid", "qid", "text", "steps", "answer", "correct",
      "orm_score", "step_scores", "temperature", "epoch"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) return FieldIssue{key, "unknown key"};
  if (auto i = expect_string(j, "rid", true)) return i;
  if (auto i = expect_string(j, "qid", true)) return i;
  if (auto i = expect_string(j, "text")) return i;

  if (!j.contains("steps")) return FieldIssue{"steps", "missing required key"};
  if (!j.at("steps").is_array()) return FieldIssue{"steps", "expected an array"};
  for (const auto& s : j.at("steps"))
    if (!s.is_string()) return FieldIssue{"steps", "expected strings"};

  if (j.contains("answer") && !j.at("answer").is_string())
    return FieldIssue{"answer", "expected a string"};
  if (j.contains("correct") && !j.at("correct").is_boolean())
    return FieldIssue{"correct", "expected a boolean"};
  if (j.contains("orm_score")) {
    if (!j.at("orm_score").is_number())
      return FieldIssue{"orm_score", "expected a number"};
    if (!std::isfinite(j.at("orm_score").get<double>()))
      return FieldIssue{"orm_score", "must be finite"};
  }
  if (j.contains("step_scores")) {
    const auto& ss = j.at("step_scores");
    if (!ss.is_array()) return FieldIssue{"step_scores", "expected an array"};
    for (const auto& v : ss) {
      if (!v.is_number()) return FieldIssue{"step_scores", "expected numbers"};
      const double x = v.get<double>();
      if (!(x >= 0.0 && x <= 1.0))
        return FieldIssue{"step_scores", "values must lie in [0,1]"};
    }
    if (ss.size() != j.at("steps").size())
      return FieldIssue{"step_scores", "length must equal steps length"};
    if (j.at("steps").empty())
      return FieldIssue{"step_scores", "present but steps is empty"};
  }
  if (!j.contains("temperature"))
    return FieldIssue{"temperature", "missing required key"};
  if (!j.at("temperature").is_number())
    return FieldIssue{"temperature", "expected a number"};
  if (!(j.at("temperature").get<double>() > 0.0))
    return FieldIssue{"temperature", "must be > 0"};
  if (!j.contains("epoch")) return FieldIssue{"epoch", "missing required key"};
  if (!j.at("epoch").is_number_integer())
    return FieldIssue{"epoch", "expected an integer"};
  if (j.at("epoch").get<std::int64_t>() < 0)
    return FieldIssue{"epoch", "must be non-negative"};
  return std::nullopt;
}

std::optional<FieldIssue> check_pair(const ordered_json& j) {
  if (!j.is_object()) return FieldIssue{"", "record is not a JSON object"};
  static const std::set<std::string> known = {"qid", "chosen_rid", "rejected_rid",
                                              "strategy", "is_offset"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) return FieldIssue{key, "unknown key"};
  if (auto i = expect_string(j, "qid", true)) return i;
  if (auto i = expect_string(j, "chosen_rid", true)) return i;
  if (auto i = expect_string(j, "rejected_rid", true)) return i;
  if (j.at("chosen_rid") == j.at("rejected_rid"))
    return FieldIssue{"rejected_rid", "chosen_rid and rejected_rid must differ"};
  if (auto i = expect_string(j, "strategy", true)) return i;
  try {
    strategy_from_name(j.at("strategy").get<std::string>());
  } catch (const Error& e) {
    return FieldIssue{"strategy", e.what()};
  }
  if (!j.contains("is_offset")) return FieldIssue{"is_offset", "missing required key"};
  if (!j.at("is_offset").is_boolean())
    return FieldIssue{"is_offset", "expected a boolean"};
  return std::nullopt;
}

QuestionRecord question_from_json(const ordered_json& j) {
  return QuestionRecord{j.at("qid").get<std::string>(),
                        j.at("prompt").get<std::string>(),
                        j.at("reference_answer").get<std::string>()};
}

ResponseRecord response_from_json(const ordered_json& j) {
  ResponseRecord r;
  r.rid = j.at("rid").get<std::string>();
  r.qid = j.at("qid").get<std::string>();
  r.text = j.at("text").get<std::string>();
  r.steps = j.at("steps").get<std::vector<std::string>>();
  if (j.contains("answer")) r.answer = j.at("answer").get<std::string>();
  if (j.contains("correct")) r.correct = j.at("correct").get<bool>();
  if (j.contains("orm_score")) r.orm_score = j.at("orm_score").get<double>();
  if (j.contains("step_scores"))
    r.step_scores = j.at("step_scores").get<std::vector<double>>();
  r.temperature = j.at("temperature").get<double>();
  r.epoch = j.at("epoch").get<int>();
  return r;
}

PreferencePair pair_from_json(const ordered_json& j) {
  PreferencePair p;
  p.qid = j.at("qid").get<std::string>();
  p.chosen_rid = j.at("chosen_rid").get<std::string>();
  p.rejected_rid = j.at("rejected_rid").get<std::string>();
  p.strategy = strategy_from_name(j.at("strategy").get<std::string>());
  p.is_offset = j.at("is_offset").get<bool>();
  return p;
}

ordered_json question_to_json(const QuestionRecord& r) {
  ordered_json j;
  j["qid"] = r.qid;
  j["prompt"] = r.prompt;
  j["reference_answer"] = r.reference_answer;
  return j;
}

ordered_json response_to_json(const ResponseRecord& r) {
  ordered_json j;
  j["rid"] = r.rid;
  j["qid"] = r.qid;
  j["text"] = r.text;
  j["steps"] = r.steps;
  if (r.answer) j["answer"] = *r.answer;
  if (r.correct) j["correct"] = *r.correct;
  if (r.orm_score) j["orm_score"] = *r.orm_score;
  if (r.step_scores) j["step_scores"] = *r.step_scores;
  j["temperature"] = r.temperature;
  j["epoch"] = r.epoch;
  return j;
}

ordered_json pair_to_json(const PreferencePair& p) {
  ordered_json j;
  j["qid"] = p.qid;
  j["chosen_rid"] = p.chosen_rid;
  j["rejected_rid"] = p.rejected_rid;
  j["strategy"] = strategy_name(p.strategy);
  j["is_offset"] = p.is_offset;
  return j;
}

// Streams non-empty lines of a JSONL file through `fn(line_no, json)`.
template <class Fn>
void for_each_line(const std::filesystem::path& path, bool throw_on_bad_json,
                   Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      if (throw_on_bad_json)
        throw ParseError(path.string(), line_no, "malformed JSON");
      fn(line_no, ordered_json());  // signalled via is_null + callback contract
      continue;
    }
    fn(line_no, std::move(j));
  }
}

void atomic_write(const std::filesystem::path& path, const std::string& payload) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << payload;
    out.flush();
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move " + tmp.string() + " to " + path.string());
  }
}

void require_pair_invariants(const PreferencePair& p) {
  if (p.qid.empty() || p.chosen_rid.empty() || p.rejected_rid.empty())
    throw Error("pair has empty ids (qid '" + p.qid + "')");
  if (p.chosen_rid == p.rejected_rid)
    throw Error("pair for qid '" + p.qid + "' has chosen_rid == rejected_rid ('" +
                p.chosen_rid + "')");
}

}  // namespace

std::string to_json_line(const QuestionRecord& r) { return question_to_json(r).dump(); }
std::string to_json_line(const ResponseRecord& r) { return response_to_json(r).dump(); }
std::string to_json_line(const PreferencePair& r) { return pair_to_json(r).dump(); }

std::vector<QuestionRecord> parse_questions(const std::filesystem::path& path) {
  std::vector<QuestionRecord> out;
  std::unordered_set<std::string> seen;
  for_each_line(path, true, [&](std::size_t line_no, ordered_json j) {
    if (auto issue = check_question(j))
      throw ParseError(path.string(), line_no, issue->field + ": " + issue->message);
    QuestionRecord q = question_from_json(j);
    if (!seen.insert(q.qid).second)
      throw ParseError(path.string(), line_no, "duplicate qid '" + q.qid + "'");
    out.push_back(std::move(q));
  });
  return out;
}

std::vector<ResponseGroup> parse_responses(const std::filesystem::path& path) {
  std::vector<ResponseGroup> groups;
  std::unordered_map<std::string, std::size_t> group_index;
  std::unordered_set<std::string> seen_rids;
  for_each_line(path, true, [&](std::size_t line_no, ordered_json j) {
    if (auto issue = check_response(j))
      throw ParseError(path.string(), line_no, issue->field + ": " + issue->message);
    ResponseRecord r = response_from_json(j);
    if (!seen_rids.insert(r.rid).second)
      throw ParseError(path.string(), line_no, "duplicate rid '" + r.rid + "'");
    auto [it, fresh] = group_index.try_emplace(r.qid, groups.size());
    if (fresh) groups.push_back(ResponseGroup{r.qid, {}});
    groups[it->second].responses.push_back(std::move(r));
  });
  return groups;
}

std::vector<PreferencePair> parse_pairs(const std::filesystem::path& path) {
  std::vector<PreferencePair> out;
  for_each_line(path, true, [&](std::size_t line_no, ordered_json j) {
    if (auto issue = check_pair(j))
      throw ParseError(path.string(), line_no, issue->field + ": " + issue->message);
    out.push_back(pair_from_json(j));
  });
  return out;
}

void write_questions(const std::vector<QuestionRecord>& records,
                     const std::filesystem::path& path) {
  std::string payload;
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (r.qid.empty()) throw Error("question with empty qid");
    if (r.reference_answer.empty())
      throw Error("question '" + r.qid + "' has empty reference_answer");
    if (!seen.insert(r.qid).second) throw Error("duplicate qid '" + r.qid + "'");
    payload += question_to_json(r).dump();
    payload += '\n';
  }
  atomic_write(path, payload);
}

void write_responses(const std::vector<ResponseRecord>& records,
                     const std::filesystem::path& path) {
  std::string payload;
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    ordered_json j = response_to_json(r);
    if (auto issue = check_response(j))
      throw Error("response '" + r.rid + "': " + issue->field + ": " + issue->message);
    if (!seen.insert(r.rid).second) throw Error("duplicate rid '" + r.rid + "'");
    payload += j.dump();
    payload += '\n';
  }
  atomic_write(path, payload);
}

void write_pairs(const std::vector<PreferencePair>& pairs,
                 const std::filesystem::path& path) {
  std::string payload;
  for (const auto& p : pairs) {
    require_pair_invariants(p);
    payload += pair_to_json(p).dump();
    payload += '\n';
  }
  atomic_write(path, payload);
}

ValidationReport validate_schema(
    const std::filesystem::path& path, RecordKind kind,
    const std::optional<std::filesystem::path>& crosscheck_responses) {
  ValidationReport report;
  std::unordered_set<std::string> seen_ids;
  std::vector<std::pair<std::size_t, PreferencePair>> parsed_pairs;

  for_each_line(path, false, [&](std::size_t line_no, ordered_json j) {
    if (j.is_null()) {
      report.violations.push_back({line_no, "", "malformed JSON"});
      return;
    }
    std::optional<FieldIssue> issue;
    switch (kind) {
      case RecordKind::Questions:
        issue = check_question(j);
        if (!issue && !seen_ids.insert(j.at("qid").get<std::string>()).second)
          issue = FieldIssue{"qid", "duplicate qid"};
        break;
      case RecordKind::Responses:
        issue = check_response(j);
        if (!issue && !seen_ids.insert(j.at("rid").get<std::string>()).second)
          issue = FieldIssue{"rid", "duplicate rid"};
        break;
      case RecordKind::Pairs:
        issue = check_pair(j);
        if (!issue) parsed_pairs.emplace_back(line_no, pair_from_json(j));
        break;
    }
    if (issue)
      report.violations.push_back({line_no, issue->field, issue->message});
  });

  if (kind == RecordKind::Pairs && crosscheck_responses) {
    std::unordered_map<std::string, std::string> rid_to_qid;
    for (const auto& g : parse_responses(*crosscheck_responses))
      for (const auto& r : g.responses) rid_to_qid[r.rid] = r.qid;
    for (const auto& [line_no, p] : parsed_pairs) {
      for (const std::string& rid : {p.chosen_rid, p.rejected_rid}) {
        auto it = rid_to_qid.find(rid);
        if (it == rid_to_qid.end()) {
          report.violations.push_back(
              {line_no, "rid", "dangling reference: rid '" + rid +
                                   "' not present in responses file"});
        } else if (it->second != p.qid) {
          report.violations.push_back(
              {line_no, "qid", "rid '" + rid + "' belongs to qid '" + it->second +
                                   "', not '" + p.qid + "'"});
        }
      }
    }
  }
  return report;
}

}  // namespace prefforge::datasets
