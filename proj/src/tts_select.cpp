#include "prefforge/tts_select.hpp"

#include "prefforge/errors.hpp"
#include "prefforge/pair_selection.hpp"
#include "prefforge/verification.hpp"

namespace prefforge::tts_select {

namespace {

// Answer-equivalence classes in first-occurrence order. The representative
// keeps the first-seen spelling.
struct AnswerClass {
  std::string representative;
  int count = 0;
  double weight = 0.0;
};

std::size_t class_of(std::vector<AnswerClass>& classes, const std::string& answer) {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (verification::answers_equivalent(classes[i].representative, answer)) return i;
  classes.push_back(AnswerClass{answer, 0, 0.0});
  return classes.size() - 1;
}

}  // namespace

std::string majority_vote(const std::vector<std::string>& answers) {
  if (answers.empty()) throw Error("majority_vote on an empty answer list");
  std::vector<AnswerClass> classes;
  for (const auto& a : answers) classes[class_of(classes, a)].count += 1;
  std::size_t best = 0;
  for (std::size_t i = 1; i < classes.size(); ++i)
    if (classes[i].count > classes[best].count) best = i;
  return classes[best].representative;
}

std::string prm_min_vote(const datasets::ResponseGroup& group) {
  if (group.responses.empty()) throw Error("prm_min_vote on an empty group");
  std::vector<AnswerClass> classes;
  for (const auto& r : group.responses) {
    if (!r.step_scores) throw Error("response '" + r.rid + "' has no step_scores");
    if (!r.answer || r.answer->empty())
      throw Error("response '" + r.rid + "' has no extracted answer");
    classes[class_of(classes, *r.answer)].weight +=
        pair_selection::min_step_score(*r.step_scores);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < classes.size(); ++i)
    if (classes[i].weight > classes[best].weight) best = i;
  return classes[best].representative;
}

datasets::ResponseRecord best_of_n(const datasets::ResponseGroup& group) {
  if (group.responses.empty()) throw Error("best_of_n on an empty group");
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < group.responses.size(); ++i) {
    const auto& r = group.responses[i];
    if (!r.step_scores) throw Error("response '" + r.rid + "' has no step_scores");
    const double s = pair_selection::min_step_score(*r.step_scores);
    if (i == 0 || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return group.responses[best];
}

}  // namespace prefforge::tts_select
