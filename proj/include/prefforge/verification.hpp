#ifndef PREFFORGE_VERIFICATION_HPP_
#define PREFFORGE_VERIFICATION_HPP_

#include <optional>
#include <string>
#include <vector>

#include "prefforge/datasets.hpp"

namespace prefforge::verification {

// Process-level labels for one response, as produced by an annotator.
struct StepAnnotation {
  std::string rid;
  std::vector<bool> step_labels;  // true = step judged correct; non-empty
  bool outcome_matches_reference = false;

  bool operator==(const StepAnnotation&) const = default;
};

// Content of the last balanced `\boxed{...}` group, or nullopt when there
// is none or the last group never closes.
std::optional<std::string> extract_answer(const std::string& text);

// Canonical form used for answer comparison: trim, strip enclosing `$`
// pairs, collapse internal whitespace. No LaTeX rewriting beyond that.
std::string canonicalize_answer(const std::string& answer);

// True iff canonical forms match exactly, or both parse as rationals or
// finite decimals with equal value. Both inputs must be non-empty.
bool answers_equivalent(const std::string& a, const std::string& b);

// Sets `answer` to the extracted answer and `correct` to whether it is
// equivalent to the reference. Unextractable answers count as incorrect.
datasets::ResponseRecord label_outcome(const datasets::ResponseRecord& response,
                                       const datasets::QuestionRecord& question);

// Keeps annotations whose step labels are consistent with the outcome:
// matching outcomes need an all-correct process, mismatching outcomes need
// at least one flagged step.
std::vector<StepAnnotation> filter_annotations(
    const std::vector<StepAnnotation>& annotations);

}  // namespace prefforge::verification

#endif  // PREFFORGE_VERIFICATION_HPP_
