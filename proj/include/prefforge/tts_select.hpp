#ifndef PREFFORGE_TTS_SELECT_HPP_
#define PREFFORGE_TTS_SELECT_HPP_

#include <string>
#include <vector>

#include "prefforge/datasets.hpp"

namespace prefforge::tts_select {

// Test-time selectors over one question's response group. All three break
// ties by earliest first occurrence, so they are deterministic and
// permutation-covariant up to ties.

// Most frequent answer-equivalence class; returns the class representative
// (its first-seen spelling).
std::string majority_vote(const std::vector<std::string>& answers);

// Majority vote weighted by each response's minimum step reward: the class
// weight is the sum of min_step_score over its members. Every response
// needs step_scores and an extracted answer.
std::string prm_min_vote(const datasets::ResponseGroup& group);

// The response maximizing min_step_score.
datasets::ResponseRecord best_of_n(const datasets::ResponseGroup& group);

}  // namespace prefforge::tts_select

#endif  // PREFFORGE_TTS_SELECT_HPP_
