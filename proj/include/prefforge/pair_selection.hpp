#ifndef PREFFORGE_PAIR_SELECTION_HPP_
#define PREFFORGE_PAIR_SELECTION_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "prefforge/datasets.hpp"

namespace prefforge::pair_selection {

using datasets::PreferencePair;
using datasets::ResponseGroup;
using datasets::Strategy;

struct SelectionConfig {
  Strategy strategy = Strategy::Vp;
  std::uint64_t rng_seed = 0;
  int max_pairs_per_question = 4;  // caps Vp only
};

// Response-level score of a step-scored response: the minimum over its
// step scores. The list must be non-empty and finite.
double min_step_score(std::span<const double> step_scores);

// One pair per group when a correct/incorrect contrast exists: a uniformly
// random correct response as chosen vs a uniformly random incorrect one,
// from a generator seeded by (rng_seed, qid). Groups without contrast are
// skipped. Every response must carry `correct`.
std::vector<PreferencePair> select_outcome_label(const ResponseGroup& group,
                                                 const SelectionConfig& cfg);

// Argmax orm_score vs argmin. Ties go to the earliest position; the
// rejected side is the earliest minimum at a different index, so a
// single-response group emits nothing.
std::vector<PreferencePair> select_orm(const ResponseGroup& group);

// Same contrast as select_orm, scored by min_step_score.
std::vector<PreferencePair> select_prm(const ResponseGroup& group);

// The select_prm base pair plus offset pairs: rank by min_step_score
// descending (ties by original order), take k = number of correct
// responses; every incorrect response within the top-k ranks becomes a
// rejected sample, paired in rank order with the highest-ranked correct
// responses not yet used. Emits nothing when the group has no correct
// response.
std::vector<PreferencePair> select_prm_offset(const ResponseGroup& group);

// Verifiable pairs: deterministically shuffle the correct and incorrect
// sides by (rng_seed, qid) and zip them, capped by max_pairs_per_question.
std::vector<PreferencePair> select_vp(const ResponseGroup& group,
                                      const SelectionConfig& cfg);

// Dispatch on cfg.strategy.
std::vector<PreferencePair> select(const ResponseGroup& group,
                                   const SelectionConfig& cfg);

}  // namespace prefforge::pair_selection

#endif  // PREFFORGE_PAIR_SELECTION_HPP_
