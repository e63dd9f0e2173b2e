#ifndef PREFFORGE_TESTS_ORACLES_HPP_
#define PREFFORGE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "prefforge/datasets.hpp"

// Independent transliterations of the pair-construction procedures, kept
// deliberately separate from pair_selection's implementation: sorting-based
// where the library scans, and organized around the written procedure
// rather than shared helpers.
namespace prefforge::testing::oracle {

using datasets::PreferencePair;
using datasets::ResponseGroup;
using datasets::Strategy;

inline double response_min_score(const datasets::ResponseRecord& r) {
  return *std::min_element(r.step_scores->begin(), r.step_scores->end());
}

struct IndexPair {
  std::size_t chosen;
  std::size_t rejected;
};

// Highest score is chosen, lowest is rejected; earliest position wins ties
// and the rejected side must be a different response.
inline std::optional<IndexPair> best_vs_worst(const std::vector<double>& scores) {
  if (scores.size() < 2) return std::nullopt;
  std::vector<std::size_t> by_desc(scores.size());
  std::iota(by_desc.begin(), by_desc.end(), 0);
  std::stable_sort(by_desc.begin(), by_desc.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const std::size_t chosen = by_desc.front();

  std::vector<std::size_t> by_asc(scores.size());
  std::iota(by_asc.begin(), by_asc.end(), 0);
  std::stable_sort(by_asc.begin(), by_asc.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  for (std::size_t idx : by_asc)
    if (idx != chosen) return IndexPair{chosen, idx};
  return std::nullopt;
}

inline std::vector<PreferencePair> brute_orm(const ResponseGroup& g) {
  std::vector<double> scores;
  for (const auto& r : g.responses) scores.push_back(*r.orm_score);
  const auto pair = best_vs_worst(scores);
  if (!pair) return {};
  return {PreferencePair{g.qid, g.responses[pair->chosen].rid,
                         g.responses[pair->rejected].rid, Strategy::Orm, false}};
}

inline std::vector<PreferencePair> brute_prm(const ResponseGroup& g) {
  std::vector<double> scores;
  for (const auto& r : g.responses) scores.push_back(response_min_score(r));
  const auto pair = best_vs_worst(scores);
  if (!pair) return {};
  return {PreferencePair{g.qid, g.responses[pair->chosen].rid,
                         g.responses[pair->rejected].rid, Strategy::Prm, false}};
}

// Base best-vs-worst pair plus offsets: rank all responses by score
// descending; with k = number of correct responses, every incorrect
// response in the top k ranks is paired (in rank order) with the
// highest-ranked correct responses, one-to-one. No correct responses in
// the group means no output at all.
inline std::vector<PreferencePair> brute_prm_offset(const ResponseGroup& g) {
  std::size_t k = 0;
  for (const auto& r : g.responses)
    if (*r.correct) ++k;
  if (k == 0) return {};

  std::vector<double> scores;
  for (const auto& r : g.responses) scores.push_back(response_min_score(r));

  std::vector<PreferencePair> out;
  if (const auto base = best_vs_worst(scores))
    out.push_back(PreferencePair{g.qid, g.responses[base->chosen].rid,
                                 g.responses[base->rejected].rid, Strategy::PrmOffset,
                                 false});

  std::vector<std::size_t> ranking(g.responses.size());
  std::iota(ranking.begin(), ranking.end(), 0);
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<std::size_t> correct_ranked;
  for (std::size_t idx : ranking)
    if (*g.responses[idx].correct) correct_ranked.push_back(idx);

  std::size_t used = 0;
  for (std::size_t pos = 0; pos < std::min(k, ranking.size()); ++pos) {
    const std::size_t idx = ranking[pos];
    if (*g.responses[idx].correct) continue;
    const std::size_t chosen = correct_ranked[std::min(used, correct_ranked.size() - 1)];
    ++used;
    out.push_back(PreferencePair{g.qid, g.responses[chosen].rid, g.responses[idx].rid,
                                 Strategy::PrmOffset, true});
  }
  return out;
}

}  // namespace prefforge::testing::oracle

#endif  // PREFFORGE_TESTS_ORACLES_HPP_
