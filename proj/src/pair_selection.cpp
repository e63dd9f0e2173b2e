#include "prefforge/pair_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prefforge/errors.hpp"
#include "prefforge/rng.hpp"

namespace prefforge::pair_selection {

namespace {

void require_group(const ResponseGroup& group) {
  if (group.responses.empty())
    throw Error("response group '" + group.qid + "' is empty");
  for (const auto& r : group.responses)
    if (r.qid != group.qid)
      throw Error("response '" + r.rid + "' has qid '" + r.qid +
                  "' but lives in group '" + group.qid + "'");
}

bool require_correct(const ResponseGroup& group) {
  for (const auto& r : group.responses)
    if (!r.correct)
      throw Error("response '" + r.rid + "' is unlabeled (no `correct` field)");
  return true;
}

std::vector<double> response_scores_by_min_step(const ResponseGroup& group) {
  std::vector<double> scores;
  scores.reserve(group.responses.size());
  for (const auto& r : group.responses) {
    if (!r.step_scores)
      throw Error("response '" + r.rid + "' has no step_scores");
    scores.push_back(min_step_score(*r.step_scores));
  }
  return scores;
}

// Earliest argmax, and earliest argmin over the remaining indices. Returns
// nothing for single-element groups (chosen and rejected would coincide).
std::optional<std::pair<std::size_t, std::size_t>> contrast_extremes(
    const std::vector<double>& scores) {
  if (scores.size() < 2) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  std::optional<std::size_t> worst;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == best) continue;
    if (!worst || scores[i] < scores[*worst]) worst = i;
  }
  if (!worst) return std::nullopt;
  return std::make_pair(best, *worst);
}

PreferencePair make_pair(const ResponseGroup& g, std::size_t chosen,
                         std::size_t rejected, Strategy strategy,
                         bool is_offset = false) {
  return PreferencePair{g.qid, g.responses[chosen].rid, g.responses[rejected].rid,
                        strategy, is_offset};
}

rng::SplitMix64 group_rng(const SelectionConfig& cfg, const std::string& qid,
                          std::string_view purpose) {
  return rng::SplitMix64(rng::derive(cfg.rng_seed, purpose, rng::hash_str(qid)));
}

}  // namespace

double min_step_score(std::span<const double> step_scores) {
  if (step_scores.empty()) throw Error("response has no scored steps");
  double m = step_scores[0];
  for (double s : step_scores) {
    if (!std::isfinite(s)) throw Error("step score is not finite");
    m = std::min(m, s);
  }
  return m;
}

std::vector<PreferencePair> select_outcome_label(const ResponseGroup& group,
                                                 const SelectionConfig& cfg) {
  require_group(group);
  require_correct(group);
  std::vector<std::size_t> correct, incorrect;
  for (std::size_t i = 0; i < group.responses.size(); ++i)
    (*group.responses[i].correct ? correct : incorrect).push_back(i);
  if (correct.empty() || incorrect.empty()) return {};  // no contrast: skip

  auto gen = group_rng(cfg, group.qid, "outcome");
  const std::size_t c = correct[gen.next_below(correct.size())];
  const std::size_t w = incorrect[gen.next_below(incorrect.size())];
  return {make_pair(group, c, w, Strategy::Outcome)};
}

std::vector<PreferencePair> select_orm(const ResponseGroup& group) {
  require_group(group);
  std::vector<double> scores;
  scores.reserve(group.responses.size());
  for (const auto& r : group.responses) {
    if (!r.orm_score) throw Error("response '" + r.rid + "' has no orm_score");
    scores.push_back(*r.orm_score);
  }
  const auto extremes = contrast_extremes(scores);
  if (!extremes) return {};
  return {make_pair(group, extremes->first, extremes->second, Strategy::Orm)};
}

std::vector<PreferencePair> select_prm(const ResponseGroup& group) {
  require_group(group);
  const auto scores = response_scores_by_min_step(group);
  const auto extremes = contrast_extremes(scores);
  if (!extremes) return {};
  return {make_pair(group, extremes->first, extremes->second, Strategy::Prm)};
}

std::vector<PreferencePair> select_prm_offset(const ResponseGroup& group) {
  require_group(group);
  require_correct(group);
  const auto scores = response_scores_by_min_step(group);

  std::size_t k = 0;
  for (const auto& r : group.responses)
    if (*r.correct) ++k;
  if (k == 0) return {};

  std::vector<PreferencePair> out;
  if (const auto extremes = contrast_extremes(scores))
    out.push_back(
        make_pair(group, extremes->first, extremes->second, Strategy::PrmOffset));

  // Rank descending by score, original order on ties.
  std::vector<std::size_t> rank(group.responses.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<std::size_t> correct_by_rank;
  for (std::size_t idx : rank)
    if (*group.responses[idx].correct) correct_by_rank.push_back(idx);

  // Incorrect responses inside the top-k ranks become offset negatives,
  // each assigned the best-ranked correct response still unused.
  std::size_t next_correct = 0;
  for (std::size_t pos = 0; pos < k && pos < rank.size(); ++pos) {
    const std::size_t idx = rank[pos];
    if (*group.responses[idx].correct) continue;
    const std::size_t chosen =
        correct_by_rank[std::min(next_correct, correct_by_rank.size() - 1)];
    ++next_correct;
    out.push_back(make_pair(group, chosen, idx, Strategy::PrmOffset, true));
  }
  return out;
}

std::vector<PreferencePair> select_vp(const ResponseGroup& group,
                                      const SelectionConfig& cfg) {
  require_group(group);
  require_correct(group);
  std::vector<std::size_t> correct, incorrect;
  for (std::size_t i = 0; i < group.responses.size(); ++i)
    (*group.responses[i].correct ? correct : incorrect).push_back(i);

  auto gen = group_rng(cfg, group.qid, "vp");
  gen.shuffle(correct);
  gen.shuffle(incorrect);

  const std::size_t n = std::min({correct.size(), incorrect.size(),
                                  static_cast<std::size_t>(cfg.max_pairs_per_question)});
  std::vector<PreferencePair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(make_pair(group, correct[i], incorrect[i], Strategy::Vp));
  return out;
}

std::vector<PreferencePair> select(const ResponseGroup& group,
                                   const SelectionConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::Outcome: return select_outcome_label(group, cfg);
    case Strategy::Orm: return select_orm(group);
    case Strategy::Prm: return select_prm(group);
    case Strategy::PrmOffset: return select_prm_offset(group);
    case Strategy::Vp: return select_vp(group, cfg);
  }
  throw Error("unreachable strategy value");
}

}  // namespace prefforge::pair_selection
