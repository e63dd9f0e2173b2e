#include "prefforge/metrics.hpp"

#include <unordered_map>

#include "prefforge/errors.hpp"
#include "prefforge/tts_select.hpp"
#include "prefforge/verification.hpp"

namespace prefforge::metrics {

namespace {

void require_counts(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0)
    throw Error("confusion counts must be non-negative");
  if (c.tp + c.fp + c.tn + c.fn < 1) throw Error("confusion counts sum to zero");
}

// 2PR/(P+R) with every zero denominator collapsing to (0, degenerate).
std::pair<double, bool> f1_from(std::int64_t hits, std::int64_t predicted,
                                std::int64_t actual) {
  if (predicted == 0 || actual == 0) return {0.0, true};
  const double precision = static_cast<double>(hits) / static_cast<double>(predicted);
  const double recall = static_cast<double>(hits) / static_cast<double>(actual);
  if (precision + recall == 0.0) return {0.0, true};
  return {2.0 * precision * recall / (precision + recall), false};
}

void require_first_k(const std::vector<datasets::ResponseGroup>& groups, int k) {
  if (k < 1) throw Error("k must be >= 1");
  if (groups.empty()) throw Error("no response groups given");
  for (const auto& g : groups)
    if (g.responses.size() < static_cast<std::size_t>(k))
      throw Error("group '" + g.qid + "' has fewer than k=" + std::to_string(k) +
                  " responses");
}

}  // namespace

F1Components f1_components(const ConfusionCounts& c) {
  require_counts(c);
  F1Components out;
  std::tie(out.f1_positive, out.positive_degenerate) =
      f1_from(c.tp, c.tp + c.fp, c.tp + c.fn);
  std::tie(out.f1_negative, out.negative_degenerate) =
      f1_from(c.tn, c.fn + c.tn, c.fp + c.tn);
  return out;
}

double weighted_f1(double f1_pos, double f1_neg, std::int64_t n_pos,
                   std::int64_t n_neg) {
  return weighted_f1_report(f1_pos, f1_neg, n_pos, n_neg).weighted;
}

F1Report weighted_f1_report(double f1_pos, double f1_neg, std::int64_t n_pos,
                            std::int64_t n_neg) {
  if (n_pos < 0 || n_neg < 0) throw Error("class counts must be non-negative");
  if (n_pos + n_neg == 0) throw Error("both class counts are zero");
  F1Report r;
  r.f1_positive = f1_pos;
  r.f1_negative = f1_neg;
  r.alpha = static_cast<double>(n_pos) / static_cast<double>(n_pos + n_neg);
  r.beta_share = static_cast<double>(n_neg) / static_cast<double>(n_pos + n_neg);
  r.weighted = r.alpha * f1_pos + r.beta_share * f1_neg;
  return r;
}

double pass_at_k(const std::vector<datasets::ResponseGroup>& groups, int k) {
  require_first_k(groups, k);
  std::int64_t hits = 0;
  for (const auto& g : groups) {
    bool any = false;
    for (int i = 0; i < k; ++i) {
      const auto& r = g.responses[static_cast<std::size_t>(i)];
      if (!r.correct)
        throw Error("response '" + r.rid + "' is unlabeled (no `correct` field)");
      any = any || *r.correct;
    }
    hits += any ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(groups.size());
}

double mv_at_k(const std::vector<datasets::ResponseGroup>& groups, int k,
               const std::vector<datasets::QuestionRecord>& references) {
  require_first_k(groups, k);
  std::unordered_map<std::string, const datasets::QuestionRecord*> by_qid;
  for (const auto& q : references) by_qid[q.qid] = &q;

  std::int64_t hits = 0;
  for (const auto& g : groups) {
    const auto it = by_qid.find(g.qid);
    if (it == by_qid.end())
      throw Error("no reference answer for qid '" + g.qid + "'");
    std::vector<std::string> answers;
    for (int i = 0; i < k; ++i) {
      const auto& a = g.responses[static_cast<std::size_t>(i)].answer;
      if (a && !a->empty()) answers.push_back(*a);
    }
    if (answers.empty()) continue;  // nothing to vote on: counts as a miss
    const std::string winner = tts_select::majority_vote(answers);
    if (verification::answers_equivalent(winner, it->second->reference_answer))
      ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(groups.size());
}

std::optional<double> avg_token_count(const std::vector<std::string>& texts) {
  if (texts.empty()) return std::nullopt;
  std::int64_t tokens = 0;
  for (const auto& t : texts) {
    bool in_token = false;
    for (char c : t) {
      const bool space = (c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                          c == '\f' || c == '\v');
      if (!space && !in_token) ++tokens;
      in_token = !space;
    }
  }
  return static_cast<double>(tokens) / static_cast<double>(texts.size());
}

std::optional<double> marker_count(const std::vector<std::string>& texts,
                                   const std::string& marker) {
  if (marker.empty()) throw Error("marker must be non-empty");
  if (texts.empty()) return std::nullopt;
  std::int64_t hits = 0;
  for (const auto& t : texts) {
    std::size_t pos = 0;
    while ((pos = t.find(marker, pos)) != std::string::npos) {
      ++hits;
      pos += marker.size();  // non-overlapping
    }
  }
  return static_cast<double>(hits) / static_cast<double>(texts.size());
}

}  // namespace prefforge::metrics
