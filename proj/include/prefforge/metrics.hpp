#ifndef PREFFORGE_METRICS_HPP_
#define PREFFORGE_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefforge/datasets.hpp"

namespace prefforge::metrics {

// Confusion counts for process-error detection. The positive class is
// "response contains an incorrect step".
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
};

struct F1Components {
  double f1_positive = 0.0;
  double f1_negative = 0.0;
  // A zero denominator anywhere in the component forces it to 0 and sets
  // the flag; degenerate rows still aggregate.
  bool positive_degenerate = false;
  bool negative_degenerate = false;
};

struct F1Report {
  double f1_positive = 0.0;
  double f1_negative = 0.0;
  double alpha = 0.0;       // positive-class share
  double beta_share = 0.0;  // negative-class share
  double weighted = 0.0;
};

F1Components f1_components(const ConfusionCounts& c);

// Class-share weighted combination: alpha*f1_pos + beta*f1_neg with
// alpha = n_pos / (n_pos + n_neg).
double weighted_f1(double f1_pos, double f1_neg, std::int64_t n_pos,
                   std::int64_t n_neg);

F1Report weighted_f1_report(double f1_pos, double f1_neg, std::int64_t n_pos,
                            std::int64_t n_neg);

// Fraction of questions whose first k responses contain a correct one.
// Every group needs >= k labeled responses.
double pass_at_k(const std::vector<datasets::ResponseGroup>& groups, int k);

// Fraction of questions where the majority vote over the first k answers
// matches the reference answer.
double mv_at_k(const std::vector<datasets::ResponseGroup>& groups, int k,
               const std::vector<datasets::QuestionRecord>& references);

// Mean whitespace-delimited token count; absent for an empty list. A
// whitespace tokenizer is a documented proxy for a model tokenizer.
std::optional<double> avg_token_count(const std::vector<std::string>& texts);

// Mean count of non-overlapping, case-sensitive occurrences of `marker`
// per text; absent for an empty list.
std::optional<double> marker_count(const std::vector<std::string>& texts,
                                   const std::string& marker);

}  // namespace prefforge::metrics

#endif  // PREFFORGE_METRICS_HPP_
