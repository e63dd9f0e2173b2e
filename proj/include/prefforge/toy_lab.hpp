#ifndef PREFFORGE_TOY_LAB_HPP_
#define PREFFORGE_TOY_LAB_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefforge/datasets.hpp"
#include "prefforge/losses.hpp"

namespace prefforge::toy_lab {

// Dense row-major matrix, just big enough for Q x A logit tables.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  bool operator==(const Matrix&) const = default;
};

// Fully synthetic environment: Q questions with one correct answer index
// each, and per-step feature vectors whose distribution depends on whether
// the sampled answer is correct.
struct ToyEnv {
  int num_questions = 50;
  int answers_per_question = 8;  // >= 2
  int step_count = 3;
  int feature_dim = 4;
  std::vector<int> correct_index;  // one per question, in [0, A)
  std::vector<double> mu_good;     // length feature_dim
  std::vector<double> mu_bad;
  double noise_scale = 0.25;
  std::uint64_t rng_seed = 0;

  std::string qid(int question) const;
};

// Correct answers placed uniformly at random; features at +/-1 per
// coordinate, separable at the default noise scale.
ToyEnv make_env(int num_questions, int answers_per_question, int step_count,
                int feature_dim, std::uint64_t seed, double noise_scale = 0.25);

// Per-question logits over the finite answer set, plus the frozen
// reference snapshot the DPO margin is measured against.
struct ToyPolicy {
  Matrix logits;
  Matrix reference_logits;
};

ToyPolicy make_policy(const ToyEnv& env);

// Linear per-step reward standing in for the PRM. A response's score is
// the minimum over its step scores.
struct StepScorer {
  std::vector<double> weights;
  double bias = 0.0;

  double step_score(std::span<const double> features) const;
  double response_score(const std::vector<std::vector<double>>& step_features) const;
};

StepScorer make_scorer(const ToyEnv& env);

// epoch (1-based) -> sampling temperature.
struct AnnealSchedule {
  std::vector<double> temperatures;

  int total_epochs() const { return static_cast<int>(temperatures.size()); }
  double at(int epoch) const;  // 1-based
};

// The 6-epoch preset is [0.7, 0.7, 0.7, 1.0, 1.0, 1.2]; other lengths
// split the three phases as (ceil(E/2), ceil(E/3), remainder).
AnnealSchedule default_schedule(int total_epochs);

enum class ReferenceMode { EpochStart, OriginalBase };

struct TrainConfig {
  losses::Beta beta{0.1};
  double learning_rate = 0.5;       // policy step size
  double prm_learning_rate = 0.1;   // scorer step size
  int epochs = 6;
  int samples_per_question = 8;     // >= 2
  AnnealSchedule schedule;          // defaults to default_schedule(epochs)
  ReferenceMode reference_mode = ReferenceMode::EpochStart;
  std::uint64_t rng_seed = 0;
  datasets::Strategy strategy = datasets::Strategy::Vp;
  int max_pairs_per_question = 4;
  bool rm_cotrain = false;
  bool rm_accumulate = false;  // train scorer on all epochs' annotations
  bool swap_pairs = false;     // adversarial control: invert every pair

  void validate() const;  // throws Error on invariant violations
};

// One sampled response with its synthetic step features. `record` is a
// regular ResponseRecord so groups flow through pair_selection unchanged;
// step_scores on the record are sigmoid-squashed into [0,1] while training
// uses the raw linear scores via `step_features`.
struct ToyResponse {
  datasets::ResponseRecord record;
  int answer_index = 0;
  double sample_logprob = 0.0;  // at the sampling temperature
  std::vector<std::vector<double>> step_features;
};

struct ToyGroup {
  std::string qid;
  int question_index = 0;
  std::vector<ToyResponse> responses;
};

// Draw n answers per question from softmax(logits / temperature) and
// attach step features. Deterministic in (base_seed, epoch, question).
std::vector<ToyGroup> sample_responses(const ToyEnv& env, const Matrix& logits,
                                       int n, double temperature, int epoch,
                                       std::uint64_t base_seed);

// log softmax(logits[q] / temperature)[answer].
double response_logprob(const Matrix& logits, int question, int answer,
                        double temperature);

// A preference pair reduced to policy coordinates.
struct DpoPairIdx {
  int question = 0;
  int chosen_answer = 0;
  int rejected_answer = 0;
};

// Gradient of the mean pair loss with respect to the full logit matrix
// (reference logits held fixed). Exposed for gradient checking.
Matrix dpo_logit_gradient(const ToyPolicy& policy, std::span<const DpoPairIdx> pairs,
                          losses::Beta beta);

// One full-batch gradient-descent pass. Returns the mean loss before the
// update; an empty pair list leaves the policy unchanged and reports no loss.
std::optional<double> dpo_train_epoch(ToyPolicy& policy,
                                      std::span<const DpoPairIdx> pairs,
                                      const TrainConfig& cfg);

// Step features for one scorer training pair (chosen vs rejected).
struct FeaturePair {
  std::vector<std::vector<double>> chosen_steps;
  std::vector<std::vector<double>> rejected_steps;
};

// Gradient of the summed pairwise loss wrt (weights..., bias). The min
// over steps propagates to the attaining step, lowest index on ties.
std::vector<double> prm_objective_gradient(const StepScorer& scorer,
                                           std::span<const FeaturePair> pairs);

// One gradient step on the summed pairwise loss; returns the mean loss
// before the update, or nothing for an empty pair list.
std::optional<double> prm_train_epoch(StepScorer& scorer,
                                      std::span<const FeaturePair> pairs,
                                      double learning_rate);

// Fraction of questions whose greedy answer (argmax, lowest index on ties)
// is the correct one.
double greedy_accuracy(const ToyEnv& env, const ToyPolicy& policy);

// Held-out scorer quality: fraction of fresh correct/incorrect feature
// pairs ranked correctly. Fixed by (env.rng_seed, "holdout").
double scorer_holdout_accuracy(const ToyEnv& env, const StepScorer& scorer,
                               int num_pairs = 200);

struct EpochReport {
  int epoch = 0;
  double temperature = 0.0;
  int pairs = 0;
  std::optional<double> mean_dpo_loss;
  std::optional<double> mean_prm_loss;
  std::optional<double> greedy_accuracy;  // absent when training is skipped
  std::optional<double> prm_holdout_accuracy;

  bool operator==(const EpochReport&) const = default;
};

struct RunReport {
  double initial_accuracy = 0.0;
  std::vector<EpochReport> epochs;

  bool operator==(const RunReport&) const = default;
};

// Mutable state threaded through the epoch loop, so callers can persist
// between epochs (the orchestrator does).
struct RunState {
  ToyPolicy policy;
  StepScorer scorer;
  std::vector<FeaturePair> accumulated_prm_pairs;  // used when rm_accumulate
};

RunState make_run_state(const ToyEnv& env);

struct EpochResult {
  EpochReport report;
  std::vector<datasets::PreferencePair> pairs;
};

// One full pipeline epoch: sample -> label against env ground truth ->
// score steps -> select pairs -> DPO update -> optional scorer update.
EpochResult run_epoch(const ToyEnv& env, RunState& state, const TrainConfig& cfg,
                      int epoch);

struct RunArtifacts {
  RunState state;
  RunReport report;
  std::vector<std::vector<datasets::PreferencePair>> pairs_per_epoch;
};

RunArtifacts run_iterations(const ToyEnv& env, const TrainConfig& cfg);

// JSON Lines codec for epoch reports.
std::string report_to_json_line(const EpochReport& r);
EpochReport report_from_json(const std::string& line);

// Max relative finite-difference error over the three gradient paths:
// pair-loss gradients, scorer-objective gradients, and the full policy
// logit gradient.
struct GradCheckResult {
  double max_rel_err_dpo = 0.0;
  double max_rel_err_prm = 0.0;
  double max_rel_err_policy = 0.0;

  double worst() const;
};

GradCheckResult gradient_check(std::uint64_t seed, int instances = 1000);

}  // namespace prefforge::toy_lab

#endif  // PREFFORGE_TOY_LAB_HPP_
