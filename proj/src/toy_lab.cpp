#include "prefforge/toy_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "json.hpp"
#include "prefforge/errors.hpp"
#include "prefforge/pair_selection.hpp"
#include "prefforge/rng.hpp"

namespace prefforge::toy_lab {

using ordered_json = nlohmann::ordered_json;

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> softmax_row(std::span<const double> logits, double temperature) {
  std::vector<double> scaled(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] / temperature;
  const double mx = *std::max_element(scaled.begin(), scaled.end());
  double sum = 0.0;
  for (double& v : scaled) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : scaled) v /= sum;
  return scaled;
}

std::string format_features(std::span<const double> x) {
  std::string out = "f";
  char buf[32];
  for (double v : x) {
    std::snprintf(buf, sizeof buf, " %.9g", v);
    out += buf;
  }
  return out;
}

std::vector<std::vector<double>> sample_step_features(const ToyEnv& env,
                                                      rng::SplitMix64& gen,
                                                      bool good) {
  const auto& mu = good ? env.mu_good : env.mu_bad;
  std::vector<std::vector<double>> steps(static_cast<std::size_t>(env.step_count));
  for (auto& step : steps) {
    step.resize(static_cast<std::size_t>(env.feature_dim));
    for (int f = 0; f < env.feature_dim; ++f)
      step[static_cast<std::size_t>(f)] =
          mu[static_cast<std::size_t>(f)] + env.noise_scale * gen.next_gaussian();
  }
  return steps;
}

}  // namespace

std::string ToyEnv::qid(int question) const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%04d", question);
  return buf;
}

ToyEnv make_env(int num_questions, int answers_per_question, int step_count,
                int feature_dim, std::uint64_t seed, double noise_scale) {
  if (num_questions < 1) throw Error("num_questions must be >= 1");
  if (answers_per_question < 2) throw Error("answers_per_question must be >= 2");
  if (step_count < 1) throw Error("step_count must be >= 1");
  if (feature_dim < 1) throw Error("feature_dim must be >= 1");
  if (!(noise_scale >= 0.0)) throw Error("noise_scale must be >= 0");

  ToyEnv env;
  env.num_questions = num_questions;
  env.answers_per_question = answers_per_question;
  env.step_count = step_count;
  env.feature_dim = feature_dim;
  env.noise_scale = noise_scale;
  env.rng_seed = seed;
  env.mu_good.assign(static_cast<std::size_t>(feature_dim), 1.0);
  env.mu_bad.assign(static_cast<std::size_t>(feature_dim), -1.0);

  rng::SplitMix64 gen(rng::derive(seed, "env"));
  env.correct_index.resize(static_cast<std::size_t>(num_questions));
  for (int q = 0; q < num_questions; ++q)
    env.correct_index[static_cast<std::size_t>(q)] = static_cast<int>(
        gen.next_below(static_cast<std::uint64_t>(answers_per_question)));
  return env;
}

ToyPolicy make_policy(const ToyEnv& env) {
  ToyPolicy p;
  p.logits = Matrix(env.num_questions, env.answers_per_question);
  p.reference_logits = p.logits;
  return p;
}

StepScorer make_scorer(const ToyEnv& env) {
  StepScorer s;
  s.weights.assign(static_cast<std::size_t>(env.feature_dim), 0.0);
  s.bias = 0.0;
  return s;
}

double StepScorer::step_score(std::span<const double> features) const {
  if (features.size() != weights.size())
    throw Error("feature dimension mismatch in step scorer");
  double s = bias;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * features[i];
  return s;
}

double StepScorer::response_score(
    const std::vector<std::vector<double>>& step_features) const {
  if (step_features.empty()) throw Error("response has no scored steps");
  double best = step_score(step_features[0]);
  for (std::size_t i = 1; i < step_features.size(); ++i)
    best = std::min(best, step_score(step_features[i]));
  return best;
}

double AnnealSchedule::at(int epoch) const {
  if (epoch < 1 || epoch > total_epochs())
    throw Error("epoch " + std::to_string(epoch) + " outside schedule of length " +
                std::to_string(total_epochs()));
  return temperatures[static_cast<std::size_t>(epoch - 1)];
}

AnnealSchedule default_schedule(int total_epochs) {
  if (total_epochs < 1) throw Error("schedule needs at least one epoch");
  // Preset phases 0.7 / 1.0 / 1.2; phase lengths (ceil(E/2), ceil(E/3), rest).
  const int n1 = (total_epochs + 1) / 2;
  const int n2 = std::min((total_epochs + 2) / 3, total_epochs - n1);
  const int n3 = total_epochs - n1 - n2;
  AnnealSchedule s;
  s.temperatures.insert(s.temperatures.end(), static_cast<std::size_t>(n1), 0.7);
  s.temperatures.insert(s.temperatures.end(), static_cast<std::size_t>(n2), 1.0);
  s.temperatures.insert(s.temperatures.end(), static_cast<std::size_t>(n3), 1.2);
  return s;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (samples_per_question < 2) throw Error("samples_per_question must be >= 2");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error("learning_rate must be positive and finite");
  if (!(prm_learning_rate > 0.0) || !std::isfinite(prm_learning_rate))
    throw Error("prm_learning_rate must be positive and finite");
  if (max_pairs_per_question < 1) throw Error("max_pairs_per_question must be >= 1");
  if (!schedule.temperatures.empty()) {
    if (schedule.total_epochs() != epochs)
      throw Error("schedule length " + std::to_string(schedule.total_epochs()) +
                  " does not match epochs " + std::to_string(epochs));
    for (double t : schedule.temperatures)
      if (!(t > 0.0)) throw Error("schedule temperatures must be > 0");
  }
}

namespace {

AnnealSchedule resolved_schedule(const TrainConfig& cfg) {
  return cfg.schedule.temperatures.empty() ? default_schedule(cfg.epochs)
                                           : cfg.schedule;
}

}  // namespace

std::vector<ToyGroup> sample_responses(const ToyEnv& env, const Matrix& logits,
                                       int n, double temperature, int epoch,
                                       std::uint64_t base_seed) {
  if (!(temperature > 0.0)) throw Error("sampling temperature must be > 0");
  if (n < 1) throw Error("need at least one sample per question");
  if (logits.rows != env.num_questions || logits.cols != env.answers_per_question)
    throw Error("policy shape does not match environment");

  std::vector<ToyGroup> groups;
  groups.reserve(static_cast<std::size_t>(env.num_questions));
  for (int q = 0; q < env.num_questions; ++q) {
    rng::SplitMix64 gen(rng::derive(base_seed, "sample", static_cast<std::uint64_t>(epoch),
                                    static_cast<std::uint64_t>(q)));
    const auto probs = softmax_row(logits.row(q), temperature);

    ToyGroup group;
    group.qid = env.qid(q);
    group.question_index = q;
    group.responses.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const int a = static_cast<int>(gen.categorical(probs));
      ToyResponse resp;
      resp.answer_index = a;
      resp.sample_logprob = response_logprob(logits, q, a, temperature);
      resp.step_features =
          sample_step_features(env, gen, a == env.correct_index[static_cast<std::size_t>(q)]);

      char rid[48];
      std::snprintf(rid, sizeof rid, "e%d-q%04d-s%d", epoch, q, j);
      auto& rec = resp.record;
      rec.rid = rid;
      rec.qid = group.qid;
      rec.answer = std::to_string(a);
      rec.text = "\\boxed{" + *rec.answer + "}";
      rec.steps.reserve(resp.step_features.size());
      for (const auto& x : resp.step_features) rec.steps.push_back(format_features(x));
      rec.temperature = temperature;
      rec.epoch = epoch;
      group.responses.push_back(std::move(resp));
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

double response_logprob(const Matrix& logits, int question, int answer,
                        double temperature) {
  if (question < 0 || question >= logits.rows)
    throw Error("question index out of range");
  if (answer < 0 || answer >= logits.cols) throw Error("answer index out of range");
  if (!(temperature > 0.0)) throw Error("temperature must be > 0");

  const auto row = logits.row(question);
  double mx = row[0] / temperature;
  for (int j = 1; j < logits.cols; ++j)
    mx = std::max(mx, row[static_cast<std::size_t>(j)] / temperature);
  double sum = 0.0;
  for (int j = 0; j < logits.cols; ++j)
    sum += std::exp(row[static_cast<std::size_t>(j)] / temperature - mx);
  return row[static_cast<std::size_t>(answer)] / temperature - (mx + std::log(sum));
}

namespace {

losses::LogProbQuad quad_of(const ToyPolicy& policy, const DpoPairIdx& p) {
  // DPO log-probs are always evaluated at temperature 1; annealing only
  // shapes sampling.
  return losses::LogProbQuad{
      response_logprob(policy.logits, p.question, p.chosen_answer, 1.0),
      response_logprob(policy.reference_logits, p.question, p.chosen_answer, 1.0),
      response_logprob(policy.logits, p.question, p.rejected_answer, 1.0),
      response_logprob(policy.reference_logits, p.question, p.rejected_answer, 1.0)};
}

double mean_loss_and_grad(const ToyPolicy& policy, std::span<const DpoPairIdx> pairs,
                          losses::Beta beta, Matrix* grad) {
  double total = 0.0;
  for (const auto& p : pairs) {
    const auto quad = quad_of(policy, p);
    total += losses::dpo_loss(quad, beta);
    if (grad) {
      const auto g = losses::dpo_gradient(quad, beta);
      const auto probs = softmax_row(policy.logits.row(p.question), 1.0);
      for (int j = 0; j < policy.logits.cols; ++j) {
        const double ind_c = (j == p.chosen_answer) ? 1.0 : 0.0;
        const double ind_r = (j == p.rejected_answer) ? 1.0 : 0.0;
        grad->at(p.question, j) +=
            g.d_chosen_policy * (ind_c - probs[static_cast<std::size_t>(j)]) +
            g.d_rejected_policy * (ind_r - probs[static_cast<std::size_t>(j)]);
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(pairs.size());
  if (grad)
    for (double& v : grad->data) v *= scale;
  return total * scale;
}

}  // namespace

Matrix dpo_logit_gradient(const ToyPolicy& policy, std::span<const DpoPairIdx> pairs,
                          losses::Beta beta) {
  Matrix grad(policy.logits.rows, policy.logits.cols);
  if (!pairs.empty()) mean_loss_and_grad(policy, pairs, beta, &grad);
  return grad;
}

std::optional<double> dpo_train_epoch(ToyPolicy& policy,
                                      std::span<const DpoPairIdx> pairs,
                                      const TrainConfig& cfg) {
  if (pairs.empty()) return std::nullopt;
  for (const auto& p : pairs) {
    if (p.question < 0 || p.question >= policy.logits.rows)
      throw Error("pair question index out of range");
    if (p.chosen_answer < 0 || p.chosen_answer >= policy.logits.cols ||
        p.rejected_answer < 0 || p.rejected_answer >= policy.logits.cols)
      throw Error("pair answer index out of range");
  }
  Matrix grad(policy.logits.rows, policy.logits.cols);
  const double loss = mean_loss_and_grad(policy, pairs, cfg.beta, &grad);
  for (std::size_t i = 0; i < grad.data.size(); ++i)
    policy.logits.data[i] -= cfg.learning_rate * grad.data[i];
  return loss;
}

std::vector<double> prm_objective_gradient(const StepScorer& scorer,
                                           std::span<const FeaturePair> pairs) {
  std::vector<double> grad(scorer.weights.size() + 1, 0.0);
  for (const auto& p : pairs) {
    // Subgradient of min: the attaining step, lowest index on ties.
    auto arg_min_step = [&](const std::vector<std::vector<double>>& steps) {
      std::size_t best = 0;
      double best_score = scorer.step_score(steps[0]);
      for (std::size_t i = 1; i < steps.size(); ++i) {
        const double s = scorer.step_score(steps[i]);
        if (s < best_score) {
          best = i;
          best_score = s;
        }
      }
      return std::make_pair(best, best_score);
    };
    const auto [jc, sc] = arg_min_step(p.chosen_steps);
    const auto [jr, sr] = arg_min_step(p.rejected_steps);
    const auto g = losses::prm_pairwise_gradient(sc, sr);
    for (std::size_t f = 0; f < scorer.weights.size(); ++f)
      grad[f] += g.d_chosen * p.chosen_steps[jc][f] + g.d_rejected * p.rejected_steps[jr][f];
    grad.back() += g.d_chosen + g.d_rejected;
  }
  return grad;
}

std::optional<double> prm_train_epoch(StepScorer& scorer,
                                      std::span<const FeaturePair> pairs,
                                      double learning_rate) {
  if (pairs.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& p : pairs)
    total += losses::prm_pairwise_loss(scorer.response_score(p.chosen_steps),
                                       scorer.response_score(p.rejected_steps));
  const auto grad = prm_objective_gradient(scorer, pairs);
  for (std::size_t f = 0; f < scorer.weights.size(); ++f)
    scorer.weights[f] -= learning_rate * grad[f];
  scorer.bias -= learning_rate * grad.back();
  return total / static_cast<double>(pairs.size());
}

double greedy_accuracy(const ToyEnv& env, const ToyPolicy& policy) {
  if (policy.logits.rows != env.num_questions ||
      policy.logits.cols != env.answers_per_question)
    throw Error("policy shape does not match environment");
  int hits = 0;
  for (int q = 0; q < env.num_questions; ++q) {
    const auto row = policy.logits.row(q);
    int best = 0;
    for (int j = 1; j < policy.logits.cols; ++j)
      if (row[static_cast<std::size_t>(j)] > row[static_cast<std::size_t>(best)]) best = j;
    if (best == env.correct_index[static_cast<std::size_t>(q)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(env.num_questions);
}

double scorer_holdout_accuracy(const ToyEnv& env, const StepScorer& scorer,
                               int num_pairs) {
  rng::SplitMix64 gen(rng::derive(env.rng_seed, "holdout"));
  int hits = 0;
  for (int i = 0; i < num_pairs; ++i) {
    const auto good = sample_step_features(env, gen, true);
    const auto bad = sample_step_features(env, gen, false);
    if (scorer.response_score(good) > scorer.response_score(bad)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(num_pairs);
}

RunState make_run_state(const ToyEnv& env) {
  return RunState{make_policy(env), make_scorer(env), {}};
}

EpochResult run_epoch(const ToyEnv& env, RunState& state, const TrainConfig& cfg,
                      int epoch) {
  cfg.validate();
  const auto schedule = resolved_schedule(cfg);
  const double temperature = schedule.at(epoch);

  if (cfg.reference_mode == ReferenceMode::EpochStart)
    state.policy.reference_logits = state.policy.logits;

  auto groups = sample_responses(env, state.policy.logits, cfg.samples_per_question,
                                 temperature, epoch, cfg.rng_seed);

  // Ground-truth annotation plus current-scorer step scores. Records carry
  // sigmoid-squashed scores (the record schema wants [0,1]); training uses
  // the raw linear scores through step_features.
  struct Located {
    int question;
    int answer;
    const std::vector<std::vector<double>>* features;
  };
  std::unordered_map<std::string, Located> by_rid;
  std::vector<datasets::ResponseGroup> record_groups;
  record_groups.reserve(groups.size());
  for (auto& g : groups) {
    datasets::ResponseGroup rg;
    rg.qid = g.qid;
    for (auto& r : g.responses) {
      r.record.correct =
          r.answer_index == env.correct_index[static_cast<std::size_t>(g.question_index)];
      std::vector<double> squashed;
      squashed.reserve(r.step_features.size());
      for (const auto& x : r.step_features)
        squashed.push_back(sigmoid(state.scorer.step_score(x)));
      r.record.step_scores = std::move(squashed);
      r.record.orm_score = sigmoid(state.scorer.response_score(r.step_features));
      by_rid[r.record.rid] = Located{g.question_index, r.answer_index, &r.step_features};
      rg.responses.push_back(r.record);
    }
    record_groups.push_back(std::move(rg));
  }

  pair_selection::SelectionConfig sel;
  sel.strategy = cfg.strategy;
  sel.rng_seed = rng::derive(cfg.rng_seed, "select", static_cast<std::uint64_t>(epoch));
  sel.max_pairs_per_question = cfg.max_pairs_per_question;

  std::vector<datasets::PreferencePair> pairs;
  for (const auto& rg : record_groups) {
    auto selected = pair_selection::select(rg, sel);
    pairs.insert(pairs.end(), selected.begin(), selected.end());
  }

  std::vector<DpoPairIdx> dpo_pairs;
  dpo_pairs.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto& chosen = by_rid.at(p.chosen_rid);
    const auto& rejected = by_rid.at(p.rejected_rid);
    DpoPairIdx idx{chosen.question, chosen.answer, rejected.answer};
    if (cfg.swap_pairs) std::swap(idx.chosen_answer, idx.rejected_answer);
    dpo_pairs.push_back(idx);
  }

  EpochReport report;
  report.epoch = epoch;
  report.temperature = temperature;
  report.pairs = static_cast<int>(pairs.size());
  report.mean_dpo_loss = dpo_train_epoch(state.policy, dpo_pairs, cfg);

  if (cfg.rm_cotrain) {
    // Scorer training pairs come from the ground-truth labels (verifiable
    // pairing), independent of the DPO selection strategy.
    pair_selection::SelectionConfig prm_sel;
    prm_sel.strategy = datasets::Strategy::Vp;
    prm_sel.rng_seed = rng::derive(cfg.rng_seed, "prmsel", static_cast<std::uint64_t>(epoch));
    prm_sel.max_pairs_per_question = cfg.max_pairs_per_question;

    std::vector<FeaturePair> fresh;
    for (const auto& rg : record_groups) {
      for (const auto& p : pair_selection::select_vp(rg, prm_sel)) {
        fresh.push_back(FeaturePair{*by_rid.at(p.chosen_rid).features,
                                    *by_rid.at(p.rejected_rid).features});
      }
    }
    if (cfg.rm_accumulate) {
      state.accumulated_prm_pairs.insert(state.accumulated_prm_pairs.end(),
                                         fresh.begin(), fresh.end());
      report.mean_prm_loss = prm_train_epoch(state.scorer, state.accumulated_prm_pairs,
                                             cfg.prm_learning_rate);
    } else {
      report.mean_prm_loss =
          prm_train_epoch(state.scorer, fresh, cfg.prm_learning_rate);
    }
    report.prm_holdout_accuracy = scorer_holdout_accuracy(env, state.scorer);
  }

  report.greedy_accuracy = greedy_accuracy(env, state.policy);
  return EpochResult{std::move(report), std::move(pairs)};
}

RunArtifacts run_iterations(const ToyEnv& env, const TrainConfig& cfg) {
  cfg.validate();
  RunArtifacts out;
  out.state = make_run_state(env);
  out.report.initial_accuracy = greedy_accuracy(env, out.state.policy);
  for (int e = 1; e <= cfg.epochs; ++e) {
    auto result = run_epoch(env, out.state, cfg, e);
    out.report.epochs.push_back(result.report);
    out.pairs_per_epoch.push_back(std::move(result.pairs));
  }
  return out;
}

std::string report_to_json_line(const EpochReport& r) {
  ordered_json j;
  j["epoch"] = r.epoch;
  j["temperature"] = r.temperature;
  j["pairs"] = r.pairs;
  if (r.mean_dpo_loss) j["mean_dpo_loss"] = *r.mean_dpo_loss;
  if (r.mean_prm_loss) j["mean_prm_loss"] = *r.mean_prm_loss;
  if (r.greedy_accuracy) j["greedy_accuracy"] = *r.greedy_accuracy;
  if (r.prm_holdout_accuracy) j["prm_holdout_accuracy"] = *r.prm_holdout_accuracy;
  return j.dump();
}

EpochReport report_from_json(const std::string& line) {
  ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error("malformed epoch report");
  EpochReport r;
  r.epoch = j.at("epoch").get<int>();
  r.temperature = j.at("temperature").get<double>();
  r.pairs = j.at("pairs").get<int>();
  if (j.contains("mean_dpo_loss")) r.mean_dpo_loss = j.at("mean_dpo_loss").get<double>();
  if (j.contains("mean_prm_loss")) r.mean_prm_loss = j.at("mean_prm_loss").get<double>();
  if (j.contains("greedy_accuracy"))
    r.greedy_accuracy = j.at("greedy_accuracy").get<double>();
  if (j.contains("prm_holdout_accuracy"))
    r.prm_holdout_accuracy = j.at("prm_holdout_accuracy").get<double>();
  return r;
}

double GradCheckResult::worst() const {
  return std::max({max_rel_err_dpo, max_rel_err_prm, max_rel_err_policy});
}

namespace {

double rel_vec_err(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::max(std::sqrt(na), std::sqrt(nb));
  if (denom == 0.0) return std::sqrt(diff);
  return std::sqrt(diff) / denom;
}

}  // namespace

GradCheckResult gradient_check(std::uint64_t seed, int instances) {
  constexpr double kH = 1e-5;
  rng::SplitMix64 gen(rng::derive(seed, "gradcheck"));
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * gen.next_double();
  };
  GradCheckResult result;

  // Pair-loss gradient wrt the two policy log-probs.
  for (int i = 0; i < instances; ++i) {
    losses::LogProbQuad q{uniform(-1.5, 1.5), uniform(-1.5, 1.5), uniform(-1.5, 1.5),
                          uniform(-1.5, 1.5)};
    const losses::Beta beta(uniform(0.05, 1.0));
    const auto g = losses::dpo_gradient(q, beta);
    auto at = [&](double dc, double dr) {
      losses::LogProbQuad qq = q;
      qq.lp_chosen_policy += dc;
      qq.lp_rejected_policy += dr;
      return losses::dpo_loss(qq, beta);
    };
    const double fd_c = (at(kH, 0) - at(-kH, 0)) / (2 * kH);
    const double fd_r = (at(0, kH) - at(0, -kH)) / (2 * kH);
    const double analytic[2] = {g.d_chosen_policy, g.d_rejected_policy};
    const double fd[2] = {fd_c, fd_r};
    result.max_rel_err_dpo = std::max(result.max_rel_err_dpo, rel_vec_err(analytic, fd));
  }

  // Scorer pairwise-loss gradient wrt the two response scores.
  for (int i = 0; i < instances; ++i) {
    const double sc = uniform(-4.0, 4.0);
    const double sr = uniform(-4.0, 4.0);
    const auto g = losses::prm_pairwise_gradient(sc, sr);
    const double fd_c = (losses::prm_pairwise_loss(sc + kH, sr) -
                         losses::prm_pairwise_loss(sc - kH, sr)) /
                        (2 * kH);
    const double fd_r = (losses::prm_pairwise_loss(sc, sr + kH) -
                         losses::prm_pairwise_loss(sc, sr - kH)) /
                        (2 * kH);
    const double analytic[2] = {g.d_chosen, g.d_rejected};
    const double fd[2] = {fd_c, fd_r};
    result.max_rel_err_prm = std::max(result.max_rel_err_prm, rel_vec_err(analytic, fd));
  }

  // Full policy logit gradient on small random instances.
  for (int i = 0; i < instances; ++i) {
    const int rows = 2 + static_cast<int>(gen.next_below(2));
    const int cols = 2 + static_cast<int>(gen.next_below(3));
    ToyPolicy policy;
    policy.logits = Matrix(rows, cols);
    policy.reference_logits = Matrix(rows, cols);
    for (double& v : policy.logits.data) v = uniform(-1.0, 1.0);
    for (double& v : policy.reference_logits.data) v = uniform(-1.0, 1.0);

    const int num_pairs = 1 + static_cast<int>(gen.next_below(3));
    std::vector<DpoPairIdx> pairs;
    for (int p = 0; p < num_pairs; ++p) {
      const int q = static_cast<int>(gen.next_below(static_cast<std::uint64_t>(rows)));
      const int ca = static_cast<int>(gen.next_below(static_cast<std::uint64_t>(cols)));
      int rj = static_cast<int>(gen.next_below(static_cast<std::uint64_t>(cols - 1)));
      if (rj >= ca) ++rj;
      pairs.push_back(DpoPairIdx{q, ca, rj});
    }
    const losses::Beta beta(uniform(0.05, 1.0));

    const Matrix analytic = dpo_logit_gradient(policy, pairs, beta);
    Matrix fd(rows, cols);
    auto mean_loss = [&](const ToyPolicy& pol) {
      double total = 0.0;
      for (const auto& p : pairs) total += losses::dpo_loss(quad_of(pol, p), beta);
      return total / static_cast<double>(pairs.size());
    };
    for (std::size_t idx = 0; idx < fd.data.size(); ++idx) {
      ToyPolicy plus = policy;
      ToyPolicy minus = policy;
      plus.logits.data[idx] += kH;
      minus.logits.data[idx] -= kH;
      fd.data[idx] = (mean_loss(plus) - mean_loss(minus)) / (2 * kH);
    }
    result.max_rel_err_policy =
        std::max(result.max_rel_err_policy, rel_vec_err(analytic.data, fd.data));
  }
  return result;
}

}  // namespace prefforge::toy_lab
