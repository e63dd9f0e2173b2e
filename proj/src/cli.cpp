#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "prefforge/errors.hpp"
#include "prefforge/metrics.hpp"
#include "prefforge/orchestrator.hpp"
#include "prefforge/pair_selection.hpp"
#include "prefforge/tts_select.hpp"
#include "prefforge/verification.hpp"

namespace prefforge::orchestrator {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kGradCheckTolerance = 1e-5;

std::vector<datasets::ResponseGroup> load_labeled_groups(
    const std::string& responses_path, const std::string& questions_path) {
  auto groups = datasets::parse_responses(responses_path);
  if (!questions_path.empty()) {
    const auto questions = datasets::parse_questions(questions_path);
    std::unordered_map<std::string, const datasets::QuestionRecord*> by_qid;
    for (const auto& q : questions) by_qid[q.qid] = &q;
    for (auto& g : groups) {
      const auto it = by_qid.find(g.qid);
      if (it == by_qid.end())
        throw Error("no reference answer for qid '" + g.qid + "'");
      for (auto& r : g.responses) r = verification::label_outcome(r, *it->second);
    }
  }
  return groups;
}

struct FilterArgs {
  std::string strategy = "vp";
  std::string responses;
  std::string questions;
  std::string out;
  std::uint64_t seed = 0;
  int max_pairs = 4;
};

int run_filter(const FilterArgs& a) {
  pair_selection::SelectionConfig sel;
  sel.strategy = datasets::strategy_from_name(a.strategy);
  sel.rng_seed = a.seed;
  sel.max_pairs_per_question = a.max_pairs;

  const auto groups = load_labeled_groups(a.responses, a.questions);
  std::vector<datasets::PreferencePair> pairs;
  for (const auto& g : groups) {
    auto selected = pair_selection::select(g, sel);
    pairs.insert(pairs.end(), selected.begin(), selected.end());
  }
  datasets::write_pairs(pairs, a.out);
  std::cout << "wrote " << pairs.size() << " pairs from " << groups.size()
            << " question groups to " << a.out << "\n";
  return 0;
}

struct VoteArgs {
  std::string method = "mv";
  std::string responses;
  std::string out;
};

int run_vote(const VoteArgs& a) {
  const auto groups = datasets::parse_responses(a.responses);
  std::string lines;
  for (const auto& g : groups) {
    ordered_json j;
    j["qid"] = g.qid;
    if (a.method == "best-of-n") {
      const auto best = tts_select::best_of_n(g);
      j["rid"] = best.rid;
      if (best.answer) j["answer"] = *best.answer;
    } else {
      std::string winner;
      if (a.method == "prm-min") {
        winner = tts_select::prm_min_vote(g);
      } else {
        std::vector<std::string> answers;
        for (const auto& r : g.responses)
          if (r.answer && !r.answer->empty()) answers.push_back(*r.answer);
        if (answers.empty()) {
          std::cerr << "warning: qid " << g.qid << " has no extracted answers, skipped\n";
          continue;
        }
        winner = tts_select::majority_vote(answers);
      }
      for (const auto& r : g.responses)
        if (r.answer && verification::answers_equivalent(*r.answer, winner)) {
          j["rid"] = r.rid;
          break;
        }
      j["answer"] = winner;
    }
    lines += j.dump();
    lines += '\n';
  }
  if (a.out.empty()) {
    std::cout << lines;
  } else {
    std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + a.out);
    f << lines;
  }
  return 0;
}

struct EvalArgs {
  std::string metric;
  bool as_json = false;
  double f1_pos = 0.0, f1_neg = 0.0;
  std::int64_t n_pos = -1, n_neg = -1;
  std::string responses;
  std::string questions;
  int k = 8;
  std::string marker = "Let's";
};

void emit(const ordered_json& j, const std::string& text, bool as_json) {
  if (as_json)
    std::cout << j.dump() << "\n";
  else
    std::cout << text << "\n";
}

int run_eval(const EvalArgs& a) {
  char buf[128];
  if (a.metric == "weighted-f1") {
    if (a.n_pos < 0 || a.n_neg < 0)
      throw UsageError("weighted-f1 needs --f1-pos --f1-neg --n-pos --n-neg");
    const auto r = metrics::weighted_f1_report(a.f1_pos, a.f1_neg, a.n_pos, a.n_neg);
    ordered_json j{{"metric", "weighted-f1"}, {"f1_positive", r.f1_positive},
                   {"f1_negative", r.f1_negative}, {"alpha", r.alpha},
                   {"beta_share", r.beta_share}, {"weighted", r.weighted}};
    std::snprintf(buf, sizeof buf, "%.1f", r.weighted);
    emit(j, buf, a.as_json);
    return 0;
  }
  if (a.metric == "pass-at-k" || a.metric == "accuracy") {
    const int k = a.metric == "accuracy" ? 1 : a.k;
    const auto groups = load_labeled_groups(a.responses, a.questions);
    const double v = metrics::pass_at_k(groups, k);
    ordered_json j{{"metric", a.metric}, {"k", k}, {"value", v}};
    std::snprintf(buf, sizeof buf, "%s@%d: %.4f", a.metric == "accuracy" ? "accuracy" : "pass",
                  k, v);
    emit(j, buf, a.as_json);
    return 0;
  }
  if (a.metric == "mv-at-k") {
    if (a.questions.empty()) throw UsageError("mv-at-k needs --questions");
    const auto groups = load_labeled_groups(a.responses, a.questions);
    const auto questions = datasets::parse_questions(a.questions);
    const double v = metrics::mv_at_k(groups, a.k, questions);
    ordered_json j{{"metric", "mv-at-k"}, {"k", a.k}, {"value", v}};
    std::snprintf(buf, sizeof buf, "mv@%d: %.4f", a.k, v);
    emit(j, buf, a.as_json);
    return 0;
  }
  if (a.metric == "token-stats" || a.metric == "marker") {
    std::vector<std::string> texts;
    for (const auto& g : datasets::parse_responses(a.responses))
      for (const auto& r : g.responses) texts.push_back(r.text);
    if (a.metric == "token-stats") {
      const auto v = metrics::avg_token_count(texts);
      ordered_json j{{"metric", "token-stats"}, {"texts", texts.size()}};
      j["avg_tokens"] = v ? ordered_json(*v) : ordered_json(nullptr);
      std::snprintf(buf, sizeof buf, "avg_tokens: %s",
                    v ? std::to_string(*v).c_str() : "n/a");
      emit(j, buf, a.as_json);
    } else {
      const auto v = metrics::marker_count(texts, a.marker);
      ordered_json j{{"metric", "marker"}, {"marker", a.marker}, {"texts", texts.size()}};
      j["avg_occurrences"] = v ? ordered_json(*v) : ordered_json(nullptr);
      std::snprintf(buf, sizeof buf, "marker '%s': %s", a.marker.c_str(),
                    v ? std::to_string(*v).c_str() : "n/a");
      emit(j, buf, a.as_json);
    }
    return 0;
  }
  throw UsageError("unknown metric '" + a.metric + "'");
}

struct ToyRunArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string report;
};

PipelineConfig build_config(const std::string& config_path,
                            const std::vector<std::string>& overrides,
                            std::optional<std::uint64_t> seed_flag) {
  PipelineConfig cfg =
      config_path.empty() ? default_config() : load_config(config_path);
  for (const auto& entry : overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw UsageError("--set expects key=value, got '" + entry + "'");
    std::string key = entry.substr(0, eq);
    std::string value = entry.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    apply_config_entry(cfg, key, value);
  }
  cfg.train.rng_seed = resolve_seed(seed_flag, cfg.train.rng_seed);
  return cfg;
}

int run_toy(const ToyRunArgs& a) {
  PipelineConfig cfg = build_config(a.config, a.overrides, a.seed);
  cfg.generator = GeneratorKind::Toy;
  cfg.validate();
  const auto env = toy_lab::make_env(cfg.toy_questions, cfg.toy_answers, cfg.toy_steps,
                                     cfg.toy_feature_dim, cfg.train.rng_seed,
                                     cfg.toy_noise);
  const auto artifacts = toy_lab::run_iterations(env, cfg.train);

  std::string lines;
  for (const auto& r : artifacts.report.epochs)
    lines += toy_lab::report_to_json_line(r) + "\n";
  if (a.report.empty()) {
    std::cout << lines;
  } else {
    std::ofstream f(a.report, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + a.report);
    f << lines;
  }

  std::int64_t total_pairs = 0;
  for (const auto& r : artifacts.report.epochs) total_pairs += r.pairs;
  std::fprintf(stderr,
               "initial_accuracy=%.4f final_accuracy=%.4f epochs=%d total_pairs=%" PRId64
               " reference_mode=%s\n",
               artifacts.report.initial_accuracy,
               artifacts.report.epochs.back().greedy_accuracy.value_or(0.0),
               cfg.train.epochs, total_pairs,
               cfg.train.reference_mode == toy_lab::ReferenceMode::EpochStart
                   ? "epoch_start"
                   : "original_base");
  return 0;
}

int run_gradcheck(std::uint64_t seed, int instances) {
  const auto r = toy_lab::gradient_check(seed, instances);
  std::printf("dpo_gradient      max rel err: %.3e\n", r.max_rel_err_dpo);
  std::printf("prm_gradient      max rel err: %.3e\n", r.max_rel_err_prm);
  std::printf("policy_logit_grad max rel err: %.3e\n", r.max_rel_err_policy);
  std::printf("worst: %.3e (tolerance %.0e)\n", r.worst(), kGradCheckTolerance);
  return r.worst() <= kGradCheckTolerance ? 0 : 1;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"prefforge: preference-pair filtering, test-time selection, and a "
               "desk-scale iterative DPO lab"};
  app.require_subcommand(1);

  FilterArgs filter_args;
  auto* filter = app.add_subcommand(
      "filter", "Construct preference pairs from a responses file");
  filter->add_option("--strategy", filter_args.strategy,
                     "outcome|orm|prm|prm_offset|vp")
      ->default_val("vp");
  filter->add_option("--responses", filter_args.responses, "responses.jsonl")
      ->required();
  filter->add_option("--questions", filter_args.questions,
                     "questions.jsonl; when given, responses are relabeled first");
  filter->add_option("--out", filter_args.out, "output pairs.jsonl")->required();
  filter->add_option("--seed", filter_args.seed, "selection seed")->default_val(0);
  filter->add_option("--max-pairs", filter_args.max_pairs,
                     "per-question cap (vp only)")
      ->default_val(4);

  VoteArgs vote_args;
  auto* vote = app.add_subcommand("vote", "Pick one answer per question group");
  vote->add_option("--method", vote_args.method, "mv|prm-min|best-of-n")
      ->required()
      ->check(CLI::IsMember({"mv", "prm-min", "best-of-n"}));
  vote->add_option("--responses", vote_args.responses, "responses.jsonl")->required();
  vote->add_option("--out", vote_args.out, "output file (defaults to stdout)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluation arithmetic and text stats");
  eval->add_option("--metric", eval_args.metric,
                   "weighted-f1|pass-at-k|mv-at-k|accuracy|token-stats|marker")
      ->required()
      ->check(CLI::IsMember({"weighted-f1", "pass-at-k", "mv-at-k", "accuracy",
                             "token-stats", "marker"}));
  eval->add_flag("--json", eval_args.as_json, "machine-readable output");
  eval->add_option("--f1-pos", eval_args.f1_pos, "positive-class F1");
  eval->add_option("--f1-neg", eval_args.f1_neg, "negative-class F1");
  eval->add_option("--n-pos", eval_args.n_pos, "positive-class count");
  eval->add_option("--n-neg", eval_args.n_neg, "negative-class count");
  eval->add_option("--responses", eval_args.responses, "responses.jsonl");
  eval->add_option("--questions", eval_args.questions, "questions.jsonl");
  eval->add_option("--k", eval_args.k, "sample budget")->default_val(8);
  eval->add_option("--marker", eval_args.marker, "substring to count")
      ->default_val("Let's");

  auto* toy = app.add_subcommand("toy", "Run the synthetic lab");
  toy->require_subcommand(1);
  ToyRunArgs toy_args;
  auto* toy_run = toy->add_subcommand("run", "Run iterative DPO on the toy environment");
  toy_run->add_option("--config", toy_args.config, "pipeline config file");
  toy_run->add_option("--set", toy_args.overrides, "override: key=value (repeatable)");
  std::uint64_t toy_seed_value = 0;
  auto* toy_seed_opt =
      toy_run->add_option("--seed", toy_seed_value, "seed (overrides env and config)");
  toy_run->add_option("--report", toy_args.report, "epoch report JSONL (defaults to stdout)");

  std::uint64_t gc_seed = 12345;
  int gc_instances = 1000;
  auto* toy_gradcheck =
      toy->add_subcommand("gradcheck", "Finite-difference check of all gradients");
  toy_gradcheck->add_option("--seed", gc_seed)->default_val(12345);
  toy_gradcheck->add_option("--instances", gc_instances)->default_val(1000);

  auto* orch = app.add_subcommand("orchestrate", "Persisted multi-epoch pipeline");
  orch->require_subcommand(1);
  std::string orch_config, orch_out;
  std::vector<std::string> orch_overrides;
  std::uint64_t orch_seed_value = 0;
  auto* orch_run = orch->add_subcommand("run", "Run the pipeline into an output directory");
  orch_run->add_option("--config", orch_config, "pipeline config file");
  orch_run->add_option("--set", orch_overrides, "override: key=value (repeatable)");
  orch_run->add_option("--out", orch_out, "output directory")->required();
  auto* orch_seed_opt =
      orch_run->add_option("--seed", orch_seed_value, "seed (overrides env and config)");
  std::string resume_out;
  auto* orch_resume = orch->add_subcommand("resume", "Continue an interrupted run");
  orch_resume->add_option("--out", resume_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (filter->parsed()) return run_filter(filter_args);
    if (vote->parsed()) return run_vote(vote_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (toy->parsed()) {
      if (toy_run->parsed()) {
        if (toy_seed_opt->count()) toy_args.seed = toy_seed_value;
        return run_toy(toy_args);
      }
      return run_gradcheck(gc_seed, gc_instances);
    }
    if (orch->parsed()) {
      if (orch_run->parsed()) {
        std::optional<std::uint64_t> seed_flag;
        if (orch_seed_opt->count()) seed_flag = orch_seed_value;
        const PipelineConfig cfg = build_config(orch_config, orch_overrides, seed_flag);
        const auto report = run_pipeline(cfg, orch_out);
        std::cout << report.to_json() << "\n";
        return 0;
      }
      const auto report = resume(resume_out);
      std::cout << report.to_json() << "\n";
      return 0;
    }
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace prefforge::orchestrator
