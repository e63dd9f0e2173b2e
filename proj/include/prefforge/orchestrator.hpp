#ifndef PREFFORGE_ORCHESTRATOR_HPP_
#define PREFFORGE_ORCHESTRATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prefforge/datasets.hpp"
#include "prefforge/toy_lab.hpp"

namespace prefforge::orchestrator {

enum class GeneratorKind { Toy, File };
enum class AnnotatorKind { GroundTruth, File };

// Full pipeline configuration. Everything has a default; the on-disk form
// is a flat `key = value` file where unknown keys are errors. The LLM-
// scale hyperparameters (llm_learning_rate, batch_size,
// max_sequence_length) are carried as an export recipe for users wiring a
// real trainer behind the file ports; only the toy fields drive training
// here.
struct PipelineConfig {
  toy_lab::TrainConfig train;

  GeneratorKind generator = GeneratorKind::Toy;
  AnnotatorKind annotator = AnnotatorKind::GroundTruth;

  // Recorded-only export defaults.
  double llm_learning_rate = 5e-7;
  int batch_size = 256;
  int max_sequence_length = 2048;

  // Toy environment shape.
  int toy_questions = 50;
  int toy_answers = 8;
  int toy_steps = 3;
  int toy_feature_dim = 4;
  double toy_noise = 0.25;

  // File-port inputs.
  std::string questions_file;
  std::string responses_file;

  void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);
PipelineConfig default_config();

// Applies a single `key = value` assignment (same keys as the config
// file). Used for CLI overrides.
void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

// Seed precedence: explicit flag > PREF_FORGE_SEED env var > config value.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag_seed,
                           std::uint64_t config_seed);

// Persisted state of one pipeline round inside `epoch_<i>/`.
struct EpochArtifact {
  int epoch = 0;
  double temperature = 0.0;
  std::filesystem::path pairs_file;
  std::filesystem::path report_file;
  std::filesystem::path policy_file;  // empty in file-generator mode
  std::filesystem::path scorer_file;
  toy_lab::EpochReport report;
};

struct FinalReport {
  std::string strategy;
  std::string generator;
  std::string reference_mode;
  int epochs = 0;
  std::optional<double> initial_accuracy;  // absent in file-generator mode
  std::optional<double> final_accuracy;
  std::int64_t total_pairs = 0;
  std::vector<toy_lab::EpochReport> per_epoch;
  bool training_skipped = false;

  std::string to_json() const;
};

// Executes the epoch loop with per-epoch persistence under output_dir:
// epoch_<i>/{pairs.jsonl, report.json, policy.state, scorer.state}, plus
// reports.jsonl, final_report.json, config.cfg and a `lock` held for the
// duration of the run. `stop_after_epoch` ends the run early with artifacts
// intact (resume picks it up). When generator == File, pair selection is
// the terminal product of each epoch and training is skipped with a notice.
FinalReport run_pipeline(const PipelineConfig& cfg,
                         const std::filesystem::path& output_dir,
                         std::optional<int> stop_after_epoch = {});

// Continues an interrupted run from the last complete epoch; completed
// epochs are not recomputed. The directory must hold a contiguous
// epoch_1..epoch_m prefix and the config.cfg written by run_pipeline.
FinalReport resume(const std::filesystem::path& output_dir);

// CLI entry point: subcommands filter, vote, eval, toy, orchestrate.
// Returns 0 on success, 1 on data errors, 2 on usage errors.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace prefforge::orchestrator

#endif  // PREFFORGE_ORCHESTRATOR_HPP_
