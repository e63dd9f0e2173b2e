#include "prefforge/orchestrator.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "prefforge/errors.hpp"
#include "prefforge/pair_selection.hpp"
#include "prefforge/rng.hpp"
#include "prefforge/verification.hpp"

namespace prefforge::orchestrator {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Canonical double text: shortest round-trip form, so saved configs and
// states reload to the exact bit pattern.
std::string fmt_double(double v) { return nlohmann::json(v).dump(); }

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t idx = 0;
    const double v = std::stod(value, &idx);
    if (idx != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config key '" + key + "': cannot parse number from '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t idx = 0;
    const long v = std::stol(value, &idx);
    if (idx != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw Error("config key '" + key + "': cannot parse integer from '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t idx = 0;
    const unsigned long long v = std::stoull(value, &idx);
    if (idx != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config key '" + key + "': cannot parse seed from '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw Error("config key '" + key + "': expected true or false, got '" + value + "'");
}

const char* reference_mode_name(toy_lab::ReferenceMode m) {
  return m == toy_lab::ReferenceMode::EpochStart ? "epoch_start" : "original_base";
}

const char* generator_name(GeneratorKind g) {
  return g == GeneratorKind::Toy ? "toy" : "file";
}

const char* annotator_name(AnnotatorKind a) {
  return a == AnnotatorKind::GroundTruth ? "ground_truth" : "file";
}

std::string schedule_text(const toy_lab::AnnealSchedule& s) {
  if (s.temperatures.empty()) return "paper";
  std::string out;
  for (std::size_t i = 0; i < s.temperatures.size(); ++i) {
    if (i) out += ",";
    out += fmt_double(s.temperatures[i]);
  }
  return out;
}

// Exclusive ownership of an output directory for the run's duration.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / "lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw Error("output directory is locked by another run (remove '" +
                  path_.string() + "' if stale)");
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd_, pid.data(), pid.size());
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

void write_text_atomic(const fs::path& path, const std::string& payload) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << payload;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot move " + tmp.string() + " to " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string policy_to_json(const toy_lab::ToyPolicy& p) {
  ordered_json j;
  j["rows"] = p.logits.rows;
  j["cols"] = p.logits.cols;
  j["logits"] = p.logits.data;
  j["reference_logits"] = p.reference_logits.data;
  return j.dump();
}

toy_lab::ToyPolicy policy_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error("malformed policy state");
  toy_lab::ToyPolicy p;
  p.logits = toy_lab::Matrix(j.at("rows").get<int>(), j.at("cols").get<int>());
  p.reference_logits = p.logits;
  p.logits.data = j.at("logits").get<std::vector<double>>();
  p.reference_logits.data = j.at("reference_logits").get<std::vector<double>>();
  if (p.logits.data.size() != p.reference_logits.data.size() ||
      p.logits.data.size() !=
          static_cast<std::size_t>(p.logits.rows) * static_cast<std::size_t>(p.logits.cols))
    throw Error("policy state has inconsistent shape");
  return p;
}

std::string scorer_to_json(const toy_lab::StepScorer& s) {
  ordered_json j;
  j["weights"] = s.weights;
  j["bias"] = s.bias;
  return j.dump();
}

toy_lab::StepScorer scorer_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error("malformed scorer state");
  toy_lab::StepScorer s;
  s.weights = j.at("weights").get<std::vector<double>>();
  s.bias = j.at("bias").get<double>();
  return s;
}

fs::path epoch_dir(const fs::path& out, int epoch) {
  return out / ("epoch_" + std::to_string(epoch));
}

toy_lab::AnnealSchedule resolved_schedule(const PipelineConfig& cfg) {
  return cfg.train.schedule.temperatures.empty()
             ? toy_lab::default_schedule(cfg.train.epochs)
             : cfg.train.schedule;
}

// Builds this epoch's response groups from the file port: records whose
// `epoch` field equals the current epoch index.
std::vector<datasets::ResponseGroup> file_epoch_groups(
    const std::vector<datasets::ResponseGroup>& all, int epoch) {
  std::vector<datasets::ResponseGroup> out;
  for (const auto& g : all) {
    datasets::ResponseGroup filtered{g.qid, {}};
    for (const auto& r : g.responses)
      if (r.epoch == epoch) filtered.responses.push_back(r);
    if (!filtered.responses.empty()) out.push_back(std::move(filtered));
  }
  return out;
}

struct EpochFiles {
  std::vector<datasets::PreferencePair> pairs;
  toy_lab::EpochReport report;
};

void persist_epoch(const fs::path& out, int epoch, const EpochFiles& files,
                   const toy_lab::ToyPolicy* policy,
                   const toy_lab::StepScorer* scorer) {
  const fs::path final_dir = epoch_dir(out, epoch);
  const fs::path tmp_dir = final_dir.string() + ".tmp";
  std::error_code ec;
  fs::remove_all(tmp_dir, ec);
  fs::create_directories(tmp_dir);
  datasets::write_pairs(files.pairs, tmp_dir / "pairs.jsonl");
  write_text_atomic(tmp_dir / "report.json",
                    toy_lab::report_to_json_line(files.report) + "\n");
  if (policy) write_text_atomic(tmp_dir / "policy.state", policy_to_json(*policy) + "\n");
  if (scorer) write_text_atomic(tmp_dir / "scorer.state", scorer_to_json(*scorer) + "\n");
  fs::rename(tmp_dir, final_dir);
}

void write_summaries(const fs::path& out, const FinalReport& report, bool complete) {
  std::string lines;
  for (const auto& r : report.per_epoch) lines += toy_lab::report_to_json_line(r) + "\n";
  write_text_atomic(out / "reports.jsonl", lines);
  if (complete) write_text_atomic(out / "final_report.json", report.to_json() + "\n");
}

FinalReport make_final_report(const PipelineConfig& cfg,
                              std::optional<double> initial_accuracy,
                              std::vector<toy_lab::EpochReport> per_epoch) {
  FinalReport fr;
  fr.strategy = datasets::strategy_name(cfg.train.strategy);
  fr.generator = generator_name(cfg.generator);
  fr.reference_mode = reference_mode_name(cfg.train.reference_mode);
  fr.epochs = static_cast<int>(per_epoch.size());
  fr.training_skipped = cfg.generator == GeneratorKind::File;
  fr.initial_accuracy = initial_accuracy;
  for (const auto& r : per_epoch) fr.total_pairs += r.pairs;
  if (!per_epoch.empty() && per_epoch.back().greedy_accuracy)
    fr.final_accuracy = per_epoch.back().greedy_accuracy;
  fr.per_epoch = std::move(per_epoch);
  return fr;
}

// Shared body of run_pipeline/resume: executes epochs first_epoch..last,
// persisting as it goes.
FinalReport drive_epochs(const PipelineConfig& cfg, const fs::path& out,
                         int first_epoch, std::optional<int> stop_after,
                         std::vector<toy_lab::EpochReport> done_reports,
                         toy_lab::RunState* state,
                         const std::optional<toy_lab::ToyEnv>& env,
                         const std::vector<datasets::ResponseGroup>& file_groups) {
  const auto schedule = resolved_schedule(cfg);
  const int last = std::min(cfg.train.epochs, stop_after.value_or(cfg.train.epochs));

  for (int e = first_epoch; e <= last; ++e) {
    EpochFiles files;
    if (cfg.generator == GeneratorKind::Toy) {
      auto result = toy_lab::run_epoch(*env, *state, cfg.train, e);
      files.pairs = std::move(result.pairs);
      files.report = std::move(result.report);
      persist_epoch(out, e, files, &state->policy, &state->scorer);
    } else {
      auto groups = file_epoch_groups(file_groups, e);
      pair_selection::SelectionConfig sel;
      sel.strategy = cfg.train.strategy;
      sel.rng_seed =
          rng::derive(cfg.train.rng_seed, "select", static_cast<std::uint64_t>(e));
      sel.max_pairs_per_question = cfg.train.max_pairs_per_question;
      for (const auto& g : groups) {
        try {
          auto selected = pair_selection::select(g, sel);
          files.pairs.insert(files.pairs.end(), selected.begin(), selected.end());
        } catch (const Error& err) {
          throw Error("epoch " + std::to_string(e) + ", qid " + g.qid + ": " +
                      err.what());
        }
      }
      files.report.epoch = e;
      files.report.temperature = schedule.at(e);
      files.report.pairs = static_cast<int>(files.pairs.size());
      persist_epoch(out, e, files, nullptr, nullptr);
    }
    done_reports.push_back(files.report);
  }

  std::optional<double> initial_accuracy;
  if (cfg.generator == GeneratorKind::Toy)
    initial_accuracy = toy_lab::greedy_accuracy(*env, toy_lab::make_policy(*env));
  FinalReport fr = make_final_report(cfg, initial_accuracy, std::move(done_reports));
  write_summaries(out, fr, last == cfg.train.epochs);
  return fr;
}

// Loads and annotates the file-port inputs once per run.
std::vector<datasets::ResponseGroup> load_file_groups(const PipelineConfig& cfg) {
  auto groups = datasets::parse_responses(cfg.responses_file);
  if (cfg.annotator == AnnotatorKind::GroundTruth) {
    const auto questions = datasets::parse_questions(cfg.questions_file);
    std::unordered_map<std::string, const datasets::QuestionRecord*> by_qid;
    for (const auto& q : questions) by_qid[q.qid] = &q;
    for (auto& g : groups) {
      const auto it = by_qid.find(g.qid);
      if (it == by_qid.end())
        throw Error("annotator has no reference answer for qid '" + g.qid + "'");
      for (auto& r : g.responses) r = verification::label_outcome(r, *it->second);
    }
  }
  return groups;
}

int find_contiguous_epochs(const fs::path& out) {
  int max_seen = 0;
  for (const auto& entry : fs::directory_iterator(out)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("epoch_", 0) != 0) continue;
    if (name.size() > 4 && name.substr(name.size() - 4) == ".tmp") {
      std::error_code ec;
      fs::remove_all(entry.path(), ec);  // partial artifact from a failed epoch
      continue;
    }
    try {
      max_seen = std::max(max_seen, std::stoi(name.substr(6)));
    } catch (const std::exception&) {
      throw Error("unrecognized artifact directory '" + name + "'");
    }
  }
  for (int e = 1; e <= max_seen; ++e)
    if (!fs::exists(epoch_dir(out, e)))
      throw Error("artifact gap: epoch_" + std::to_string(e) +
                  " is missing while later epochs exist");
  return max_seen;
}

toy_lab::EpochReport load_epoch_report(const fs::path& out, int epoch) {
  try {
    return toy_lab::report_from_json(read_text(epoch_dir(out, epoch) / "report.json"));
  } catch (const std::exception& e) {
    throw Error("corrupt artifact at epoch " + std::to_string(epoch) + ": " + e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  train.validate();
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (max_sequence_length < 1) throw Error("max_sequence_length must be >= 1");
  if (!(llm_learning_rate > 0.0)) throw Error("llm_learning_rate must be > 0");
  if (toy_questions < 1 || toy_answers < 2 || toy_steps < 1 || toy_feature_dim < 1)
    throw Error("toy environment dimensions are out of range");
  if (!(toy_noise >= 0.0)) throw Error("toy_noise must be >= 0");
  if (generator == GeneratorKind::Toy && annotator == AnnotatorKind::File)
    throw Error("the toy generator requires the ground_truth annotator");
  if (generator == GeneratorKind::File) {
    if (responses_file.empty())
      throw Error("generator = file requires responses_file");
    if (annotator == AnnotatorKind::GroundTruth && questions_file.empty())
      throw Error("annotator = ground_truth with a file generator requires questions_file");
  }
}

PipelineConfig default_config() { return PipelineConfig{}; }

void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "strategy") {
    cfg.train.strategy = datasets::strategy_from_name(value);
  } else if (key == "samples_per_question") {
    cfg.train.samples_per_question = parse_int(key, value);
  } else if (key == "epochs") {
    cfg.train.epochs = parse_int(key, value);
  } else if (key == "schedule") {
    if (value == "paper") {
      cfg.train.schedule = {};
    } else {
      toy_lab::AnnealSchedule s;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ','))
        s.temperatures.push_back(parse_double(key, trim(item)));
      if (s.temperatures.empty())
        throw Error("config key 'schedule': empty temperature list");
      cfg.train.schedule = std::move(s);
    }
  } else if (key == "beta") {
    cfg.train.beta = losses::Beta(parse_double(key, value));
  } else if (key == "learning_rate") {
    cfg.train.learning_rate = parse_double(key, value);
  } else if (key == "prm_learning_rate") {
    cfg.train.prm_learning_rate = parse_double(key, value);
  } else if (key == "llm_learning_rate") {
    cfg.llm_learning_rate = parse_double(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = parse_int(key, value);
  } else if (key == "max_sequence_length") {
    cfg.max_sequence_length = parse_int(key, value);
  } else if (key == "reference_mode") {
    if (value == "epoch_start") {
      cfg.train.reference_mode = toy_lab::ReferenceMode::EpochStart;
    } else if (value == "original_base") {
      cfg.train.reference_mode = toy_lab::ReferenceMode::OriginalBase;
    } else {
      throw Error("config key 'reference_mode': expected epoch_start or original_base");
    }
  } else if (key == "rm_cotrain") {
    cfg.train.rm_cotrain = parse_bool(key, value);
  } else if (key == "rm_accumulate") {
    cfg.train.rm_accumulate = parse_bool(key, value);
  } else if (key == "rng_seed") {
    cfg.train.rng_seed = parse_u64(key, value);
  } else if (key == "max_pairs_per_question") {
    cfg.train.max_pairs_per_question = parse_int(key, value);
  } else if (key == "generator") {
    if (value == "toy") {
      cfg.generator = GeneratorKind::Toy;
    } else if (value == "file") {
      cfg.generator = GeneratorKind::File;
    } else {
      throw Error("config key 'generator': expected toy or file");
    }
  } else if (key == "annotator") {
    if (value == "ground_truth") {
      cfg.annotator = AnnotatorKind::GroundTruth;
    } else if (value == "file") {
      cfg.annotator = AnnotatorKind::File;
    } else {
      throw Error("config key 'annotator': expected ground_truth or file");
    }
  } else if (key == "toy_questions") {
    cfg.toy_questions = parse_int(key, value);
  } else if (key == "toy_answers") {
    cfg.toy_answers = parse_int(key, value);
  } else if (key == "toy_steps") {
    cfg.toy_steps = parse_int(key, value);
  } else if (key == "toy_feature_dim") {
    cfg.toy_feature_dim = parse_int(key, value);
  } else if (key == "toy_noise") {
    cfg.toy_noise = parse_double(key, value);
  } else if (key == "questions_file") {
    cfg.questions_file = value;
  } else if (key == "responses_file") {
    cfg.responses_file = value;
  } else {
    throw Error("unknown config key '" + key + "'");
  }
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  PipelineConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string(), line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_entry(cfg, key, value);
    } catch (const Error& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return cfg;
}

void save_config(const PipelineConfig& cfg, const fs::path& path) {
  std::ostringstream out;
  out << "# prefforge pipeline configuration (canonical form)\n";
  out << "strategy = " << datasets::strategy_name(cfg.train.strategy) << "\n";
  out << "samples_per_question = " << cfg.train.samples_per_question << "\n";
  out << "epochs = " << cfg.train.epochs << "\n";
  out << "schedule = " << schedule_text(cfg.train.schedule) << "\n";
  out << "beta = " << fmt_double(cfg.train.beta.value) << "\n";
  out << "learning_rate = " << fmt_double(cfg.train.learning_rate) << "\n";
  out << "prm_learning_rate = " << fmt_double(cfg.train.prm_learning_rate) << "\n";
  out << "reference_mode = " << reference_mode_name(cfg.train.reference_mode) << "\n";
  out << "rm_cotrain = " << (cfg.train.rm_cotrain ? "true" : "false") << "\n";
  out << "rm_accumulate = " << (cfg.train.rm_accumulate ? "true" : "false") << "\n";
  out << "rng_seed = " << cfg.train.rng_seed << "\n";
  out << "max_pairs_per_question = " << cfg.train.max_pairs_per_question << "\n";
  out << "generator = " << generator_name(cfg.generator) << "\n";
  out << "annotator = " << annotator_name(cfg.annotator) << "\n";
  out << "# exported LLM-scale hyperparameters (not consumed by the toy trainer)\n";
  out << "llm_learning_rate = " << fmt_double(cfg.llm_learning_rate) << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "max_sequence_length = " << cfg.max_sequence_length << "\n";
  out << "toy_questions = " << cfg.toy_questions << "\n";
  out << "toy_answers = " << cfg.toy_answers << "\n";
  out << "toy_steps = " << cfg.toy_steps << "\n";
  out << "toy_feature_dim = " << cfg.toy_feature_dim << "\n";
  out << "toy_noise = " << fmt_double(cfg.toy_noise) << "\n";
  out << "questions_file = " << cfg.questions_file << "\n";
  out << "responses_file = " << cfg.responses_file << "\n";
  write_text_atomic(path, out.str());
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag_seed,
                           std::uint64_t config_seed) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("PREF_FORGE_SEED"); env && *env)
    return parse_u64("PREF_FORGE_SEED", env);
  return config_seed;
}

std::string FinalReport::to_json() const {
  ordered_json j;
  j["strategy"] = strategy;
  j["generator"] = generator;
  j["reference_mode"] = reference_mode;
  j["epochs"] = epochs;
  j["training_skipped"] = training_skipped;
  if (initial_accuracy) j["initial_accuracy"] = *initial_accuracy;
  if (final_accuracy) j["final_accuracy"] = *final_accuracy;
  j["total_pairs"] = total_pairs;
  j["per_epoch"] = ordered_json::array();
  for (const auto& r : per_epoch)
    j["per_epoch"].push_back(ordered_json::parse(toy_lab::report_to_json_line(r)));
  return j.dump(2);
}

FinalReport run_pipeline(const PipelineConfig& cfg, const fs::path& output_dir,
                         std::optional<int> stop_after_epoch) {
  cfg.validate();
  fs::create_directories(output_dir);
  if (fs::exists(epoch_dir(output_dir, 1)))
    throw Error("output directory already holds artifacts; use `orchestrate resume`");
  DirLock lock(output_dir);
  save_config(cfg, output_dir / "config.cfg");

  std::optional<toy_lab::ToyEnv> env;
  toy_lab::RunState state;
  std::vector<datasets::ResponseGroup> file_groups;
  if (cfg.generator == GeneratorKind::Toy) {
    env = toy_lab::make_env(cfg.toy_questions, cfg.toy_answers, cfg.toy_steps,
                            cfg.toy_feature_dim, cfg.train.rng_seed, cfg.toy_noise);
    state = toy_lab::make_run_state(*env);
  } else {
    file_groups = load_file_groups(cfg);
    std::cerr << "notice: generator = file, DPO training is skipped; pair selection "
                 "is the terminal product of each epoch\n";
  }
  return drive_epochs(cfg, output_dir, 1, stop_after_epoch, {}, &state, env,
                      file_groups);
}

FinalReport resume(const fs::path& output_dir) {
  if (!fs::exists(output_dir / "config.cfg"))
    throw Error("no config.cfg in " + output_dir.string() + "; nothing to resume");
  DirLock lock(output_dir);
  const PipelineConfig cfg = load_config(output_dir / "config.cfg");
  cfg.validate();

  const int done = find_contiguous_epochs(output_dir);
  std::vector<toy_lab::EpochReport> done_reports;
  for (int e = 1; e <= done; ++e) done_reports.push_back(load_epoch_report(output_dir, e));

  std::optional<toy_lab::ToyEnv> env;
  toy_lab::RunState state;
  std::vector<datasets::ResponseGroup> file_groups;
  if (cfg.generator == GeneratorKind::Toy) {
    env = toy_lab::make_env(cfg.toy_questions, cfg.toy_answers, cfg.toy_steps,
                            cfg.toy_feature_dim, cfg.train.rng_seed, cfg.toy_noise);
    state = toy_lab::make_run_state(*env);
    if (done > 0) {
      try {
        state.policy = policy_from_json(read_text(epoch_dir(output_dir, done) / "policy.state"));
        state.scorer = scorer_from_json(read_text(epoch_dir(output_dir, done) / "scorer.state"));
        for (int e = 1; e <= done; ++e)  // artifact integrity
          datasets::parse_pairs(epoch_dir(output_dir, e) / "pairs.jsonl");
      } catch (const Error& e) {
        throw Error("corrupt artifact at epoch " + std::to_string(done) + ": " + e.what());
      }
    }
    if (cfg.train.rm_cotrain && cfg.train.rm_accumulate && done > 0) {
      // Rebuild the accumulated scorer pairs by replaying each finished
      // epoch's sampling and labeling from its starting policy; VP
      // selection depends only on labels, so no scorer is needed.
      const auto schedule = resolved_schedule(cfg);
      for (int e = 1; e <= done; ++e) {
        toy_lab::ToyPolicy start =
            e == 1 ? toy_lab::make_policy(*env)
                   : policy_from_json(read_text(epoch_dir(output_dir, e - 1) / "policy.state"));
        auto groups = toy_lab::sample_responses(*env, start.logits,
                                                cfg.train.samples_per_question,
                                                schedule.at(e), e, cfg.train.rng_seed);
        pair_selection::SelectionConfig prm_sel;
        prm_sel.strategy = datasets::Strategy::Vp;
        prm_sel.rng_seed =
            rng::derive(cfg.train.rng_seed, "prmsel", static_cast<std::uint64_t>(e));
        prm_sel.max_pairs_per_question = cfg.train.max_pairs_per_question;
        for (auto& g : groups) {
          datasets::ResponseGroup rg{g.qid, {}};
          std::unordered_map<std::string, const toy_lab::ToyResponse*> by_rid;
          for (auto& r : g.responses) {
            r.record.correct =
                r.answer_index ==
                env->correct_index[static_cast<std::size_t>(g.question_index)];
            by_rid[r.record.rid] = &r;
            rg.responses.push_back(r.record);
          }
          for (const auto& p : pair_selection::select_vp(rg, prm_sel))
            state.accumulated_prm_pairs.push_back(
                toy_lab::FeaturePair{by_rid.at(p.chosen_rid)->step_features,
                                     by_rid.at(p.rejected_rid)->step_features});
        }
      }
    }
  } else {
    file_groups = load_file_groups(cfg);
  }

  if (done >= cfg.train.epochs) {
    std::cerr << "notice: all " << cfg.train.epochs
              << " epochs are already complete; nothing to resume\n";
  }
  return drive_epochs(cfg, output_dir, done + 1, std::nullopt, std::move(done_reports),
                      &state, env, file_groups);
}

}  // namespace prefforge::orchestrator
