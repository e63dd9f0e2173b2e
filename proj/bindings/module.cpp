#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "prefforge/datasets.hpp"
#include "prefforge/errors.hpp"
#include "prefforge/losses.hpp"
#include "prefforge/metrics.hpp"
#include "prefforge/orchestrator.hpp"
#include "prefforge/pair_selection.hpp"
#include "prefforge/toy_lab.hpp"
#include "prefforge/tts_select.hpp"
#include "prefforge/verification.hpp"

namespace py = pybind11;
using namespace prefforge;

namespace {

datasets::ResponseRecord make_response(
    const std::string& rid, const std::string& qid, const std::string& text,
    const std::vector<std::string>& steps, std::optional<std::string> answer,
    std::optional<bool> correct, std::optional<double> orm_score,
    std::optional<std::vector<double>> step_scores, double temperature, int epoch) {
  datasets::ResponseRecord r;
  r.rid = rid;
  r.qid = qid;
  r.text = text;
  r.steps = steps;
  r.answer = std::move(answer);
  r.correct = correct;
  r.orm_score = orm_score;
  r.step_scores = std::move(step_scores);
  r.temperature = temperature;
  r.epoch = epoch;
  return r;
}

py::dict report_to_dict(const toy_lab::EpochReport& r) {
  py::dict d;
  d["epoch"] = r.epoch;
  d["temperature"] = r.temperature;
  d["pairs"] = r.pairs;
  d["mean_dpo_loss"] = r.mean_dpo_loss ? py::object(py::float_(*r.mean_dpo_loss))
                                       : py::object(py::none());
  d["mean_prm_loss"] = r.mean_prm_loss ? py::object(py::float_(*r.mean_prm_loss))
                                       : py::object(py::none());
  d["greedy_accuracy"] = r.greedy_accuracy ? py::object(py::float_(*r.greedy_accuracy))
                                           : py::object(py::none());
  d["prm_holdout_accuracy"] = r.prm_holdout_accuracy
                                  ? py::object(py::float_(*r.prm_holdout_accuracy))
                                  : py::object(py::none());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "prefforge: preference-pair filtering, DPO/PRM losses, test-time "
            "selection, and the synthetic iterative-DPO lab";

  py::register_exception<Error>(m, "PrefForgeError");

  // ---- datasets ----
  py::enum_<datasets::Strategy>(m, "Strategy")
      .value("outcome", datasets::Strategy::Outcome)
      .value("orm", datasets::Strategy::Orm)
      .value("prm", datasets::Strategy::Prm)
      .value("prm_offset", datasets::Strategy::PrmOffset)
      .value("vp", datasets::Strategy::Vp);

  py::class_<datasets::QuestionRecord>(m, "QuestionRecord")
      .def(py::init<const std::string&, const std::string&, const std::string&>(),
           py::arg("qid"), py::arg("prompt"), py::arg("reference_answer"))
      .def_readwrite("qid", &datasets::QuestionRecord::qid)
      .def_readwrite("prompt", &datasets::QuestionRecord::prompt)
      .def_readwrite("reference_answer", &datasets::QuestionRecord::reference_answer);

  py::class_<datasets::ResponseRecord>(m, "ResponseRecord")
      .def(py::init(&make_response), py::arg("rid"), py::arg("qid"),
           py::arg("text") = "", py::arg("steps") = std::vector<std::string>{},
           py::arg("answer") = std::nullopt, py::arg("correct") = std::nullopt,
           py::arg("orm_score") = std::nullopt, py::arg("step_scores") = std::nullopt,
           py::arg("temperature") = 1.0, py::arg("epoch") = 0)
      .def_readwrite("rid", &datasets::ResponseRecord::rid)
      .def_readwrite("qid", &datasets::ResponseRecord::qid)
      .def_readwrite("text", &datasets::ResponseRecord::text)
      .def_readwrite("steps", &datasets::ResponseRecord::steps)
      .def_readwrite("answer", &datasets::ResponseRecord::answer)
      .def_readwrite("correct", &datasets::ResponseRecord::correct)
      .def_readwrite("orm_score", &datasets::ResponseRecord::orm_score)
      .def_readwrite("step_scores", &datasets::ResponseRecord::step_scores)
      .def_readwrite("temperature", &datasets::ResponseRecord::temperature)
      .def_readwrite("epoch", &datasets::ResponseRecord::epoch)
      .def("__repr__", [](const datasets::ResponseRecord& r) {
        return "<ResponseRecord " + r.rid + ">";
      });

  py::class_<datasets::PreferencePair>(m, "PreferencePair")
      .def_readonly("qid", &datasets::PreferencePair::qid)
      .def_readonly("chosen_rid", &datasets::PreferencePair::chosen_rid)
      .def_readonly("rejected_rid", &datasets::PreferencePair::rejected_rid)
      .def_readonly("strategy", &datasets::PreferencePair::strategy)
      .def_readonly("is_offset", &datasets::PreferencePair::is_offset)
      .def("__repr__", [](const datasets::PreferencePair& p) {
        return "<PreferencePair " + p.chosen_rid + " > " + p.rejected_rid + ">";
      });

  py::class_<datasets::ResponseGroup>(m, "ResponseGroup")
      .def(py::init<const std::string&, const std::vector<datasets::ResponseRecord>&>(),
           py::arg("qid"), py::arg("responses"))
      .def_readwrite("qid", &datasets::ResponseGroup::qid)
      .def_readwrite("responses", &datasets::ResponseGroup::responses);

  m.def("parse_responses", &datasets::parse_responses, py::arg("path"));
  m.def("parse_questions", &datasets::parse_questions, py::arg("path"));
  m.def("parse_pairs", &datasets::parse_pairs, py::arg("path"));
  m.def("write_pairs", &datasets::write_pairs, py::arg("pairs"), py::arg("path"));
  m.def("write_responses", &datasets::write_responses, py::arg("records"), py::arg("path"));
  m.def(
      "validate_schema",
      [](const std::filesystem::path& path, const std::string& kind,
         std::optional<std::filesystem::path> crosscheck) {
        const auto report = datasets::validate_schema(
            path, datasets::record_kind_from_name(kind), crosscheck);
        std::vector<std::tuple<std::size_t, std::string, std::string>> out;
        for (const auto& v : report.violations) out.emplace_back(v.line, v.field, v.message);
        return out;
      },
      py::arg("path"), py::arg("kind"), py::arg("crosscheck_responses") = std::nullopt,
      "Returns a list of (line, field, message) violations; empty means valid.");

  // ---- verification ----
  m.def("extract_answer", &verification::extract_answer, py::arg("text"));
  m.def("answers_equivalent", &verification::answers_equivalent, py::arg("a"), py::arg("b"));
  m.def("canonicalize_answer", &verification::canonicalize_answer, py::arg("answer"));
  m.def("label_outcome", &verification::label_outcome, py::arg("response"),
        py::arg("question"));

  py::class_<verification::StepAnnotation>(m, "StepAnnotation")
      .def(py::init([](const std::string& rid, const std::vector<bool>& labels,
                       bool matches) {
             return verification::StepAnnotation{rid, labels, matches};
           }),
           py::arg("rid"), py::arg("step_labels"), py::arg("outcome_matches_reference"))
      .def_readwrite("rid", &verification::StepAnnotation::rid)
      .def_readwrite("step_labels", &verification::StepAnnotation::step_labels)
      .def_readwrite("outcome_matches_reference",
                     &verification::StepAnnotation::outcome_matches_reference);
  m.def("filter_annotations", &verification::filter_annotations, py::arg("annotations"));

  // ---- losses ----
  m.def("log_sigmoid", &losses::log_sigmoid, py::arg("x"));
  m.def(
      "dpo_margin",
      [](double lp_cp, double lp_cr, double lp_rp, double lp_rr, double beta) {
        return losses::dpo_margin({lp_cp, lp_cr, lp_rp, lp_rr}, losses::Beta(beta));
      },
      py::arg("lp_chosen_policy"), py::arg("lp_chosen_ref"),
      py::arg("lp_rejected_policy"), py::arg("lp_rejected_ref"), py::arg("beta") = 0.1);
  m.def(
      "dpo_loss",
      [](double lp_cp, double lp_cr, double lp_rp, double lp_rr, double beta) {
        return losses::dpo_loss({lp_cp, lp_cr, lp_rp, lp_rr}, losses::Beta(beta));
      },
      py::arg("lp_chosen_policy"), py::arg("lp_chosen_ref"),
      py::arg("lp_rejected_policy"), py::arg("lp_rejected_ref"), py::arg("beta") = 0.1);
  m.def(
      "dpo_gradient",
      [](double lp_cp, double lp_cr, double lp_rp, double lp_rr, double beta) {
        const auto g =
            losses::dpo_gradient({lp_cp, lp_cr, lp_rp, lp_rr}, losses::Beta(beta));
        return std::make_pair(g.d_chosen_policy, g.d_rejected_policy);
      },
      py::arg("lp_chosen_policy"), py::arg("lp_chosen_ref"),
      py::arg("lp_rejected_policy"), py::arg("lp_rejected_ref"), py::arg("beta") = 0.1);
  m.def("prm_pairwise_loss", &losses::prm_pairwise_loss, py::arg("score_chosen"),
        py::arg("score_rejected"));
  m.def(
      "prm_pairwise_gradient",
      [](double sc, double sr) {
        const auto g = losses::prm_pairwise_gradient(sc, sr);
        return std::make_pair(g.d_chosen, g.d_rejected);
      },
      py::arg("score_chosen"), py::arg("score_rejected"));

  // ---- pair selection ----
  m.def("min_step_score",
        [](const std::vector<double>& s) { return pair_selection::min_step_score(s); },
        py::arg("step_scores"));
  m.def(
      "select_pairs",
      [](const datasets::ResponseGroup& group, datasets::Strategy strategy,
         std::uint64_t seed, int max_pairs) {
        pair_selection::SelectionConfig cfg{strategy, seed, max_pairs};
        return pair_selection::select(group, cfg);
      },
      py::arg("group"), py::arg("strategy"), py::arg("seed") = 0,
      py::arg("max_pairs_per_question") = 4);

  // ---- test-time selection ----
  m.def("majority_vote", &tts_select::majority_vote, py::arg("answers"));
  m.def("prm_min_vote", &tts_select::prm_min_vote, py::arg("group"));
  m.def("best_of_n", &tts_select::best_of_n, py::arg("group"));

  // ---- metrics ----
  m.def(
      "f1_components",
      [](std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn) {
        const auto c = metrics::f1_components({tp, fp, tn, fn});
        py::dict d;
        d["f1_positive"] = c.f1_positive;
        d["f1_negative"] = c.f1_negative;
        d["positive_degenerate"] = c.positive_degenerate;
        d["negative_degenerate"] = c.negative_degenerate;
        return d;
      },
      py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));
  m.def("weighted_f1", &metrics::weighted_f1, py::arg("f1_pos"), py::arg("f1_neg"),
        py::arg("n_pos"), py::arg("n_neg"));
  m.def("pass_at_k", &metrics::pass_at_k, py::arg("groups"), py::arg("k"));
  m.def("mv_at_k", &metrics::mv_at_k, py::arg("groups"), py::arg("k"),
        py::arg("references"));
  m.def("avg_token_count", &metrics::avg_token_count, py::arg("texts"));
  m.def("marker_count", &metrics::marker_count, py::arg("texts"), py::arg("marker"));

  // ---- toy lab ----
  m.def("default_schedule", [](int total_epochs) {
    return toy_lab::default_schedule(total_epochs).temperatures;
  });
  m.def(
      "run_toy",
      [](int questions, int answers, int steps, int feature_dim, std::uint64_t seed,
         int epochs, int samples_per_question, datasets::Strategy strategy,
         double beta, double learning_rate, bool rm_cotrain, bool swap_pairs,
         const std::string& reference_mode) {
        toy_lab::TrainConfig cfg;
        cfg.beta = losses::Beta(beta);
        cfg.learning_rate = learning_rate;
        cfg.epochs = epochs;
        cfg.samples_per_question = samples_per_question;
        cfg.rng_seed = seed;
        cfg.strategy = strategy;
        cfg.rm_cotrain = rm_cotrain;
        cfg.swap_pairs = swap_pairs;
        if (reference_mode == "epoch_start") {
          cfg.reference_mode = toy_lab::ReferenceMode::EpochStart;
        } else if (reference_mode == "original_base") {
          cfg.reference_mode = toy_lab::ReferenceMode::OriginalBase;
        } else {
          throw Error("reference_mode must be epoch_start or original_base");
        }
        const auto env = toy_lab::make_env(questions, answers, steps, feature_dim, seed);
        const auto artifacts = toy_lab::run_iterations(env, cfg);
        py::dict out;
        out["initial_accuracy"] = artifacts.report.initial_accuracy;
        py::list per_epoch;
        for (const auto& r : artifacts.report.epochs) per_epoch.append(report_to_dict(r));
        out["epochs"] = per_epoch;
        return out;
      },
      py::arg("questions") = 50, py::arg("answers") = 8, py::arg("steps") = 3,
      py::arg("feature_dim") = 4, py::arg("seed") = 7, py::arg("epochs") = 6,
      py::arg("samples_per_question") = 8,
      py::arg("strategy") = datasets::Strategy::Vp, py::arg("beta") = 0.1,
      py::arg("learning_rate") = 0.5, py::arg("rm_cotrain") = false,
      py::arg("swap_pairs") = false, py::arg("reference_mode") = "epoch_start",
      "Run the synthetic iterative-DPO loop and return per-epoch reports.");
  m.def(
      "gradient_check",
      [](std::uint64_t seed, int instances) {
        const auto r = toy_lab::gradient_check(seed, instances);
        py::dict d;
        d["dpo"] = r.max_rel_err_dpo;
        d["prm"] = r.max_rel_err_prm;
        d["policy"] = r.max_rel_err_policy;
        d["worst"] = r.worst();
        return d;
      },
      py::arg("seed") = 12345, py::arg("instances") = 1000);

  m.attr("__version__") = "0.1.0";
}
