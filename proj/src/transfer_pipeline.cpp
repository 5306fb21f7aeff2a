#include "svt/transfer_pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include "svt/error.hpp"
#include "svt/hash.hpp"
#include "svt/random.hpp"
#include "svt/serialize.hpp"
#include "text_util.hpp"

namespace svt {

namespace {

void check_tasks_present(const SurveyDataset& ds, const std::vector<TaskSpec>& tasks, const char* role) {
    if (tasks.empty()) fail(ErrorCode::invalid_argument, "no tasks given");
    for (const auto& t : tasks) {
        const FeatureSpec* f = ds.schema().find(t.outcome_name);
        if (!f || f->role != Role::outcome || !ds.has_column(t.outcome_name))
            fail(ErrorCode::schema, std::string(role) + " dataset '" + ds.label() + "' has no outcome '" +
                                        t.outcome_name + "'");
        const bool binary = f->kind == Kind::binary;
        if (binary != (t.kind == TaskKind::binary))
            fail(ErrorCode::schema, "outcome '" + t.outcome_name + "' is " + std::string(to_string(f->kind)) +
                                        " but the task is " + std::string(to_string(t.kind)));
    }
}

void check_features(const MlpModel& model, const SurveyDataset& ds) {
    std::vector<std::string> missing;
    for (const auto& name : model.feature_order) {
        const FeatureSpec* f = ds.schema().find(name);
        if (!f || f->role == Role::outcome || !ds.has_column(name)) missing.push_back(name);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        fail(ErrorCode::schema, "dataset '" + ds.label() + "' does not match the model's feature order; missing: " +
                                    list);
    }
}

void check_head_kinds(const MlpModel& model, const std::vector<TaskSpec>& tasks) {
    for (const auto& t : tasks) {
        const Head& h = model.head(t.outcome_name);
        if (h.task.kind != t.kind)
            fail(ErrorCode::schema, "head '" + t.outcome_name + "' is " + std::string(to_string(h.task.kind)) +
                                        " but the task is " + std::string(to_string(t.kind)));
    }
}

}  // namespace

void TransferConfig::validate() const {
    source_train.validate();
    finetune.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        fail(ErrorCode::invalid_argument, "test fraction must lie strictly between 0 and 1");
    if (eval_tasks.empty()) fail(ErrorCode::invalid_argument, "at least one task is required");
    for (std::size_t w : hidden)
        if (w < 1) fail(ErrorCode::invalid_argument, "hidden widths must be at least 1");
    // Resolve the freeze policy against a model of the configured shape.
    MlpModel probe = init_default({"x"}, eval_tasks, 0, hidden);
    probe = set_frozen(std::move(probe), freeze_policy, true);
    if (trainable_layer_count(probe) == 0)
        fail(ErrorCode::invalid_argument, "freeze policy '" + freeze_policy + "' leaves no trainable layer");
}

std::uint64_t stage_seed(const TransferConfig& config, SeedStream stream) {
    return derive_seed(config.seed, static_cast<std::uint64_t>(stream));
}

std::string config_hash(const TransferConfig& config) { return sha256_hex(Json(config).dump()); }

Split split_target(const SurveyDataset& target, const TransferConfig& config) {
    return split_train_test(target, config.test_fraction, stage_seed(config, SeedStream::split));
}

TrainResult pretrain(const SurveyDataset& source, const std::vector<TaskSpec>& tasks,
                     const TransferConfig& config) {
    config.validate();
    check_tasks_present(source, tasks, "source");
    MlpModel model = init_default(source.schema().feature_names(), tasks, stage_seed(config, SeedStream::init),
                                  config.hidden);
    TrainConfig tc = config.source_train;
    tc.seed = stage_seed(config, SeedStream::pretrain);
    TrainResult r = train(std::move(model), source, tasks, tc);
    r.model.provenance = {{"stage", "pretrained"}, {"source", source.label()}, {"config_sha256", config_hash(config)}};
    return r;
}

TrainResult finetune(const MlpModel& model, const SurveyDataset& target_train, const std::vector<TaskSpec>& tasks,
                     const TransferConfig& config) {
    config.validate();
    check_features(model, target_train);
    check_tasks_present(target_train, tasks, "target");
    check_head_kinds(model, tasks);
    MlpModel m = set_frozen(model, "*", false);
    m = set_frozen(std::move(m), config.freeze_policy, true);
    if (trainable_layer_count(m) == 0)
        fail(ErrorCode::no_trainable_parameters, "freeze policy '" + config.freeze_policy + "' freezes every layer");
    TrainConfig tc = config.finetune;
    tc.seed = stage_seed(config, SeedStream::finetune);
    TrainResult r = train(std::move(m), target_train, tasks, tc);
    r.model.provenance["stage"] = "finetuned";
    r.model.provenance["target"] = target_train.label();
    r.model.provenance["config_sha256"] = config_hash(config);
    return r;
}

TrainResult train_from_scratch(const SurveyDataset& train_set, const std::vector<TaskSpec>& tasks,
                               const TransferConfig& config) {
    config.validate();
    check_tasks_present(train_set, tasks, "training");
    MlpModel model = init_default(train_set.schema().feature_names(), tasks, stage_seed(config, SeedStream::init),
                                  config.hidden);
    TrainConfig tc = config.source_train;
    tc.seed = stage_seed(config, SeedStream::finetune);
    TrainResult r = train(std::move(model), train_set, tasks, tc);
    r.model.provenance = {{"stage", "scratch"}, {"source", train_set.label()}, {"config_sha256", config_hash(config)}};
    return r;
}

const TaskEval& EvalReport::find(std::string_view task) const {
    for (const auto& t : tasks)
        if (t.task.outcome_name == task) return t;
    fail(ErrorCode::invalid_argument, "no evaluation for task '" + std::string(task) + "'");
}

EvalReport evaluate(const MlpModel& model, const SurveyDataset& test, const std::vector<TaskSpec>& tasks) {
    check_features(model, test);
    check_tasks_present(test, tasks, "evaluation");
    check_head_kinds(model, tasks);
    if (test.rows() == 0) fail(ErrorCode::empty_dataset, "evaluation set is empty");
    const HeadOutputs out = forward(model, test);
    EvalReport report;
    for (const auto& task : tasks) {
        const auto labels = test.column(task.outcome_name);
        for (std::size_t r = 0; r < labels.size(); ++r)
            if (is_missing(labels[r]))
                fail(ErrorCode::schema, "outcome '" + task.outcome_name + "' is missing at row " + std::to_string(r + 1));
        const auto& yhat = out.at(task.outcome_name);
        TaskEval e;
        e.task = task;
        e.n = labels.size();
        if (task.kind == TaskKind::binary) {
            std::vector<double> preds(yhat.size());
            for (std::size_t i = 0; i < yhat.size(); ++i) preds[i] = yhat[i] >= kDecisionThreshold ? 1.0 : 0.0;
            e.confusion = confusion(labels, preds);
            e.accuracy = accuracy(e.confusion);
            e.precision = precision(e.confusion);
            e.recall = recall(e.confusion);
            e.f1 = f1_score(e.precision.value, e.recall.value);
        } else {
            std::vector<double> clipped(yhat.size());
            for (std::size_t i = 0; i < yhat.size(); ++i) clipped[i] = std::clamp(yhat[i], 0.0, 1.0);
            e.rmse = rmse(labels, clipped);
            e.mae = mae(labels, clipped);
        }
        report.tasks.push_back(std::move(e));
    }
    return report;
}

SurveyDataset impute(const MlpModel& model, const SurveyDataset& target, const TaskSpec& task) {
    check_features(model, target);
    check_head_kinds(model, {task});
    const std::string base = task.outcome_name;
    for (const std::string suffix : {"_imputed", "_prob", "_imputed_flag"})
        if (target.schema().find(base + suffix))
            fail(ErrorCode::schema, "dataset already has a column named '" + base + suffix + "'");
    const std::vector<double> yhat = forward(model, target).at(base);
    SurveyDataset out = target;
    FeatureSpec col;
    col.name = base + "_imputed";
    if (task.kind == TaskKind::binary) {
        std::vector<double> labels(yhat.size());
        for (std::size_t i = 0; i < yhat.size(); ++i) labels[i] = yhat[i] >= kDecisionThreshold ? 1.0 : 0.0;
        col.kind = Kind::binary;
        col.coding_note = "model label, 1 when probability >= 0.5";
        out = out.with_outcome(col, std::move(labels));
        FeatureSpec prob;
        prob.name = base + "_prob";
        prob.kind = Kind::continuous_unit;
        prob.coding_note = "model probability";
        out = out.with_outcome(prob, yhat);
    } else {
        std::vector<double> clipped(yhat.size());
        for (std::size_t i = 0; i < yhat.size(); ++i) clipped[i] = std::clamp(yhat[i], 0.0, 1.0);
        col.kind = Kind::continuous_unit;
        col.coding_note = "model output clipped to [0, 1]";
        out = out.with_outcome(col, std::move(clipped));
    }
    FeatureSpec flag;
    flag.name = base + "_imputed_flag";
    flag.kind = Kind::binary;
    flag.coding_note = "1 = value produced by the model";
    return out.with_outcome(flag, std::vector<double>(target.rows(), 1.0));
}

std::vector<OlsBaseline> ols_baselines(const SurveyDataset& source, const SurveyDataset& target,
                                       const std::vector<TaskSpec>& tasks) {
    std::vector<OlsBaseline> out;
    for (const auto& task : tasks) {
        OlsBaseline b;
        b.task = task;
        b.source_fit = fit_ols(source, task);
        b.transfer = transfer_ols(b.source_fit, target, task);
        out.push_back(std::move(b));
    }
    return out;
}

ExperimentResult collate_experiment(const SurveyDataset& source, const SurveyDataset& target,
                                    const TransferConfig& config, const TrainResult& pretrained,
                                    const TrainResult& finetuned) {
    config.validate();
    ExperimentResult r;
    r.source_label = source.label();
    r.target_label = target.label();
    r.config_sha256 = config_hash(config);
    r.source_rows = source.rows();
    Split split = split_target(target, config);
    r.train_rows = std::move(split.train_rows);
    r.test_rows = std::move(split.test_rows);
    r.pretrained = pretrained.model;
    r.finetuned = finetuned.model;
    r.pretrained_model_ref = model_hash(r.pretrained);
    r.finetuned_model_ref = model_hash(r.finetuned);
    r.pretrain_history = pretrained.history;
    r.finetune_history = finetuned.history;
    r.eval = evaluate(r.finetuned, split.test, config.eval_tasks);
    r.baselines = ols_baselines(source, target, config.eval_tasks);
    return r;
}

ExperimentResult run_experiment(const SurveyDataset& source, const SurveyDataset& target,
                                const TransferConfig& config) {
    const std::string started = utc_timestamp();
    config.validate();
    const SurveySchema shared = align_schemas(source.schema(), target.schema());
    const SurveyDataset s = project(source, shared);
    const SurveyDataset t = project(target, shared);
    check_tasks_present(s, config.eval_tasks, "source");
    check_tasks_present(t, config.eval_tasks, "target");
    const Split split = split_target(t, config);
    const TrainResult pre = pretrain(s, config.eval_tasks, config);
    const TrainResult fine = finetune(pre.model, split.train, config.eval_tasks, config);
    ExperimentResult r = collate_experiment(s, t, config, pre, fine);
    r.started_at = started;
    r.finished_at = utc_timestamp();
    return r;
}

std::string format_eval(const EvalReport& report) {
    std::ostringstream out;
    for (const auto& e : report.tasks) {
        out << e.task.outcome_name << " (" << to_string(e.task.kind) << ", n=" << e.n << ")\n";
        if (e.task.kind == TaskKind::binary) {
            const auto flag = [](const Metric& m) { return m.undefined ? std::string(" (undefined)") : std::string(); };
            out << "  accuracy   " << format_fixed(e.accuracy, 4) << "\n"
                << "  precision  " << format_fixed(e.precision.value, 4) << flag(e.precision) << "\n"
                << "  recall     " << format_fixed(e.recall.value, 4) << flag(e.recall) << "\n"
                << "  f1         " << format_fixed(e.f1.value, 4) << flag(e.f1) << "\n"
                << "  confusion  tp=" << e.confusion.tp << " fp=" << e.confusion.fp << " tn=" << e.confusion.tn
                << " fn=" << e.confusion.fn << "\n";
        } else {
            out << "  rmse       " << format_fixed(e.rmse, 4) << "\n"
                << "  mae        " << format_fixed(e.mae, 4) << "\n";
        }
    }
    return out.str();
}

std::string format_experiment(const ExperimentResult& r) {
    std::ostringstream out;
    out << "Transfer experiment\n"
        << "  source      " << r.source_label << " (" << r.source_rows << " rows)\n"
        << "  target      " << r.target_label << " (" << r.train_rows.size() << " fine-tune / " << r.test_rows.size()
        << " test rows)\n"
        << "  config      sha256:" << r.config_sha256 << "\n"
        << "  pretrained  sha256:" << r.pretrained_model_ref << "\n"
        << "  finetuned   sha256:" << r.finetuned_model_ref << "\n";
    if (!r.pretrain_history.empty())
        out << "  pretrain loss   " << format_fixed(r.pretrain_history.front().loss.total, 6) << " -> "
            << format_fixed(r.pretrain_history.back().loss.total, 6) << " over " << r.pretrain_history.size()
            << " epochs\n";
    if (!r.finetune_history.empty())
        out << "  fine-tune loss  " << format_fixed(r.finetune_history.front().loss.total, 6) << " -> "
            << format_fixed(r.finetune_history.back().loss.total, 6) << " over " << r.finetune_history.size()
            << " epochs\n";
    out << "\nHeld-out target evaluation\n" << format_eval(r.eval);
    for (const auto& b : r.baselines) {
        out << "\nOLS baseline: " << b.task.outcome_name << "\n";
        std::vector<std::pair<std::string, const OlsFit*>> cols;
        if (b.transfer.target_fit) cols.emplace_back("Real (target)", &*b.transfer.target_fit);
        cols.emplace_back("Predicted (source model)", &b.transfer.refit);
        out << summarize(cols);
        if (b.transfer.comparison)
            out << format_comparison(*b.transfer.comparison, "real", "predicted");
    }
    return out.str();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace svt
