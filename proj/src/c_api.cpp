#include "svt/svt.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "svt/error.hpp"
#include "svt/hash.hpp"
#include "svt/linear_model.hpp"
#include "svt/neural_net.hpp"
#include "svt/serialize.hpp"
#include "svt/survey_data.hpp"
#include "svt/synth_gen.hpp"
#include "svt/transfer_pipeline.hpp"

struct svt_schema {
    svt::SurveySchema value;
};
struct svt_dataset {
    svt::SurveyDataset value;
    std::size_t deleted = 0;
    svt::BoundsMap bounds;
};
struct svt_spec {
    svt::GenerativeSpec value;
};
struct svt_ols {
    svt::OlsFit value;
};
struct svt_config {
    svt::TransferConfig value;
};
struct svt_model {
    svt::MlpModel value;
};
struct svt_history {
    std::vector<svt::EpochRecord> value;
};
struct svt_result {
    svt::ExperimentResult value;
};

namespace {

thread_local std::string g_last_error;

svt_status to_status(svt::ErrorCode code) { return static_cast<svt_status>(static_cast<int>(code)); }

// Runs `f`, mapping exceptions to status codes and recording the message.
template <class F>
svt_status guard(F&& f) {
    try {
        g_last_error.clear();
        f();
        return SVT_OK;
    } catch (const svt::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return SVT_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SVT_E_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) svt::fail(svt::ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void put_string(char** out, const std::string& s) {
    if (out) *out = dup_string(s);
}

svt::TaskSpec task_for(const svt::SurveySchema& schema, const char* outcome) {
    require(outcome, "outcome");
    const svt::FeatureSpec* f = schema.find(outcome);
    if (!f || f->role != svt::Role::outcome)
        svt::fail(svt::ErrorCode::schema, std::string("no outcome column named '") + outcome + "'");
    return {outcome, f->kind == svt::Kind::binary ? svt::TaskKind::binary : svt::TaskKind::continuous_unit};
}

}  // namespace

extern "C" {

const char* svt_version(void) { return "1.0.0"; }

const char* svt_last_error(void) { return g_last_error.c_str(); }

const char* svt_status_name(svt_status status) {
    switch (status) {
        case SVT_OK: return "ok";
        case SVT_E_INVALID_ARGUMENT: return "invalid_argument";
        case SVT_E_IO: return "io";
        case SVT_E_SCHEMA: return "schema";
        case SVT_E_PARSE: return "parse";
        case SVT_E_RANGE: return "range";
        case SVT_E_UNMAPPED_LEVEL: return "unmapped_level";
        case SVT_E_DEGENERATE_COLUMN: return "degenerate_column";
        case SVT_E_SCHEMA_CONFLICT: return "schema_conflict";
        case SVT_E_EMPTY_DATASET: return "empty_dataset";
        case SVT_E_INFEASIBLE: return "infeasible";
        case SVT_E_UNSUPPORTED_TASK: return "unsupported_task";
        case SVT_E_INSUFFICIENT_DATA: return "insufficient_data";
        case SVT_E_SINGULAR: return "singular";
        case SVT_E_NUMERIC: return "numeric";
        case SVT_E_NO_TRAINABLE_PARAMETERS: return "no_trainable_parameters";
        case SVT_E_INTEGRITY: return "integrity";
        case SVT_E_UNSUPPORTED_VERSION: return "unsupported_version";
        case SVT_E_INTERNAL: return "internal";
    }
    return "unknown";
}

int svt_status_is_validation(svt_status status) {
    return status != SVT_OK && status != SVT_E_INTERNAL &&
           svt::is_validation_error(static_cast<svt::ErrorCode>(static_cast<int>(status)));
}

void svt_string_free(char* s) { std::free(s); }

svt_status svt_schema_canonical(svt_schema** out) {
    return guard([&] {
        require(out, "out");
        *out = new svt_schema{svt::canonical_schema()};
    });
}

svt_status svt_schema_load(const char* path, svt_schema** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new svt_schema{svt::load_schema(path)};
    });
}

svt_status svt_schema_to_json(const svt_schema* schema, char** out) {
    return guard([&] {
        require(schema, "schema");
        put_string(out, svt::dump_json(svt::Json(schema->value)));
    });
}

void svt_schema_free(svt_schema* schema) { delete schema; }

svt_status svt_dataset_load_csv(const char* path, const svt_schema* schema, const svt_dataset* reference,
                                svt_dataset** out) {
    return guard([&] {
        require(path, "path");
        require(schema, "schema");
        require(out, "out");
        svt::Prepared p = svt::load_prepared(path, schema->value, reference ? reference->bounds : svt::BoundsMap{});
        *out = new svt_dataset{std::move(p.dataset), p.deleted, std::move(p.bounds)};
    });
}

svt_status svt_dataset_write_csv(const svt_dataset* ds, const char* path) {
    return guard([&] {
        require(ds, "dataset");
        require(path, "path");
        svt::write_csv(ds->value, std::string(path));
    });
}

size_t svt_dataset_rows(const svt_dataset* ds) { return ds ? ds->value.rows() : 0; }

size_t svt_dataset_deleted_rows(const svt_dataset* ds) { return ds ? ds->deleted : 0; }

svt_status svt_dataset_describe(const svt_dataset* ds, char** text, char** json) {
    return guard([&] {
        require(ds, "dataset");
        const svt::DescriptiveStats stats = svt::describe(ds->value);
        put_string(text, svt::format_stats_table(stats));
        put_string(json, svt::dump_json(svt::Json(stats)));
    });
}

void svt_dataset_free(svt_dataset* ds) { delete ds; }

svt_status svt_spec_load(const char* path, svt_spec** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new svt_spec{svt::load_spec(path)};
    });
}

svt_status svt_spec_preset(const char* name, svt_spec** out) {
    return guard([&] {
        require(name, "name");
        require(out, "out");
        *out = new svt_spec{svt::preset_spec(name)};
    });
}

svt_status svt_spec_calibrate(const char* stats_json_path, double temperature, uint64_t seed, svt_spec** out) {
    return guard([&] {
        require(stats_json_path, "stats path");
        require(out, "out");
        const svt::Json j = svt::read_json_file(stats_json_path);
        svt::DescriptiveStats stats;
        try {
            svt::from_json(j, stats);
        } catch (const nlohmann::json::exception& e) {
            svt::fail(svt::ErrorCode::schema, std::string(stats_json_path) + ": " + e.what());
        }
        svt::CalibrationOptions opts;
        opts.temperature = temperature;
        opts.seed = seed;
        *out = new svt_spec{svt::calibrate_to_moments(stats, opts)};
    });
}

svt_status svt_spec_set_seed(svt_spec* spec, uint64_t seed) {
    return guard([&] {
        require(spec, "spec");
        spec->value.seed = seed;
    });
}

svt_status svt_spec_to_json(const svt_spec* spec, char** out) {
    return guard([&] {
        require(spec, "spec");
        put_string(out, svt::dump_json(svt::Json(spec->value)));
    });
}

svt_status svt_spec_generate(const svt_spec* spec, size_t n, svt_dataset** out) {
    return guard([&] {
        require(spec, "spec");
        require(out, "out");
        *out = new svt_dataset{svt::generate(spec->value, n), 0, {}};
    });
}

svt_status svt_spec_oracle(const svt_spec* spec, const char* outcome, size_t mc_samples, char** json) {
    return guard([&] {
        require(spec, "spec");
        const svt::TaskSpec task = task_for(spec->value.schema(), outcome);
        put_string(json, svt::dump_json(svt::Json(svt::bayes_accuracy(spec->value, task, mc_samples))));
    });
}

void svt_spec_free(svt_spec* spec) { delete spec; }

svt_status svt_ols_fit(const svt_dataset* ds, const char* outcome, svt_ols** out) {
    return guard([&] {
        require(ds, "dataset");
        require(out, "out");
        *out = new svt_ols{svt::fit_ols(ds->value, task_for(ds->value.schema(), outcome))};
    });
}

svt_status svt_ols_load(const char* path, svt_ols** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        const svt::Json j = svt::read_json_file(path);
        svt::OlsFit fit;
        try {
            svt::from_json(j, fit);
        } catch (const nlohmann::json::exception& e) {
            svt::fail(svt::ErrorCode::schema, std::string(path) + ": " + e.what());
        }
        *out = new svt_ols{std::move(fit)};
    });
}

svt_status svt_ols_to_json(const svt_ols* fit, char** out) {
    return guard([&] {
        require(fit, "fit");
        put_string(out, svt::dump_json(svt::Json(fit->value)));
    });
}

svt_status svt_ols_summary(const svt_ols* fit, char** out) {
    return guard([&] {
        require(fit, "fit");
        put_string(out, svt::summarize(fit->value));
    });
}

svt_status svt_ols_transfer(const svt_ols* fit, const svt_dataset* target, const char* outcome, char** text,
                            char** json) {
    return guard([&] {
        require(fit, "fit");
        require(target, "target");
        require(outcome, "outcome");
        const svt::FeatureSpec* f = target->value.schema().find(outcome);
        svt::TaskSpec task{outcome, svt::TaskKind::continuous_unit};
        if (f && f->role == svt::Role::outcome && f->kind == svt::Kind::binary) task.kind = svt::TaskKind::binary;
        const svt::TransferOls t = svt::transfer_ols(fit->value, target->value, task);
        if (text) {
            std::vector<std::pair<std::string, const svt::OlsFit*>> cols;
            if (t.target_fit) cols.emplace_back("Real (target)", &*t.target_fit);
            cols.emplace_back("Predicted (source model)", &t.refit);
            std::string s = svt::summarize(cols);
            if (t.comparison) s += svt::format_comparison(*t.comparison, "real", "predicted");
            *text = dup_string(s);
        }
        put_string(json, svt::dump_json(svt::Json(t)));
    });
}

void svt_ols_free(svt_ols* fit) { delete fit; }

svt_status svt_config_default(svt_config** out) {
    return guard([&] {
        require(out, "out");
        *out = new svt_config{};
    });
}

svt_status svt_config_load(const char* path, svt_config** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new svt_config{svt::load_transfer_config(path)};
    });
}

svt_status svt_config_set_seed(svt_config* config, uint64_t seed) {
    return guard([&] {
        require(config, "config");
        config->value.seed = seed;
    });
}

svt_status svt_config_to_json(const svt_config* config, char** out) {
    return guard([&] {
        require(config, "config");
        put_string(out, svt::dump_json(svt::Json(config->value)));
    });
}

svt_status svt_config_split(const svt_config* config, const svt_dataset* target, svt_dataset** train,
                            svt_dataset** test) {
    return guard([&] {
        require(config, "config");
        require(target, "target");
        config->value.validate();
        svt::Split split = svt::split_target(target->value, config->value);
        if (train) *train = new svt_dataset{std::move(split.train), 0, target->bounds};
        if (test) *test = new svt_dataset{std::move(split.test), 0, target->bounds};
    });
}

void svt_config_free(svt_config* config) { delete config; }

svt_status svt_model_pretrain(const svt_config* config, const svt_dataset* source, svt_model** model,
                              svt_history** history) {
    return guard([&] {
        require(config, "config");
        require(source, "source");
        require(model, "model");
        svt::TrainResult r = svt::pretrain(source->value, config->value.eval_tasks, config->value);
        if (history) *history = new svt_history{r.history};
        *model = new svt_model{std::move(r.model)};
    });
}

svt_status svt_model_finetune(const svt_config* config, const svt_model* pretrained, const svt_dataset* target_train,
                              svt_model** model, svt_history** history) {
    return guard([&] {
        require(config, "config");
        require(pretrained, "pretrained model");
        require(target_train, "target");
        require(model, "model");
        svt::TrainResult r = svt::finetune(pretrained->value, target_train->value, config->value.eval_tasks,
                                           config->value);
        if (history) *history = new svt_history{r.history};
        *model = new svt_model{std::move(r.model)};
    });
}

svt_status svt_model_evaluate(const svt_config* config, const svt_model* model, const svt_dataset* test, char** text,
                              char** json) {
    return guard([&] {
        require(config, "config");
        require(model, "model");
        require(test, "test");
        const svt::EvalReport report = svt::evaluate(model->value, test->value, config->value.eval_tasks);
        put_string(text, svt::format_eval(report));
        put_string(json, svt::dump_json(svt::Json(report)));
    });
}

svt_status svt_model_impute(const svt_model* model, const svt_dataset* target, const char* outcome,
                            svt_dataset** out) {
    return guard([&] {
        require(model, "model");
        require(target, "target");
        require(outcome, "outcome");
        require(out, "out");
        const svt::TaskSpec task = model->value.head(outcome).task;
        *out = new svt_dataset{svt::impute(model->value, target->value, task), 0, {}};
    });
}

svt_status svt_model_save(const svt_model* model, const char* path) {
    return guard([&] {
        require(model, "model");
        require(path, "path");
        svt::save_model(model->value, path);
    });
}

svt_status svt_model_load(const char* path, svt_model** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new svt_model{svt::load_model(path)};
    });
}

svt_status svt_model_hash(const svt_model* model, char** out) {
    return guard([&] {
        require(model, "model");
        put_string(out, svt::model_hash(model->value));
    });
}

void svt_model_free(svt_model* model) { delete model; }

svt_status svt_history_to_json(const svt_history* history, char** out) {
    return guard([&] {
        require(history, "history");
        put_string(out, svt::dump_json(svt::Json(history->value)));
    });
}

svt_status svt_history_load(const char* path, svt_history** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        const svt::Json j = svt::read_json_file(path);
        std::vector<svt::EpochRecord> records;
        try {
            for (const auto& e : j) records.push_back(e.get<svt::EpochRecord>());
        } catch (const nlohmann::json::exception& e) {
            svt::fail(svt::ErrorCode::schema, std::string(path) + ": " + e.what());
        }
        *out = new svt_history{std::move(records)};
    });
}

void svt_history_free(svt_history* history) { delete history; }

svt_status svt_experiment_run(const svt_config* config, const svt_dataset* source, const svt_dataset* target,
                              svt_result** out) {
    return guard([&] {
        require(config, "config");
        require(source, "source");
        require(target, "target");
        require(out, "out");
        *out = new svt_result{svt::run_experiment(source->value, target->value, config->value)};
    });
}

svt_status svt_experiment_collate(const svt_config* config, const svt_dataset* source, const svt_dataset* target,
                                  const svt_model* pretrained, const svt_history* pretrain_history,
                                  const svt_model* finetuned, const svt_history* finetune_history,
                                  svt_result** out) {
    return guard([&] {
        require(config, "config");
        require(source, "source");
        require(target, "target");
        require(pretrained, "pretrained model");
        require(finetuned, "finetuned model");
        require(out, "out");
        svt::TrainResult pre{pretrained->value, pretrain_history ? pretrain_history->value
                                                                  : std::vector<svt::EpochRecord>{}};
        svt::TrainResult fine{finetuned->value, finetune_history ? finetune_history->value
                                                                  : std::vector<svt::EpochRecord>{}};
        const std::string started = svt::utc_timestamp();
        const svt::SurveySchema shared = svt::align_schemas(source->value.schema(), target->value.schema());
        svt::ExperimentResult r = svt::collate_experiment(svt::project(source->value, shared),
                                                          svt::project(target->value, shared), config->value, pre, fine);
        r.started_at = started;
        r.finished_at = svt::utc_timestamp();
        *out = new svt_result{std::move(r)};
    });
}

svt_status svt_result_payload_json(const svt_result* result, char** out) {
    return guard([&] {
        require(result, "result");
        put_string(out, svt::dump_json(svt::experiment_payload(result->value)));
    });
}

svt_status svt_result_report_json(const svt_result* result, char** out) {
    return guard([&] {
        require(result, "result");
        put_string(out, svt::dump_json(svt::experiment_report(result->value)));
    });
}

svt_status svt_result_text(const svt_result* result, char** out) {
    return guard([&] {
        require(result, "result");
        put_string(out, svt::format_experiment(result->value));
    });
}

void svt_result_free(svt_result* result) { delete result; }

svt_status svt_file_sha256(const char* path, char** out) {
    return guard([&] {
        require(path, "path");
        put_string(out, svt::file_sha256_hex(path));
    });
}

}  // extern "C"
