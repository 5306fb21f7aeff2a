// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "svt/svt.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Failure {
    svt_status status;
    std::string message;
};

void check(svt_status s) {
    if (s != SVT_OK) throw Failure{s, svt_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{SVT_E_INVALID_ARGUMENT, msg}; }

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
template <class T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, Deleter<T, Free>>;

using Schema = Handle<svt_schema, svt_schema_free>;
using Dataset = Handle<svt_dataset, svt_dataset_free>;
using Spec = Handle<svt_spec, svt_spec_free>;
using Ols = Handle<svt_ols, svt_ols_free>;
using Config = Handle<svt_config, svt_config_free>;
using Model = Handle<svt_model, svt_model_free>;
using History = Handle<svt_history, svt_history_free>;
using Result = Handle<svt_result, svt_result_free>;

// Takes ownership of a C string from the library.
std::string take(char* s) {
    std::string out = s ? s : "";
    svt_string_free(s);
    return out;
}

std::string file_hash(const std::string& path) {
    char* out = nullptr;
    check(svt_file_sha256(path.c_str(), &out));
    return take(out);
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Outputs are written to temporary siblings and renamed into place only when
// the whole command succeeds; otherwise every temporary is removed.
class Outputs {
public:
    ~Outputs() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& o : items_) fs::remove(o.temp, ec);
    }

    std::string stage(const std::string& path) {
        if (path.empty()) usage_error("output path is empty");
        const fs::path parent = fs::path(path).parent_path();
        if (!parent.empty() && !fs::is_directory(parent))
            throw Failure{SVT_E_IO, "output directory '" + parent.string() + "' does not exist"};
        std::string temp = path + ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(items_.size());
        items_.push_back({path, temp});
        return temp;
    }

    void write_text(const std::string& path, const std::string& content) {
        const std::string temp = stage(path);
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw Failure{SVT_E_IO, "cannot write '" + path + "'"};
    }

    // Hashes every staged file, writes the manifest, then renames all into place.
    void commit(const std::string& command, const Json& inputs, const std::optional<std::string>& config_path,
                std::optional<std::uint64_t> seed, const Json& extra = Json::object()) {
        if (items_.empty()) return;
        Json outputs = Json::array();
        for (const auto& o : items_) outputs.push_back(Json{{"path", o.path}, {"sha256", file_hash(o.temp)}});
        Json manifest{{"command", command},
                      {"tool_version", svt_version()},
                      {"config", config_path ? Json(*config_path) : Json(nullptr)},
                      {"seed", seed ? Json(*seed) : Json(nullptr)},
                      {"inputs", inputs},
                      {"outputs", outputs}};
        for (const auto& [k, v] : extra.items()) manifest[k] = v;
        manifest["timestamps"] = Json{{"finished_at", utc_now()}};
        const std::string manifest_path = items_.front().path + ".manifest.json";
        write_text(manifest_path, manifest.dump(2) + "\n");
        for (std::size_t k = 0; k < items_.size(); ++k) {
            std::error_code ec;
            fs::rename(items_[k].temp, items_[k].path, ec);
            if (ec) {
                for (std::size_t done = 0; done < k; ++done) fs::remove(items_[done].path, ec);
                throw Failure{SVT_E_IO, "cannot move output into '" + items_[k].path + "': " + ec.message()};
            }
        }
        committed_ = true;
        std::cerr << "wrote " << manifest_path << "\n";
    }

private:
    struct Item {
        std::string path;
        std::string temp;
    };
    std::vector<Item> items_;
    bool committed_ = false;
};

Json input_entry(const std::string& path) { return Json{{"path", path}, {"sha256", file_hash(path)}}; }

struct Common {
    std::string schema;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "text";
    std::string bounds_from;

    bool json() const { return format == "json"; }
};

void add_common(CLI::App* cmd, Common& c, bool with_config) {
    cmd->add_option("--schema", c.schema, "Schema JSON file (default: built-in eight-feature schema)");
    if (with_config) cmd->add_option("--config", c.config, "Transfer configuration JSON file");
    cmd->add_option("--seed", c.seed, "Root seed; overrides the seed in the config or spec");
    cmd->add_option("--out", c.out, "Output path");
    cmd->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"text", "json"}));
}

Schema load_schema(const Common& c) {
    svt_schema* s = nullptr;
    check(c.schema.empty() ? svt_schema_canonical(&s) : svt_schema_load(c.schema.c_str(), &s));
    return Schema(s);
}

void add_bounds_from(CLI::App* cmd, Common& c) {
    cmd->add_option("--bounds-from", c.bounds_from,
                    "Source CSV whose normalization bounds are reused for raw-scale columns");
}

Dataset load_data(const std::string& path, const svt_schema* schema, const svt_dataset* reference = nullptr) {
    svt_dataset* d = nullptr;
    check(svt_dataset_load_csv(path.c_str(), schema, reference, &d));
    Dataset ds(d);
    if (svt_dataset_deleted_rows(d) > 0)
        std::cerr << path << ": dropped " << svt_dataset_deleted_rows(d) << " rows with missing values\n";
    return ds;
}

// Empty handle when --bounds-from is not given.
Dataset reference(const Common& c, const svt_schema* schema) {
    if (c.bounds_from.empty()) return Dataset(nullptr);
    svt_dataset* d = nullptr;
    check(svt_dataset_load_csv(c.bounds_from.c_str(), schema, nullptr, &d));
    return Dataset(d);
}

Config load_config(const Common& c) {
    svt_config* cfg = nullptr;
    check(c.config.empty() ? svt_config_default(&cfg) : svt_config_load(c.config.c_str(), &cfg));
    Config out(cfg);
    if (c.seed) check(svt_config_set_seed(cfg, *c.seed));
    return out;
}

Model load_model(const std::string& path) {
    svt_model* m = nullptr;
    check(svt_model_load(path.c_str(), &m));
    return Model(m);
}

Json common_inputs(const Common& c) {
    Json in = Json::array();
    if (!c.schema.empty()) in.push_back(input_entry(c.schema));
    if (!c.config.empty()) in.push_back(input_entry(c.config));
    if (!c.bounds_from.empty()) in.push_back(input_entry(c.bounds_from));
    return in;
}

std::optional<std::string> opt_path(const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

// Selects the part of a target dataset named by --split.
Dataset select_split(const svt_config* cfg, Dataset ds, const std::string& split) {
    if (split == "all") return ds;
    svt_dataset* train = nullptr;
    svt_dataset* test = nullptr;
    check(svt_config_split(cfg, ds.get(), &train, &test));
    Dataset tr(train), te(test);
    return split == "train" ? std::move(tr) : std::move(te);
}

void emit(const std::string& text) { std::cout << text; }

// ---------------------------------------------------------------------------

struct DescribeArgs {
    Common c;
    std::string data;
};

void run_describe(const DescribeArgs& a) {
    Schema schema = load_schema(a.c);
    Dataset ds = load_data(a.data, schema.get());
    char* text = nullptr;
    char* json = nullptr;
    check(svt_dataset_describe(ds.get(), &text, &json));
    const std::string t = take(text), j = take(json);
    const std::string& rendered = a.c.json() ? j : t;
    if (a.c.out.empty()) {
        emit(rendered);
        return;
    }
    Outputs outs;
    outs.write_text(a.c.out, rendered);
    Json in = common_inputs(a.c);
    in.push_back(input_entry(a.data));
    outs.commit("describe", in, std::nullopt, std::nullopt);
}

struct SynthArgs {
    Common c;
    std::string spec;
    std::string preset;
    std::string calibrate;
    double temperature = 0.05;
    std::optional<std::size_t> n;
    bool emit_spec = false;
    std::string oracle;
    std::size_t mc_samples = 400000;
};

void run_synth(const SynthArgs& a) {
    const int sources = !a.spec.empty() + !a.preset.empty() + !a.calibrate.empty();
    if (sources != 1) usage_error("give exactly one of --spec, --preset or --calibrate");
    svt_spec* raw = nullptr;
    if (!a.spec.empty()) check(svt_spec_load(a.spec.c_str(), &raw));
    else if (!a.preset.empty()) check(svt_spec_preset(a.preset.c_str(), &raw));
    else check(svt_spec_calibrate(a.calibrate.c_str(), a.temperature, a.c.seed.value_or(0), &raw));
    Spec spec(raw);
    if (a.c.seed) check(svt_spec_set_seed(spec.get(), *a.c.seed));

    Json in = common_inputs(a.c);
    if (!a.spec.empty()) in.push_back(input_entry(a.spec));
    if (!a.calibrate.empty()) in.push_back(input_entry(a.calibrate));

    if (!a.oracle.empty()) {
        char* json = nullptr;
        check(svt_spec_oracle(spec.get(), a.oracle.c_str(), a.mc_samples, &json));
        const std::string report = take(json);
        if (a.c.out.empty()) return emit(report);
        Outputs outs;
        outs.write_text(a.c.out, report);
        outs.commit("synth", in, std::nullopt, a.c.seed);
        return;
    }
    if (a.emit_spec) {
        char* json = nullptr;
        check(svt_spec_to_json(spec.get(), &json));
        const std::string text = take(json);
        if (a.c.out.empty()) return emit(text);
        Outputs outs;
        outs.write_text(a.c.out, text);
        outs.commit("synth", in, std::nullopt, a.c.seed);
        return;
    }
    if (!a.n) usage_error("--n is required to generate rows (or pass --emit-spec)");
    if (*a.n == 0) usage_error("--n must be at least 1");
    if (a.c.out.empty()) usage_error("--out is required when generating rows");
    svt_dataset* ds = nullptr;
    check(svt_spec_generate(spec.get(), *a.n, &ds));
    Dataset data(ds);
    Outputs outs;
    check(svt_dataset_write_csv(data.get(), outs.stage(a.c.out).c_str()));
    outs.commit("synth", in, std::nullopt, a.c.seed, Json{{"rows", *a.n}});
}

struct FitOlsArgs {
    Common c;
    std::string data;
    std::string outcome;
};

void run_fit_ols(const FitOlsArgs& a) {
    Schema schema = load_schema(a.c);
    Dataset ds = load_data(a.data, schema.get());
    svt_ols* raw = nullptr;
    check(svt_ols_fit(ds.get(), a.outcome.c_str(), &raw));
    Ols fit(raw);
    char* json = nullptr;
    char* text = nullptr;
    check(svt_ols_to_json(fit.get(), &json));
    check(svt_ols_summary(fit.get(), &text));
    const std::string j = take(json), t = take(text);
    emit(a.c.json() ? j : t);
    if (a.c.out.empty()) return;
    Outputs outs;
    outs.write_text(a.c.out, j);
    Json in = common_inputs(a.c);
    in.push_back(input_entry(a.data));
    outs.commit("fit-ols", in, std::nullopt, std::nullopt);
}

struct TransferOlsArgs {
    Common c;
    std::string fit;
    std::string data;
    std::string outcome;
};

void run_transfer_ols(const TransferOlsArgs& a) {
    Schema schema = load_schema(a.c);
    Dataset ds = load_data(a.data, schema.get(), reference(a.c, schema.get()).get());
    svt_ols* raw = nullptr;
    check(svt_ols_load(a.fit.c_str(), &raw));
    Ols fit(raw);
    char* text = nullptr;
    char* json = nullptr;
    check(svt_ols_transfer(fit.get(), ds.get(), a.outcome.c_str(), &text, &json));
    const std::string t = take(text), j = take(json);
    const std::string& rendered = a.c.json() ? j : t;
    emit(rendered);
    if (a.c.out.empty()) return;
    Outputs outs;
    outs.write_text(a.c.out, rendered);
    Json in = common_inputs(a.c);
    in.push_back(input_entry(a.fit));
    in.push_back(input_entry(a.data));
    outs.commit("transfer-ols", in, std::nullopt, std::nullopt);
}

std::string history_path(const std::string& model_path) { return model_path + ".history.json"; }

std::string model_summary(svt_model* model, svt_history* history) {
    char* hash = nullptr;
    check(svt_model_hash(model, &hash));
    char* hjson = nullptr;
    check(svt_history_to_json(history, &hjson));
    const Json h = Json::parse(take(hjson));
    std::ostringstream out;
    out << "model sha256:" << take(hash) << "\n";
    if (!h.empty()) {
        out << "epochs " << h.size() << ", loss " << h.front()["loss"].dump() << " -> " << h.back()["loss"].dump()
            << "\n";
    }
    return out.str();
}

void save_stage(Outputs& outs, svt_model* model, svt_history* history, const std::string& path) {
    check(svt_model_save(model, outs.stage(path).c_str()));
    char* hjson = nullptr;
    check(svt_history_to_json(history, &hjson));
    outs.write_text(history_path(path), take(hjson));
}

struct PretrainArgs {
    Common c;
    std::string data;
};

void run_pretrain(const PretrainArgs& a) {
    if (a.c.out.empty()) usage_error("--out is required");
    Schema schema = load_schema(a.c);
    Config cfg = load_config(a.c);
    Dataset ds = load_data(a.data, schema.get());
    svt_model* m = nullptr;
    svt_history* h = nullptr;
    check(svt_model_pretrain(cfg.get(), ds.get(), &m, &h));
    Model model(m);
    History hist(h);
    Outputs outs;
    save_stage(outs, model.get(), hist.get(), a.c.out);
    Json in = common_inputs(a.c);
    in.push_back(input_entry(a.data));
    emit(model_summary(model.get(), hist.get()));
    outs.commit("pretrain", in, opt_path(a.c.config), a.c.seed);
}

struct FinetuneArgs {
    Common c;
    std::string model;
    std::string data;
    std::string split = "train";
};

void run_finetune(const FinetuneArgs& a) {
    if (a.c.out.empty()) usage_error("--out is required");
    Schema schema = load_schema(a.c);
    Config cfg = load_config(a.c);
    Model pre = load_model(a.model);
    Dataset ds =
        select_split(cfg.get(), load_data(a.data, schema.get(), reference(a.c, schema.get()).get()), a.split);
    svt_model* m = nullptr;
    svt_history* h = nullptr;
    check(svt_model_finetune(cfg.get(), pre.get(), ds.get(), &m, &h));
    Model model(m);
    History hist(h);
    Outputs outs;
    save_stage(outs, model.get(), hist.get(), a.c.out);
    Json in = common_inputs(a.c);
    in.push_back(input_entry(a.model));
    in.push_back(input_entry(a.data));
    emit(model_summary(model.get(), hist.get()));
    outs.commit("finetune", in, opt_path(a.c.config), a.c.seed, Json{{"split", a.split}});
}

struct EvaluateArgs {
    Common c;
    std::string model;
    std::string data;
    std::string split = "test";
};

void run_evaluate(const EvaluateArgs& a) {
    Schema schema = load_schema(a.c);
    Config cfg = load_config(a.c);
    Model model = load_model(a.model);
    Dataset ds =
        select_split(cfg.get(), load_data(a.data, schema.get(), reference(a.c, schema.get()).get()), a.split);
    char* text = nullptr;
    char* json = nullptr;
    check(svt_model_evaluate(cfg.get(), model.get(), ds.get(), &text, &json));
    const std::string t = take(text), j = take(json);
    const std::string& rendered = a.c.json() ? j : t;
    emit(rendered);
    if (a.c.out.empty()) return;
    Outputs outs;
    outs.write_text(a.c.out, rendered);
    Json in = common_inputs(a.c);
    in.push_back(input_entry(a.model));
    in.push_back(input_entry(a.data));
    outs.commit("evaluate", in, opt_path(a.c.config), a.c.seed, Json{{"split", a.split}});
}

struct ImputeArgs {
    Common c;
    std::string model;
    std::string data;
    std::string outcome;
    std::string split = "all";
};

void run_impute(const ImputeArgs& a) {
    if (a.c.out.empty()) usage_error("--out is required");
    Schema schema = load_schema(a.c);
    Model model = load_model(a.model);
    Dataset ds = load_data(a.data, schema.get(), reference(a.c, schema.get()).get());
    if (a.split != "all") {
        Config cfg = load_config(a.c);
        ds = select_split(cfg.get(), std::move(ds), a.split);
    }
    svt_dataset* raw = nullptr;
    check(svt_model_impute(model.get(), ds.get(), a.outcome.c_str(), &raw));
    Dataset out(raw);
    Outputs outs;
    check(svt_dataset_write_csv(out.get(), outs.stage(a.c.out).c_str()));
    Json in = common_inputs(a.c);
    in.push_back(input_entry(a.model));
    in.push_back(input_entry(a.data));
    std::cout << "imputed " << a.outcome << " for " << svt_dataset_rows(out.get()) << " rows\n";
    outs.commit("impute", in, opt_path(a.c.config), a.c.seed, Json{{"split", a.split}});
}

struct ReportArgs {
    Common c;
    bool run = false;
    std::string source;
    std::string target;
    std::string pretrained;
    std::string finetuned;
    std::string pretrain_history;
    std::string finetune_history;
};

History load_history(const std::string& explicit_path, const std::string& model_path) {
    const std::string path = explicit_path.empty() ? history_path(model_path) : explicit_path;
    if (explicit_path.empty() && !fs::exists(path)) return History(nullptr);
    svt_history* h = nullptr;
    check(svt_history_load(path.c_str(), &h));
    return History(h);
}

void run_report(const ReportArgs& a) {
    if (a.source.empty() || a.target.empty()) usage_error("--source and --target are required");
    if (!a.run && (a.pretrained.empty() || a.finetuned.empty()))
        usage_error("give --pretrained and --finetuned models, or --run to train them");
    Schema schema = load_schema(a.c);
    Config cfg = load_config(a.c);
    Dataset source = load_data(a.source, schema.get());
    Dataset target = load_data(a.target, schema.get(), source.get());
    Json in = common_inputs(a.c);
    in.push_back(input_entry(a.source));
    in.push_back(input_entry(a.target));

    svt_result* raw = nullptr;
    if (a.run) {
        check(svt_experiment_run(cfg.get(), source.get(), target.get(), &raw));
    } else {
        Model pre = load_model(a.pretrained);
        Model fine = load_model(a.finetuned);
        History pre_h = load_history(a.pretrain_history, a.pretrained);
        History fine_h = load_history(a.finetune_history, a.finetuned);
        in.push_back(input_entry(a.pretrained));
        in.push_back(input_entry(a.finetuned));
        check(svt_experiment_collate(cfg.get(), source.get(), target.get(), pre.get(), pre_h.get(), fine.get(),
                                     fine_h.get(), &raw));
    }
    Result result(raw);
    char* payload = nullptr;
    char* full = nullptr;
    char* text = nullptr;
    check(svt_result_payload_json(result.get(), &payload));
    check(svt_result_report_json(result.get(), &full));
    check(svt_result_text(result.get(), &text));
    const Json payload_json = Json::parse(take(payload));
    const Json full_json = Json::parse(take(full));
    const std::string summary = take(text);
    // The report file carries the payload and its hash; wall-clock times go to the manifest.
    const Json report{{"payload", payload_json}, {"payload_sha256", full_json["payload_sha256"]}};
    emit(a.c.json() ? report.dump(2) + "\n" : summary);
    if (a.c.out.empty()) return;
    Outputs outs;
    outs.write_text(a.c.out + ".json", report.dump(2) + "\n");
    outs.write_text(a.c.out + ".txt", summary);
    outs.commit("report", in, opt_path(a.c.config), a.c.seed,
                Json{{"mode", a.run ? "run" : "collate"}, {"experiment_timestamps", full_json["timestamps"]}});
}

int exit_code_for(svt_status s) { return svt_status_is_validation(s) ? kExitValidation : kExitRuntime; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survey transfer-learning toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(svt_version()));

    DescribeArgs describe;
    auto* d = app.add_subcommand("describe", "Descriptive statistics table for a dataset");
    add_common(d, describe.c, false);
    d->add_option("data", describe.data, "CSV file")->required();

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate synthetic rows, or emit a generative spec");
    add_common(s, synth.c, false);
    s->add_option("--spec", synth.spec, "Generative spec JSON file");
    s->add_option("--preset", synth.preset, "Built-in spec: ces2020 or anes2020");
    s->add_option("--calibrate", synth.calibrate, "Descriptive-statistics JSON to calibrate a spec from");
    s->add_option("--temperature", synth.temperature, "Logistic temperature for calibrated binary outcomes");
    s->add_option("--n", synth.n, "Rows to generate");
    s->add_flag("--emit-spec", synth.emit_spec, "Write the spec instead of rows");
    s->add_option("--oracle", synth.oracle, "Report the Bayes-optimal accuracy for this binary outcome");
    s->add_option("--mc-samples", synth.mc_samples, "Monte Carlo draws for the oracle");

    FitOlsArgs fit;
    auto* f = app.add_subcommand("fit-ols", "Ordinary least squares fit of one outcome");
    add_common(f, fit.c, false);
    f->add_option("data", fit.data, "CSV file")->required();
    f->add_option("--outcome", fit.outcome, "Outcome column")->required();

    TransferOlsArgs transfer;
    auto* t = app.add_subcommand("transfer-ols", "Apply a saved OLS fit to a target dataset and refit");
    add_common(t, transfer.c, false);
    add_bounds_from(t, transfer.c);
    t->add_option("--fit", transfer.fit, "Fit JSON written by fit-ols")->required();
    t->add_option("data", transfer.data, "Target CSV file")->required();
    t->add_option("--outcome", transfer.outcome, "Outcome name")->required();

    PretrainArgs pre;
    auto* p = app.add_subcommand("pretrain", "Train the multi-head network on a source dataset");
    add_common(p, pre.c, true);
    p->add_option("data", pre.data, "Source CSV file")->required();

    FinetuneArgs fine;
    auto* ft = app.add_subcommand("finetune", "Freeze early layers and fine-tune on a target dataset");
    add_common(ft, fine.c, true);
    add_bounds_from(ft, fine.c);
    ft->add_option("--model", fine.model, "Pretrained model file")->required();
    ft->add_option("data", fine.data, "Target CSV file")->required();
    ft->add_option("--split", fine.split, "Target rows to use")->check(CLI::IsMember({"train", "test", "all"}));

    EvaluateArgs eval;
    auto* e = app.add_subcommand("evaluate", "Held-out metrics for a model");
    add_common(e, eval.c, true);
    add_bounds_from(e, eval.c);
    e->add_option("--model", eval.model, "Model file")->required();
    e->add_option("data", eval.data, "Target CSV file")->required();
    e->add_option("--split", eval.split, "Target rows to use")->check(CLI::IsMember({"train", "test", "all"}));

    ImputeArgs imp;
    auto* i = app.add_subcommand("impute", "Add model-imputed outcome columns to a dataset");
    add_common(i, imp.c, true);
    add_bounds_from(i, imp.c);
    i->add_option("--model", imp.model, "Model file")->required();
    i->add_option("data", imp.data, "CSV file")->required();
    i->add_option("--outcome", imp.outcome, "Head to impute")->required();
    i->add_option("--split", imp.split, "Rows to impute")->check(CLI::IsMember({"train", "test", "all"}));

    ReportArgs rep;
    auto* r = app.add_subcommand("report", "Collate a transfer experiment into text and JSON reports");
    add_common(r, rep.c, true);
    r->add_flag("--run", rep.run, "Run every stage instead of collating saved models");
    r->add_option("--source", rep.source, "Source CSV file");
    r->add_option("--target", rep.target, "Target CSV file");
    r->add_option("--pretrained", rep.pretrained, "Pretrained model file");
    r->add_option("--finetuned", rep.finetuned, "Fine-tuned model file");
    r->add_option("--pretrain-history", rep.pretrain_history, "Loss history (default: <pretrained>.history.json)");
    r->add_option("--finetune-history", rep.finetune_history, "Loss history (default: <finetuned>.history.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (d->parsed()) run_describe(describe);
        else if (s->parsed()) run_synth(synth);
        else if (f->parsed()) run_fit_ols(fit);
        else if (t->parsed()) run_transfer_ols(transfer);
        else if (p->parsed()) run_pretrain(pre);
        else if (ft->parsed()) run_finetune(fine);
        else if (e->parsed()) run_evaluate(eval);
        else if (i->parsed()) run_impute(imp);
        else if (r->parsed()) run_report(rep);
        return kExitOk;
    } catch (const Failure& fail) {
        std::cerr << "error (" << svt_status_name(fail.status) << "): " << fail.message << "\n";
        return exit_code_for(fail.status);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitRuntime;
    }
}
