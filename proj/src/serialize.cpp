#include "svt/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "svt/error.hpp"
#include "svt/hash.hpp"

namespace svt {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// null reads back as NaN; the JSON text has no infinity.
double read_number(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

template <class T>
void get_if(const Json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

Json metric(const Metric& m) { return Json{{"value", m.value}, {"undefined", m.undefined}}; }

std::string_view marginal_kind_name(MarginalKind k) {
    switch (k) {
        case MarginalKind::bernoulli: return "bernoulli";
        case MarginalKind::beta: return "beta";
        case MarginalKind::empirical: return "empirical";
    }
    return "bernoulli";
}

MarginalKind parse_marginal_kind(const std::string& s) {
    if (s == "bernoulli") return MarginalKind::bernoulli;
    if (s == "beta") return MarginalKind::beta;
    if (s == "empirical") return MarginalKind::empirical;
    fail(ErrorCode::schema, "unknown marginal kind '" + s + "'");
}

// Wraps JSON library exceptions in the library's error type.
template <class F>
auto guarded(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::parse, what + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::schema, what + ": " + e.what());
    }
}

}  // namespace

void to_json(Json& j, const FeatureSpec& f) {
    j = Json{{"name", f.name}, {"role", to_string(f.role)}, {"kind", to_string(f.kind)}};
    if (!f.coding_note.empty()) j["coding_note"] = f.coding_note;
    if (f.bounds) j["bounds"] = Json{{"lo", f.bounds->lo}, {"hi", f.bounds->hi}};
    if (f.raw) j["raw"] = true;
    if (!f.levels.empty()) {
        Json levels = Json::object();
        for (const auto& [text, code] : f.levels) levels[text] = code ? Json(*code) : Json(nullptr);
        j["levels"] = levels;
    }
}

void from_json(const Json& j, FeatureSpec& f) {
    f = FeatureSpec{};
    j.at("name").get_to(f.name);
    f.role = parse_role(j.value("role", std::string("outcome")));
    f.kind = parse_kind(j.at("kind").get<std::string>());
    get_if(j, "coding_note", f.coding_note);
    if (auto it = j.find("bounds"); it != j.end())
        f.bounds = Bounds{it->at("lo").get<double>(), it->at("hi").get<double>()};
    get_if(j, "raw", f.raw);
    if (auto it = j.find("levels"); it != j.end())
        for (const auto& [text, code] : it->items())
            f.levels[text] = code.is_null() ? std::nullopt : std::optional<double>(code.get<double>());
}

void to_json(Json& j, const SurveySchema& s) { j = Json{{"features", s.features}, {"outcomes", s.outcomes}}; }

void from_json(const Json& j, SurveySchema& s) {
    s = SurveySchema{};
    j.at("features").get_to(s.features);
    get_if(j, "outcomes", s.outcomes);
}

void to_json(Json& j, const TaskSpec& t) { j = Json{{"outcome", t.outcome_name}, {"kind", to_string(t.kind)}}; }

void from_json(const Json& j, TaskSpec& t) {
    j.at("outcome").get_to(t.outcome_name);
    t.kind = parse_task_kind(j.at("kind").get<std::string>());
}

void to_json(Json& j, const ColumnStats& c) {
    j = Json{{"name", c.name}, {"count", c.count}, {"mean", number(c.mean)}, {"std", number(c.std)},
             {"min", number(c.min)}, {"p25", number(c.p25)}, {"p50", number(c.p50)},
             {"p75", number(c.p75)}, {"max", number(c.max)}};
}

void from_json(const Json& j, ColumnStats& c) {
    j.at("name").get_to(c.name);
    c.count = j.value("count", std::size_t{0});
    c.mean = read_number(j.at("mean"));
    c.std = read_number(j.at("std"));
    c.min = j.contains("min") ? read_number(j["min"]) : 0.0;
    c.p25 = j.contains("p25") ? read_number(j["p25"]) : std::numeric_limits<double>::quiet_NaN();
    c.p50 = j.contains("p50") ? read_number(j["p50"]) : std::numeric_limits<double>::quiet_NaN();
    c.p75 = j.contains("p75") ? read_number(j["p75"]) : std::numeric_limits<double>::quiet_NaN();
    c.max = j.contains("max") ? read_number(j["max"]) : 1.0;
}

void to_json(Json& j, const DescriptiveStats& s) {
    j = Json{{"std_denominator", s.std_denominator}, {"quantile_rule", s.quantile_rule}, {"columns", s.columns}};
}

void from_json(const Json& j, DescriptiveStats& s) {
    s = DescriptiveStats{};
    j.at("columns").get_to(s.columns);
    get_if(j, "std_denominator", s.std_denominator);
    get_if(j, "quantile_rule", s.quantile_rule);
}

void to_json(Json& j, const Marginal& m) {
    j = Json{{"kind", marginal_kind_name(m.kind)}};
    switch (m.kind) {
        case MarginalKind::bernoulli: j["p"] = m.p; break;
        case MarginalKind::beta:
            j["alpha"] = m.alpha;
            j["beta"] = m.beta;
            if (m.levels > 0) j["levels"] = m.levels;
            break;
        case MarginalKind::empirical:
            j["support"] = m.support;
            j["probs"] = m.probs;
            break;
    }
}

void from_json(const Json& j, Marginal& m) {
    m = Marginal{};
    m.kind = parse_marginal_kind(j.at("kind").get<std::string>());
    switch (m.kind) {
        case MarginalKind::bernoulli: j.at("p").get_to(m.p); break;
        case MarginalKind::beta:
            j.at("alpha").get_to(m.alpha);
            j.at("beta").get_to(m.beta);
            m.levels = j.value("levels", 0);
            break;
        case MarginalKind::empirical:
            j.at("support").get_to(m.support);
            j.at("probs").get_to(m.probs);
            break;
    }
}

void to_json(Json& j, const GenerativeSpec& s) {
    Json features = Json::array();
    for (const auto& f : s.features)
        features.push_back(Json{{"name", f.name}, {"role", to_string(f.role)}, {"kind", to_string(f.kind)},
                                {"marginal", f.dist}});
    Json corr = Json::array();
    for (const auto& c : s.correlations) corr.push_back(Json{{"a", c.a}, {"b", c.b}, {"rho", c.rho}});
    Json outcomes = Json::array();
    for (const auto& o : s.outcomes) {
        Json oj{{"name", o.name}, {"kind", to_string(o.kind)}, {"coefficients", o.coefficients}};
        if (o.kind == TaskKind::binary) {
            oj["link"] = to_string(o.link);
            oj["threshold"] = o.threshold;
            if (o.link == Link::logistic) oj["temperature"] = o.temperature;
        } else {
            oj["noise_sd"] = o.noise_sd;
        }
        outcomes.push_back(std::move(oj));
    }
    j = Json{{"seed", s.seed}, {"features", features}, {"correlations", corr}, {"outcomes", outcomes}};
}

void from_json(const Json& j, GenerativeSpec& s) {
    s = GenerativeSpec{};
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& fj : j.at("features")) {
        FeatureMarginal f;
        fj.at("name").get_to(f.name);
        f.role = parse_role(fj.at("role").get<std::string>());
        f.kind = parse_kind(fj.at("kind").get<std::string>());
        fj.at("marginal").get_to(f.dist);
        s.features.push_back(std::move(f));
    }
    if (auto it = j.find("correlations"); it != j.end())
        for (const auto& cj : *it)
            s.correlations.push_back({cj.at("a").get<std::string>(), cj.at("b").get<std::string>(),
                                      cj.at("rho").get<double>()});
    for (const auto& oj : j.at("outcomes")) {
        OutcomeModel o;
        oj.at("name").get_to(o.name);
        o.kind = parse_task_kind(oj.at("kind").get<std::string>());
        oj.at("coefficients").get_to(o.coefficients);
        if (auto it = oj.find("link"); it != oj.end()) o.link = parse_link(it->get<std::string>());
        get_if(oj, "threshold", o.threshold);
        get_if(oj, "temperature", o.temperature);
        get_if(oj, "noise_sd", o.noise_sd);
        s.outcomes.push_back(std::move(o));
    }
}

void to_json(Json& j, const OracleReport& r) {
    j = Json{{"bayes_accuracy", r.bayes_accuracy}, {"method", r.method}, {"mc_samples", r.mc_samples},
             {"mc_std_error", r.mc_std_error}};
}

void to_json(Json& j, const OlsFit& f) {
    Json se = Json::array();
    for (double v : f.std_errors) se.push_back(number(v));
    j = Json{{"outcome", f.outcome},
             {"feature_names", f.feature_names},
             {"coefficients", f.coefficients},
             {"std_errors", se},
             {"n", f.n},
             {"r2", number(f.r2)},
             {"adj_r2", number(f.adj_r2)},
             {"rse", number(f.rse)},
             {"f_stat", std::isinf(f.f_stat) ? Json("inf") : number(f.f_stat)},
             {"df_model", f.df_model},
             {"df_residual", f.df_residual}};
}

void from_json(const Json& j, OlsFit& f) {
    f = OlsFit{};
    j.at("outcome").get_to(f.outcome);
    j.at("feature_names").get_to(f.feature_names);
    j.at("coefficients").get_to(f.coefficients);
    if (f.coefficients.size() != f.feature_names.size() + 1)
        fail(ErrorCode::schema, "OLS fit has " + std::to_string(f.coefficients.size()) + " coefficients for " +
                                    std::to_string(f.feature_names.size()) + " features (intercept expected first)");
    if (auto it = j.find("std_errors"); it != j.end())
        for (const auto& v : *it) f.std_errors.push_back(read_number(v));
    f.n = j.value("n", std::size_t{0});
    if (j.contains("r2")) f.r2 = read_number(j["r2"]);
    if (j.contains("adj_r2")) f.adj_r2 = read_number(j["adj_r2"]);
    if (j.contains("rse")) f.rse = read_number(j["rse"]);
    if (auto it = j.find("f_stat"); it != j.end())
        f.f_stat = it->is_string() ? std::numeric_limits<double>::infinity() : read_number(*it);
    f.df_model = j.value("df_model", f.feature_names.size());
    f.df_residual = j.value("df_residual", std::size_t{0});
}

void to_json(Json& j, const CoefficientComparison& c) {
    Json rows = Json::array();
    for (const auto& r : c.rows)
        rows.push_back(Json{{"name", r.name}, {"real", r.value_a}, {"transferred", r.value_b},
                            {"abs_diff", r.abs_diff}, {"sign_match", r.sign_match}, {"zero_band", r.zero_band}});
    j = Json{{"rows", rows}, {"sign_match_count", c.sign_match_count}, {"compared_count", c.compared_count},
             {"max_abs_diff", c.max_abs_diff}};
}

void to_json(Json& j, const TransferOls& t) {
    j = Json{{"refit", t.refit}};
    j["target_fit"] = t.target_fit ? Json(*t.target_fit) : Json(nullptr);
    j["comparison"] = t.comparison ? Json(*t.comparison) : Json(nullptr);
}

void to_json(Json& j, const OlsBaseline& b) {
    j = Json{{"task", b.task}, {"source_fit", b.source_fit}, {"transfer", b.transfer}};
}

void to_json(Json& j, const TrainConfig& c) {
    Json weights = Json::object();
    for (const auto& [k, v] : c.loss_weights) weights[k] = v;
    j = Json{{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"epochs", c.epochs},
             {"loss_weights", weights}, {"seed", c.seed}, {"shuffle", c.shuffle}};
}

void from_json(const Json& j, TrainConfig& c) {
    get_if(j, "learning_rate", c.learning_rate);
    get_if(j, "batch_size", c.batch_size);
    get_if(j, "epochs", c.epochs);
    if (auto it = j.find("loss_weights"); it != j.end()) {
        c.loss_weights.clear();
        for (const auto& [k, v] : it->items()) c.loss_weights[k] = v.get<double>();
    }
    get_if(j, "seed", c.seed);
    get_if(j, "shuffle", c.shuffle);
}

void to_json(Json& j, const TransferConfig& c) {
    j = Json{{"seed", c.seed},
             {"test_fraction", c.test_fraction},
             {"freeze_policy", c.freeze_policy},
             {"hidden", c.hidden},
             {"eval_tasks", c.eval_tasks},
             {"source_train", c.source_train},
             {"finetune", c.finetune}};
}

void from_json(const Json& j, TransferConfig& c) {
    get_if(j, "seed", c.seed);
    get_if(j, "test_fraction", c.test_fraction);
    get_if(j, "freeze_policy", c.freeze_policy);
    get_if(j, "hidden", c.hidden);
    get_if(j, "eval_tasks", c.eval_tasks);
    if (auto it = j.find("source_train"); it != j.end()) from_json(*it, c.source_train);
    if (auto it = j.find("finetune"); it != j.end()) from_json(*it, c.finetune);
}

void to_json(Json& j, const EpochRecord& e) {
    Json heads = Json::object();
    for (const auto& [k, v] : e.loss.per_head) heads[k] = number(v);
    j = Json{{"epoch", e.epoch}, {"loss", number(e.loss.total)}, {"per_head", heads}};
}

void from_json(const Json& j, EpochRecord& e) {
    e = EpochRecord{};
    j.at("epoch").get_to(e.epoch);
    e.loss.total = read_number(j.at("loss"));
    if (auto it = j.find("per_head"); it != j.end())
        for (const auto& [k, v] : it->items()) e.loss.per_head[k] = read_number(v);
}

void to_json(Json& j, const TaskEval& e) {
    j = Json{{"task", e.task}, {"n", e.n}};
    if (e.task.kind == TaskKind::binary) {
        j["confusion"] = Json{{"tp", e.confusion.tp}, {"fp", e.confusion.fp}, {"tn", e.confusion.tn},
                              {"fn", e.confusion.fn}};
        j["accuracy"] = e.accuracy;
        j["precision"] = metric(e.precision);
        j["recall"] = metric(e.recall);
        j["f1"] = metric(e.f1);
    } else {
        j["rmse"] = e.rmse;
        j["mae"] = e.mae;
    }
}

void to_json(Json& j, const EvalReport& r) { j = Json{{"tasks", r.tasks}}; }

Json experiment_payload(const ExperimentResult& r) {
    Json split{{"train_rows", r.train_rows.size()},
               {"test_rows", r.test_rows.size()},
               {"test_rows_sha256", sha256_hex(Json(r.test_rows).dump())}};
    return Json{{"source", Json{{"label", r.source_label}, {"rows", r.source_rows}}},
                {"target", Json{{"label", r.target_label}, {"rows", r.train_rows.size() + r.test_rows.size()}}},
                {"config_sha256", r.config_sha256},
                {"split", split},
                {"models", Json{{"pretrained", r.pretrained_model_ref}, {"finetuned", r.finetuned_model_ref}}},
                {"history", Json{{"pretrain", r.pretrain_history}, {"finetune", r.finetune_history}}},
                {"eval", r.eval},
                {"ols_baseline", r.baselines}};
}

Json experiment_report(const ExperimentResult& r) {
    Json payload = experiment_payload(r);
    const std::string digest = sha256_hex(payload.dump());
    return Json{{"payload", std::move(payload)},
                {"payload_sha256", digest},
                {"timestamps", Json{{"started_at", r.started_at}, {"finished_at", r.finished_at}}}};
}

Json parse_json_text(const std::string& text, const std::string& what) {
    return guarded(what, [&] { return Json::parse(text); });
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json_text(buf.str(), path);
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

SurveySchema load_schema(const std::string& path) {
    const Json j = read_json_file(path);
    SurveySchema s = guarded(path, [&] { return j.get<SurveySchema>(); });
    s.validate();
    return s;
}

GenerativeSpec load_spec(const std::string& path) {
    const Json j = read_json_file(path);
    GenerativeSpec s = guarded(path, [&] { return j.get<GenerativeSpec>(); });
    s.validate();
    return s;
}

TransferConfig load_transfer_config(const std::string& path) {
    const Json j = read_json_file(path);
    TransferConfig c = guarded(path, [&] {
        TransferConfig out;
        from_json(j, out);
        return out;
    });
    c.validate();
    return c;
}

}  // namespace svt
