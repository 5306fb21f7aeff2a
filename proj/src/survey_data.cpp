#include "svt/survey_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "svt/error.hpp"
#include "svt/random.hpp"
#include "text_util.hpp"

namespace svt {

namespace {

constexpr std::pair<Role, std::string_view> kRoleNames[] = {
    {Role::pid, "pid"},     {Role::sex, "sex"},     {Role::south, "south"},
    {Role::edu_binary, "edu_binary"}, {Role::age, "age"}, {Role::white, "white"},
    {Role::inc, "inc"},     {Role::ideo, "ideo"},   {Role::outcome, "outcome"},
};

constexpr std::pair<Kind, std::string_view> kKindNames[] = {
    {Kind::binary, "binary"},
    {Kind::ordinal_unit, "ordinal_unit"},
    {Kind::continuous_unit, "continuous_unit"},
};

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

// Checks a numeric value against the column kind; returns an empty string when valid.
std::string kind_violation(const FeatureSpec& spec, ColumnScale scale, double v) {
    if (is_missing(v)) return {};
    if (spec.kind == Kind::binary) {
        if (v != 0.0 && v != 1.0) return "binary column requires 0 or 1";
        return {};
    }
    if (scale == ColumnScale::raw) {
        if (spec.bounds && (v < spec.bounds->lo || v > spec.bounds->hi))
            return "value outside declared bounds [" + format_number(spec.bounds->lo) + ", " +
                   format_number(spec.bounds->hi) + "]";
        return {};
    }
    if (!in_unit(v)) return "unit-interval column requires a value in [0, 1]";
    return {};
}

ColumnScale initial_scale(const FeatureSpec& spec) {
    if (spec.is_text()) return ColumnScale::text;
    if ((spec.bounds || spec.raw) && spec.kind != Kind::binary) return ColumnScale::raw;
    return ColumnScale::unit;
}

// RFC 4180 style record splitter: quoted fields, doubled quotes, CRLF.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string_view to_string(Role role) {
    for (const auto& [r, name] : kRoleNames)
        if (r == role) return name;
    return "outcome";
}

std::string_view to_string(Kind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "continuous_unit";
}

Role parse_role(std::string_view text) {
    for (const auto& [r, name] : kRoleNames)
        if (name == text) return r;
    fail(ErrorCode::schema, "unknown role '" + std::string(text) + "'");
}

Kind parse_kind(std::string_view text) {
    for (const auto& [k, name] : kKindNames)
        if (name == text) return k;
    fail(ErrorCode::schema, "unknown kind '" + std::string(text) + "'");
}

std::string_view to_string(TaskKind kind) {
    return kind == TaskKind::binary ? "binary" : "continuous_unit";
}

TaskKind parse_task_kind(std::string_view text) {
    if (text == "binary") return TaskKind::binary;
    if (text == "continuous_unit" || text == "continuous") return TaskKind::continuous_unit;
    fail(ErrorCode::invalid_argument, "unknown task kind '" + std::string(text) + "'");
}

void SurveySchema::validate() const {
    if (features.empty()) fail(ErrorCode::schema, "schema declares no features");
    std::set<std::string> seen;
    auto check = [&](const FeatureSpec& f, bool is_outcome) {
        if (f.name.empty()) fail(ErrorCode::schema, "column with empty name");
        if (!seen.insert(f.name).second)
            fail(ErrorCode::schema, "duplicate column name '" + f.name + "'");
        if (is_outcome != (f.role == Role::outcome))
            fail(ErrorCode::schema, "column '" + f.name + "' has role '" +
                                        std::string(to_string(f.role)) + "' in the wrong list");
        if (f.bounds && !(f.bounds->hi > f.bounds->lo))
            fail(ErrorCode::schema, "column '" + f.name + "' has bounds with hi <= lo");
        for (const auto& [level, code] : f.levels)
            if (code && f.kind == Kind::binary && *code != 0.0 && *code != 1.0)
                fail(ErrorCode::schema, "column '" + f.name + "' maps level '" + level +
                                            "' outside {0, 1}");
    };
    for (const auto& f : features) check(f, false);
    for (const auto& f : outcomes) check(f, true);
}

const FeatureSpec* SurveySchema::find(std::string_view name) const {
    for (const auto& f : features)
        if (f.name == name) return &f;
    for (const auto& f : outcomes)
        if (f.name == name) return &f;
    return nullptr;
}

std::vector<std::string> SurveySchema::feature_names() const {
    std::vector<std::string> out;
    for (const auto& f : features) out.push_back(f.name);
    return out;
}

std::vector<std::string> SurveySchema::outcome_names() const {
    std::vector<std::string> out;
    for (const auto& f : outcomes) out.push_back(f.name);
    return out;
}

std::vector<std::string> SurveySchema::column_names() const {
    auto out = feature_names();
    for (const auto& f : outcomes) out.push_back(f.name);
    return out;
}

const std::vector<std::string>& canonical_feature_order() {
    static const std::vector<std::string> order = {"pid", "sex",   "south", "edu_binary",
                                                   "age", "white", "inc",   "ideo"};
    return order;
}

SurveySchema canonical_schema() {
    SurveySchema s;
    s.features = {
        {"pid", Role::pid, Kind::ordinal_unit, "Republican=1", {}, {}},
        {"sex", Role::sex, Kind::binary, "male=1", {}, {}},
        {"south", Role::south, Kind::binary, "south=1", {}, {}},
        {"edu_binary", Role::edu_binary, Kind::binary, "college=1", {}, {}},
        {"age", Role::age, Kind::continuous_unit, "min-max scaled age", {}, {}},
        {"white", Role::white, Kind::binary, "white=1", {}, {}},
        {"inc", Role::inc, Kind::ordinal_unit, "min-max scaled income", {}, {}},
        {"ideo", Role::ideo, Kind::ordinal_unit, "conservative=1", {}, {}},
    };
    s.outcomes = {
        {"vote_trump", Role::outcome, Kind::binary, "Trump vote=1", {}, {}},
        {"racial_resentment", Role::outcome, Kind::continuous_unit, "resentment scale", {}, {}},
    };
    return s;
}

TaskSpec vote_task() { return {"vote_trump", TaskKind::binary}; }
TaskSpec resentment_task() { return {"racial_resentment", TaskKind::continuous_unit}; }

bool is_missing(double value) { return std::isnan(value); }
double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }

SurveyDataset::SurveyDataset(SurveySchema schema, std::vector<Column> columns, std::string label,
                             std::string provenance)
    : schema_(std::move(schema)),
      columns_(std::move(columns)),
      label_(std::move(label)),
      provenance_(std::move(provenance)) {
    schema_.validate();
    const auto names = schema_.column_names();
    if (names.size() != columns_.size())
        fail(ErrorCode::schema, "dataset has " + std::to_string(columns_.size()) +
                                    " columns but schema declares " + std::to_string(names.size()));
    rows_ = columns_.empty() ? 0 : columns_.front().size();
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        const Column& col = columns_[c];
        if (col.size() != rows_)
            fail(ErrorCode::schema, "column '" + names[c] + "' has inconsistent length");
        if (col.scale == ColumnScale::text) continue;
        const FeatureSpec& spec = *schema_.find(names[c]);
        for (std::size_t r = 0; r < rows_; ++r) {
            auto why = kind_violation(spec, col.scale, col.values[r]);
            if (!why.empty())
                fail(ErrorCode::range, "column '" + names[c] + "', row " + std::to_string(r + 1) +
                                           ": " + why + " (got " + format_number(col.values[r]) +
                                           ")");
        }
    }
}

std::size_t SurveyDataset::index_of(std::string_view name) const {
    std::size_t i = 0;
    for (const auto& f : schema_.features) {
        if (f.name == name) return i;
        ++i;
    }
    for (const auto& f : schema_.outcomes) {
        if (f.name == name) return i;
        ++i;
    }
    fail(ErrorCode::schema, "dataset '" + label_ + "' has no column '" + std::string(name) + "'");
}

bool SurveyDataset::has_column(std::string_view name) const { return schema_.find(name) != nullptr; }

const Column& SurveyDataset::column_data(std::string_view name) const {
    return columns_[index_of(name)];
}

std::span<const double> SurveyDataset::column(std::string_view name) const {
    const Column& col = column_data(name);
    if (col.scale == ColumnScale::text)
        fail(ErrorCode::schema, "column '" + std::string(name) + "' has not been recoded");
    return col.values;
}

bool SurveyDataset::is_complete() const {
    for (const auto& col : columns_) {
        if (col.scale == ColumnScale::text) return false;
        for (double v : col.values)
            if (is_missing(v)) return false;
    }
    return true;
}

Matrix SurveyDataset::feature_matrix(const std::vector<std::string>& names) const {
    Matrix m(rows_, names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
        const Column& col = column_data(names[c]);
        if (col.scale != ColumnScale::unit)
            fail(ErrorCode::schema, "column '" + names[c] + "' is not normalized to [0, 1]");
        for (std::size_t r = 0; r < rows_; ++r) {
            double v = col.values[r];
            if (is_missing(v))
                fail(ErrorCode::schema, "column '" + names[c] + "' has a missing value at row " +
                                            std::to_string(r + 1));
            m(r, c) = v;
        }
    }
    return m;
}

SurveyDataset SurveyDataset::select_rows(std::span<const std::size_t> indices) const {
    SurveyDataset out;
    out.schema_ = schema_;
    out.label_ = label_;
    out.provenance_ = provenance_;
    out.rows_ = indices.size();
    out.columns_.reserve(columns_.size());
    for (const auto& col : columns_) {
        Column c;
        c.scale = col.scale;
        if (col.scale == ColumnScale::text) {
            c.text.reserve(indices.size());
            for (auto i : indices) c.text.push_back(col.text.at(i));
        } else {
            c.values.reserve(indices.size());
            for (auto i : indices) c.values.push_back(col.values.at(i));
        }
        out.columns_.push_back(std::move(c));
    }
    return out;
}

SurveyDataset SurveyDataset::with_outcome(FeatureSpec spec, std::vector<double> values) const {
    SurveySchema schema = schema_;
    spec.role = Role::outcome;
    schema.outcomes.push_back(std::move(spec));
    auto cols = columns_;
    Column c;
    c.values = std::move(values);
    cols.push_back(std::move(c));
    return SurveyDataset(std::move(schema), std::move(cols), label_, provenance_);
}

SurveyDataset SurveyDataset::with_label(std::string label) const {
    SurveyDataset out = *this;
    out.label_ = std::move(label);
    return out;
}

const std::vector<std::string>& default_missing_tokens() {
    static const std::vector<std::string> tokens = {"", "NA", "N/A", "."};
    return tokens;
}

SurveyDataset parse_csv(std::istream& in, const SurveySchema& schema,
                        const std::vector<std::string>& missing_tokens, std::string label,
                        std::string provenance) {
    schema.validate();
    std::vector<std::string> header;
    if (!read_record(in, header)) fail(ErrorCode::parse, "CSV input is empty");
    for (auto& h : header) h = trim(h);
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!schema.find(header[i]))
            fail(ErrorCode::schema, "CSV column '" + header[i] + "' is not declared in the schema");
        if (!position.emplace(header[i], i).second)
            fail(ErrorCode::schema, "CSV column '" + header[i] + "' appears twice");
    }
    SurveySchema loaded;
    loaded.features = schema.features;
    for (const auto& f : schema.features)
        if (!position.count(f.name))
            fail(ErrorCode::schema, "CSV is missing feature column '" + f.name + "'");
    for (const auto& f : schema.outcomes)
        if (position.count(f.name)) loaded.outcomes.push_back(f);

    const std::set<std::string> missing(missing_tokens.begin(), missing_tokens.end());
    const auto names = loaded.column_names();
    std::vector<Column> columns(names.size());
    std::vector<const FeatureSpec*> specs;
    for (std::size_t c = 0; c < names.size(); ++c) {
        specs.push_back(loaded.find(names[c]));
        columns[c].scale = initial_scale(*specs.back());
    }

    std::vector<std::string> fields;
    std::size_t row = 0;
    while (read_record(in, fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
        ++row;
        if (fields.size() != header.size())
            fail(ErrorCode::parse, "row " + std::to_string(row) + ": expected " +
                                       std::to_string(header.size()) + " fields, found " +
                                       std::to_string(fields.size()));
        for (std::size_t c = 0; c < names.size(); ++c) {
            std::string cell = trim(fields[position.at(names[c])]);
            Column& col = columns[c];
            const bool is_missing_cell = missing.count(cell) > 0;
            if (col.scale == ColumnScale::text) {
                col.text.push_back(is_missing_cell ? std::nullopt : std::optional(cell));
                continue;
            }
            if (is_missing_cell) {
                col.values.push_back(missing_value());
                continue;
            }
            auto value = parse_double(cell);
            if (!value)
                fail(ErrorCode::parse, "row " + std::to_string(row) + ", column '" + names[c] +
                                           "': cannot parse '" + cell + "' as a number");
            auto why = kind_violation(*specs[c], col.scale, *value);
            if (!why.empty())
                fail(ErrorCode::range, "row " + std::to_string(row) + ", column '" + names[c] +
                                           "': " + why + " (got '" + cell + "')");
            col.values.push_back(*value);
        }
    }
    return SurveyDataset(std::move(loaded), std::move(columns), std::move(label),
                         std::move(provenance));
}

SurveyDataset load_csv(const std::string& path, const SurveySchema& schema,
                       const std::vector<std::string>& missing_tokens) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open CSV file '" + path + "'");
    return parse_csv(in, schema, missing_tokens, std::filesystem::path(path).stem().string(), path);
}

void write_csv(const SurveyDataset& ds, std::ostream& out) {
    const auto names = ds.schema().column_names();
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (c) out << ',';
        out << csv_escape(names[c]);
    }
    out << '\n';
    const auto& cols = ds.columns();
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out << ',';
            if (cols[c].scale == ColumnScale::text) {
                if (cols[c].text[r]) out << csv_escape(*cols[c].text[r]);
                else out << "NA";
            } else {
                double v = cols[c].values[r];
                if (is_missing(v)) out << "NA";
                else out << format_number(v);
            }
        }
        out << '\n';
    }
}

void write_csv(const SurveyDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write CSV file '" + path + "'");
    write_csv(ds, out);
    if (!out) fail(ErrorCode::io, "write failed for '" + path + "'");
}

std::vector<RecodeRule> recode_rules(const SurveySchema& schema) {
    std::vector<RecodeRule> rules;
    for (const auto& f : schema.features)
        if (f.is_text()) rules.push_back({f.name, f.levels});
    for (const auto& f : schema.outcomes)
        if (f.is_text()) rules.push_back({f.name, f.levels});
    return rules;
}

SurveyDataset recode(const SurveyDataset& raw, const std::vector<RecodeRule>& rules) {
    SurveySchema schema = raw.schema();
    auto columns = raw.columns();
    const auto names = schema.column_names();
    for (const auto& rule : rules) {
        auto it = std::find(names.begin(), names.end(), rule.column);
        if (it == names.end())
            fail(ErrorCode::schema, "recode rule names unknown column '" + rule.column + "'");
        const std::size_t c = static_cast<std::size_t>(it - names.begin());
        Column& col = columns[c];
        if (col.scale != ColumnScale::text)
            fail(ErrorCode::schema, "column '" + rule.column + "' is not a text column");

        std::set<std::string> unmapped;
        for (const auto& cell : col.text)
            if (cell && !rule.mapping.count(*cell)) unmapped.insert(*cell);
        if (!unmapped.empty()) {
            std::string list;
            for (const auto& level : unmapped) list += (list.empty() ? "'" : ", '") + level + "'";
            fail(ErrorCode::unmapped_level,
                 "column '" + rule.column + "' has unmapped level(s) " + list);
        }

        FeatureSpec* spec = nullptr;
        for (auto& f : schema.features)
            if (f.name == rule.column) spec = &f;
        for (auto& f : schema.outcomes)
            if (f.name == rule.column) spec = &f;
        spec->levels.clear();

        Column mapped;
        mapped.scale = initial_scale(*spec);
        mapped.values.reserve(col.text.size());
        for (std::size_t r = 0; r < col.text.size(); ++r) {
            const auto& cell = col.text[r];
            double v = missing_value();
            if (cell) {
                const auto& code = rule.mapping.at(*cell);
                if (code) v = *code;
            }
            auto why = kind_violation(*spec, mapped.scale, v);
            if (!why.empty())
                fail(ErrorCode::range, "column '" + rule.column + "', row " +
                                           std::to_string(r + 1) + ": level '" + *cell +
                                           "' maps to " + format_number(v) + "; " + why);
            mapped.values.push_back(v);
        }
        col = std::move(mapped);
    }
    return SurveyDataset(std::move(schema), std::move(columns), raw.label(), raw.provenance());
}

Normalized normalize_minmax(const SurveyDataset& ds, const std::vector<std::string>& columns,
                            const BoundsMap& bounds) {
    std::vector<std::string> targets = columns;
    if (targets.empty()) {
        for (const auto& name : ds.schema().column_names())
            if (ds.column_data(name).scale == ColumnScale::raw) targets.push_back(name);
    }
    SurveySchema schema = ds.schema();
    auto cols = ds.columns();
    const auto names = schema.column_names();
    BoundsMap applied;
    for (const auto& name : targets) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) fail(ErrorCode::schema, "cannot normalize unknown column '" + name + "'");
        Column& col = cols[static_cast<std::size_t>(it - names.begin())];
        if (col.scale == ColumnScale::text)
            fail(ErrorCode::schema, "cannot normalize text column '" + name + "'");

        Bounds b;
        if (auto found = bounds.find(name); found != bounds.end()) {
            b = found->second;
        } else if (const auto* spec = schema.find(name); spec->bounds) {
            b = *spec->bounds;
        } else {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (double v : col.values) {
                if (is_missing(v)) continue;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo > hi) fail(ErrorCode::degenerate_column, "column '" + name + "' has no observed values");
            b = {lo, hi};
        }
        if (!(b.hi > b.lo))
            fail(ErrorCode::degenerate_column, "column '" + name + "' has degenerate bounds [" +
                                                   format_number(b.lo) + ", " + format_number(b.hi) + "]");
        const double width = b.hi - b.lo;
        for (std::size_t r = 0; r < col.values.size(); ++r) {
            double& v = col.values[r];
            if (is_missing(v)) continue;
            if (v < b.lo || v > b.hi)
                fail(ErrorCode::range, "column '" + name + "', row " + std::to_string(r + 1) + ": " +
                                           format_number(v) + " outside [" + format_number(b.lo) +
                                           ", " + format_number(b.hi) + "]");
            v = (v - b.lo) / width;
        }
        col.scale = ColumnScale::unit;
        applied[name] = b;
    }
    return {SurveyDataset(std::move(schema), std::move(cols), ds.label(), ds.provenance()),
            std::move(applied)};
}

SurveyDataset denormalize(const SurveyDataset& ds, const BoundsMap& bounds) {
    SurveySchema schema = ds.schema();
    auto cols = ds.columns();
    const auto names = schema.column_names();
    for (const auto& [name, b] : bounds) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) fail(ErrorCode::schema, "cannot denormalize unknown column '" + name + "'");
        Column& col = cols[static_cast<std::size_t>(it - names.begin())];
        if (col.scale != ColumnScale::unit)
            fail(ErrorCode::schema, "column '" + name + "' is not on the unit scale");
        for (double& v : col.values)
            if (!is_missing(v)) v = b.lo + v * (b.hi - b.lo);
        const FeatureSpec* spec = schema.find(name);
        // Binary columns keep their unit scale; the kind check still applies.
        col.scale = spec->kind == Kind::binary ? ColumnScale::unit : ColumnScale::raw;
        for (auto& f : schema.features)
            if (f.name == name && f.kind != Kind::binary) f.bounds = b;
        for (auto& f : schema.outcomes)
            if (f.name == name && f.kind != Kind::binary) f.bounds = b;
    }
    return SurveyDataset(std::move(schema), std::move(cols), ds.label(), ds.provenance());
}

Deletion casewise_delete(const SurveyDataset& ds, const std::vector<std::string>& required) {
    const auto names = required.empty() ? ds.schema().column_names() : required;
    std::vector<const Column*> cols;
    for (const auto& name : names) cols.push_back(&ds.column_data(name));
    std::vector<std::size_t> keep;
    keep.reserve(ds.rows());
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        bool complete = true;
        for (const Column* col : cols) {
            if (col->scale == ColumnScale::text ? !col->text[r].has_value()
                                                : is_missing(col->values[r])) {
                complete = false;
                break;
            }
        }
        if (complete) keep.push_back(r);
    }
    return {ds.select_rows(keep), ds.rows() - keep.size()};
}

SurveySchema align_schemas(const SurveySchema& source, const SurveySchema& target) {
    auto intersect = [](const std::vector<FeatureSpec>& a, const SurveySchema& other) {
        std::vector<FeatureSpec> out;
        for (const auto& f : a) {
            const FeatureSpec* g = other.find(f.name);
            if (!g) continue;
            if (g->kind != f.kind)
                fail(ErrorCode::schema_conflict,
                     "column '" + f.name + "' is " + std::string(to_string(f.kind)) +
                         " in one schema and " + std::string(to_string(g->kind)) + " in the other");
            if (g->role != f.role)
                fail(ErrorCode::schema_conflict, "column '" + f.name + "' has role '" +
                                                     std::string(to_string(f.role)) + "' vs '" +
                                                     std::string(to_string(g->role)) + "'");
            out.push_back(f);
        }
        return out;
    };
    SurveySchema out;
    out.features = intersect(source.features, target);
    out.outcomes = intersect(source.outcomes, target);
    return out;
}

Prepared load_prepared(const std::string& path, const SurveySchema& schema, const BoundsMap& reference) {
    SurveyDataset ds = load_csv(path, schema);
    const auto rules = recode_rules(schema);
    if (!rules.empty()) ds = recode(ds, rules);
    BoundsMap bounds;
    for (const auto& [name, b] : reference)
        if (ds.has_column(name) && ds.column_data(name).scale == ColumnScale::raw) bounds[name] = b;
    Normalized norm = normalize_minmax(ds, {}, bounds);
    Deletion del = casewise_delete(norm.dataset, {});
    return {std::move(del.dataset), del.deleted, std::move(norm.bounds)};
}

SurveyDataset project(const SurveyDataset& ds, const SurveySchema& schema) {
    SurveySchema out;
    std::vector<Column> cols;
    for (const auto& f : schema.features) {
        const FeatureSpec* have = ds.schema().find(f.name);
        if (!have || have->role == Role::outcome)
            fail(ErrorCode::schema, "dataset '" + ds.label() + "' lacks feature '" + f.name + "'");
        out.features.push_back(*have);
        cols.push_back(ds.column_data(f.name));
    }
    for (const auto& f : schema.outcomes) {
        if (!ds.has_column(f.name)) continue;
        out.outcomes.push_back(*ds.schema().find(f.name));
        cols.push_back(ds.column_data(f.name));
    }
    return SurveyDataset(std::move(out), std::move(cols), ds.label(), ds.provenance());
}

const ColumnStats* DescriptiveStats::find(std::string_view name) const {
    for (const auto& c : columns)
        if (c.name == name) return &c;
    return nullptr;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) fail(ErrorCode::empty_dataset, "quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DescriptiveStats describe(const SurveyDataset& ds) {
    if (ds.rows() == 0) fail(ErrorCode::empty_dataset, "cannot describe an empty dataset");
    DescriptiveStats stats;
    for (const auto& name : ds.schema().column_names()) {
        const Column& col = ds.column_data(name);
        if (col.scale == ColumnScale::text)
            fail(ErrorCode::schema, "column '" + name + "' must be recoded before describe");
        std::vector<double> v(col.values.begin(), col.values.end());
        for (double x : v)
            if (is_missing(x))
                fail(ErrorCode::schema, "column '" + name +
                                            "' has missing values; apply case-wise deletion first");
        const double n = static_cast<double>(v.size());
        double sum = 0.0;
        for (double x : v) sum += x;
        const double mean = sum / n;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        std::sort(v.begin(), v.end());
        ColumnStats s;
        s.name = name;
        s.count = v.size();
        s.mean = mean;
        s.std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        s.min = v.front();
        s.p25 = quantile_sorted(v, 0.25);
        s.p50 = quantile_sorted(v, 0.50);
        s.p75 = quantile_sorted(v, 0.75);
        s.max = v.back();
        stats.columns.push_back(std::move(s));
    }
    return stats;
}

std::string format_stats_table(const DescriptiveStats& stats, int precision) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header = {"Statistic"};
    for (const auto& c : stats.columns) header.push_back(c.name);
    cells.push_back(header);
    auto row = [&](const char* label, auto get) {
        std::vector<std::string> r = {label};
        for (const auto& c : stats.columns) r.push_back(get(c));
        cells.push_back(std::move(r));
    };
    auto fixed = [precision](double v) { return format_fixed(v, precision); };
    row("Count", [](const ColumnStats& c) { return std::to_string(c.count); });
    row("Mean", [&](const ColumnStats& c) { return fixed(c.mean); });
    row("Std", [&](const ColumnStats& c) { return fixed(c.std); });
    row("Min", [&](const ColumnStats& c) { return fixed(c.min); });
    row("25%", [&](const ColumnStats& c) { return fixed(c.p25); });
    row("50%", [&](const ColumnStats& c) { return fixed(c.p50); });
    row("75%", [&](const ColumnStats& c) { return fixed(c.p75); });
    row("Max", [&](const ColumnStats& c) { return fixed(c.max); });

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& r : cells)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    std::ostringstream out;
    for (const auto& r : cells) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i == 0) out << pad_right(r[i], width[i]);
            else out << "  " << pad_left(r[i], width[i]);
        }
        out << '\n';
    }
    out << "(std uses the " << stats.std_denominator << " denominator; quartiles use "
        << stats.quantile_rule << " interpolation between order statistics)\n";
    return out.str();
}

Split split_train_test(const SurveyDataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        fail(ErrorCode::invalid_argument, "test fraction must lie strictly between 0 and 1");
    const std::size_t n = ds.rows();
    if (n < 2) fail(ErrorCode::insufficient_data, "need at least 2 rows to split");
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    Split split;
    split.test_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(split.test_rows.begin(), split.test_rows.end());
    std::sort(split.train_rows.begin(), split.train_rows.end());
    split.train = ds.select_rows(split.train_rows);
    split.test = ds.select_rows(split.test_rows);
    return split;
}

}  // namespace svt
