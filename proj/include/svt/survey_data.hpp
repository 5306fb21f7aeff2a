#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svt/matrix.hpp"

namespace svt {

enum class Role { pid, sex, south, edu_binary, age, white, inc, ideo, outcome };
enum class Kind { binary, ordinal_unit, continuous_unit };

std::string_view to_string(Role role);
std::string_view to_string(Kind kind);
Role parse_role(std::string_view text);
Kind parse_kind(std::string_view text);

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
    bool operator==(const Bounds&) const = default;
};

// Text level -> numeric code; nullopt maps the level to missing.
using LevelMap = std::map<std::string, std::optional<double>>;

struct FeatureSpec {
    std::string name;
    Role role = Role::outcome;
    Kind kind = Kind::continuous_unit;
    std::string coding_note;
    // Raw-scale range; a column with bounds is loaded unnormalized.
    std::optional<Bounds> bounds;
    // Non-empty levels mark a column that arrives as text and must be recoded.
    LevelMap levels;
    // Raw-scale column whose bounds come from the observed data (or a reference) at load time.
    bool raw = false;

    bool is_text() const { return !levels.empty(); }
    bool operator==(const FeatureSpec&) const = default;
};

struct SurveySchema {
    std::vector<FeatureSpec> features;
    std::vector<FeatureSpec> outcomes;

    // Throws on duplicate names, an empty feature list, or misplaced roles.
    void validate() const;

    const FeatureSpec* find(std::string_view name) const;
    std::vector<std::string> feature_names() const;
    std::vector<std::string> outcome_names() const;
    // Features followed by outcomes; this is also the dataset column order.
    std::vector<std::string> column_names() const;

    bool operator==(const SurveySchema&) const = default;
};

enum class TaskKind { binary, continuous_unit };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

struct TaskSpec {
    std::string outcome_name;
    TaskKind kind = TaskKind::binary;
    bool operator==(const TaskSpec&) const = default;
};

// pid, sex, south, edu_binary, age, white, inc, ideo.
const std::vector<std::string>& canonical_feature_order();
// The eight shared features plus vote_trump and racial_resentment outcomes.
SurveySchema canonical_schema();
TaskSpec vote_task();
TaskSpec resentment_task();

// Missing values are stored as quiet NaN.
bool is_missing(double value);
double missing_value();

enum class ColumnScale { unit, raw, text };

struct Column {
    ColumnScale scale = ColumnScale::unit;
    std::vector<double> values;                      // numeric columns
    std::vector<std::optional<std::string>> text;    // text columns only

    std::size_t size() const { return scale == ColumnScale::text ? text.size() : values.size(); }
    bool operator==(const Column&) const = default;
};

class SurveyDataset {
public:
    SurveyDataset() = default;
    // Columns follow schema.column_names(); sizes and kinds are checked.
    SurveyDataset(SurveySchema schema, std::vector<Column> columns, std::string label,
                  std::string provenance);

    const SurveySchema& schema() const { return schema_; }
    std::size_t rows() const { return rows_; }
    const std::string& label() const { return label_; }
    const std::string& provenance() const { return provenance_; }

    bool has_column(std::string_view name) const;
    const Column& column_data(std::string_view name) const;
    std::span<const double> column(std::string_view name) const;
    const std::vector<Column>& columns() const { return columns_; }

    // True when every numeric cell is present and no text column remains.
    bool is_complete() const;

    // Rows x names.size(); every named column must be a complete unit-scale column.
    Matrix feature_matrix(const std::vector<std::string>& names) const;

    SurveyDataset select_rows(std::span<const std::size_t> indices) const;
    SurveyDataset with_outcome(FeatureSpec spec, std::vector<double> values) const;
    SurveyDataset with_label(std::string label) const;

    bool operator==(const SurveyDataset&) const = default;

private:
    std::size_t index_of(std::string_view name) const;

    SurveySchema schema_;
    std::vector<Column> columns_;
    std::string label_;
    std::string provenance_;
    std::size_t rows_ = 0;
};

const std::vector<std::string>& default_missing_tokens();

SurveyDataset load_csv(const std::string& path, const SurveySchema& schema,
                       const std::vector<std::string>& missing_tokens = default_missing_tokens());
SurveyDataset parse_csv(std::istream& in, const SurveySchema& schema,
                        const std::vector<std::string>& missing_tokens, std::string label,
                        std::string provenance);
void write_csv(const SurveyDataset& ds, std::ostream& out);
void write_csv(const SurveyDataset& ds, const std::string& path);

struct RecodeRule {
    std::string column;
    LevelMap mapping;
};

// Rules for every text column that declares levels in the schema.
std::vector<RecodeRule> recode_rules(const SurveySchema& schema);
SurveyDataset recode(const SurveyDataset& raw, const std::vector<RecodeRule>& rules);

using BoundsMap = std::map<std::string, Bounds>;

struct Normalized {
    SurveyDataset dataset;
    BoundsMap bounds;  // what was applied, for denormalize()
};

// Empty `columns` selects every raw-scale column. Bounds come from `bounds`,
// then the schema's declared bounds, then the observed min/max.
Normalized normalize_minmax(const SurveyDataset& ds, const std::vector<std::string>& columns,
                            const BoundsMap& bounds = {});
SurveyDataset denormalize(const SurveyDataset& ds, const BoundsMap& bounds);

struct Deletion {
    SurveyDataset dataset;
    std::size_t deleted = 0;
    bool empty() const { return dataset.rows() == 0; }
};

// Empty `required` means every column.
Deletion casewise_delete(const SurveyDataset& ds, const std::vector<std::string>& required);

SurveySchema align_schemas(const SurveySchema& source, const SurveySchema& target);

// Restricts a dataset to the named schema's columns, keeping only outcomes
// that the dataset actually has.
SurveyDataset project(const SurveyDataset& ds, const SurveySchema& schema);

struct Prepared {
    SurveyDataset dataset;
    std::size_t deleted = 0;  // rows dropped by case-wise deletion
    BoundsMap bounds;         // normalization applied to raw-scale columns
};

// load_csv, recode text levels, min-max normalize raw-scale columns, then
// case-wise delete over every column. `reference` bounds (typically those
// applied to the source dataset) take precedence over schema and observed ones.
Prepared load_prepared(const std::string& path, const SurveySchema& schema, const BoundsMap& reference = {});

struct ColumnStats {
    std::string name;
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    double max = 0.0;
};

struct DescriptiveStats {
    std::vector<ColumnStats> columns;
    std::string std_denominator = "n-1";
    std::string quantile_rule = "linear";

    const ColumnStats* find(std::string_view name) const;
};

// Linear interpolation between order statistics: h = (n - 1) p.
double quantile_sorted(std::span<const double> sorted, double p);

DescriptiveStats describe(const SurveyDataset& ds);
// Statistic rows by variable columns.
std::string format_stats_table(const DescriptiveStats& stats, int precision = 4);

struct Split {
    SurveyDataset train;
    SurveyDataset test;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
};

// Test size is round(n * fraction) clamped to [1, n - 1]; both parts keep input order.
Split split_train_test(const SurveyDataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace svt
