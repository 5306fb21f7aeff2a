#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "svt/linear_model.hpp"
#include "svt/neural_net.hpp"
#include "svt/survey_data.hpp"
#include "svt/synth_gen.hpp"
#include "svt/transfer_pipeline.hpp"

// JSON forms of the library's records. Missing doubles become null.
namespace svt {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const FeatureSpec& f);
void from_json(const Json& j, FeatureSpec& f);
void to_json(Json& j, const SurveySchema& s);
void from_json(const Json& j, SurveySchema& s);
void to_json(Json& j, const TaskSpec& t);
void from_json(const Json& j, TaskSpec& t);

void to_json(Json& j, const ColumnStats& c);
void from_json(const Json& j, ColumnStats& c);
void to_json(Json& j, const DescriptiveStats& s);
void from_json(const Json& j, DescriptiveStats& s);

void to_json(Json& j, const Marginal& m);
void from_json(const Json& j, Marginal& m);
void to_json(Json& j, const GenerativeSpec& s);
void from_json(const Json& j, GenerativeSpec& s);
void to_json(Json& j, const OracleReport& r);

// Residuals are omitted.
void to_json(Json& j, const OlsFit& f);
void from_json(const Json& j, OlsFit& f);
void to_json(Json& j, const CoefficientComparison& c);
// Predictions are omitted.
void to_json(Json& j, const TransferOls& t);
void to_json(Json& j, const OlsBaseline& b);

void to_json(Json& j, const TrainConfig& c);
void from_json(const Json& j, TrainConfig& c);
void to_json(Json& j, const TransferConfig& c);
// Absent keys keep their defaults.
void from_json(const Json& j, TransferConfig& c);

void to_json(Json& j, const EpochRecord& e);
void from_json(const Json& j, EpochRecord& e);
void to_json(Json& j, const TaskEval& e);
void to_json(Json& j, const EvalReport& r);

// Deterministic part of an experiment: everything except timestamps.
Json experiment_payload(const ExperimentResult& r);
// {"payload": ..., "payload_sha256": ..., "timestamps": ...}
Json experiment_report(const ExperimentResult& r);

Json read_json_file(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& what);
// Two-space indented with a trailing newline.
std::string dump_json(const Json& j);

SurveySchema load_schema(const std::string& path);
GenerativeSpec load_spec(const std::string& path);
TransferConfig load_transfer_config(const std::string& path);

}  // namespace svt
