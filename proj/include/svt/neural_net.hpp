#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "svt/matrix.hpp"
#include "svt/survey_data.hpp"

namespace svt {

enum class Activation { rectifier, identity, sigmoid };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

struct LayerSpec {
    std::size_t input_width = 1;
    std::size_t output_width = 1;
    Activation activation = Activation::rectifier;
    bool operator==(const LayerSpec&) const = default;
};

// Fully connected layer; weights are output_width x input_width, row-major.
struct DenseLayer {
    LayerSpec spec;
    std::vector<double> weights;
    std::vector<double> bias;
    bool frozen = false;
    bool operator==(const DenseLayer&) const = default;
};

// One output layer per task: sigmoid for binary tasks, identity for continuous.
struct Head {
    TaskSpec task;
    DenseLayer layer;
    bool operator==(const Head&) const = default;
};

struct MlpModel {
    std::vector<std::string> feature_order;
    std::vector<DenseLayer> trunk;
    std::vector<Head> heads;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> provenance;

    const Head& head(std::string_view task) const;
    bool has_head(std::string_view task) const;
    std::size_t layer_count() const { return trunk.size() + heads.size(); }
    bool operator==(const MlpModel&) const = default;
};

struct HeadSpec {
    TaskSpec task;
    LayerSpec layer;
};

// Weights are scaled-uniform: U(-sqrt(6/fan_in), +) for rectifier layers and
// U(-sqrt(6/(fan_in+fan_out)), +) otherwise; biases start at zero.
MlpModel init(std::vector<std::string> feature_order, const std::vector<LayerSpec>& trunk,
              const std::vector<HeadSpec>& heads, std::uint64_t seed);

// Rectifier trunk over `hidden` widths and a width-1 head per task.
MlpModel init_default(std::vector<std::string> feature_order, const std::vector<TaskSpec>& tasks,
                      std::uint64_t seed, const std::vector<std::size_t>& hidden = {16, 8});

using HeadOutputs = std::map<std::string, std::vector<double>>;
// Per-head targets; a head absent from the map contributes no loss.
using Targets = std::map<std::string, std::vector<double>>;

HeadOutputs forward(const MlpModel& model, const Matrix& features);
HeadOutputs forward(const MlpModel& model, const SurveyDataset& ds);

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t batch_size = 64;
    std::size_t epochs = 100;
    std::map<std::string, double> loss_weights;  // unlisted heads weigh 1
    std::uint64_t seed = 0;
    bool shuffle = true;

    void validate() const;
    double weight(const std::string& head) const;
    bool operator==(const TrainConfig&) const = default;
};

inline constexpr double kProbabilityClamp = 1e-7;

struct LossBreakdown {
    double total = 0.0;
    std::map<std::string, double> per_head;
};

// Mean binary cross-entropy (probabilities clamped to [1e-7, 1 - 1e-7]) for
// binary heads, mean squared error for continuous heads; total is weighted.
LossBreakdown loss(const MlpModel& model, const Matrix& features, const Targets& targets,
                   const TrainConfig& config);

struct LayerGradient {
    bool present = false;  // false for frozen layers
    std::vector<double> weights;
    std::vector<double> bias;
};

struct Gradients {
    std::vector<LayerGradient> trunk;
    std::vector<LayerGradient> heads;
    LossBreakdown loss;
};

Gradients gradients(const MlpModel& model, const Matrix& features, const Targets& targets,
                    const TrainConfig& config);

struct EpochRecord {
    std::size_t epoch = 0;
    LossBreakdown loss;  // full training-set loss after the epoch
};

struct TrainResult {
    MlpModel model;
    std::vector<EpochRecord> history;
};

TrainResult train(MlpModel model, const SurveyDataset& ds, const std::vector<TaskSpec>& tasks,
                  const TrainConfig& config);
TrainResult train(MlpModel model, const Matrix& features, const Targets& targets,
                  const TrainConfig& config);

// Selectors, comma separated: "*", "trunk:*", "trunk:N", "trunk:A-B",
// "head:*", "head:<task>".
MlpModel set_frozen(MlpModel model, std::string_view selector, bool flag);
std::size_t trainable_layer_count(const MlpModel& model);

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const MlpModel& model);
MlpModel deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);
// SHA-256 of the serialized model.
std::string model_hash(const MlpModel& model);

}  // namespace svt
