#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svt/linear_model.hpp"
#include "svt/metrics.hpp"
#include "svt/neural_net.hpp"
#include "svt/survey_data.hpp"

namespace svt {

// Pre-training defaults with half the learning rate.
inline TrainConfig default_finetune_config() {
    TrainConfig c;
    c.learning_rate /= 2.0;
    return c;
}

// Stage seeds derive from `seed`: target split 0, weight init 1, pre-train
// shuffling 2, fine-tune shuffling 3. The seed fields of the two TrainConfigs
// are ignored.
struct TransferConfig {
    TrainConfig source_train;
    TrainConfig finetune = default_finetune_config();
    std::string freeze_policy = "trunk:*";
    double test_fraction = 0.2;
    std::vector<TaskSpec> eval_tasks = {vote_task(), resentment_task()};
    std::vector<std::size_t> hidden = {16, 8};
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TransferConfig&) const = default;
};

enum class SeedStream : std::uint64_t { split = 0, init = 1, pretrain = 2, finetune = 3 };
std::uint64_t stage_seed(const TransferConfig& config, SeedStream stream);

// SHA-256 of the canonical JSON form of the config.
std::string config_hash(const TransferConfig& config);

Split split_target(const SurveyDataset& target, const TransferConfig& config);

TrainResult pretrain(const SurveyDataset& source, const std::vector<TaskSpec>& tasks,
                     const TransferConfig& config);

// Clears every freeze flag, applies the freeze policy, and trains the
// remaining layers on `target_train`.
TrainResult finetune(const MlpModel& model, const SurveyDataset& target_train,
                     const std::vector<TaskSpec>& tasks, const TransferConfig& config);

// Fresh model trained on `train` alone with the pre-training optimizer
// settings and no frozen layers; the no-transfer baseline.
TrainResult train_from_scratch(const SurveyDataset& train, const std::vector<TaskSpec>& tasks,
                               const TransferConfig& config);

inline constexpr double kDecisionThreshold = 0.5;

struct TaskEval {
    TaskSpec task;
    std::size_t n = 0;
    // binary tasks
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    Metric precision;
    Metric recall;
    Metric f1;
    // continuous tasks; predictions are clipped to [0, 1] first
    double rmse = 0.0;
    double mae = 0.0;
};

struct EvalReport {
    std::vector<TaskEval> tasks;
    const TaskEval& find(std::string_view task) const;
};

// Binary heads predict 1 when p >= 0.5.
EvalReport evaluate(const MlpModel& model, const SurveyDataset& test, const std::vector<TaskSpec>& tasks);

// Adds <task>_imputed (binary label or clipped value), <task>_prob for binary
// tasks, and <task>_imputed_flag = 1 on every row.
SurveyDataset impute(const MlpModel& model, const SurveyDataset& target, const TaskSpec& task);

struct OlsBaseline {
    TaskSpec task;
    OlsFit source_fit;
    TransferOls transfer;
};

struct ExperimentResult {
    std::string source_label;
    std::string target_label;
    std::string config_sha256;
    std::size_t source_rows = 0;
    std::vector<std::size_t> train_rows;  // target rows used for fine-tuning
    std::vector<std::size_t> test_rows;   // target rows used for evaluation

    MlpModel pretrained;
    MlpModel finetuned;
    std::string pretrained_model_ref;  // SHA-256 of the serialized model
    std::string finetuned_model_ref;
    std::vector<EpochRecord> pretrain_history;
    std::vector<EpochRecord> finetune_history;

    EvalReport eval;
    std::vector<OlsBaseline> baselines;  // one per eval task, fit on source, applied to the full target

    // Wall-clock bookkeeping; kept out of the hashed payload.
    std::string started_at;
    std::string finished_at;
};

// align -> split target -> pretrain -> finetune -> evaluate -> OLS baseline.
ExperimentResult run_experiment(const SurveyDataset& source, const SurveyDataset& target,
                                const TransferConfig& config);

// Assembles a result from already trained stages: re-derives the split,
// evaluates `finetuned` on the test rows and runs the OLS baseline.
// run_experiment() ends with this call.
ExperimentResult collate_experiment(const SurveyDataset& source, const SurveyDataset& target,
                                    const TransferConfig& config, const TrainResult& pretrained,
                                    const TrainResult& finetuned);

// The OLS baseline alone, as run inside run_experiment.
std::vector<OlsBaseline> ols_baselines(const SurveyDataset& source, const SurveyDataset& target,
                                       const std::vector<TaskSpec>& tasks);

// Human-readable summary of a result.
std::string format_experiment(const ExperimentResult& result);
std::string format_eval(const EvalReport& report);

std::string utc_timestamp();

}  // namespace svt
