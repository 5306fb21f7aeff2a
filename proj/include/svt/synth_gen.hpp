#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "svt/survey_data.hpp"

namespace svt {

enum class MarginalKind { bernoulli, beta, empirical };

// Distribution of one feature on [0, 1].
//  bernoulli: P(x = 1) = p
//  beta:      Beta(alpha, beta); levels > 1 rounds draws to the grid k / (levels - 1)
//  empirical: finite support with probabilities
struct Marginal {
    MarginalKind kind = MarginalKind::bernoulli;
    double p = 0.5;
    double alpha = 1.0;
    double beta = 1.0;
    int levels = 0;
    std::vector<double> support;
    std::vector<double> probs;

    static Marginal bernoulli(double p);
    static Marginal beta_dist(double alpha, double beta, int levels = 0);
    static Marginal point_mass(double value);
    static Marginal empirical(std::vector<double> support, std::vector<double> probs);

    void validate(const std::string& name) const;
    bool is_discrete() const;
    // (value, probability) pairs; only for discrete marginals.
    std::vector<std::pair<double, double>> atoms() const;
    double mean() const;
    double stddev() const;
    // Inverse CDF at u in (0, 1).
    double quantile(double u) const;
};

struct FeatureMarginal {
    std::string name;
    Role role = Role::pid;
    Kind kind = Kind::continuous_unit;
    Marginal dist;
};

// Gaussian-copula correlation between two features' latent normals.
struct Correlation {
    std::string a;
    std::string b;
    double rho = 0.0;
};

enum class Link { linear_threshold, logistic };

std::string_view to_string(Link link);
Link parse_link(std::string_view text);

// index = coefficients[0] + sum_j coefficients[j + 1] * x_j, in feature order.
//  binary, linear_threshold: y = [index >= threshold]
//  binary, logistic:         P(y = 1) = 1 / (1 + exp(-(index - threshold) / temperature))
//  continuous:               y = clamp(index + U(-h, h), 0, 1), h = sqrt(3) * noise_sd
struct OutcomeModel {
    std::string name;
    TaskKind kind = TaskKind::binary;
    std::vector<double> coefficients;
    Link link = Link::logistic;
    double temperature = 0.05;
    double threshold = 0.5;
    double noise_sd = 0.0;

    double index(std::span<const double> features) const;
    // P(y = 1 | features) for binary outcomes.
    double probability(double index) const;
    // E[y | features] for continuous outcomes, accounting for clipping.
    double expected_value(double index) const;
};

struct GenerativeSpec {
    std::vector<FeatureMarginal> features;
    std::vector<Correlation> correlations;  // empty = independent features
    std::vector<OutcomeModel> outcomes;
    std::uint64_t seed = 0;

    void validate() const;
    SurveySchema schema() const;
    std::vector<std::string> feature_names() const;
    const OutcomeModel& outcome(std::string_view name) const;
    OutcomeModel& outcome(std::string_view name);
};

// n complete rows; bit-identical for identical (spec, n).
SurveyDataset generate(const GenerativeSpec& spec, std::size_t n);

// Feature rows only (no outcomes); shares the sampling path of generate().
Matrix sample_features(const GenerativeSpec& spec, std::size_t n, std::uint64_t seed);

struct CalibrationOptions {
    // Columns treated as outcomes; all others become feature marginals.
    std::vector<std::string> outcome_names = {"vote_trump", "racial_resentment"};
    // Optional explicit kinds; unlisted columns are binary when every quartile is 0 or 1.
    std::vector<std::pair<std::string, Kind>> kinds;
    double temperature = 0.05;
    std::uint64_t seed = 0;
};

// Marginal means match the targets exactly (bernoulli and beta moments are
// matched analytically; standard deviations are matched for unit-interval
// features). Outcomes get zero slopes with intercepts that reproduce the
// target mean.
GenerativeSpec calibrate_to_moments(const DescriptiveStats& targets,
                                    const CalibrationOptions& options = {});

// Shifts an outcome's intercept so that E[y] equals target_mean under the
// spec's feature distribution (Monte Carlo over `samples` feature draws).
double calibrate_intercept(const GenerativeSpec& spec, std::string_view outcome, double target_mean,
                           std::size_t samples = 200000, std::uint64_t seed = 7);

// E[y] for an outcome, by Monte Carlo over feature draws.
double outcome_mean(const GenerativeSpec& spec, std::string_view outcome,
                    std::size_t samples = 200000, std::uint64_t seed = 7);

struct OracleReport {
    double bayes_accuracy = 0.0;
    std::string method;  // "exact-enumeration" or "monte-carlo"
    std::size_t mc_samples = 0;
    double mc_std_error = 0.0;
};

// Accuracy of the Bayes-optimal classifier (predict 1 iff P(y=1|x) >= 0.5).
OracleReport bayes_accuracy(const GenerativeSpec& spec, const TaskSpec& outcome,
                            std::size_t mc_samples = 400000);

// Published descriptive statistics of the 2020 source (CES) and target (ANES) surveys.
DescriptiveStats ces2020_moments();
DescriptiveStats anes2020_moments();

// Moment-calibrated specs carrying the linear-index coefficients of the
// CES-trained and ANES-fitted regressions, with frozen link parameters.
GenerativeSpec ces2020_spec();
GenerativeSpec anes2020_spec();
GenerativeSpec preset_spec(std::string_view name);

}  // namespace svt
