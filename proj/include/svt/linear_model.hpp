#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "svt/survey_data.hpp"

namespace svt {

// Ordinary least squares fit of one outcome on an intercept plus k features.
// coefficients[0] is the intercept; coefficients[j + 1] belongs to feature_names[j].
struct OlsFit {
    std::string outcome;
    std::vector<std::string> feature_names;
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::size_t n = 0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double rse = 0.0;         // residual standard error on df_residual
    double f_stat = 0.0;      // overall regression F on (df_model, df_residual)
    std::size_t df_model = 0;
    std::size_t df_residual = 0;
    std::vector<double> residuals;

    std::size_t k() const { return feature_names.size(); }
};

// Solves by column-pivoted Householder QR with homoskedastic standard errors.
OlsFit fit_ols(const SurveyDataset& ds, const TaskSpec& task);
// Same, from an explicit design (no intercept column) and response.
OlsFit fit_ols(const Matrix& features, std::span<const double> y,
               std::vector<std::string> feature_names, std::string outcome);

// y-hat = X beta using the fit's feature names; no clipping.
std::vector<double> predict(const OlsFit& fit, const SurveyDataset& ds);
std::vector<double> predict(const OlsFit& fit, const Matrix& features);

struct CoefficientRow {
    std::string name;
    double value_a = 0.0;
    double value_b = 0.0;
    double abs_diff = 0.0;
    bool sign_match = false;
    bool zero_band = false;  // either value within the zero band; excluded from counts
};

struct CoefficientComparison {
    std::vector<CoefficientRow> rows;
    std::size_t sign_match_count = 0;
    std::size_t compared_count = 0;
    double max_abs_diff = 0.0;
};

inline constexpr double kSignZeroBand = 1e-9;

// Rows pair "a" and "b" coefficients by name (intercept first).
CoefficientComparison compare_coefficients(const OlsFit& a, const OlsFit& b);

struct TransferOls {
    std::vector<double> predictions;
    OlsFit refit;                               // predictions regressed on target features
    std::optional<OlsFit> target_fit;           // real outcome, when present
    std::optional<CoefficientComparison> comparison;  // target_fit (a) vs refit (b)
};

TransferOls transfer_ols(const OlsFit& source_fit, const SurveyDataset& target, const TaskSpec& task);

std::vector<std::string> coefficient_names(const OlsFit& fit);

// Coefficient / (SE) rows then N, R2, Adj. R2, RSE (df) and F-stat (df1; df2).
std::string summarize(const OlsFit& fit);
std::string summarize(const std::vector<std::pair<std::string, const OlsFit*>>& columns);
std::string format_comparison(const CoefficientComparison& cmp, const std::string& label_a,
                              const std::string& label_b);

}  // namespace svt
