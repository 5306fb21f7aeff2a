#include "svt/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "svt/error.hpp"
#include "text_util.hpp"

namespace svt {

namespace {

constexpr const char* kIntercept = "(intercept)";

std::string format_coef(double v) { return format_fixed(v, 3); }

std::string format_se(double se) {
    if (se > 0.0 && se < 5e-4) return "(" + format_sci(se, 1) + ")";
    return "(" + format_fixed(se, 3) + ")";
}

std::string format_f(double f) {
    if (std::isinf(f)) return "inf";
    if (std::isnan(f)) return "nan";
    if (std::fabs(f) >= 1e6) return format_sci(f, 2);
    return format_grouped(f, 3);
}

}  // namespace

OlsFit fit_ols(const Matrix& features, std::span<const double> y, std::vector<std::string> feature_names,
               std::string outcome) {
    const std::size_t n = features.rows;
    const std::size_t k = features.cols;
    const std::size_t p = k + 1;
    if (feature_names.size() != k)
        fail(ErrorCode::invalid_argument, "feature name count does not match design columns");
    if (y.size() != n) fail(ErrorCode::invalid_argument, "response length does not match design rows");
    if (n <= p)
        fail(ErrorCode::insufficient_data, "OLS needs more than " + std::to_string(p) +
                                               " observations, got " + std::to_string(n));

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        x(i, 0) = 1.0;
        for (std::size_t c = 0; c < k; ++c) x(i, static_cast<Eigen::Index>(c + 1)) = features(r, c);
        yv(i) = y[r];
        if (!std::isfinite(y[r]))
            fail(ErrorCode::numeric, "response has a non-finite value at row " + std::to_string(r + 1));
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    const auto rank = static_cast<std::size_t>(qr.rank());
    if (rank < p) {
        const auto& perm = qr.colsPermutation().indices();
        std::string names;
        for (std::size_t i = rank; i < p; ++i) {
            const auto col = static_cast<std::size_t>(perm(static_cast<Eigen::Index>(i)));
            names += (names.empty() ? "'" : ", '") + (col == 0 ? kIntercept : feature_names[col - 1]) + "'";
        }
        fail(ErrorCode::singular, "design matrix is rank deficient (rank " + std::to_string(rank) + " of " +
                                      std::to_string(p) + "); collinear column(s): " + names);
    }

    const Eigen::VectorXd beta = qr.solve(yv);
    const Eigen::VectorXd resid = yv - x * beta;

    // diag((X'X)^-1) from R^-1 R^-T, undoing the column permutation.
    const auto pe = static_cast<Eigen::Index>(p);
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(pe, pe).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(pe, pe));
    const Eigen::VectorXd diag_perm = (r_inv * r_inv.transpose()).diagonal();
    const auto& perm = qr.colsPermutation().indices();

    OlsFit fit;
    fit.outcome = std::move(outcome);
    fit.feature_names = std::move(feature_names);
    fit.n = n;
    fit.df_model = k;
    fit.df_residual = n - p;
    fit.coefficients.resize(p);
    fit.std_errors.resize(p);
    fit.residuals.resize(n);

    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = resid(static_cast<Eigen::Index>(i));
        rss += fit.residuals[i] * fit.residuals[i];
    }
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double tss = 0.0;
    for (double v : y) tss += (v - mean) * (v - mean);

    const double sigma2 = rss / static_cast<double>(fit.df_residual);
    for (Eigen::Index i = 0; i < pe; ++i) {
        const auto col = static_cast<std::size_t>(perm(i));
        fit.coefficients[col] = beta(static_cast<Eigen::Index>(col));
        fit.std_errors[col] = std::sqrt(sigma2 * diag_perm(i));
    }
    fit.rse = std::sqrt(sigma2);
    // A constant response is fitted exactly by the intercept.
    fit.r2 = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 1.0;
    fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / static_cast<double>(fit.df_residual);
    if (k == 0) fit.f_stat = 0.0;
    else if (rss == 0.0) fit.f_stat = std::numeric_limits<double>::infinity();
    else fit.f_stat = (std::max(tss - rss, 0.0) / static_cast<double>(k)) / sigma2;
    return fit;
}

OlsFit fit_ols(const SurveyDataset& ds, const TaskSpec& task) {
    const FeatureSpec* spec = ds.schema().find(task.outcome_name);
    if (!spec || spec->role != Role::outcome)
        fail(ErrorCode::schema, "dataset '" + ds.label() + "' has no outcome '" + task.outcome_name + "'");
    const auto names = ds.schema().feature_names();
    const Matrix x = ds.feature_matrix(names);
    const auto y = ds.column(task.outcome_name);
    for (std::size_t r = 0; r < y.size(); ++r)
        if (is_missing(y[r]))
            fail(ErrorCode::schema, "outcome '" + task.outcome_name + "' is missing at row " +
                                        std::to_string(r + 1));
    return fit_ols(x, y, names, task.outcome_name);
}

std::vector<double> predict(const OlsFit& fit, const Matrix& features) {
    if (features.cols != fit.k())
        fail(ErrorCode::schema, "prediction design has " + std::to_string(features.cols) +
                                    " columns, fit expects " + std::to_string(fit.k()));
    std::vector<double> out(features.rows);
    for (std::size_t r = 0; r < features.rows; ++r) {
        double v = fit.coefficients[0];
        for (std::size_t c = 0; c < fit.k(); ++c) v += fit.coefficients[c + 1] * features(r, c);
        out[r] = v;
    }
    return out;
}

std::vector<double> predict(const OlsFit& fit, const SurveyDataset& ds) {
    for (const auto& name : fit.feature_names) {
        const FeatureSpec* f = ds.schema().find(name);
        if (!f || f->role == Role::outcome)
            fail(ErrorCode::schema, "dataset '" + ds.label() + "' lacks fitted feature '" + name + "'");
    }
    return predict(fit, ds.feature_matrix(fit.feature_names));
}

std::vector<std::string> coefficient_names(const OlsFit& fit) {
    std::vector<std::string> names = {kIntercept};
    names.insert(names.end(), fit.feature_names.begin(), fit.feature_names.end());
    return names;
}

CoefficientComparison compare_coefficients(const OlsFit& a, const OlsFit& b) {
    if (a.feature_names != b.feature_names)
        fail(ErrorCode::schema, "cannot compare fits with different regressors");
    CoefficientComparison cmp;
    const auto names = coefficient_names(a);
    for (std::size_t i = 0; i < names.size(); ++i) {
        CoefficientRow row;
        row.name = names[i];
        row.value_a = a.coefficients[i];
        row.value_b = b.coefficients[i];
        row.abs_diff = std::fabs(row.value_a - row.value_b);
        row.zero_band = std::fabs(row.value_a) < kSignZeroBand || std::fabs(row.value_b) < kSignZeroBand;
        row.sign_match = !row.zero_band && row.value_a * row.value_b > 0.0;
        if (!row.zero_band) {
            ++cmp.compared_count;
            if (row.sign_match) ++cmp.sign_match_count;
        }
        cmp.max_abs_diff = std::max(cmp.max_abs_diff, row.abs_diff);
        cmp.rows.push_back(std::move(row));
    }
    return cmp;
}

TransferOls transfer_ols(const OlsFit& source_fit, const SurveyDataset& target, const TaskSpec& task) {
    TransferOls out;
    out.predictions = predict(source_fit, target);
    const Matrix x = target.feature_matrix(source_fit.feature_names);
    out.refit = fit_ols(x, out.predictions, source_fit.feature_names, task.outcome_name + "_predicted");
    if (target.has_column(task.outcome_name)) {
        const auto y = target.column(task.outcome_name);
        out.target_fit = fit_ols(x, y, source_fit.feature_names, task.outcome_name);
        out.comparison = compare_coefficients(*out.target_fit, out.refit);
    }
    return out;
}

std::string summarize(const std::vector<std::pair<std::string, const OlsFit*>>& columns) {
    if (columns.empty()) return {};
    const OlsFit& first = *columns.front().second;
    for (const auto& [title, fit] : columns)
        if (fit->feature_names != first.feature_names)
            fail(ErrorCode::schema, "summary columns must share regressors");

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {""};
    for (const auto& c : columns) header.push_back(c.first);
    rows.push_back(header);
    auto add_pair = [&](const std::string& label, std::size_t idx) {
        std::vector<std::string> coef = {label}, se = {""};
        for (const auto& c : columns) {
            coef.push_back(format_coef(c.second->coefficients[idx]));
            se.push_back(format_se(c.second->std_errors[idx]));
        }
        rows.push_back(std::move(coef));
        rows.push_back(std::move(se));
    };
    for (std::size_t j = 0; j < first.k(); ++j) add_pair(first.feature_names[j], j + 1);
    add_pair("Constant", 0);
    rows.push_back({"--"});
    auto add = [&](const std::string& label, auto get) {
        std::vector<std::string> r = {label};
        for (const auto& c : columns) r.push_back(get(*c.second));
        rows.push_back(std::move(r));
    };
    add("N", [](const OlsFit& f) { return format_grouped(static_cast<double>(f.n), 0); });
    add("R2", [](const OlsFit& f) { return format_fixed(f.r2, 3); });
    add("Adj. R2", [](const OlsFit& f) { return format_fixed(f.adj_r2, 3); });
    add("RSE", [](const OlsFit& f) { return format_fixed(f.rse, 3); });
    add("", [](const OlsFit& f) { return "(df=" + std::to_string(f.df_residual) + ")"; });
    add("F-stat", [](const OlsFit& f) { return format_f(f.f_stat); });
    add("", [](const OlsFit& f) {
        return "(df=" + std::to_string(f.df_model) + ";" + std::to_string(f.df_residual) + ")";
    });

    std::vector<std::size_t> width(columns.size() + 1, 0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    std::size_t total = width[0];
    for (std::size_t i = 1; i < width.size(); ++i) total += 2 + width[i];

    std::ostringstream out;
    for (const auto& r : rows) {
        if (r.size() == 1 && r[0] == "--") {
            out << std::string(total, '-') << '\n';
            continue;
        }
        std::string line = pad_right(r[0], width[0]);
        for (std::size_t i = 1; i < r.size(); ++i) line += "  " + pad_left(r[i], width[i]);
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
    return out.str();
}

std::string summarize(const OlsFit& fit) { return summarize({{fit.outcome, &fit}}); }

std::string format_comparison(const CoefficientComparison& cmp, const std::string& label_a,
                              const std::string& label_b) {
    std::vector<std::vector<std::string>> rows = {{"coefficient", label_a, label_b, "abs_diff", "sign"}};
    for (const auto& r : cmp.rows)
        rows.push_back({r.name, format_fixed(r.value_a, 4), format_fixed(r.value_b, 4),
                        format_fixed(r.abs_diff, 4), r.zero_band ? "zero" : (r.sign_match ? "match" : "DIFFER")});
    std::vector<std::size_t> width(5, 0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    std::ostringstream out;
    for (const auto& r : rows) {
        out << pad_right(r[0], width[0]);
        for (std::size_t i = 1; i < r.size(); ++i) out << "  " << pad_left(r[i], width[i]);
        out << '\n';
    }
    out << "signs matching: " << cmp.sign_match_count << " of " << cmp.compared_count
        << " (|b| < 1e-9 excluded); max abs diff " << format_fixed(cmp.max_abs_diff, 4) << '\n';
    return out.str();
}

}  // namespace svt
