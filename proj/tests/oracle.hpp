#pragma once

// Reference implementations used only as test oracles. They are written
// independently of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

// Gaussian elimination with partial pivoting on a dense square system.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
        if (a[piv][k] == 0.0) throw std::runtime_error("singular");
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
        x[k] = s / a[k][k];
    }
    return x;
}

// Solves (X'X) beta = X'y with an intercept column prepended to `x`.
inline std::vector<double> normal_equations(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
    const std::size_t p = x.empty() ? 1 : x[0].size() + 1;
    std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    for (std::size_t r = 0; r < y.size(); ++r) {
        std::vector<double> row{1.0};
        row.insert(row.end(), x[r].begin(), x[r].end());
        for (std::size_t i = 0; i < p; ++i) {
            xty[i] += row[i] * y[r];
            for (std::size_t j = 0; j < p; ++j) xtx[i][j] += row[i] * row[j];
        }
    }
    return solve(xtx, xty);
}

// Type-7 quantile computed from a fresh sorted copy.
inline double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Sample standard deviation, two passes.
inline double stddev(const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double rmse(const std::vector<double>& y, const std::vector<double>& yhat) {
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) ss += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return std::sqrt(ss / static_cast<double>(y.size()));
}

inline double mae(const std::vector<double>& y, const std::vector<double>& yhat) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

struct Counts {
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Counts count(const std::vector<double>& labels, const std::vector<double>& preds) {
    Counts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool l = labels[i] > 0.5, p = preds[i] > 0.5;
        if (l && p) ++c.tp;
        else if (!l && p) ++c.fp;
        else if (!l && !p) ++c.tn;
        else ++c.fn;
    }
    return c;
}

}  // namespace oracle
