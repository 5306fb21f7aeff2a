#include "svt/metrics.hpp"

#include <cmath>
#include <string>

#include "svt/error.hpp"

namespace svt {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b)
        fail(ErrorCode::invalid_argument, "length mismatch: " + std::to_string(a) + " vs " +
                                              std::to_string(b));
    if (a == 0) fail(ErrorCode::invalid_argument, "metrics need at least one observation");
}

Metric ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return {0.0, true};
    return {static_cast<double>(num) / static_cast<double>(den), false};
}

}  // namespace

ConfusionMatrix confusion(std::span<const double> labels, std::span<const double> preds) {
    check_lengths(labels.size(), preds.size());
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = labels[i];
        const double p = preds[i];
        if ((y != 0.0 && y != 1.0) || (p != 0.0 && p != 1.0))
            fail(ErrorCode::invalid_argument,
                 "labels and predictions must be 0 or 1 (index " + std::to_string(i) + ")");
        if (p == 1.0) (y == 1.0 ? cm.tp : cm.fp)++;
        else (y == 0.0 ? cm.tn : cm.fn)++;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0) return 0.0;
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

Metric precision(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fp); }

Metric recall(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fn); }

Metric f1_score(double p, double r) {
    if (p + r == 0.0) return {0.0, true};
    return {2.0 * p * r / (p + r), false};
}

Metric f1_score(const ConfusionMatrix& cm) {
    const Metric p = precision(cm);
    const Metric r = recall(cm);
    Metric f = f1_score(p.value, r.value);
    f.undefined = f.undefined || p.undefined || r.undefined;
    return f;
}

double rmse(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y.size(), yhat.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) ss += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return std::sqrt(ss / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> yhat) {
    check_lengths(y.size(), yhat.size());
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

}  // namespace svt
