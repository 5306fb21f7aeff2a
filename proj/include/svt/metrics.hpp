#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace svt {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

// A proportion plus a flag raised when its denominator was zero (value is then 0).
struct Metric {
    double value = 0.0;
    bool undefined = false;
};

// Labels and predictions must be equal-length, non-empty, and 0/1 valued.
ConfusionMatrix confusion(std::span<const double> labels, std::span<const double> preds);

double accuracy(const ConfusionMatrix& cm);
Metric precision(const ConfusionMatrix& cm);
Metric recall(const ConfusionMatrix& cm);
// Harmonic mean of the given precision and recall.
Metric f1_score(double precision, double recall);
Metric f1_score(const ConfusionMatrix& cm);

double rmse(std::span<const double> y, std::span<const double> yhat);
double mae(std::span<const double> y, std::span<const double> yhat);

}  // namespace svt
