#pragma once

#include <string>
#include <vector>

#include "svt/error.hpp"
#include "svt/matrix.hpp"
#include "svt/survey_data.hpp"

namespace fixtures {

// Canonical-schema dataset from a feature matrix in canonical order plus
// optional outcome columns (empty vectors are left out).
inline svt::SurveyDataset dataset(const svt::Matrix& x, const std::vector<double>& vote,
                                  const std::vector<double>& rr, const std::string& label = "fixture") {
    svt::SurveySchema canon = svt::canonical_schema();
    svt::SurveySchema schema;
    schema.features = canon.features;
    std::vector<svt::Column> cols;
    for (std::size_t j = 0; j < x.cols; ++j) {
        svt::Column c;
        for (std::size_t r = 0; r < x.rows; ++r) c.values.push_back(x(r, j));
        cols.push_back(std::move(c));
    }
    if (!vote.empty()) {
        schema.outcomes.push_back(canon.outcomes[0]);
        cols.push_back({svt::ColumnScale::unit, vote, {}});
    }
    if (!rr.empty()) {
        schema.outcomes.push_back(canon.outcomes[1]);
        cols.push_back({svt::ColumnScale::unit, rr, {}});
    }
    return svt::SurveyDataset(schema, cols, label, "synthetic");
}

template <typename Fn>
svt::ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const svt::Error& e) {
        return e.code();
    }
    return static_cast<svt::ErrorCode>(0);
}

template <typename Fn>
std::string message_of(Fn&& fn) {
    try {
        fn();
    } catch (const svt::Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace fixtures
