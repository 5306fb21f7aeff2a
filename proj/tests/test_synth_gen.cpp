#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "svt/error.hpp"
#include "svt/synth_gen.hpp"

using namespace svt;

namespace {

// Mean row of the published CES 2020 descriptive table.
const std::map<std::string, double> kCesMeans = {
    {"racial_resentment", 0.5228}, {"pid", 0.4304},   {"sex", 0.4466}, {"south", 0.3706},
    {"edu_binary", 0.4362},        {"age", 0.4586},   {"white", 0.7662}, {"inc", 0.3608},
    {"ideo", 0.4891},              {"vote_trump", 0.4045},
};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an svt::Error");
    return ErrorCode::invalid_argument;
}

GenerativeSpec one_feature(Marginal dist) {
    GenerativeSpec s;
    s.features.push_back({"pid", Role::pid, Kind::binary, dist});
    return s;
}

OutcomeModel binary_outcome(std::vector<double> coefficients, Link link, double threshold = 0.5,
                            double temperature = 0.05) {
    OutcomeModel o;
    o.name = "vote_trump";
    o.kind = TaskKind::binary;
    o.coefficients = std::move(coefficients);
    o.link = link;
    o.threshold = threshold;
    o.temperature = temperature;
    return o;
}

double column_mean(const SurveyDataset& ds, const std::string& name) {
    auto c = ds.column(name);
    return oracle::mean(std::vector<double>(c.begin(), c.end()));
}

}  // namespace

TEST_CASE("preset reproduces the published mean row") {
    SurveyDataset ds = generate(ces2020_spec(), 42609);
    CHECK(ds.rows() == 42609);
    CHECK(ds.is_complete());
    for (const auto& [name, target] : kCesMeans) {
        CAPTURE(name);
        CHECK(std::fabs(column_mean(ds, name) - target) <= 0.02);
    }
}

TEST_CASE("degenerate marginal gives a constant column") {
    GenerativeSpec s = ces2020_spec();
    for (auto& f : s.features)
        if (f.name == "white") f.dist = Marginal::bernoulli(1.0);
    SurveyDataset ds = generate(s, 500);
    for (double v : ds.column("white")) CHECK(v == 1.0);
}

TEST_CASE("generation is deterministic per seed") {
    GenerativeSpec s = anes2020_spec();
    CHECK(generate(s, 300) == generate(s, 300));
    GenerativeSpec t = s;
    t.seed += 1;
    CHECK_FALSE(generate(s, 300) == generate(t, 300));
}

TEST_CASE("generated values respect feature kinds") {
    GenerativeSpec s = ces2020_spec();
    s.correlations.push_back({"pid", "ideo", 0.6});
    SurveyDataset ds = generate(s, 2000);
    for (const auto& f : ds.schema().features) {
        for (double v : ds.column(f.name)) {
            if (f.kind == Kind::binary) CHECK((v == 0.0 || v == 1.0));
            else CHECK((v >= 0.0 && v <= 1.0));
        }
    }
    for (double v : ds.column("racial_resentment")) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("feature means converge to the analytic means") {
    for (bool copula : {false, true}) {
        GenerativeSpec s = ces2020_spec();
        if (copula) s.correlations = {{"pid", "ideo", 0.7}, {"age", "inc", -0.3}};
        for (std::size_t n : {1000u, 10000u}) {
            SurveyDataset ds = generate(s, n);
            for (const auto& f : s.features) {
                CAPTURE(f.name);
                const double bound = 4.0 * f.dist.stddev() / std::sqrt(static_cast<double>(n));
                CHECK(std::fabs(column_mean(ds, f.name) - f.dist.mean()) <= bound);
            }
        }
    }
}

TEST_CASE("beta marginal moments match the analytic beta") {
    for (auto [a, b] : {std::pair{2.0, 5.0}, {0.7, 0.4}, {3.0, 3.0}}) {
        Marginal m = Marginal::beta_dist(a, b);
        CHECK(m.mean() == doctest::Approx(a / (a + b)).epsilon(1e-12));
        const double var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
        CHECK(m.stddev() == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
        CHECK(m.quantile(0.5) > 0.0);
        CHECK(m.quantile(0.5) < 1.0);
    }
}

TEST_CASE("calibration to moments") {
    DescriptiveStats t;
    t.columns.push_back({"white", 100, 0.7, 0.46, 0, 0, 1, 1, 1});
    t.columns.push_back({"age", 100, 0.0, 0.0, 0, 0, 0, 0, 0});
    t.columns.push_back({"inc", 100, 0.4, 0.2, 0, 0.2, 0.4, 0.6, 1});
    t.columns.push_back({"vote_trump", 100, 0.4272, 0.49, 0, 0, 0, 1, 1});
    GenerativeSpec s = calibrate_to_moments(t);
    auto find = [&](const std::string& n) -> const Marginal& {
        for (const auto& f : s.features)
            if (f.name == n) return f.dist;
        throw std::runtime_error(n);
    };
    CHECK(find("white").kind == MarginalKind::bernoulli);
    CHECK(find("white").p == 0.7);
    CHECK(find("age").mean() == 0.0);
    CHECK(find("age").stddev() == 0.0);
    CHECK(find("inc").mean() == doctest::Approx(0.4).epsilon(1e-12));
    const double pop_sd = 0.2 * std::sqrt(99.0 / 100.0);
    CHECK(find("inc").stddev() == doctest::Approx(pop_sd).epsilon(1e-10));
    CHECK(outcome_mean(s, "vote_trump") == doctest::Approx(0.4272).epsilon(1e-9));
}

TEST_CASE("calibration detects infeasible moments") {
    DescriptiveStats t;
    t.columns.push_back({"inc", 100, 0.5, 0.6, 0, 0.2, 0.5, 0.8, 1});
    CHECK(code_of([&] { calibrate_to_moments(t); }) == ErrorCode::infeasible);
    DescriptiveStats u;
    u.columns.push_back({"inc", 100, 1.5, 0.1, 0, 0.2, 0.5, 0.8, 1});
    CHECK(code_of([&] { calibrate_to_moments(u); }) == ErrorCode::infeasible);
}

TEST_CASE("calibrate, generate, describe keeps the mean row") {
    GenerativeSpec s = calibrate_to_moments(ces2020_moments());
    DescriptiveStats d = describe(generate(s, 42609));
    for (const auto& target : ces2020_moments().columns) {
        CAPTURE(target.name);
        CHECK(std::fabs(d.find(target.name)->mean - target.mean) <= 0.02);
    }
}

TEST_CASE("Bayes accuracy of a deterministic outcome") {
    GenerativeSpec s = one_feature(Marginal::bernoulli(0.5));
    s.outcomes.push_back(binary_outcome({0.0, 1.0}, Link::linear_threshold));
    OracleReport r = bayes_accuracy(s, vote_task());
    CHECK(r.bayes_accuracy == 1.0);
    CHECK(r.method == "exact-enumeration");
}

TEST_CASE("Bayes accuracy of an independent outcome is the majority rate") {
    GenerativeSpec s = one_feature(Marginal::bernoulli(0.3));
    const double t = 0.05;
    s.outcomes.push_back(binary_outcome({0.5 + t * std::log(0.6 / 0.4), 0.0}, Link::logistic, 0.5, t));
    CHECK(bayes_accuracy(s, vote_task()).bayes_accuracy == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("exact enumeration matches a hand sum") {
    GenerativeSpec s;
    const double ps[3] = {0.3, 0.6, 0.8};
    const char* names[3] = {"pid", "sex", "south"};
    for (int i = 0; i < 3; ++i) s.features.push_back({names[i], Role::pid, Kind::binary, Marginal::bernoulli(ps[i])});
    OutcomeModel o = binary_outcome({0.1, 0.5, -0.2, 0.3}, Link::logistic, 0.5, 0.2);
    s.outcomes.push_back(o);
    double expected = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        double w = 1.0, eta = 0.1;
        const double coef[3] = {0.5, -0.2, 0.3};
        for (int i = 0; i < 3; ++i) {
            const bool on = (mask >> i) & 1;
            w *= on ? ps[i] : 1.0 - ps[i];
            if (on) eta += coef[i];
        }
        const double p = 1.0 / (1.0 + std::exp(-(eta - 0.5) / 0.2));
        expected += w * std::max(p, 1.0 - p);
    }
    OracleReport r = bayes_accuracy(s, vote_task());
    CHECK(r.method == "exact-enumeration");
    CHECK(r.bayes_accuracy == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("preset oracle agrees with the Bayes rule on sampled outcomes") {
    GenerativeSpec s = ces2020_spec();
    OracleReport r = bayes_accuracy(s, vote_task());
    CHECK(r.method == "monte-carlo");
    CHECK(r.mc_std_error > 0.0);
    CHECK(r.bayes_accuracy >= 0.5);
    CHECK(r.bayes_accuracy <= 1.0);

    s.seed = 77;
    const std::size_t n = 100000;
    SurveyDataset ds = generate(s, n);
    const OutcomeModel& m = s.outcome("vote_trump");
    const Matrix x = ds.feature_matrix(s.feature_names());
    auto y = ds.column("vote_trump");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double eta = m.coefficients[0];
        for (std::size_t j = 0; j < x.cols; ++j) eta += m.coefficients[j + 1] * x(i, j);
        const double pred = eta >= m.threshold ? 1.0 : 0.0;
        if (pred == y[i]) ++correct;
    }
    const double empirical = static_cast<double>(correct) / static_cast<double>(n);
    const double slack = 4.0 * std::sqrt(0.25 / static_cast<double>(n)) + 3.0 * r.mc_std_error;
    CHECK(std::fabs(empirical - r.bayes_accuracy) <= slack);
}

TEST_CASE("oracle rejects continuous outcomes") {
    CHECK(code_of([] { bayes_accuracy(ces2020_spec(), resentment_task()); }) == ErrorCode::unsupported_task);
}

TEST_CASE("spec validation") {
    GenerativeSpec s = one_feature(Marginal::bernoulli(1.2));
    CHECK(code_of([&] { generate(s, 10); }) == ErrorCode::invalid_argument);

    GenerativeSpec t = one_feature(Marginal::bernoulli(0.5));
    t.outcomes.push_back(binary_outcome({0.0, 1.0, 2.0}, Link::logistic));
    CHECK(code_of([&] { generate(t, 10); }) == ErrorCode::invalid_argument);

    GenerativeSpec u = one_feature(Marginal::bernoulli(0.5));
    OutcomeModel rr;
    rr.name = "racial_resentment";
    rr.kind = TaskKind::continuous_unit;
    rr.coefficients = {0.5, 0.1};
    rr.noise_sd = -0.1;
    u.outcomes.push_back(rr);
    CHECK(code_of([&] { generate(u, 10); }) == ErrorCode::invalid_argument);

    CHECK(code_of([] { generate(ces2020_spec(), 0); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { preset_spec("gss2018"); }) == ErrorCode::invalid_argument);
}

TEST_CASE("continuous outcome expectation accounts for clipping") {
    OutcomeModel m;
    m.kind = TaskKind::continuous_unit;
    m.noise_sd = 0.3;
    const double h = std::sqrt(3.0) * m.noise_sd;
    for (double eta : {-0.2, 0.1, 0.5, 0.9, 1.3}) {
        const int steps = 200000;
        double sum = 0.0;
        for (int i = 0; i < steps; ++i) {
            const double u = -h + 2.0 * h * (i + 0.5) / steps;
            sum += std::clamp(eta + u, 0.0, 1.0);
        }
        CHECK(m.expected_value(eta) == doctest::Approx(sum / steps).epsilon(1e-8));
    }
}
