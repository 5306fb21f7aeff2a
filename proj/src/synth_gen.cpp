#include "svt/synth_gen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "svt/error.hpp"
#include "svt/random.hpp"
#include "text_util.hpp"

namespace svt {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

// Frozen link parameters of the presets (see docs/synthetic_presets.md).
// Puts the Bayes accuracy of the vote outcome near 0.92 for both presets.
constexpr double kPresetTemperature = 0.075;
constexpr double kPresetResentmentNoise = 0.244;
constexpr double kCesVoteIntercept = -0.175;
constexpr double kCesResentmentIntercept = 0.919;
constexpr double kAnesVoteIntercept = -0.187;
constexpr double kAnesResentmentIntercept = 0.880;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Antiderivative of clamp(t, 0, 1).
double clamp_integral(double t) {
    if (t <= 0.0) return 0.0;
    if (t <= 1.0) return 0.5 * t * t;
    return 0.5 + (t - 1.0);
}

int bits_for(std::size_t cardinality) {
    int bits = 0;
    while ((std::size_t{1} << bits) < cardinality) ++bits;
    return bits;
}

// Lower-triangular Cholesky factor of the copula correlation matrix.
std::vector<double> copula_factor(const GenerativeSpec& spec) {
    const std::size_t k = spec.features.size();
    std::vector<double> r(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) r[i * k + i] = 1.0;
    auto index_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < k; ++i)
            if (spec.features[i].name == name) return i;
        fail(ErrorCode::invalid_argument, "correlation names unknown feature '" + name + "'");
    };
    for (const auto& c : spec.correlations) {
        auto i = index_of(c.a);
        auto j = index_of(c.b);
        if (i == j) fail(ErrorCode::invalid_argument, "correlation of '" + c.a + "' with itself");
        r[i * k + j] = r[j * k + i] = c.rho;
    }
    std::vector<double> l(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = r[i * k + j];
            for (std::size_t m = 0; m < j; ++m) s -= l[i * k + m] * l[j * k + m];
            if (i == j) {
                if (s <= 1e-12)
                    fail(ErrorCode::infeasible, "feature correlation matrix is not positive definite");
                l[i * k + i] = std::sqrt(s);
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    return l;
}

// Marsaglia-Tsang; shape < 1 is boosted through Gamma(shape + 1) * U^(1/shape).
double draw_gamma(double shape, Rng& rng) {
    if (shape < 1.0) return draw_gamma(shape + 1.0, rng) * std::pow(rng.uniform_open(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double z, v;
        do {
            z = rng.normal();
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
    }
}

// Independent draw; beta marginals use the gamma ratio, which is far cheaper
// than inverting the incomplete beta function.
double draw_marginal(const Marginal& m, Rng& rng) {
    if (m.kind != MarginalKind::beta) return m.quantile(rng.uniform_open());
    const double g1 = draw_gamma(m.alpha, rng);
    const double g2 = draw_gamma(m.beta, rng);
    double x = g1 + g2 > 0.0 ? g1 / (g1 + g2) : (m.alpha >= m.beta ? 1.0 : 0.0);
    if (m.levels > 1) x = std::round(x * (m.levels - 1)) / (m.levels - 1);
    return x;
}

void draw_features(const GenerativeSpec& spec, const std::vector<double>& chol, Rng& rng,
                   std::span<double> out) {
    const std::size_t k = spec.features.size();
    if (spec.correlations.empty()) {
        for (std::size_t j = 0; j < k; ++j) out[j] = draw_marginal(spec.features[j].dist, rng);
        return;
    }
    std::vector<double> eps(k);
    for (auto& e : eps) e = rng.normal();
    for (std::size_t i = 0; i < k; ++i) {
        double z = 0.0;
        for (std::size_t m = 0; m <= i; ++m) z += chol[i * k + m] * eps[m];
        double u = std::clamp(normal_cdf(z), 1e-300, 1.0 - 1e-16);
        out[i] = spec.features[i].dist.quantile(u);
    }
}

DescriptiveStats moments_table(std::size_t count, const double (&mean)[10], const double (&sd)[10],
                               const double (&q25)[10], const double (&q50)[10],
                               const double (&q75)[10]) {
    static const char* names[10] = {"racial_resentment", "pid",   "sex", "south", "edu_binary",
                                    "age",               "white", "inc", "ideo",  "vote_trump"};
    DescriptiveStats s;
    for (int i = 0; i < 10; ++i)
        s.columns.push_back({names[i], count, mean[i], sd[i], 0.0, q25[i], q50[i], q75[i], 1.0});
    return s;
}

}  // namespace

Marginal Marginal::bernoulli(double p) {
    Marginal m;
    m.kind = MarginalKind::bernoulli;
    m.p = p;
    return m;
}

Marginal Marginal::beta_dist(double alpha, double beta, int levels) {
    Marginal m;
    m.kind = MarginalKind::beta;
    m.alpha = alpha;
    m.beta = beta;
    m.levels = levels;
    return m;
}

Marginal Marginal::point_mass(double value) { return empirical({value}, {1.0}); }

Marginal Marginal::empirical(std::vector<double> support, std::vector<double> probs) {
    Marginal m;
    m.kind = MarginalKind::empirical;
    m.support = std::move(support);
    m.probs = std::move(probs);
    return m;
}

void Marginal::validate(const std::string& name) const {
    auto bad = [&](const std::string& why) {
        fail(ErrorCode::invalid_argument, "feature '" + name + "': " + why);
    };
    switch (kind) {
        case MarginalKind::bernoulli:
            if (!(p >= 0.0 && p <= 1.0)) bad("bernoulli p must lie in [0, 1]");
            break;
        case MarginalKind::beta:
            if (!(alpha > 0.0 && beta > 0.0)) bad("beta parameters must be positive");
            if (levels == 1 || levels < 0) bad("beta levels must be 0 (continuous) or >= 2");
            break;
        case MarginalKind::empirical: {
            if (support.empty() || support.size() != probs.size())
                bad("empirical support and probabilities must be non-empty and equal length");
            double total = 0.0;
            for (std::size_t i = 0; i < support.size(); ++i) {
                if (!(support[i] >= 0.0 && support[i] <= 1.0)) bad("support values must lie in [0, 1]");
                if (!(probs[i] >= 0.0)) bad("probabilities must be non-negative");
                if (i && support[i] <= support[i - 1]) bad("support must be strictly increasing");
                total += probs[i];
            }
            if (std::fabs(total - 1.0) > 1e-9) bad("probabilities must sum to 1");
            break;
        }
    }
}

bool Marginal::is_discrete() const { return kind != MarginalKind::beta || levels > 1; }

std::vector<std::pair<double, double>> Marginal::atoms() const {
    switch (kind) {
        case MarginalKind::bernoulli:
            return {{0.0, 1.0 - p}, {1.0, p}};
        case MarginalKind::empirical: {
            std::vector<std::pair<double, double>> out;
            for (std::size_t i = 0; i < support.size(); ++i) out.emplace_back(support[i], probs[i]);
            return out;
        }
        case MarginalKind::beta: {
            if (levels < 2) fail(ErrorCode::invalid_argument, "continuous beta marginal has no atoms");
            std::vector<std::pair<double, double>> out;
            const double step = 1.0 / (levels - 1);
            double prev = 0.0;
            for (int k = 0; k < levels; ++k) {
                double upper = k == levels - 1 ? 1.0 : boost::math::ibeta(alpha, beta, (k + 0.5) * step);
                out.emplace_back(k * step, upper - prev);
                prev = upper;
            }
            return out;
        }
    }
    return {};
}

double Marginal::mean() const {
    if (kind == MarginalKind::bernoulli) return p;
    if (kind == MarginalKind::beta && levels < 2) return alpha / (alpha + beta);
    double m = 0.0;
    for (auto [v, w] : atoms()) m += v * w;
    return m;
}

double Marginal::stddev() const {
    if (kind == MarginalKind::bernoulli) return std::sqrt(p * (1.0 - p));
    if (kind == MarginalKind::beta && levels < 2) {
        const double s = alpha + beta;
        return std::sqrt(alpha * beta / (s * s * (s + 1.0)));
    }
    const double m = mean();
    double v = 0.0;
    for (auto [x, w] : atoms()) v += w * (x - m) * (x - m);
    return std::sqrt(v);
}

double Marginal::quantile(double u) const {
    switch (kind) {
        case MarginalKind::bernoulli:
            return u > 1.0 - p ? 1.0 : 0.0;
        case MarginalKind::beta: {
            double x = boost::math::ibeta_inv(alpha, beta, u);
            if (levels > 1) x = std::round(x * (levels - 1)) / (levels - 1);
            return x;
        }
        case MarginalKind::empirical: {
            double cum = 0.0;
            for (std::size_t i = 0; i + 1 < support.size(); ++i) {
                cum += probs[i];
                if (u <= cum) return support[i];
            }
            return support.back();
        }
    }
    return 0.0;
}

std::string_view to_string(Link link) {
    return link == Link::logistic ? "logistic" : "linear_threshold";
}

Link parse_link(std::string_view text) {
    if (text == "logistic") return Link::logistic;
    if (text == "linear_threshold") return Link::linear_threshold;
    fail(ErrorCode::invalid_argument, "unknown link '" + std::string(text) + "'");
}

double OutcomeModel::index(std::span<const double> features) const {
    double eta = coefficients[0];
    for (std::size_t j = 0; j < features.size(); ++j) eta += coefficients[j + 1] * features[j];
    return eta;
}

double OutcomeModel::probability(double eta) const {
    if (link == Link::linear_threshold) return eta >= threshold ? 1.0 : 0.0;
    const double z = (eta - threshold) / temperature;
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double OutcomeModel::expected_value(double eta) const {
    const double h = kSqrt3 * noise_sd;
    if (h == 0.0) return std::clamp(eta, 0.0, 1.0);
    return (clamp_integral(eta + h) - clamp_integral(eta - h)) / (2.0 * h);
}

void GenerativeSpec::validate() const {
    if (features.empty()) fail(ErrorCode::invalid_argument, "generative spec has no features");
    for (const auto& f : features) {
        f.dist.validate(f.name);
        if (f.kind == Kind::binary && f.dist.kind == MarginalKind::beta && f.dist.levels != 2)
            fail(ErrorCode::invalid_argument,
                 "binary feature '" + f.name + "' needs a bernoulli or {0,1} marginal");
        if (f.kind == Kind::binary && f.dist.kind == MarginalKind::empirical)
            for (double v : f.dist.support)
                if (v != 0.0 && v != 1.0)
                    fail(ErrorCode::invalid_argument,
                         "binary feature '" + f.name + "' has support outside {0, 1}");
    }
    for (const auto& o : outcomes) {
        if (o.coefficients.size() != features.size() + 1)
            fail(ErrorCode::invalid_argument,
                 "outcome '" + o.name + "' needs " + std::to_string(features.size() + 1) +
                     " coefficients, has " + std::to_string(o.coefficients.size()));
        if (o.kind == TaskKind::binary && o.link == Link::logistic && !(o.temperature > 0.0))
            fail(ErrorCode::invalid_argument, "outcome '" + o.name + "' needs a positive temperature");
        if (!(o.noise_sd >= 0.0))
            fail(ErrorCode::invalid_argument, "outcome '" + o.name + "' has negative noise scale");
        for (double c : o.coefficients)
            if (!std::isfinite(c))
                fail(ErrorCode::invalid_argument, "outcome '" + o.name + "' has a non-finite coefficient");
    }
    for (const auto& c : correlations)
        if (!(c.rho > -1.0 && c.rho < 1.0))
            fail(ErrorCode::invalid_argument, "correlation must lie in (-1, 1)");
    if (!correlations.empty()) copula_factor(*this);
    // Schema checks name uniqueness.
    schema().validate();
}

SurveySchema GenerativeSpec::schema() const {
    SurveySchema s;
    const SurveySchema canon = canonical_schema();
    for (const auto& f : features) {
        std::string note;
        if (const auto* c = canon.find(f.name)) note = c->coding_note;
        s.features.push_back({f.name, f.role, f.kind, note, {}, {}});
    }
    for (const auto& o : outcomes) {
        std::string note;
        if (const auto* c = canon.find(o.name)) note = c->coding_note;
        s.outcomes.push_back({o.name, Role::outcome,
                              o.kind == TaskKind::binary ? Kind::binary : Kind::continuous_unit, note,
                              {}, {}});
    }
    return s;
}

std::vector<std::string> GenerativeSpec::feature_names() const {
    std::vector<std::string> out;
    for (const auto& f : features) out.push_back(f.name);
    return out;
}

const OutcomeModel& GenerativeSpec::outcome(std::string_view name) const {
    for (const auto& o : outcomes)
        if (o.name == name) return o;
    fail(ErrorCode::invalid_argument, "spec has no outcome '" + std::string(name) + "'");
}

OutcomeModel& GenerativeSpec::outcome(std::string_view name) {
    return const_cast<OutcomeModel&>(std::as_const(*this).outcome(name));
}

Matrix sample_features(const GenerativeSpec& spec, std::size_t n, std::uint64_t seed) {
    const std::vector<double> chol =
        spec.correlations.empty() ? std::vector<double>{} : copula_factor(spec);
    Matrix x(n, spec.features.size());
    Rng rng(seed);
    for (std::size_t r = 0; r < n; ++r) draw_features(spec, chol, rng, x.row(r));
    return x;
}

SurveyDataset generate(const GenerativeSpec& spec, std::size_t n) {
    spec.validate();
    if (n == 0) fail(ErrorCode::invalid_argument, "number of rows must be at least 1");
    const Matrix x = sample_features(spec, n, derive_seed(spec.seed, 0));
    Rng outcome_rng(derive_seed(spec.seed, 1));

    std::vector<Column> columns;
    for (std::size_t j = 0; j < spec.features.size(); ++j) {
        Column c;
        c.values.resize(n);
        for (std::size_t r = 0; r < n; ++r) c.values[r] = x(r, j);
        columns.push_back(std::move(c));
    }
    std::vector<Column> outcome_cols(spec.outcomes.size());
    for (auto& c : outcome_cols) c.values.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < spec.outcomes.size(); ++o) {
            const OutcomeModel& m = spec.outcomes[o];
            const double eta = m.index(x.row(r));
            double y;
            if (m.kind == TaskKind::binary) {
                y = outcome_rng.uniform() < m.probability(eta) ? 1.0 : 0.0;
            } else {
                const double h = kSqrt3 * m.noise_sd;
                y = std::clamp(eta + outcome_rng.uniform(-h, h), 0.0, 1.0);
            }
            outcome_cols[o].values[r] = y;
        }
    }
    for (auto& c : outcome_cols) columns.push_back(std::move(c));
    return SurveyDataset(spec.schema(), std::move(columns), "synthetic", "synthetic");
}

namespace {

// Binary: mean probability; continuous: mean expected clipped value.
double mean_given_offsets(const OutcomeModel& m, const std::vector<double>& base, double intercept) {
    double total = 0.0;
    for (double b : base)
        total += m.kind == TaskKind::binary ? m.probability(intercept + b) : m.expected_value(intercept + b);
    return total / static_cast<double>(base.size());
}

std::vector<double> slope_contributions(const GenerativeSpec& spec, const OutcomeModel& m,
                                        std::size_t samples, std::uint64_t seed) {
    const Matrix x = sample_features(spec, samples, seed);
    std::vector<double> base(samples);
    for (std::size_t r = 0; r < samples; ++r) base[r] = m.index(x.row(r)) - m.coefficients[0];
    return base;
}

}  // namespace

double outcome_mean(const GenerativeSpec& spec, std::string_view outcome, std::size_t samples,
                    std::uint64_t seed) {
    spec.validate();
    const OutcomeModel& m = spec.outcome(outcome);
    return mean_given_offsets(m, slope_contributions(spec, m, samples, seed), m.coefficients[0]);
}

double calibrate_intercept(const GenerativeSpec& spec, std::string_view outcome, double target_mean,
                           std::size_t samples, std::uint64_t seed) {
    spec.validate();
    const OutcomeModel& m = spec.outcome(outcome);
    if (!(target_mean > 0.0 && target_mean < 1.0))
        fail(ErrorCode::infeasible, "target mean for '" + m.name + "' must lie strictly inside (0, 1)");
    const auto base = slope_contributions(spec, m, samples, seed);
    double lo = -1.0, hi = 1.0;
    while (mean_given_offsets(m, base, lo) > target_mean) lo *= 2.0;
    while (mean_given_offsets(m, base, hi) < target_mean) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean_given_offsets(m, base, mid) < target_mean) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

GenerativeSpec calibrate_to_moments(const DescriptiveStats& targets, const CalibrationOptions& options) {
    GenerativeSpec spec;
    spec.seed = options.seed;
    const SurveySchema canon = canonical_schema();
    std::vector<std::pair<const ColumnStats*, Kind>> outcome_cols;

    for (const auto& c : targets.columns) {
        if (!(c.mean >= 0.0 && c.mean <= 1.0))
            fail(ErrorCode::infeasible, "column '" + c.name + "' has mean " + format_number(c.mean) +
                                            " outside [0, 1]");
        if (!(c.std >= 0.0)) fail(ErrorCode::infeasible, "column '" + c.name + "' has negative std");

        Kind kind;
        auto hinted = std::find_if(options.kinds.begin(), options.kinds.end(),
                                   [&](const auto& kv) { return kv.first == c.name; });
        if (hinted != options.kinds.end()) {
            kind = hinted->second;
        } else {
            auto is01 = [](double v) { return v == 0.0 || v == 1.0; };
            const bool binary = is01(c.min) && is01(c.p25) && is01(c.p50) && is01(c.p75) && is01(c.max);
            kind = binary ? Kind::binary : Kind::continuous_unit;
            if (const auto* spec_col = canon.find(c.name); spec_col && !binary) kind = spec_col->kind;
        }

        const bool is_outcome = std::find(options.outcome_names.begin(), options.outcome_names.end(),
                                          c.name) != options.outcome_names.end();
        if (is_outcome) {
            outcome_cols.emplace_back(&c, kind);
            continue;
        }

        const double m = c.mean;
        // Stored std uses the n-1 denominator; moments below are population moments.
        const double n = static_cast<double>(c.count);
        const double var = c.count > 1 ? c.std * c.std * (n - 1.0) / n : c.std * c.std;
        const double max_var = m * (1.0 - m);

        FeatureMarginal f;
        f.name = c.name;
        f.kind = kind;
        const FeatureSpec* canon_col = canon.find(c.name);
        f.role = canon_col ? canon_col->role : Role::pid;
        if (!canon_col)
            fail(ErrorCode::invalid_argument, "column '" + c.name + "' is not a known feature role");

        if (kind == Kind::binary) {
            f.dist = Marginal::bernoulli(m);
        } else if (var > max_var + 1e-12) {
            fail(ErrorCode::infeasible,
                 "column '" + c.name + "': std " + format_number(c.std) + " exceeds the maximum " +
                     format_number(std::sqrt(max_var)) + " attainable on [0, 1] with mean " +
                     format_number(m));
        } else if (m == 0.0 || m == 1.0 || var <= 1e-15) {
            f.dist = Marginal::point_mass(m);
        } else if (var >= max_var - 1e-12) {
            f.dist = Marginal::empirical({0.0, 1.0}, {1.0 - m, m});
        } else {
            const double k = max_var / var - 1.0;
            f.dist = Marginal::beta_dist(m * k, (1.0 - m) * k);
        }
        spec.features.push_back(std::move(f));
    }
    if (spec.features.empty()) fail(ErrorCode::invalid_argument, "targets contain no feature columns");

    // Canonical order for model I/O.
    const auto& order = canonical_feature_order();
    std::stable_sort(spec.features.begin(), spec.features.end(), [&](const auto& a, const auto& b) {
        auto ia = std::find(order.begin(), order.end(), a.name) - order.begin();
        auto ib = std::find(order.begin(), order.end(), b.name) - order.begin();
        return ia < ib;
    });

    for (auto [c, kind] : outcome_cols) {
        OutcomeModel o;
        o.name = c->name;
        o.kind = kind == Kind::binary ? TaskKind::binary : TaskKind::continuous_unit;
        o.coefficients.assign(spec.features.size() + 1, 0.0);
        o.temperature = options.temperature;
        if (o.kind == TaskKind::binary) {
            if (c->mean <= 0.0 || c->mean >= 1.0) {
                o.link = Link::linear_threshold;
                o.coefficients[0] = c->mean >= 1.0 ? o.threshold : o.threshold - 1.0;
            } else {
                o.coefficients[0] = o.threshold + o.temperature * std::log(c->mean / (1.0 - c->mean));
            }
        } else {
            o.noise_sd = c->std;
            o.coefficients[0] = c->mean;
            spec.outcomes.push_back(o);
            // Clipping biases the mean; solve for the intercept that restores it.
            if (c->mean > 0.0 && c->mean < 1.0 && o.noise_sd > 0.0)
                spec.outcomes.back().coefficients[0] = calibrate_intercept(spec, o.name, c->mean, 16);
            continue;
        }
        spec.outcomes.push_back(std::move(o));
    }
    spec.validate();
    return spec;
}

OracleReport bayes_accuracy(const GenerativeSpec& spec, const TaskSpec& task, std::size_t mc_samples) {
    spec.validate();
    const OutcomeModel& m = spec.outcome(task.outcome_name);
    if (m.kind != TaskKind::binary || task.kind != TaskKind::binary)
        fail(ErrorCode::unsupported_task,
             "Bayes accuracy is defined for binary outcomes only ('" + task.outcome_name + "')");

    bool enumerable = spec.correlations.empty();
    int bits = 0;
    for (const auto& f : spec.features) {
        if (!f.dist.is_discrete()) {
            enumerable = false;
            break;
        }
        bits += bits_for(f.dist.atoms().size());
    }
    OracleReport report;
    if (enumerable && bits <= 20) {
        std::vector<std::vector<std::pair<double, double>>> atoms;
        for (const auto& f : spec.features) atoms.push_back(f.dist.atoms());
        const std::size_t k = atoms.size();
        std::vector<std::size_t> idx(k, 0);
        std::vector<double> x(k);
        double acc = 0.0;
        while (true) {
            double w = 1.0;
            for (std::size_t j = 0; j < k; ++j) {
                x[j] = atoms[j][idx[j]].first;
                w *= atoms[j][idx[j]].second;
            }
            if (w > 0.0) {
                const double p = m.probability(m.index(x));
                acc += w * std::max(p, 1.0 - p);
            }
            std::size_t j = 0;
            while (j < k && ++idx[j] == atoms[j].size()) idx[j++] = 0;
            if (j == k) break;
        }
        report.bayes_accuracy = acc;
        report.method = "exact-enumeration";
        return report;
    }

    if (mc_samples < 2) fail(ErrorCode::invalid_argument, "Monte Carlo needs at least 2 samples");
    const Matrix x = sample_features(spec, mc_samples, derive_seed(spec.seed, 99));
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r = 0; r < mc_samples; ++r) {
        const double p = m.probability(m.index(x.row(r)));
        const double a = std::max(p, 1.0 - p);
        sum += a;
        sum_sq += a * a;
    }
    const double n = static_cast<double>(mc_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    report.bayes_accuracy = mean;
    report.method = "monte-carlo";
    report.mc_samples = mc_samples;
    report.mc_std_error = std::sqrt(var / n);
    return report;
}

DescriptiveStats ces2020_moments() {
    //                      RR      PID     Sex     South   Edu     Age     White   Inc     Ideo    Vote
    const double mean[10] = {0.5228, 0.4304, 0.4466, 0.3706, 0.4362, 0.4586, 0.7662, 0.3608, 0.4891, 0.4045};
    const double sd[10] = {0.3700, 0.3850, 0.4971, 0.4830, 0.4959, 0.2114, 0.4233, 0.3337, 0.3250, 0.4908};
    const double q25[10] = {0.125, 0, 0, 0, 0, 0.2857, 1, 0, 0.1667, 0};
    const double q50[10] = {0.5, 0.3333, 0, 0, 0, 0.4935, 1, 0.33, 0.5, 0};
    const double q75[10] = {0.875, 0.8333, 1, 1, 1, 0.6234, 1, 0.66, 0.8333, 1};
    return moments_table(42609, mean, sd, q25, q50, q75);
}

DescriptiveStats anes2020_moments() {
    const double mean[10] = {0.5453, 0.4776, 0.4646, 0.3544, 0.5956, 0.5648, 0.7899, 0.3755, 0.5101, 0.4272};
    const double sd[10] = {0.3405, 0.3911, 0.4988, 0.4784, 0.4908, 0.2712, 0.4074, 0.3087, 0.2871, 0.4947};
    const double q25[10] = {0.25, 0, 0, 0, 0, 0.3387, 1, 0, 0.3333, 0};
    const double q50[10] = {0.5, 0.5, 0, 0, 1, 0.5968, 1, 0.33, 0.5, 0};
    const double q75[10] = {0.875, 0.8333, 1, 1, 1, 0.7903, 1, 0.66, 0.8333, 1};
    return moments_table(4740, mean, sd, q25, q50, q75);
}

namespace {

struct PresetOutcomes {
    // Slopes in canonical feature order: pid, sex, south, edu, age, white, inc, ideo.
    double vote_slopes[8];
    double vote_intercept;
    double resentment_slopes[8];
    double resentment_intercept;
};

GenerativeSpec build_preset(const DescriptiveStats& moments, const PresetOutcomes& p,
                            std::uint64_t seed) {
    CalibrationOptions opts;
    opts.temperature = kPresetTemperature;
    opts.seed = seed;
    GenerativeSpec spec = calibrate_to_moments(moments, opts);
    auto& vote = spec.outcome("vote_trump");
    vote.link = Link::logistic;
    vote.temperature = kPresetTemperature;
    vote.coefficients[0] = p.vote_intercept;
    std::copy(std::begin(p.vote_slopes), std::end(p.vote_slopes), vote.coefficients.begin() + 1);
    auto& rr = spec.outcome("racial_resentment");
    rr.noise_sd = kPresetResentmentNoise;
    rr.coefficients[0] = p.resentment_intercept;
    std::copy(std::begin(p.resentment_slopes), std::end(p.resentment_slopes), rr.coefficients.begin() + 1);
    spec.validate();
    return spec;
}

}  // namespace

GenerativeSpec ces2020_spec() {
    // Coefficients of the CES-trained regressions, intercepts included.
    const PresetOutcomes p = {
        {0.767, 0.020, 0.008, -0.028, 0.047, 0.058, 0.013, 0.394}, kCesVoteIntercept,
        {-0.310, -0.022, -0.008, 0.072, -0.129, -0.033, 0.011, -0.436}, kCesResentmentIntercept,
    };
    return build_preset(ces2020_moments(), p, 2020);
}

GenerativeSpec anes2020_spec() {
    const PresetOutcomes p = {
        {0.753, -0.032, 0.007, -0.048, 0.038, 0.071, 0.013, 0.429}, kAnesVoteIntercept,
        {-0.273, 0.004, -0.010, 0.093, -0.078, -0.037, 0.031, -0.401}, kAnesResentmentIntercept,
    };
    return build_preset(anes2020_moments(), p, 2021);
}

GenerativeSpec preset_spec(std::string_view name) {
    if (name == "ces2020") return ces2020_spec();
    if (name == "anes2020") return anes2020_spec();
    fail(ErrorCode::invalid_argument, "unknown preset '" + std::string(name) +
                                          "' (expected ces2020 or anes2020)");
}

}  // namespace svt
