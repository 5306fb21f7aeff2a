#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "svt/error.hpp"
#include "svt/random.hpp"
#include "svt/survey_data.hpp"

using namespace svt;

namespace {

const char* kHeader = "pid,sex,south,edu_binary,age,white,inc,ideo,vote_trump,racial_resentment\n";

SurveyDataset parse(const std::string& text, const SurveySchema& schema = canonical_schema()) {
    std::istringstream in(text);
    return parse_csv(in, schema, default_missing_tokens(), "test", "memory");
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an svt::Error");
    return ErrorCode::invalid_argument;
}

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

SurveySchema single(const std::string& name, Kind kind, LevelMap levels = {}) {
    SurveySchema s;
    s.features.push_back({name, Role::pid, kind, "", {}, std::move(levels)});
    return s;
}

SurveyDataset numeric(const std::string& name, std::vector<double> values, ColumnScale scale = ColumnScale::unit,
                      Kind kind = Kind::continuous_unit, std::optional<Bounds> bounds = {}) {
    SurveySchema s;
    s.features.push_back({name, Role::age, kind, "", bounds, {}});
    Column c;
    c.scale = scale;
    c.values = std::move(values);
    return SurveyDataset(s, {c}, "t", "memory");
}

SurveyDataset random_dataset(Rng& rng, std::size_t n, double missing_rate) {
    std::ostringstream csv;
    csv << kHeader;
    for (std::size_t r = 0; r < n; ++r) {
        for (int c = 0; c < 10; ++c) {
            if (c) csv << ',';
            if (rng.uniform() < missing_rate) {
                csv << "NA";
                continue;
            }
            const bool binary = c == 1 || c == 2 || c == 3 || c == 5 || c == 8;
            csv << (binary ? (rng.uniform() < 0.5 ? 0.0 : 1.0) : rng.uniform());
        }
        csv << '\n';
    }
    return parse(csv.str());
}

}  // namespace

TEST_CASE("three complete rows") {
    SurveyDataset ds = parse(std::string(kHeader) +
                             "1,1,0,1,0.5,1,0.3,0.8,1,0.7\n"
                             "0,0,1,0,0.2,0,0.9,0.1,0,0.2\n"
                             "0.5,1,1,1,1,1,0,0.5,1,1\n");
    CHECK(ds.rows() == 3);
    CHECK(ds.schema().column_names().size() == 10);
    CHECK(ds.is_complete());
    CHECK(ds.column("inc")[1] == 0.9);
}

TEST_CASE("header order does not matter") {
    SurveyDataset ds = parse("ideo,inc,white,age,edu_binary,south,sex,pid\n0.1,0.2,1,0.4,0,1,0,0.9\n");
    CHECK(ds.schema().feature_names() == canonical_feature_order());
    CHECK(ds.column("pid")[0] == 0.9);
    CHECK(ds.schema().outcomes.empty());
}

TEST_CASE("missing tokens are kept until deletion") {
    SurveyDataset ds = parse(std::string(kHeader) + "1,1,0,1,0.5,1,NA,0.8,1,0.7\n0,0,1,0,0.2,0,.,0.1,0,\n");
    CHECK(ds.rows() == 2);
    CHECK(is_missing(ds.column("inc")[0]));
    CHECK(is_missing(ds.column("inc")[1]));
    CHECK(is_missing(ds.column("racial_resentment")[1]));
    CHECK_FALSE(ds.is_complete());
}

TEST_CASE("binary column holding 2 names row and column") {
    auto bad = [] { parse(std::string(kHeader) + "1,1,0,1,0.5,1,0.3,0.8,1,0.7\n1,2,0,1,0.5,1,0.3,0.8,1,0.7\n"); };
    CHECK(code_of(bad) == ErrorCode::range);
    const std::string msg = message_of(bad);
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("'sex'") != std::string::npos);
}

TEST_CASE("csv errors") {
    CHECK(code_of([] { parse("pid,sex,south,edu_binary,age,white,inc,ideo,bogus\n"); }) == ErrorCode::schema);
    CHECK(message_of([] { parse("pid,sex,south,edu_binary,age,white,inc,ideo,bogus\n"); }).find("bogus") !=
          std::string::npos);
    CHECK(code_of([] { parse("pid,sex\n1,1\n"); }) == ErrorCode::schema);
    CHECK(code_of([] { parse(std::string(kHeader) + "1,1,0,1,abc,1,0.3,0.8,1,0.7\n"); }) == ErrorCode::parse);
    CHECK(code_of([] { parse(std::string(kHeader) + "1,1,0\n"); }) == ErrorCode::parse);
    CHECK(code_of([] { parse(""); }) == ErrorCode::parse);
    CHECK(code_of([] { load_csv("/nonexistent/file.csv", canonical_schema()); }) == ErrorCode::io);
}

TEST_CASE("load_csv reads a file and labels it by stem") {
    const auto path = std::filesystem::temp_directory_path() / "svt_test_three_rows.csv";
    {
        std::ofstream out(path);
        out << kHeader << "1,1,0,1,0.5,1,0.3,0.8,1,0.7\n";
    }
    SurveyDataset ds = load_csv(path.string(), canonical_schema());
    CHECK(ds.rows() == 1);
    CHECK(ds.label() == "svt_test_three_rows");
    CHECK(ds.provenance() == path.string());
    std::filesystem::remove(path);
}

TEST_CASE("write and parse round trip") {
    Rng rng(4);
    SurveyDataset ds = random_dataset(rng, 30, 0.1);
    std::ostringstream out;
    write_csv(ds, out);
    SurveyDataset back = parse(out.str());
    REQUIRE(back.rows() == ds.rows());
    for (const auto& name : ds.schema().column_names()) {
        auto a = ds.column(name), b = back.column(name);
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (is_missing(a[r])) CHECK(is_missing(b[r]));
            else CHECK(a[r] == b[r]);
        }
    }
}

TEST_CASE("recode party") {
    LevelMap party{{"Republican", 1.0}, {"Democrat", 0.0}, {"Other", std::nullopt}};
    SurveySchema s = single("party", Kind::binary, party);
    SurveyDataset raw = parse("party\nRepublican\nDemocrat\nOther\nNA\n", s);
    SurveyDataset ds = recode(raw, recode_rules(s));
    auto v = ds.column("party");
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 0.0);
    CHECK(is_missing(v[2]));
    CHECK(is_missing(v[3]));
    CHECK_FALSE(ds.schema().find("party")->is_text());
}

TEST_CASE("recode education to college=1") {
    SurveySchema s;
    s.features.push_back({"edu_binary", Role::edu_binary, Kind::binary, "college=1", {}, {{"college", 1.0}, {"no college", 0.0}}});
    SurveyDataset ds = recode(parse("edu_binary\ncollege\nno college\ncollege\n", s), recode_rules(s));
    CHECK(std::vector<double>(ds.column("edu_binary").begin(), ds.column("edu_binary").end()) ==
          std::vector<double>{1, 0, 1});
}

TEST_CASE("unmapped level is reported") {
    LevelMap party{{"Republican", 1.0}, {"Democrat", 0.0}};
    SurveySchema s = single("party", Kind::binary, party);
    SurveyDataset raw = parse("party\nRepublican\nIndependent\n", s);
    auto bad = [&] { recode(raw, recode_rules(s)); };
    CHECK(code_of(bad) == ErrorCode::unmapped_level);
    CHECK(message_of(bad).find("Independent") != std::string::npos);
    CHECK(message_of(bad).find("party") != std::string::npos);
}

TEST_CASE("min-max normalization") {
    SurveyDataset ds = numeric("age", {18, 95, 56.5}, ColumnScale::raw);
    Normalized n = normalize_minmax(ds, {"age"}, {{"age", {18, 95}}});
    auto v = n.dataset.column("age");
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 1.0);
    CHECK(v[2] == 0.5);
    CHECK(n.bounds.at("age") == Bounds{18, 95});
    CHECK(n.dataset.column_data("age").scale == ColumnScale::unit);
}

TEST_CASE("normalization bound sources") {
    SurveyDataset observed = numeric("age", {20, 40, 30}, ColumnScale::raw);
    CHECK(normalize_minmax(observed, {}).bounds.at("age") == Bounds{20, 40});
    SurveyDataset declared = numeric("age", {20, 40, 30}, ColumnScale::raw, Kind::continuous_unit, Bounds{0, 100});
    CHECK(normalize_minmax(declared, {}).dataset.column("age")[0] == doctest::Approx(0.2));
    CHECK(normalize_minmax(declared, {}, {{"age", {10, 50}}}).dataset.column("age")[0] == doctest::Approx(0.25));
}

TEST_CASE("normalization errors") {
    SurveyDataset constant = numeric("age", {30, 30, 30}, ColumnScale::raw);
    CHECK(code_of([&] { normalize_minmax(constant, {"age"}); }) == ErrorCode::degenerate_column);
    CHECK(code_of([&] { normalize_minmax(constant, {"age"}, {{"age", {5, 5}}}); }) == ErrorCode::degenerate_column);
    SurveyDataset wide = numeric("age", {10, 30}, ColumnScale::raw);
    CHECK(code_of([&] { normalize_minmax(wide, {"age"}, {{"age", {18, 95}}}); }) == ErrorCode::range);
    CHECK(code_of([&] { normalize_minmax(wide, {"nope"}); }) == ErrorCode::schema);
}

TEST_CASE("normalize round trip") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const double lo = rng.uniform(-1000, 1000);
        const double hi = lo + rng.uniform(0.1, 500);
        std::vector<double> raw(40);
        for (auto& v : raw) v = rng.uniform(lo, hi);
        raw[0] = lo;
        SurveyDataset ds = numeric("age", raw, ColumnScale::raw);
        Normalized n = normalize_minmax(ds, {}, {{"age", {lo, hi}}});
        for (double v : n.dataset.column("age")) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        SurveyDataset back = denormalize(n.dataset, n.bounds);
        auto b = back.column("age");
        for (std::size_t i = 0; i < raw.size(); ++i)
            CHECK(std::fabs(b[i] - raw[i]) <= 1e-12 * std::max(1.0, std::fabs(raw[i])));
    }
}

TEST_CASE("case-wise deletion") {
    SurveyDataset ds = parse(std::string(kHeader) +
                             "1,1,0,1,0.5,1,0.3,0.8,1,0.7\n"
                             "1,1,0,1,0.5,1,NA,0.8,1,0.7\n"
                             "0,0,1,0,0.2,0,0.9,0.1,0,0.2\n"
                             "1,1,0,1,0.5,1,,0.8,1,0.7\n"
                             "0,1,1,1,1,1,0,0.5,1,1\n");
    Deletion d = casewise_delete(ds, {"inc"});
    CHECK(d.dataset.rows() == 3);
    CHECK(d.deleted == 2);
    CHECK(d.dataset.is_complete());

    Deletion again = casewise_delete(d.dataset, {});
    CHECK(again.deleted == 0);
    CHECK(again.dataset == d.dataset);

    SurveyDataset none = parse(std::string(kHeader) + "1,1,0,1,0.5,1,NA,0.8,1,0.7\n0,0,1,0,0.2,0,NA,0.1,0,0.2\n");
    Deletion all = casewise_delete(none, {"inc"});
    CHECK(all.empty());
    CHECK(all.deleted == 2);
}

TEST_CASE("case-wise deletion is idempotent") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        SurveyDataset ds = random_dataset(rng, 50, 0.05);
        Deletion once = casewise_delete(ds, {});
        Deletion twice = casewise_delete(once.dataset, {});
        CHECK(twice.dataset == once.dataset);
        CHECK(twice.deleted == 0);
        CHECK(once.deleted == ds.rows() - once.dataset.rows());
    }
}

TEST_CASE("schema alignment") {
    SurveySchema ces = canonical_schema();
    SurveySchema anes = canonical_schema();
    anes.features.push_back({"extra", Role::pid, Kind::binary, "", {}, {}});
    std::reverse(anes.features.begin(), anes.features.end());
    SurveySchema shared = align_schemas(ces, anes);
    CHECK(shared.feature_names() == canonical_feature_order());
    CHECK(shared.outcome_names().size() == 2);

    SurveySchema a = single("x", Kind::binary), b = single("y", Kind::binary);
    CHECK(align_schemas(a, b).features.empty());

    SurveySchema binary_inc = canonical_schema();
    for (auto& f : binary_inc.features)
        if (f.name == "inc") f.kind = Kind::binary;
    auto bad = [&] { align_schemas(ces, binary_inc); };
    CHECK(code_of(bad) == ErrorCode::schema_conflict);
    CHECK(message_of(bad).find("inc") != std::string::npos);
}

TEST_CASE("alignment is commutative in membership") {
    Rng rng(5);
    const auto& names = canonical_feature_order();
    for (int trial = 0; trial < 50; ++trial) {
        SurveySchema a, b;
        for (const auto& f : canonical_schema().features) {
            if (rng.uniform() < 0.6) a.features.push_back(f);
            if (rng.uniform() < 0.6) b.features.push_back(f);
        }
        std::reverse(b.features.begin(), b.features.end());
        auto ab = align_schemas(a, b).feature_names();
        auto ba = align_schemas(b, a).feature_names();
        CHECK(std::set<std::string>(ab.begin(), ab.end()) == std::set<std::string>(ba.begin(), ba.end()));
        for (std::size_t i = 1; i < ab.size(); ++i)
            CHECK(std::find(names.begin(), names.end(), ab[i - 1]) < std::find(names.begin(), names.end(), ab[i]));
    }
}

TEST_CASE("describe a constant column") {
    SurveyDataset ds = numeric("x", {1, 1, 1, 1}, ColumnScale::unit, Kind::binary);
    const ColumnStats& s = describe(ds).columns.at(0);
    CHECK(s.count == 4);
    CHECK(s.mean == 1.0);
    CHECK(s.std == 0.0);
    for (double q : {s.min, s.p25, s.p50, s.p75, s.max}) CHECK(q == 1.0);
}

TEST_CASE("describe a balanced binary column") {
    SurveyDataset ds = numeric("x", {0, 1, 1, 0, 1, 0}, ColumnScale::unit, Kind::binary);
    DescriptiveStats stats = describe(ds);
    const ColumnStats& s = stats.columns.at(0);
    std::vector<double> v{0, 1, 1, 0, 1, 0};
    CHECK(s.mean == 0.5);
    CHECK(s.p50 == oracle::quantile(v, 0.5));
    CHECK(s.p25 == oracle::quantile(v, 0.25));
    CHECK(s.p75 == oracle::quantile(v, 0.75));
    CHECK(s.std == doctest::Approx(oracle::stddev(v)).epsilon(1e-14));
    CHECK(stats.std_denominator == "n-1");
    CHECK(stats.quantile_rule == "linear");
}

TEST_CASE("describe matches independent statistics") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        SurveyDataset ds = casewise_delete(random_dataset(rng, 2 + rng.index(200), 0.0), {}).dataset;
        DescriptiveStats stats = describe(ds);
        for (const auto& s : stats.columns) {
            auto col = ds.column(s.name);
            std::vector<double> v(col.begin(), col.end());
            CHECK(s.count == ds.rows());
            CHECK(s.mean == doctest::Approx(oracle::mean(v)).epsilon(1e-12));
            CHECK(s.std == doctest::Approx(oracle::stddev(v)).epsilon(1e-10));
            CHECK(s.p25 == doctest::Approx(oracle::quantile(v, 0.25)).epsilon(1e-14));
            CHECK(s.p50 == doctest::Approx(oracle::quantile(v, 0.5)).epsilon(1e-14));
            CHECK(s.p75 == doctest::Approx(oracle::quantile(v, 0.75)).epsilon(1e-14));
            CHECK(s.min <= s.p25);
            CHECK(s.p25 <= s.p50);
            CHECK(s.p50 <= s.p75);
            CHECK(s.p75 <= s.max);
        }
    }
}

TEST_CASE("describe errors") {
    SurveyDataset ds = parse(kHeader);
    CHECK(code_of([&] { describe(ds); }) == ErrorCode::empty_dataset);
    SurveyDataset gaps = parse(std::string(kHeader) + "1,1,0,1,0.5,1,NA,0.8,1,0.7\n");
    CHECK_THROWS_AS(describe(gaps), Error);
}

TEST_CASE("split sizes and determinism") {
    Rng rng(1);
    SurveyDataset ten = random_dataset(rng, 10, 0.0);
    Split a = split_train_test(ten, 0.2, 42);
    Split b = split_train_test(ten, 0.2, 42);
    CHECK(a.train.rows() == 8);
    CHECK(a.test.rows() == 2);
    CHECK(a.test_rows == b.test_rows);
    CHECK(a.train == b.train);

    SurveyDataset five = random_dataset(rng, 5, 0.0);
    Split c = split_train_test(five, 0.2, 42);
    CHECK(c.train.rows() == 4);
    CHECK(c.test.rows() == 1);

    SurveyDataset one = random_dataset(rng, 1, 0.0);
    CHECK(code_of([&] { split_train_test(one, 0.2, 1); }) == ErrorCode::insufficient_data);
    CHECK(code_of([&] { split_train_test(ten, 0.0, 1); }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] { split_train_test(ten, 1.0, 1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("split seeds change membership") {
    Rng rng(2);
    SurveyDataset ds = random_dataset(rng, 100, 0.0);
    int differ = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        if (split_train_test(ds, 0.2, seed).test_rows != split_train_test(ds, 0.2, seed + 100).test_rows) ++differ;
    CHECK(differ >= 9);
}

TEST_CASE("split is an exhaustive partition") {
    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.index(300);
        const double fraction = rng.uniform(0.01, 0.99);
        SurveyDataset ds = random_dataset(rng, n, 0.0);
        Split s = split_train_test(ds, fraction, rng.next_u64());
        std::vector<std::size_t> all = s.train_rows;
        all.insert(all.end(), s.test_rows.begin(), s.test_rows.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expected(n);
        for (std::size_t i = 0; i < n; ++i) expected[i] = i;
        CHECK(all == expected);
        CHECK(std::fabs(static_cast<double>(s.test.rows()) - fraction * static_cast<double>(n)) <= 1.0);
        CHECK(s.train.rows() + s.test.rows() == n);
    }
}

TEST_CASE("prepared loading reuses reference bounds") {
    SurveySchema schema = canonical_schema();
    for (auto& f : schema.features)
        if (f.name == "age") f.bounds = Bounds{18, 95};
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = dir / "svt_test_prepared.csv";
    {
        std::ofstream out(path);
        out << kHeader << "1,1,0,1,18,1,0.3,0.8,1,0.7\n0,0,1,0,95,0,NA,0.1,0,0.2\n1,1,1,1,56.5,1,0.5,0.5,1,0.5\n";
    }
    Prepared p = load_prepared(path.string(), schema);
    CHECK(p.deleted == 1);
    CHECK(p.dataset.rows() == 2);
    CHECK(p.dataset.column("age")[1] == 0.5);
    CHECK(p.bounds.at("age") == Bounds{18, 95});

    Prepared q = load_prepared(path.string(), schema, {{"age", {0, 113}}});
    CHECK(q.dataset.column("age")[1] == doctest::Approx(0.5));
    std::filesystem::remove(path);
}

TEST_CASE("raw columns without declared bounds use observed or reference bounds") {
    SurveySchema schema = canonical_schema();
    for (auto& f : schema.features)
        if (f.name == "age") f.raw = true;
    const auto path = std::filesystem::temp_directory_path() / "svt_test_raw.csv";
    {
        std::ofstream out(path);
        out << kHeader << "1,1,0,1,20,1,0.3,0.8,1,0.7\n0,0,1,0,60,0,0.2,0.1,0,0.2\n1,1,1,1,30,1,0.5,0.5,1,0.5\n";
    }
    Prepared p = load_prepared(path.string(), schema);
    CHECK(p.bounds.at("age") == Bounds{20, 60});
    CHECK(p.dataset.column("age")[2] == doctest::Approx(0.25));

    Prepared q = load_prepared(path.string(), schema, {{"age", {10, 110}}});
    CHECK(q.dataset.column("age")[0] == doctest::Approx(0.1));
    CHECK(code_of([&] { load_prepared(path.string(), schema, {{"age", {25, 110}}}); }) == ErrorCode::range);
    std::filesystem::remove(path);
}
