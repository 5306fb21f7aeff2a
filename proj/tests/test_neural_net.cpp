#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "svt/neural_net.hpp"
#include "svt/random.hpp"

using namespace svt;
using fixtures::code_of;

namespace {

MlpModel two_heads(std::uint64_t seed) {
    return init_default(canonical_feature_order(), {vote_task(), resentment_task()}, seed);
}

MlpModel zeroed(MlpModel m) {
    for (auto& l : m.trunk) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    for (auto& h : m.heads) {
        std::fill(h.layer.weights.begin(), h.layer.weights.end(), 0.0);
        std::fill(h.layer.bias.begin(), h.layer.bias.end(), 0.0);
    }
    return m;
}

Matrix random_batch(Rng& rng, std::size_t n) {
    Matrix x(n, 8);
    for (auto& v : x.data) v = rng.uniform();
    return x;
}

Targets random_targets(Rng& rng, std::size_t n) {
    std::vector<double> vote(n), rr(n);
    for (std::size_t r = 0; r < n; ++r) {
        vote[r] = rng.uniform() < 0.5 ? 1.0 : 0.0;
        rr[r] = rng.uniform();
    }
    return {{"vote_trump", vote}, {"racial_resentment", rr}};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("initialization is deterministic per seed") {
    CHECK(serialize_model(two_heads(7)) == serialize_model(two_heads(7)));
    CHECK(two_heads(0).trunk[0].weights != two_heads(1).trunk[0].weights);
    MlpModel m = two_heads(3);
    for (const auto& l : m.trunk)
        for (double b : l.bias) CHECK(b == 0.0);
    const double limit = std::sqrt(6.0 / 8.0);
    for (double w : m.trunk[0].weights) CHECK(std::fabs(w) <= limit);
    const double head_limit = std::sqrt(6.0 / 9.0);
    for (double w : m.heads[0].layer.weights) CHECK(std::fabs(w) <= head_limit);
    CHECK(m.trunk.size() == 2);
    CHECK(m.trunk[0].spec == LayerSpec{8, 16, Activation::rectifier});
    CHECK(m.trunk[1].spec == LayerSpec{16, 8, Activation::rectifier});
    CHECK(m.heads[0].layer.spec.activation == Activation::sigmoid);
    CHECK(m.heads[1].layer.spec.activation == Activation::identity);
}

TEST_CASE("init rejects broken architectures") {
    const auto order = canonical_feature_order();
    CHECK(code_of([&] {
              init(order, {{8, 4, Activation::rectifier}, {5, 3, Activation::rectifier}},
                   {{vote_task(), {3, 1, Activation::sigmoid}}}, 1);
          }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] {
              init(order, {{8, 4, Activation::rectifier}}, {{vote_task(), {3, 1, Activation::sigmoid}}}, 1);
          }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] {
              init(order, {{8, 4, Activation::rectifier}}, {{vote_task(), {4, 1, Activation::identity}}}, 1);
          }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] {
              init(order, {{8, 0, Activation::rectifier}}, {{vote_task(), {0, 1, Activation::sigmoid}}}, 1);
          }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] { init(order, {{8, 4, Activation::rectifier}}, {}, 1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("input width mismatch surfaces at forward time") {
    MlpModel m = init(canonical_feature_order(), {{7, 4, Activation::rectifier}},
                      {{vote_task(), {4, 1, Activation::sigmoid}}}, 1);
    Rng rng(1);
    CHECK(code_of([&] { forward(m, random_batch(rng, 3)); }) == ErrorCode::schema);
}

TEST_CASE("zero parameters give 0.5 and 0.0") {
    MlpModel m = zeroed(two_heads(1));
    Rng rng(2);
    HeadOutputs out = forward(m, random_batch(rng, 5));
    CHECK(out.at("vote_trump").size() == 5);
    CHECK(out.at("racial_resentment").size() == 5);
    for (double p : out.at("vote_trump")) CHECK(p == 0.5);
    for (double v : out.at("racial_resentment")) CHECK(v == 0.0);
}

TEST_CASE("sigmoid head stays in the open unit interval") {
    Rng rng(3);
    MlpModel m = two_heads(4);
    for (auto& w : m.heads[0].layer.weights) w *= 50.0;
    HeadOutputs out = forward(m, random_batch(rng, 200));
    for (double p : out.at("vote_trump")) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("loss values") {
    MlpModel m = zeroed(two_heads(1));
    Rng rng(5);
    Matrix x = random_batch(rng, 4);
    TrainConfig cfg;
    LossBreakdown l = loss(m, x, {{"vote_trump", {1, 0, 1, 0}}}, cfg);
    CHECK(l.per_head.at("vote_trump") == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(l.total == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(l.per_head.count("racial_resentment") == 0);

    LossBreakdown zero = loss(m, x, {{"racial_resentment", {0, 0, 0, 0}}}, cfg);
    CHECK(zero.total == 0.0);

    MlpModel sure = m;
    sure.heads[0].layer.bias[0] = 40.0;
    LossBreakdown perfect = loss(sure, x, {{"vote_trump", {1, 1, 1, 1}}}, cfg);
    CHECK(perfect.total < 1e-6);
    LossBreakdown wrong = loss(sure, x, {{"vote_trump", {0, 0, 0, 0}}}, cfg);
    CHECK(std::isfinite(wrong.total));
    CHECK(wrong.total == doctest::Approx(-std::log(kProbabilityClamp)).epsilon(1e-9));

    TrainConfig weighted;
    weighted.loss_weights = {{"vote_trump", 2.0}, {"racial_resentment", 0.5}};
    LossBreakdown both = loss(m, x, {{"vote_trump", {1, 0, 1, 0}}, {"racial_resentment", {1, 1, 1, 1}}}, weighted);
    CHECK(both.total == doctest::Approx(2.0 * std::log(2.0) + 0.5 * 1.0).epsilon(1e-14));
}

TEST_CASE("targets outside their range are rejected") {
    MlpModel m = two_heads(1);
    Rng rng(5);
    Matrix x = random_batch(rng, 2);
    TrainConfig cfg;
    CHECK(code_of([&] { loss(m, x, {{"vote_trump", {1, 0.5}}}, cfg); }) == ErrorCode::range);
    CHECK(code_of([&] { loss(m, x, {{"racial_resentment", {1.2, 0.5}}}, cfg); }) == ErrorCode::range);
    CHECK(code_of([&] { loss(m, x, {{"vote_trump", {1}}}, cfg); }) != ErrorCode{});
}

TEST_CASE("analytic gradients match central differences") {
    TrainConfig cfg;
    cfg.loss_weights = {{"vote_trump", 1.0}, {"racial_resentment", 0.7}};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        gradcheck::Problem p = gradcheck::draw(seed);
        gradcheck::Result r = gradcheck::check(p.model, p.x, p.targets, cfg);
        CAPTURE(seed);
        CHECK(r.checked == 16 * 9 + 8 * 17 + 2 * 9);
        CHECK(r.max_rel_error < 1e-4);
    }
}

TEST_CASE("frozen layers get no gradient") {
    Rng rng(6);
    MlpModel m = set_frozen(two_heads(2), "trunk:*", true);
    Gradients g = gradients(m, random_batch(rng, 10), random_targets(rng, 10), TrainConfig{});
    for (const auto& l : g.trunk) CHECK_FALSE(l.present);
    for (const auto& h : g.heads) CHECK(h.present);

    MlpModel partial = set_frozen(two_heads(2), "trunk:0", true);
    Gradients gp = gradients(partial, random_batch(rng, 10), random_targets(rng, 10), TrainConfig{});
    CHECK_FALSE(gp.trunk[0].present);
    CHECK(gp.trunk[1].present);
}

TEST_CASE("zero loss weight zeroes that head's gradient") {
    Rng rng(7);
    TrainConfig cfg;
    cfg.loss_weights = {{"racial_resentment", 0.0}};
    Gradients g = gradients(two_heads(3), random_batch(rng, 10), random_targets(rng, 10), cfg);
    for (double v : g.heads[1].weights) CHECK(v == 0.0);
    for (double v : g.heads[1].bias) CHECK(v == 0.0);
}

TEST_CASE("learning rate zero leaves parameters unchanged") {
    Rng rng(8);
    Matrix x = random_batch(rng, 50);
    Targets t = random_targets(rng, 50);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 5;
    cfg.batch_size = 8;
    MlpModel m = two_heads(4);
    TrainResult r = train(m, x, t, cfg);
    CHECK(r.model == m);
    REQUIRE(r.history.size() == 5);
    for (const auto& e : r.history) CHECK(e.loss.total == r.history.front().loss.total);
}

TEST_CASE("separable toy data is learned") {
    Rng rng(9);
    const std::size_t n = 400;
    Matrix x = random_batch(rng, n);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        while (std::fabs(x(r, 0) - 0.5) < 0.02) x(r, 0) = rng.uniform();
        y[r] = x(r, 0) > 0.5 ? 1.0 : 0.0;
    }
    std::size_t rule_hits = 0;
    for (std::size_t r = 0; r < n; ++r)
        if ((x(r, 0) > 0.5) == (y[r] == 1.0)) ++rule_hits;
    REQUIRE(rule_hits == n);

    MlpModel m = init_default(canonical_feature_order(), {vote_task()}, 10);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.learning_rate = 0.5;
    cfg.batch_size = 16;
    TrainResult r = train(m, x, {{"vote_trump", y}}, cfg);
    auto p = forward(r.model, x).at("vote_trump");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i)
        if ((p[i] >= 0.5) == (y[i] == 1.0)) ++correct;
    CHECK(static_cast<double>(correct) / n >= 0.99);
    CHECK(r.history.size() == 200);
}

TEST_CASE("training is deterministic") {
    Rng rng(10);
    Matrix x = random_batch(rng, 120);
    Targets t = random_targets(rng, 120);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 3;
    TrainResult a = train(two_heads(5), x, t, cfg);
    TrainResult b = train(two_heads(5), x, t, cfg);
    CHECK(a.model == b.model);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].loss.total == b.history[i].loss.total);
    cfg.seed = 4;
    CHECK_FALSE(train(two_heads(5), x, t, cfg).model == a.model);
}

TEST_CASE("frozen parameters are bit-identical after training") {
    Rng rng(11);
    for (const char* selector : {"trunk:*", "trunk:0", "head:racial_resentment", "trunk:1,head:vote_trump"}) {
        CAPTURE(selector);
        Matrix x = random_batch(rng, 80);
        Targets t = random_targets(rng, 80);
        TrainConfig cfg;
        cfg.epochs = 3;
        MlpModel m = set_frozen(two_heads(6), selector, true);
        MlpModel after = train(m, x, t, cfg).model;
        for (std::size_t l = 0; l < m.trunk.size(); ++l) {
            if (m.trunk[l].frozen) CHECK(std::memcmp(m.trunk[l].weights.data(), after.trunk[l].weights.data(),
                                                     m.trunk[l].weights.size() * sizeof(double)) == 0);
            else CHECK(m.trunk[l].weights != after.trunk[l].weights);
        }
        for (std::size_t h = 0; h < m.heads.size(); ++h) {
            if (m.heads[h].layer.frozen) CHECK(m.heads[h].layer == after.heads[h].layer);
            else CHECK(m.heads[h].layer.weights != after.heads[h].layer.weights);
        }
    }
}

TEST_CASE("zero loss weight isolates a head") {
    Rng rng(12);
    Matrix x = random_batch(rng, 80);
    Targets t = random_targets(rng, 80);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.loss_weights = {{"vote_trump", 0.0}};
    MlpModel m = two_heads(7);
    MlpModel after = train(m, x, t, cfg).model;
    CHECK(after.heads[0].layer == m.heads[0].layer);
    CHECK(after.heads[1].layer != m.heads[1].layer);
}

TEST_CASE("training errors") {
    Rng rng(13);
    Matrix x = random_batch(rng, 20);
    Targets t = random_targets(rng, 20);
    MlpModel all = set_frozen(two_heads(1), "*", true);
    CHECK(code_of([&] { train(all, x, t, TrainConfig{}); }) == ErrorCode::no_trainable_parameters);
    CHECK(code_of([&] { train(two_heads(1), x, {}, TrainConfig{}); }) == ErrorCode::invalid_argument);
    TrainConfig bad;
    bad.batch_size = 0;
    CHECK(code_of([&] { train(two_heads(1), x, t, bad); }) == ErrorCode::invalid_argument);
    bad = TrainConfig{};
    bad.learning_rate = -1.0;
    CHECK(code_of([&] { train(two_heads(1), x, t, bad); }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] { train(two_heads(1), Matrix(0, 8), {{"vote_trump", {}}}, TrainConfig{}); }) == ErrorCode::empty_dataset);
}

TEST_CASE("freeze selectors") {
    MlpModel m = two_heads(1);
    MlpModel t = set_frozen(m, "trunk:*", true);
    for (const auto& l : t.trunk) CHECK(l.frozen);
    for (const auto& h : t.heads) CHECK_FALSE(h.layer.frozen);
    CHECK(set_frozen(t, "trunk:*", false) == m);
    CHECK(trainable_layer_count(t) == 2);

    MlpModel one = set_frozen(m, "trunk:1", true);
    CHECK_FALSE(one.trunk[0].frozen);
    CHECK(one.trunk[1].frozen);
    MlpModel range = set_frozen(m, "trunk:0-1", true);
    CHECK(range.trunk[0].frozen);
    CHECK(range.trunk[1].frozen);
    MlpModel head = set_frozen(m, "head:vote_trump", true);
    CHECK(head.heads[0].layer.frozen);
    CHECK_FALSE(head.heads[1].layer.frozen);
    CHECK(trainable_layer_count(set_frozen(m, "*", true)) == 0);
    CHECK(trainable_layer_count(set_frozen(m, "head:*", true)) == 2);
    CHECK(set_frozen(m, "trunk:0,head:*", true).heads[1].layer.frozen);

    MlpModel p = set_frozen(m, "*", true);
    CHECK(p.trunk[0].weights == m.trunk[0].weights);

    for (const char* bad : {"trunk:9", "trunk:1-5", "head:income", "layers", "", "trunk:x", "trunk:1-0"}) {
        CAPTURE(bad);
        CHECK(code_of([&] { set_frozen(m, bad, true); }) == ErrorCode::invalid_argument);
    }
}

TEST_CASE("save and load round trip exactly") {
    Rng rng(14);
    MlpModel m = set_frozen(two_heads(21), "trunk:0", true);
    m.provenance["stage"] = "pretrained";
    const std::string path = temp_path("svt_test_model.bin");
    save_model(m, path);
    MlpModel back = load_model(path);
    CHECK(back == m);
    CHECK(model_hash(back) == model_hash(m));
    Matrix x = random_batch(rng, 25);
    HeadOutputs a = forward(m, x), b = forward(back, x);
    for (const auto& [name, values] : a)
        CHECK(std::memcmp(values.data(), b.at(name).data(), values.size() * sizeof(double)) == 0);
    std::filesystem::remove(path);
}

TEST_CASE("corrupt model files are detected") {
    const std::vector<std::uint8_t> bytes = serialize_model(two_heads(22));
    auto truncated = bytes;
    truncated.resize(bytes.size() - 40);
    CHECK(code_of([&] { deserialize_model(truncated); }) == ErrorCode::integrity);
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x01;
    CHECK(code_of([&] { deserialize_model(flipped); }) == ErrorCode::integrity);
    auto versioned = bytes;
    versioned[8] = static_cast<std::uint8_t>(kModelFormatVersion + 1);
    CHECK(code_of([&] { deserialize_model(versioned); }) == ErrorCode::unsupported_version);
    auto magic = bytes;
    magic[0] = 'X';
    CHECK(code_of([&] { deserialize_model(magic); }) == ErrorCode::integrity);

    const std::string path = temp_path("svt_test_truncated.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(truncated.data()), static_cast<std::streamsize>(truncated.size()));
    }
    CHECK(code_of([&] { load_model(path); }) == ErrorCode::integrity);
    std::filesystem::remove(path);
    CHECK(code_of([&] { load_model(temp_path("svt_no_such_model.bin")); }) == ErrorCode::io);
}

TEST_CASE("dataset forward checks feature names") {
    Rng rng(15);
    Matrix x = random_batch(rng, 6);
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t j : {1, 2, 3, 5}) x(r, j) = x(r, j) < 0.5 ? 0.0 : 1.0;
    SurveyDataset ds = fixtures::dataset(x, {}, {});
    MlpModel m = two_heads(1);
    CHECK(forward(m, ds).at("vote_trump") == forward(m, x).at("vote_trump"));
    MlpModel renamed = m;
    renamed.feature_order[0] = "party";
    CHECK(code_of([&] { forward(renamed, ds); }) == ErrorCode::schema);
}
