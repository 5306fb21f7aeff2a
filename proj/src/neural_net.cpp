#include "svt/neural_net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "svt/error.hpp"
#include "svt/hash.hpp"
#include "svt/random.hpp"
#include "text_util.hpp"

namespace svt {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double activate(Activation a, double z) {
    switch (a) {
        case Activation::rectifier: return z > 0.0 ? z : 0.0;
        case Activation::identity: return z;
        case Activation::sigmoid: return sigmoid(z);
    }
    return z;
}

// Derivative expressed through pre-activation z and output a.
double activation_slope(Activation a, double z, double out) {
    switch (a) {
        case Activation::rectifier: return z > 0.0 ? 1.0 : 0.0;
        case Activation::identity: return 1.0;
        case Activation::sigmoid: return out * (1.0 - out);
    }
    return 1.0;
}

// out = act(in * W^T + b), keeping pre-activations for backprop.
void dense_forward(const DenseLayer& layer, const Matrix& in, Matrix& pre, Matrix& out) {
    const std::size_t n = in.rows, din = layer.spec.input_width, dout = layer.spec.output_width;
    pre = Matrix(n, dout);
    out = Matrix(n, dout);
    for (std::size_t r = 0; r < n; ++r) {
        const double* x = in.data.data() + r * din;
        for (std::size_t o = 0; o < dout; ++o) {
            const double* w = layer.weights.data() + o * din;
            double z = layer.bias[o];
            for (std::size_t i = 0; i < din; ++i) z += w[i] * x[i];
            pre(r, o) = z;
            out(r, o) = activate(layer.spec.activation, z);
        }
    }
}

struct Trace {
    std::vector<Matrix> pre;   // per trunk layer
    std::vector<Matrix> post;  // post[0] is the input; post[l + 1] is layer l's output
    std::vector<Matrix> head_pre;
    std::vector<Matrix> head_out;
};

void check_input(const MlpModel& model, const Matrix& features) {
    const std::size_t want = model.trunk.empty() ? model.heads.front().layer.spec.input_width
                                                 : model.trunk.front().spec.input_width;
    if (features.cols != want)
        fail(ErrorCode::schema, "batch has " + std::to_string(features.cols) +
                                    " feature columns but the trunk expects " + std::to_string(want));
    if (!model.feature_order.empty() && model.feature_order.size() != features.cols)
        fail(ErrorCode::schema, "batch has " + std::to_string(features.cols) + " columns but the model's "
                                    "feature order lists " + std::to_string(model.feature_order.size()));
}

Trace run(const MlpModel& model, const Matrix& features) {
    check_input(model, features);
    Trace t;
    t.post.push_back(features);
    for (const auto& layer : model.trunk) {
        Matrix pre, out;
        dense_forward(layer, t.post.back(), pre, out);
        t.pre.push_back(std::move(pre));
        t.post.push_back(std::move(out));
    }
    for (const auto& head : model.heads) {
        Matrix pre, out;
        dense_forward(head.layer, t.post.back(), pre, out);
        t.head_pre.push_back(std::move(pre));
        t.head_out.push_back(std::move(out));
    }
    return t;
}

void check_targets(const MlpModel& model, const Matrix& features, const Targets& targets) {
    for (const auto& [name, values] : targets) {
        if (!model.has_head(name)) fail(ErrorCode::invalid_argument, "no head for target '" + name + "'");
        if (values.size() != features.rows)
            fail(ErrorCode::invalid_argument, "target '" + name + "' has " + std::to_string(values.size()) +
                                                  " values for " + std::to_string(features.rows) + " rows");
        const bool binary = model.head(name).task.kind == TaskKind::binary;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double y = values[i];
            const bool ok = binary ? (y == 0.0 || y == 1.0) : (y >= 0.0 && y <= 1.0);
            if (!ok)
                fail(ErrorCode::range, "target '" + name + "' row " + std::to_string(i + 1) + " value " +
                                           format_number(y) + (binary ? " is not 0 or 1" : " is outside [0, 1]"));
        }
    }
}

// Per-head loss and its derivative with respect to the head pre-activation.
double head_loss(const Head& head, const Matrix& pre, const Matrix& out, const std::vector<double>& y,
                 std::vector<double>* dz) {
    const std::size_t n = y.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    if (dz) dz->assign(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        if (head.task.kind == TaskKind::binary) {
            const double p = out(r, 0);
            const double pc = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
            total -= y[r] * std::log(pc) + (1.0 - y[r]) * std::log(1.0 - pc);
            // The clamp is flat outside the band.
            if (dz && p >= kProbabilityClamp && p <= 1.0 - kProbabilityClamp) (*dz)[r] = (p - y[r]) * inv_n;
        } else {
            const double e = pre(r, 0) - y[r];
            total += e * e;
            if (dz) (*dz)[r] = 2.0 * e * inv_n;
        }
    }
    return total * inv_n;
}

void validate_layer(const LayerSpec& s, const std::string& where) {
    if (s.input_width < 1 || s.output_width < 1)
        fail(ErrorCode::invalid_argument, where + " has a zero width");
}

DenseLayer make_layer(const LayerSpec& spec, Rng& rng) {
    DenseLayer layer;
    layer.spec = spec;
    const double fan_in = static_cast<double>(spec.input_width);
    const double fan_out = static_cast<double>(spec.output_width);
    const double limit = spec.activation == Activation::rectifier ? std::sqrt(6.0 / fan_in)
                                                                  : std::sqrt(6.0 / (fan_in + fan_out));
    layer.weights.resize(spec.input_width * spec.output_width);
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    layer.bias.assign(spec.output_width, 0.0);
    return layer;
}

}  // namespace

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::rectifier: return "rectifier";
        case Activation::identity: return "identity";
        case Activation::sigmoid: return "sigmoid";
    }
    return "identity";
}

Activation parse_activation(std::string_view text) {
    if (text == "rectifier" || text == "relu") return Activation::rectifier;
    if (text == "identity") return Activation::identity;
    if (text == "sigmoid") return Activation::sigmoid;
    fail(ErrorCode::invalid_argument, "unknown activation '" + std::string(text) + "'");
}

const Head& MlpModel::head(std::string_view task) const {
    for (const auto& h : heads)
        if (h.task.outcome_name == task) return h;
    fail(ErrorCode::invalid_argument, "model has no head for task '" + std::string(task) + "'");
}

bool MlpModel::has_head(std::string_view task) const {
    return std::any_of(heads.begin(), heads.end(), [&](const Head& h) { return h.task.outcome_name == task; });
}

MlpModel init(std::vector<std::string> feature_order, const std::vector<LayerSpec>& trunk,
              const std::vector<HeadSpec>& heads, std::uint64_t seed) {
    if (heads.empty()) fail(ErrorCode::invalid_argument, "model needs at least one head");
    for (std::size_t l = 0; l < trunk.size(); ++l) {
        validate_layer(trunk[l], "trunk layer " + std::to_string(l));
        if (l > 0 && trunk[l].input_width != trunk[l - 1].output_width)
            fail(ErrorCode::invalid_argument, "trunk layer " + std::to_string(l) + " expects width " +
                                                  std::to_string(trunk[l].input_width) + " but layer " +
                                                  std::to_string(l - 1) + " produces " +
                                                  std::to_string(trunk[l - 1].output_width));
    }
    const std::size_t head_input = trunk.empty() ? 0 : trunk.back().output_width;
    for (const auto& h : heads) {
        validate_layer(h.layer, "head '" + h.task.outcome_name + "'");
        if (!trunk.empty() && h.layer.input_width != head_input)
            fail(ErrorCode::invalid_argument, "head '" + h.task.outcome_name + "' expects width " +
                                                  std::to_string(h.layer.input_width) + " but the trunk produces " +
                                                  std::to_string(head_input));
        if (trunk.empty() && h.layer.input_width != heads.front().layer.input_width)
            fail(ErrorCode::invalid_argument, "heads disagree on input width");
        if (h.layer.output_width != 1)
            fail(ErrorCode::invalid_argument, "head '" + h.task.outcome_name + "' must have output width 1");
        const Activation want = h.task.kind == TaskKind::binary ? Activation::sigmoid : Activation::identity;
        if (h.layer.activation != want)
            fail(ErrorCode::invalid_argument, "head '" + h.task.outcome_name + "' must use " +
                                                  std::string(to_string(want)) + " output");
    }
    for (std::size_t i = 0; i < heads.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (heads[i].task.outcome_name == heads[j].task.outcome_name)
                fail(ErrorCode::invalid_argument, "duplicate head '" + heads[i].task.outcome_name + "'");

    MlpModel model;
    model.feature_order = std::move(feature_order);
    model.seed = seed;
    Rng rng(seed);
    for (const auto& spec : trunk) model.trunk.push_back(make_layer(spec, rng));
    for (const auto& h : heads) model.heads.push_back({h.task, make_layer(h.layer, rng)});
    return model;
}

MlpModel init_default(std::vector<std::string> feature_order, const std::vector<TaskSpec>& tasks,
                      std::uint64_t seed, const std::vector<std::size_t>& hidden) {
    std::vector<LayerSpec> trunk;
    std::size_t width = feature_order.size();
    for (std::size_t h : hidden) {
        trunk.push_back({width, h, Activation::rectifier});
        width = h;
    }
    std::vector<HeadSpec> heads;
    for (const auto& t : tasks)
        heads.push_back({t, {width, 1, t.kind == TaskKind::binary ? Activation::sigmoid : Activation::identity}});
    return init(std::move(feature_order), trunk, heads, seed);
}

HeadOutputs forward(const MlpModel& model, const Matrix& features) {
    const Trace t = run(model, features);
    HeadOutputs out;
    for (std::size_t h = 0; h < model.heads.size(); ++h) {
        const Matrix& o = t.head_out[h];
        out[model.heads[h].task.outcome_name] = std::vector<double>(o.data.begin(), o.data.end());
    }
    return out;
}

HeadOutputs forward(const MlpModel& model, const SurveyDataset& ds) {
    for (const auto& name : model.feature_order) {
        const FeatureSpec* f = ds.schema().find(name);
        if (!f || f->role == Role::outcome)
            fail(ErrorCode::schema, "dataset '" + ds.label() + "' lacks model feature '" + name + "'");
    }
    return forward(model, ds.feature_matrix(model.feature_order));
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        fail(ErrorCode::invalid_argument, "learning rate must be a finite non-negative number");
    if (batch_size < 1) fail(ErrorCode::invalid_argument, "batch size must be at least 1");
    for (const auto& [name, w] : loss_weights)
        if (!(w >= 0.0) || !std::isfinite(w))
            fail(ErrorCode::invalid_argument, "loss weight for '" + name + "' must be finite and non-negative");
}

double TrainConfig::weight(const std::string& head) const {
    auto it = loss_weights.find(head);
    return it == loss_weights.end() ? 1.0 : it->second;
}

LossBreakdown loss(const MlpModel& model, const Matrix& features, const Targets& targets,
                   const TrainConfig& config) {
    check_targets(model, features, targets);
    const Trace t = run(model, features);
    LossBreakdown out;
    for (std::size_t h = 0; h < model.heads.size(); ++h) {
        const auto& name = model.heads[h].task.outcome_name;
        auto it = targets.find(name);
        if (it == targets.end() || features.rows == 0) continue;
        const double l = head_loss(model.heads[h], t.head_pre[h], t.head_out[h], it->second, nullptr);
        out.per_head[name] = l;
        out.total += config.weight(name) * l;
    }
    return out;
}

Gradients gradients(const MlpModel& model, const Matrix& features, const Targets& targets,
                    const TrainConfig& config) {
    check_targets(model, features, targets);
    const Trace t = run(model, features);
    const std::size_t n = features.rows;
    Gradients g;
    g.trunk.resize(model.trunk.size());
    g.heads.resize(model.heads.size());

    const std::size_t top_width = t.post.back().cols;
    Matrix d_top(n, top_width);  // dLoss / d(trunk output)
    for (std::size_t h = 0; h < model.heads.size(); ++h) {
        const Head& head = model.heads[h];
        const auto& name = head.task.outcome_name;
        std::vector<double> dz(n, 0.0);
        if (auto it = targets.find(name); it != targets.end() && n > 0) {
            const double l = head_loss(head, t.head_pre[h], t.head_out[h], it->second, &dz);
            g.loss.per_head[name] = l;
            const double w = config.weight(name);
            g.loss.total += w * l;
            for (double& d : dz) d *= w;
        }
        const DenseLayer& layer = head.layer;
        if (!layer.frozen) {
            LayerGradient& lg = g.heads[h];
            lg.present = true;
            lg.weights.assign(layer.weights.size(), 0.0);
            lg.bias.assign(1, 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                lg.bias[0] += dz[r];
                for (std::size_t i = 0; i < top_width; ++i) lg.weights[i] += dz[r] * t.post.back()(r, i);
            }
        }
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t i = 0; i < top_width; ++i) d_top(r, i) += dz[r] * layer.weights[i];
    }

    // Backpropagate only as deep as the lowest trainable trunk layer.
    std::size_t lowest = model.trunk.size();
    for (std::size_t l = 0; l < model.trunk.size(); ++l)
        if (!model.trunk[l].frozen) {
            lowest = l;
            break;
        }
    Matrix d_out = std::move(d_top);
    for (std::size_t l = model.trunk.size(); l-- > lowest;) {
        const DenseLayer& layer = model.trunk[l];
        const std::size_t din = layer.spec.input_width, dout = layer.spec.output_width;
        Matrix delta(n, dout);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t o = 0; o < dout; ++o)
                delta(r, o) = d_out(r, o) * activation_slope(layer.spec.activation, t.pre[l](r, o), t.post[l + 1](r, o));
        const Matrix& in = t.post[l];
        if (!layer.frozen) {
            LayerGradient& lg = g.trunk[l];
            lg.present = true;
            lg.weights.assign(layer.weights.size(), 0.0);
            lg.bias.assign(dout, 0.0);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t o = 0; o < dout; ++o) {
                    const double d = delta(r, o);
                    lg.bias[o] += d;
                    double* w = lg.weights.data() + o * din;
                    for (std::size_t i = 0; i < din; ++i) w[i] += d * in(r, i);
                }
        }
        if (l == lowest) break;
        Matrix d_in(n, din);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t o = 0; o < dout; ++o) {
                const double d = delta(r, o);
                const double* w = layer.weights.data() + o * din;
                for (std::size_t i = 0; i < din; ++i) d_in(r, i) += d * w[i];
            }
        d_out = std::move(d_in);
    }
    return g;
}

std::size_t trainable_layer_count(const MlpModel& model) {
    std::size_t count = 0;
    for (const auto& l : model.trunk) count += !l.frozen;
    for (const auto& h : model.heads) count += !h.layer.frozen;
    return count;
}

namespace {

void apply_step(DenseLayer& layer, const LayerGradient& g, double lr) {
    if (!g.present || layer.frozen) return;
    for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] -= lr * g.weights[i];
    for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= lr * g.bias[i];
}

}  // namespace

TrainResult train(MlpModel model, const Matrix& features, const Targets& targets, const TrainConfig& config) {
    config.validate();
    if (trainable_layer_count(model) == 0)
        fail(ErrorCode::no_trainable_parameters, "every layer is frozen; nothing to train");
    check_targets(model, features, targets);
    if (targets.empty()) fail(ErrorCode::invalid_argument, "training needs targets for at least one head");
    const std::size_t n = features.rows;
    if (n == 0) fail(ErrorCode::empty_dataset, "training set is empty");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);
    TrainResult result;
    Matrix batch;
    Targets batch_targets;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t end = std::min(n, start + config.batch_size);
            batch = Matrix(end - start, features.cols);
            for (std::size_t r = start; r < end; ++r)
                std::copy_n(features.data.begin() + static_cast<std::ptrdiff_t>(order[r] * features.cols),
                            features.cols, batch.data.begin() + static_cast<std::ptrdiff_t>((r - start) * features.cols));
            batch_targets.clear();
            for (const auto& [name, values] : targets) {
                auto& v = batch_targets[name];
                v.reserve(end - start);
                for (std::size_t r = start; r < end; ++r) v.push_back(values[order[r]]);
            }
            const Gradients g = gradients(model, batch, batch_targets, config);
            for (std::size_t l = 0; l < model.trunk.size(); ++l) apply_step(model.trunk[l], g.trunk[l], config.learning_rate);
            for (std::size_t h = 0; h < model.heads.size(); ++h)
                apply_step(model.heads[h].layer, g.heads[h], config.learning_rate);
        }
        result.history.push_back({epoch + 1, loss(model, features, targets, config)});
        if (!std::isfinite(result.history.back().loss.total))
            fail(ErrorCode::numeric, "training loss diverged at epoch " + std::to_string(epoch + 1));
    }
    result.model = std::move(model);
    return result;
}

TrainResult train(MlpModel model, const SurveyDataset& ds, const std::vector<TaskSpec>& tasks,
                  const TrainConfig& config) {
    Targets targets;
    for (const auto& task : tasks) {
        if (!model.has_head(task.outcome_name))
            fail(ErrorCode::invalid_argument, "model has no head for task '" + task.outcome_name + "'");
        const FeatureSpec* f = ds.schema().find(task.outcome_name);
        if (!f || f->role != Role::outcome)
            fail(ErrorCode::schema, "dataset '" + ds.label() + "' has no outcome '" + task.outcome_name + "'");
        const auto col = ds.column(task.outcome_name);
        for (std::size_t r = 0; r < col.size(); ++r)
            if (is_missing(col[r]))
                fail(ErrorCode::schema, "outcome '" + task.outcome_name + "' is missing at row " + std::to_string(r + 1));
        targets[task.outcome_name] = std::vector<double>(col.begin(), col.end());
    }
    for (const auto& name : model.feature_order) {
        const FeatureSpec* f = ds.schema().find(name);
        if (!f || f->role == Role::outcome)
            fail(ErrorCode::schema, "dataset '" + ds.label() + "' lacks model feature '" + name + "'");
    }
    return train(std::move(model), ds.feature_matrix(model.feature_order), targets, config);
}

MlpModel set_frozen(MlpModel model, std::string_view selector, bool flag) {
    std::vector<bool*> picked;
    std::size_t start = 0;
    while (start <= selector.size()) {
        std::size_t comma = selector.find(',', start);
        if (comma == std::string_view::npos) comma = selector.size();
        const std::string item = trim(selector.substr(start, comma - start));
        start = comma + 1;
        if (item.empty()) fail(ErrorCode::invalid_argument, "empty layer selector");

        if (item == "*" || item == "all") {
            for (auto& l : model.trunk) picked.push_back(&l.frozen);
            for (auto& h : model.heads) picked.push_back(&h.layer.frozen);
        } else if (item.rfind("trunk:", 0) == 0) {
            const std::string arg = item.substr(6);
            if (arg == "*") {
                for (auto& l : model.trunk) picked.push_back(&l.frozen);
                continue;
            }
            const auto dash = arg.find('-');
            auto parse_index = [&](const std::string& s) {
                auto v = parse_double(s);
                if (!v || *v < 0 || std::floor(*v) != *v)
                    fail(ErrorCode::invalid_argument, "bad trunk index in selector '" + item + "'");
                return static_cast<std::size_t>(*v);
            };
            const std::size_t a = parse_index(dash == std::string::npos ? arg : arg.substr(0, dash));
            const std::size_t b = dash == std::string::npos ? a : parse_index(arg.substr(dash + 1));
            if (a > b || b >= model.trunk.size())
                fail(ErrorCode::invalid_argument, "selector '" + item + "' is outside the trunk (" +
                                                      std::to_string(model.trunk.size()) + " layers)");
            for (std::size_t l = a; l <= b; ++l) picked.push_back(&model.trunk[l].frozen);
        } else if (item.rfind("head:", 0) == 0) {
            const std::string arg = item.substr(5);
            bool any = false;
            for (auto& h : model.heads)
                if (arg == "*" || h.task.outcome_name == arg) {
                    picked.push_back(&h.layer.frozen);
                    any = true;
                }
            if (!any) fail(ErrorCode::invalid_argument, "selector '" + item + "' matches no head");
        } else {
            fail(ErrorCode::invalid_argument, "unrecognized layer selector '" + item + "'");
        }
        if (comma == selector.size()) break;
    }
    for (bool* f : picked) *f = flag;
    return model;
}

// Binary model container: magic, version, payload length, payload, SHA-256(payload).
namespace {

constexpr char kMagic[8] = {'S', 'V', 'T', 'M', 'O', 'D', 'E', 'L'};

class Writer {
public:
    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        auto s = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        auto s = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        auto s = take(n);
        return std::string(s.begin(), s.end());
    }
    std::size_t count(std::size_t element_size) {
        const std::uint32_t n = u32();
        if (element_size && n > remaining() / element_size)
            fail(ErrorCode::integrity, "model file declares more elements than it contains");
        return n;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> take(std::size_t n) {
        if (n > remaining()) fail(ErrorCode::integrity, "model file payload is truncated");
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void write_layer(Writer& w, const DenseLayer& l) {
    w.u32(static_cast<std::uint32_t>(l.spec.input_width));
    w.u32(static_cast<std::uint32_t>(l.spec.output_width));
    w.u8(static_cast<std::uint8_t>(l.spec.activation));
    w.u8(l.frozen ? 1 : 0);
    for (double v : l.weights) w.f64(v);
    for (double v : l.bias) w.f64(v);
}

DenseLayer read_layer(Reader& r) {
    DenseLayer l;
    l.spec.input_width = r.u32();
    l.spec.output_width = r.u32();
    const std::uint8_t act = r.u8();
    if (act > 2) fail(ErrorCode::integrity, "model file has an unknown activation code");
    l.spec.activation = static_cast<Activation>(act);
    l.frozen = r.u8() != 0;
    const std::size_t nw = l.spec.input_width * l.spec.output_width;
    if (nw / std::max<std::size_t>(l.spec.input_width, 1) != l.spec.output_width || nw > r.remaining() / 8)
        fail(ErrorCode::integrity, "model file layer is larger than the payload");
    l.weights.resize(nw);
    for (double& v : l.weights) v = r.f64();
    l.bias.resize(l.spec.output_width);
    for (double& v : l.bias) v = r.f64();
    return l;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const MlpModel& model) {
    Writer p;
    p.u64(model.seed);
    p.u32(static_cast<std::uint32_t>(model.feature_order.size()));
    for (const auto& f : model.feature_order) p.str(f);
    p.u32(static_cast<std::uint32_t>(model.trunk.size()));
    for (const auto& l : model.trunk) write_layer(p, l);
    p.u32(static_cast<std::uint32_t>(model.heads.size()));
    for (const auto& h : model.heads) {
        p.str(h.task.outcome_name);
        p.u8(h.task.kind == TaskKind::binary ? 0 : 1);
        write_layer(p, h.layer);
    }
    p.u32(static_cast<std::uint32_t>(model.provenance.size()));
    for (const auto& [k, v] : model.provenance) {
        p.str(k);
        p.str(v);
    }

    Writer out;
    out.bytes.insert(out.bytes.end(), std::begin(kMagic), std::end(kMagic));
    out.u32(kModelFormatVersion);
    out.u64(p.bytes.size());
    out.bytes.insert(out.bytes.end(), p.bytes.begin(), p.bytes.end());
    const auto digest = sha256(p.bytes);
    out.bytes.insert(out.bytes.end(), digest.begin(), digest.end());
    return out.bytes;
}

MlpModel deserialize_model(std::span<const std::uint8_t> bytes) {
    constexpr std::size_t header = sizeof(kMagic) + 4 + 8;
    if (bytes.size() < header + 32) fail(ErrorCode::integrity, "model file is truncated");
    if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
        fail(ErrorCode::integrity, "not a model file (bad magic)");
    Reader head(bytes.subspan(sizeof(kMagic)));
    const std::uint32_t version = head.u32();
    if (version != kModelFormatVersion)
        fail(ErrorCode::unsupported_version, "unsupported model format version " + std::to_string(version) +
                                                 " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
    const std::uint64_t length = head.u64();
    if (length != bytes.size() - header - 32)
        fail(ErrorCode::integrity, "model file length does not match its header (truncated or padded)");
    const auto payload = bytes.subspan(header, static_cast<std::size_t>(length));
    const auto digest = sha256(payload);
    if (!std::equal(digest.begin(), digest.end(), bytes.begin() + static_cast<std::ptrdiff_t>(header + length)))
        fail(ErrorCode::integrity, "model file checksum mismatch");

    Reader r(payload);
    MlpModel m;
    m.seed = r.u64();
    for (std::size_t i = 0, n = r.count(4); i < n; ++i) m.feature_order.push_back(r.str());
    for (std::size_t i = 0, n = r.count(10); i < n; ++i) m.trunk.push_back(read_layer(r));
    for (std::size_t i = 0, n = r.count(15); i < n; ++i) {
        Head h;
        h.task.outcome_name = r.str();
        h.task.kind = r.u8() == 0 ? TaskKind::binary : TaskKind::continuous_unit;
        h.layer = read_layer(r);
        m.heads.push_back(std::move(h));
    }
    for (std::size_t i = 0, n = r.count(8); i < n; ++i) {
        std::string k = r.str();
        m.provenance[k] = r.str();
    }
    if (r.remaining() != 0) fail(ErrorCode::integrity, "model file has trailing payload bytes");
    return m;
}

void save_model(const MlpModel& model, const std::string& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write model file '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::io, "write failed for '" + path + "'");
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open model file '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

std::string model_hash(const MlpModel& model) { return sha256_hex(serialize_model(model)); }

}  // namespace svt
