#include "leo_madrl/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace leo {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'D', 'R', 'L', 'N', 'E', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

// Scratch buffers for one forward pass.
struct Activations {
    std::vector<std::vector<double>> pre;   // per layer, before activation
    std::vector<std::vector<double>> post;  // post[0] is the input
};

void forward_into(const MlpParams& p, std::span<const double> input, Activations& act) {
    const int layers = p.num_layers();
    act.pre.resize(layers);
    act.post.resize(layers + 1);
    act.post[0].assign(input.begin(), input.end());
    for (int l = 0; l < layers; ++l) {
        const int in = p.layer_dims[l], out = p.layer_dims[l + 1];
        const auto& w = p.weights[l];
        const auto& x = act.post[l];
        auto& z = act.pre[l];
        z.assign(p.biases[l].begin(), p.biases[l].end());
        for (int o = 0; o < out; ++o) {
            const double* row = w.data() + static_cast<std::size_t>(o) * in;
            double s = 0.0;
            for (int i = 0; i < in; ++i) s += row[i] * x[i];
            z[o] += s;
        }
        auto& a = act.post[l + 1];
        a = z;
        if (l + 1 < layers)
            for (double& v : a) v = std::max(0.0, v);
    }
}

void check_input(const MlpParams& p, std::span<const double> input) {
    if (static_cast<int>(input.size()) != p.input_dim())
        throw ShapeError("network expects " + std::to_string(p.input_dim()) + " inputs, got " +
                         std::to_string(input.size()));
}

MlpGradients zero_like(const MlpParams& p) {
    MlpGradients g;
    for (int l = 0; l < p.num_layers(); ++l) {
        g.weights.emplace_back(p.weights[l].size(), 0.0);
        g.biases.emplace_back(p.biases[l].size(), 0.0);
    }
    return g;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw std::runtime_error("weight file truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return std::bit_cast<double>(v);
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (int l = 0; l < num_layers(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

void MlpParams::validate() const {
    if (layer_dims.size() < 2) throw ShapeError("network needs at least an input and an output layer");
    if (layer_dims.back() != kNumActions) throw ShapeError("output layer must have 4 units");
    for (int d : layer_dims)
        if (d <= 0) throw ShapeError("layer widths must be positive");
    const std::size_t layers = layer_dims.size() - 1;
    if (weights.size() != layers || biases.size() != layers) throw ShapeError("layer count mismatch");
    for (std::size_t l = 0; l < layers; ++l) {
        if (weights[l].size() != static_cast<std::size_t>(layer_dims[l]) * layer_dims[l + 1])
            throw ShapeError("weight matrix " + std::to_string(l) + " has the wrong size");
        if (biases[l].size() != static_cast<std::size_t>(layer_dims[l + 1]))
            throw ShapeError("bias vector " + std::to_string(l) + " has the wrong size");
        auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(weights[l].begin(), weights[l].end(), finite) ||
            !std::all_of(biases[l].begin(), biases[l].end(), finite))
            throw ShapeError("non-finite parameter in layer " + std::to_string(l));
    }
}

MlpParams zero_mlp(std::vector<int> layer_dims) {
    MlpParams p;
    p.layer_dims = std::move(layer_dims);
    for (std::size_t l = 0; l + 1 < p.layer_dims.size(); ++l) {
        p.weights.emplace_back(static_cast<std::size_t>(p.layer_dims[l]) * p.layer_dims[l + 1], 0.0);
        p.biases.emplace_back(p.layer_dims[l + 1], 0.0);
    }
    p.validate();
    return p;
}

MlpParams init_mlp(std::vector<int> layer_dims, std::mt19937_64& rng) {
    MlpParams p = zero_mlp(std::move(layer_dims));
    for (int l = 0; l < p.num_layers(); ++l) {
        const double limit = std::sqrt(6.0 / (p.layer_dims[l] + p.layer_dims[l + 1]));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& w : p.weights[l]) w = dist(rng);
    }
    return p;
}

std::array<double, kNumActions> forward(const MlpParams& params, std::span<const double> input) {
    check_input(params, input);
    Activations act;
    forward_into(params, input, act);
    std::array<double, kNumActions> out{};
    std::copy_n(act.post.back().begin(), kNumActions, out.begin());
    return out;
}

std::vector<double> td_targets(std::span<const Transition> batch, const MlpParams& target, double gamma) {
    std::vector<double> y;
    y.reserve(batch.size());
    for (const auto& t : batch) {
        double bootstrap = 0.0;
        if (!t.terminal && gamma != 0.0) {
            const auto q = forward(target, t.next_state);
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < kNumActions; ++a)
                if (t.next_mask[a]) best = std::max(best, q[a]);
            if (best != -std::numeric_limits<double>::infinity()) bootstrap = gamma * best;
        }
        y.push_back(t.reward + bootstrap);
    }
    return y;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (batch_size <= 0) throw std::invalid_argument("batch_size must be > 0");
    if (!(discount > 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must be in (0, 1]");
    if (target_sync_every <= 0) throw std::invalid_argument("target_sync_every must be > 0");
    for (int h : hidden_layers)
        if (h <= 0) throw std::invalid_argument("hidden layer widths must be > 0");
}

double loss_and_gradients(const MlpParams& params, std::span<const Transition> batch, std::span<const double> targets,
                          MlpGradients& grads) {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    if (targets.size() != batch.size()) throw ShapeError("one target per transition required");
    grads = zero_like(params);
    const int layers = params.num_layers();
    const double scale = 1.0 / static_cast<double>(batch.size());
    Activations act;
    std::vector<double> delta, prev_delta;
    double loss = 0.0;

    for (std::size_t n = 0; n < batch.size(); ++n) {
        const Transition& t = batch[n];
        check_input(params, t.state);
        if (t.action < 0 || t.action >= kNumActions) throw ShapeError("action index out of range");
        forward_into(params, t.state, act);
        const double err = act.post.back()[t.action] - targets[n];
        loss += err * err;

        delta.assign(kNumActions, 0.0);
        delta[t.action] = 2.0 * err * scale;
        for (int l = layers - 1; l >= 0; --l) {
            const int in = params.layer_dims[l], out = params.layer_dims[l + 1];
            const auto& x = act.post[l];
            auto& gw = grads.weights[l];
            auto& gb = grads.biases[l];
            for (int o = 0; o < out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                gb[o] += d;
                double* row = gw.data() + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) row[i] += d * x[i];
            }
            if (l == 0) break;
            prev_delta.assign(in, 0.0);
            const auto& w = params.weights[l];
            for (int o = 0; o < out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                const double* row = w.data() + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) prev_delta[i] += row[i] * d;
            }
            const auto& z = act.pre[l - 1];
            for (int i = 0; i < in; ++i)
                if (z[i] <= 0.0) prev_delta[i] = 0.0;
            std::swap(delta, prev_delta);
        }
    }
    return loss * scale;
}

AdamState AdamState::for_params(const MlpParams& params) {
    AdamState s;
    s.m = zero_like(params);
    s.v = zero_like(params);
    return s;
}

double train_step(MlpParams& params, AdamState& opt, const MlpParams& target, std::span<const Transition> batch,
                  const TrainConfig& cfg) {
    const auto y = td_targets(batch, target, cfg.discount);
    MlpGradients g;
    const double loss = loss_and_gradients(params, batch, y, g);
    if (!std::isfinite(loss))
        throw TrainingDivergedError("non-finite loss at optimizer step " + std::to_string(opt.step + 1) +
                                    " (batch of " + std::to_string(batch.size()) + ")");

    if (opt.m.weights.empty()) opt = AdamState::for_params(params);
    ++opt.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.step));
    auto update = [&](std::vector<double>& p, const std::vector<double>& grad, std::vector<double>& m,
                      std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            p[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam_epsilon);
        }
    };
    for (int l = 0; l < params.num_layers(); ++l) {
        update(params.weights[l], g.weights[l], opt.m.weights[l], opt.v.weights[l]);
        update(params.biases[l], g.biases[l], opt.m.biases[l], opt.v.biases[l]);
    }
    return loss;
}

std::vector<std::uint8_t> serialize_weights(const MlpParams& params) {
    params.validate();
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(params.layer_dims.size()));
    for (int d : params.layer_dims) put_u32(out, static_cast<std::uint32_t>(d));
    for (int l = 0; l < params.num_layers(); ++l) {
        for (double w : params.weights[l]) put_f64(out, w);
        for (double b : params.biases[l]) put_f64(out, b);
    }
    return out;
}

MlpParams deserialize_weights(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.take(sizeof kMagic);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) throw std::runtime_error("not a MADRLNET file");
    if (const auto version = r.u32(); version != kFormatVersion)
        throw std::runtime_error("unsupported weight file version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    if (count < 2 || count > 64) throw std::runtime_error("implausible layer count in weight file");
    std::vector<int> dims;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t d = r.u32();
        if (d == 0 || d > (1u << 20)) throw std::runtime_error("implausible layer width in weight file");
        dims.push_back(static_cast<int>(d));
    }
    MlpParams p = zero_mlp(std::move(dims));
    for (int l = 0; l < p.num_layers(); ++l) {
        for (double& w : p.weights[l]) w = r.f64();
        for (double& b : p.biases[l]) b = r.f64();
    }
    if (!r.done()) throw std::runtime_error("trailing bytes in weight file");
    p.validate();
    return p;
}

void save_weights(const MlpParams& params, const std::filesystem::path& path) {
    const auto bytes = serialize_weights(params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

MlpParams load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open weight file " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_weights(bytes);
}

}  // namespace leo
