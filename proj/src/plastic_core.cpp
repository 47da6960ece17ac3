#include "bohp/plastic_core.hpp"

#include <algorithm>
#include <cmath>

namespace bohp {

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

// y_raw = w x + b
Vector affine(const LayerParams& p, std::span<const double> x) {
    Vector out(p.n_out());
    for (std::size_t j = 0; j < p.n_out(); ++j) {
        double acc = 0.0;
        auto wj = p.w.row(j);
        for (std::size_t k = 0; k < x.size(); ++k) acc += wj[k] * x[k];
        out[j] = acc + p.b[j];
    }
    return out;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::PlasticTanh: return "plastic-tanh";
        case LayerKind::FixedTanh: return "fixed-tanh";
        case LayerKind::FixedSoftmax: return "fixed-softmax";
    }
    return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
    if (name == "plastic-tanh") return LayerKind::PlasticTanh;
    if (name == "fixed-tanh") return LayerKind::FixedTanh;
    if (name == "fixed-softmax") return LayerKind::FixedSoftmax;
    throw UsageError("unknown layer kind '" + std::string(name) + "'");
}

LayerParams LayerParams::zeros(LayerKind kind, std::size_t n_in, std::size_t n_out) {
    LayerParams p;
    p.kind = kind;
    p.w = Matrix(n_out, n_in);
    if (kind == LayerKind::PlasticTanh) p.alpha = Matrix(n_out, n_in);
    p.b = Vector(n_out, 0.0);
    return p;
}

void LayerParams::validate() const {
    require(w.rows() > 0 && w.cols() > 0, "layer weight matrix is empty");
    require(b.size() == w.rows(), "bias length does not match layer output count");
    if (plastic()) {
        require(alpha.same_shape(w), "alpha shape does not match w shape");
    } else {
        require(alpha.empty(), "fixed layer carries plasticity coefficients");
    }
    require(all_finite(w.data()) && all_finite(alpha.data()) && all_finite(b),
            "layer parameters contain non-finite values");
}

HebbianState::HebbianState(std::size_t n_out, std::size_t n_in, double g)
    : hebb(n_out, n_in), gamma(g) {
    require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
}

void NetworkSpec::validate() const {
    require(!layers.empty(), "network has no layers");
    require(layers.front().kind == LayerKind::PlasticTanh,
            "the first layer must be plastic-tanh");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        require(l.n_in > 0 && l.n_out > 0, "layer sizes must be positive");
        if (i > 0) {
            require(l.kind != LayerKind::PlasticTanh,
                    "only the first layer may be plastic");
            require(l.n_in == layers[i - 1].n_out, "layer sizes do not chain");
        }
    }
}

Network Network::zeros(const NetworkSpec& spec, double gamma) {
    spec.validate();
    Network net;
    for (const auto& d : spec.layers) net.layers.push_back(LayerParams::zeros(d.kind, d.n_in, d.n_out));
    net.trace = HebbianState(spec.layers.front().n_out, spec.layers.front().n_in, gamma);
    return net;
}

Network Network::random(const NetworkSpec& spec, double gamma, double scale, std::mt19937_64& rng) {
    Network net = zeros(spec, gamma);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (auto& l : net.layers) {
        for (auto& v : l.w.data()) v = dist(rng);
        for (auto& v : l.alpha.data()) v = dist(rng);
        for (auto& v : l.b) v = dist(rng);
    }
    return net;
}

NetworkSpec Network::spec() const {
    NetworkSpec s;
    for (const auto& l : layers) s.layers.push_back({l.kind, l.n_in(), l.n_out()});
    return s;
}

void Network::validate() const {
    require(!layers.empty(), "network has no layers");
    for (const auto& l : layers) l.validate();
    spec().validate();
    require(trace.hebb.rows() == plastic().n_out() && trace.hebb.cols() == plastic().n_in(),
            "trace shape does not match the plastic layer");
    require(trace.gamma > 0.0 && trace.gamma <= 1.0, "gamma must lie in (0, 1]");
}

void reset_traces(HebbianState& state) { state.hebb.fill(0.0); }

void hebb_update(HebbianState& state, std::span<const double> x, std::span<const double> y) {
    require(x.size() == state.hebb.cols() && y.size() == state.hebb.rows(),
            "hebb_update: x/y lengths do not match the trace shape");
    const double keep = 1.0 - state.gamma;
    for (std::size_t j = 0; j < y.size(); ++j) {
        auto hj = state.hebb.row(j);
        for (std::size_t k = 0; k < x.size(); ++k) hj[k] = keep * hj[k] + state.gamma * x[k] * y[j];
    }
}

LayerActivation plastic_forward(const LayerParams& params, const HebbianState& state,
                                std::span<const double> x) {
    require(params.plastic(), "plastic_forward called on a fixed layer");
    require(x.size() == params.n_in(), "plastic_forward: input length mismatch");
    require(state.hebb.same_shape(params.w), "plastic_forward: trace shape mismatch");

    LayerActivation act;
    act.x.assign(x.begin(), x.end());
    act.y_raw.resize(params.n_out());
    act.y.resize(params.n_out());
    for (std::size_t j = 0; j < params.n_out(); ++j) {
        auto wj = params.w.row(j);
        auto aj = params.alpha.row(j);
        auto hj = state.hebb.row(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) acc += wj[k] * x[k] + aj[k] * hj[k] * x[k];
        act.y_raw[j] = acc + params.b[j];
        act.y[j] = std::tanh(act.y_raw[j]);
    }
    return act;
}

Vector softmax(std::span<const double> z) {
    Vector out(z.size());
    if (z.empty()) return out;
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - m);
        total += out[i];
    }
    for (auto& v : out) v /= total;
    return out;
}

LayerActivation fixed_forward(const LayerParams& params, std::span<const double> x) {
    require(!params.plastic(), "fixed_forward called on a plastic layer");
    require(x.size() == params.n_in(), "fixed_forward: input length mismatch");
    require(params.b.size() == params.n_out(), "fixed_forward: bias length mismatch");

    LayerActivation act;
    act.x.assign(x.begin(), x.end());
    act.y_raw = affine(params, x);
    if (params.kind == LayerKind::FixedSoftmax) {
        act.y = softmax(act.y_raw);
    } else {
        act.y.resize(act.y_raw.size());
        std::transform(act.y_raw.begin(), act.y_raw.end(), act.y.begin(),
                       [](double v) { return std::tanh(v); });
    }
    return act;
}

std::vector<LayerActivation> network_forward(Network& net, std::span<const double> x) {
    require(!net.layers.empty() && net.layers.front().plastic(),
            "network_forward: first layer must be plastic");
    std::vector<LayerActivation> acts;
    acts.reserve(net.layers.size());
    acts.push_back(plastic_forward(net.plastic(), net.trace, x));
    hebb_update(net.trace, acts.back().x, acts.back().y);
    for (std::size_t i = 1; i < net.layers.size(); ++i) {
        require(!net.layers[i].plastic(), "network_forward: only the first layer may be plastic");
        acts.push_back(fixed_forward(net.layers[i], acts.back().y));
    }
    return acts;
}

}  // namespace bohp
