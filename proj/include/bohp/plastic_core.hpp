#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bohp/linalg.hpp"

namespace bohp {

enum class LayerKind { PlasticTanh, FixedTanh, FixedSoftmax };

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

/// Trainable tensors of one layer. `alpha` has the shape of `w` for plastic
/// layers and is empty for fixed ones. The same type carries gradients.
struct LayerParams {
    LayerKind kind = LayerKind::PlasticTanh;
    Matrix w;      // [n_out x n_in] baseline weights
    Matrix alpha;  // [n_out x n_in] plasticity coefficients (plastic only)
    Vector b;      // [n_out]

    static LayerParams zeros(LayerKind kind, std::size_t n_in, std::size_t n_out);

    std::size_t n_in() const { return w.cols(); }
    std::size_t n_out() const { return w.rows(); }
    bool plastic() const { return kind == LayerKind::PlasticTanh; }

    /// Shapes consistent and all entries finite; throws UsageError otherwise.
    void validate() const;

    friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Per-connection Hebbian traces of the plastic layer plus their time constant.
struct HebbianState {
    Matrix hebb;  // [n_out x n_in]
    double gamma = 0.5;

    HebbianState() = default;
    HebbianState(std::size_t n_out, std::size_t n_in, double gamma);

    friend bool operator==(const HebbianState&, const HebbianState&) = default;
};

struct LayerActivation {
    Vector x;
    Vector y_raw;
    Vector y;
};

struct LayerDesc {
    LayerKind kind;
    std::size_t n_in;
    std::size_t n_out;

    friend bool operator==(const LayerDesc&, const LayerDesc&) = default;
};

/// Ordered layer list. The first layer is the (single) plastic-tanh layer and
/// every later layer is fixed; sizes must chain.
struct NetworkSpec {
    std::vector<LayerDesc> layers;

    void validate() const;
    std::size_t n_in() const { return layers.front().n_in; }
    std::size_t n_out() const { return layers.back().n_out; }

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Parameters plus the plastic layer's running traces.
struct Network {
    std::vector<LayerParams> layers;
    HebbianState trace;

    static Network zeros(const NetworkSpec& spec, double gamma);
    /// Every w, alpha and b entry drawn from U(-scale, scale).
    static Network random(const NetworkSpec& spec, double gamma, double scale, std::mt19937_64& rng);

    NetworkSpec spec() const;
    const LayerParams& plastic() const { return layers.front(); }
    LayerParams& plastic() { return layers.front(); }

    /// Checks the layer list against NetworkSpec rules, parameter finiteness
    /// and the trace shape.
    void validate() const;
};

void reset_traces(HebbianState& state);

/// hebb[j][k] <- (1 - gamma) * hebb[j][k] + gamma * x[k] * y[j]
void hebb_update(HebbianState& state, std::span<const double> x, std::span<const double> y);

/// Response of a plastic-tanh layer using the trace as it stands (the trace
/// from the previous timestep). Does not touch the trace.
LayerActivation plastic_forward(const LayerParams& params, const HebbianState& state,
                                std::span<const double> x);

/// Response of a fixed layer; the nonlinearity comes from params.kind.
LayerActivation fixed_forward(const LayerParams& params, std::span<const double> x);

/// Runs every layer in order and advances the plastic layer's trace with the
/// plastic layer's output. Returns one activation per layer.
std::vector<LayerActivation> network_forward(Network& net, std::span<const double> x);

Vector softmax(std::span<const double> z);

}  // namespace bohp
