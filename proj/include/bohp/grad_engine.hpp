#pragma once

#include <span>
#include <string>
#include <vector>

#include "bohp/linalg.hpp"
#include "bohp/plastic_core.hpp"

namespace bohp {

enum class ParamKind { W, Alpha, B };

/// Names one trainable scalar: layer index, tensor, cell (row) and input
/// (column; unused for biases).
struct ParamId {
    std::size_t layer = 0;
    ParamKind kind = ParamKind::W;
    std::size_t row = 0;
    std::size_t col = 0;

    std::string to_string() const;
    friend bool operator==(const ParamId&, const ParamId&) = default;
};

/// Every trainable scalar of the network, layer by layer, in W, alpha, b order.
std::vector<ParamId> enumerate_params(const std::vector<LayerParams>& layers);
double& param_ref(std::vector<LayerParams>& layers, const ParamId& id);
double param_value(const std::vector<LayerParams>& layers, const ParamId& id);

/// d(Loss_episode)/d(theta) for every parameter, laid out like the network.
struct EpisodeGradient {
    std::vector<LayerParams> layers;

    static EpisodeGradient zeros_like(const std::vector<LayerParams>& params);
    double at(const ParamId& id) const { return param_value(layers, id); }
    bool finite() const;
};

/// Forward-mode sensitivities of the plastic layer.
///
/// Plastic-layer parameters are flattened as [W (row-major) | alpha
/// (row-major) | b]. `dhebb` holds d(hebb[j][l])/d(theta) for every trace and
/// every parameter, indexed (j, l, theta); `dy` holds dy_j/d(theta) for the
/// most recent timestep.
class GradientAccumulator {
public:
    GradientAccumulator() = default;
    GradientAccumulator(std::size_t n_out, std::size_t n_in);

    std::size_t n_out() const { return n_out_; }
    std::size_t n_in() const { return n_in_; }
    std::size_t n_params() const { return n_params_; }

    std::size_t index_of(ParamKind kind, std::size_t j, std::size_t k = 0) const;
    ParamId param_at(std::size_t theta) const;

    double& dhebb(std::size_t j, std::size_t l, std::size_t theta) {
        return dhebb_[(j * n_in_ + l) * n_params_ + theta];
    }
    double dhebb(std::size_t j, std::size_t l, std::size_t theta) const {
        return dhebb_[(j * n_in_ + l) * n_params_ + theta];
    }
    Matrix& dy() { return dy_; }
    const Matrix& dy() const { return dy_; }

    void reset();

private:
    std::size_t n_out_ = 0;
    std::size_t n_in_ = 0;
    std::size_t n_params_ = 0;
    std::vector<double> dhebb_;
    Matrix dy_;
};

inline void grad_reset(GradientAccumulator& acc) { acc.reset(); }

/// Deliberate defects for exercising the gradient checker. Never set outside
/// tests and the gradcheck command.
enum class GradientFault {
    None,
    DropCrossInputCoupling,  // keep only the l == k term of the trace sum
    NegateAlpha,             // report -dy/d(alpha)
};

/// Advances the accumulator by one timestep.
///
/// Must be called with the trace as it was when `y` was computed (before
/// hebb_update for this step). Fills acc.dy() with dy_j(t)/d(theta) and then
/// moves dhebb forward to the post-update trace.
void plastic_grad_step(const LayerParams& params, const HebbianState& pre_state,
                       GradientAccumulator& acc, std::span<const double> x,
                       std::span<const double> y, GradientFault fault = GradientFault::None);

/// Where a top-level loss gradient was taken: w.r.t. the top layer's output, or
/// directly w.r.t. its pre-activation (the fused softmax/cross-entropy case).
enum class GradSite { Output, PreActivation };

struct UpperGradient {
    Vector dloss_dhidden;             // w.r.t. the plastic layer's output
    std::vector<LayerParams> layers;  // contributions for layers 1..; layer 0 stays zero
};

/// Single-timestep reverse pass through the fixed layers above the plastic one.
UpperGradient upper_backprop(const std::vector<LayerParams>& layers,
                             std::span<const LayerActivation> acts,
                             std::span<const double> top_grad, GradSite site);

/// What one timestep contributes to the episode gradient.
struct StepGradient {
    Vector dloss_dhidden;            // [n_hidden]
    Matrix dhidden_dtheta;           // [n_hidden x n_plastic_params]
    std::vector<LayerParams> upper;  // may be empty when there are no upper layers
};

/// Sums masked-in timesteps: plastic part via the chain through dy/d(theta),
/// upper part by adding the per-step contributions.
EpisodeGradient accumulate_episode_gradient(const std::vector<LayerParams>& shape,
                                            std::span<const StepGradient> steps,
                                            const std::vector<bool>& mask);

}  // namespace bohp
