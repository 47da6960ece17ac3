#include "bohp/grad_engine.hpp"

#include <cmath>
#include <sstream>

namespace bohp {

std::string ParamId::to_string() const {
    std::ostringstream os;
    os << "L" << layer << '.';
    switch (kind) {
        case ParamKind::W: os << "w[" << row << "][" << col << ']'; break;
        case ParamKind::Alpha: os << "alpha[" << row << "][" << col << ']'; break;
        case ParamKind::B: os << "b[" << row << ']'; break;
    }
    return os.str();
}

std::vector<ParamId> enumerate_params(const std::vector<LayerParams>& layers) {
    std::vector<ParamId> ids;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const auto& l = layers[li];
        for (std::size_t j = 0; j < l.w.rows(); ++j)
            for (std::size_t k = 0; k < l.w.cols(); ++k) ids.push_back({li, ParamKind::W, j, k});
        for (std::size_t j = 0; j < l.alpha.rows(); ++j)
            for (std::size_t k = 0; k < l.alpha.cols(); ++k) ids.push_back({li, ParamKind::Alpha, j, k});
        for (std::size_t j = 0; j < l.b.size(); ++j) ids.push_back({li, ParamKind::B, j, 0});
    }
    return ids;
}

double& param_ref(std::vector<LayerParams>& layers, const ParamId& id) {
    require(id.layer < layers.size(), "parameter id names a missing layer");
    auto& l = layers[id.layer];
    switch (id.kind) {
        case ParamKind::W:
            require(id.row < l.w.rows() && id.col < l.w.cols(), "parameter id out of range");
            return l.w(id.row, id.col);
        case ParamKind::Alpha:
            require(id.row < l.alpha.rows() && id.col < l.alpha.cols(), "parameter id out of range");
            return l.alpha(id.row, id.col);
        case ParamKind::B:
            require(id.row < l.b.size(), "parameter id out of range");
            return l.b[id.row];
    }
    throw UsageError("bad parameter kind");
}

double param_value(const std::vector<LayerParams>& layers, const ParamId& id) {
    return param_ref(const_cast<std::vector<LayerParams>&>(layers), id);
}

EpisodeGradient EpisodeGradient::zeros_like(const std::vector<LayerParams>& params) {
    EpisodeGradient g;
    for (const auto& l : params) g.layers.push_back(LayerParams::zeros(l.kind, l.n_in(), l.n_out()));
    return g;
}

bool EpisodeGradient::finite() const {
    for (const auto& l : layers) {
        for (double v : l.w.data()) if (!std::isfinite(v)) return false;
        for (double v : l.alpha.data()) if (!std::isfinite(v)) return false;
        for (double v : l.b) if (!std::isfinite(v)) return false;
    }
    return true;
}

GradientAccumulator::GradientAccumulator(std::size_t n_out, std::size_t n_in)
    : n_out_(n_out),
      n_in_(n_in),
      n_params_(2 * n_out * n_in + n_out),
      dhebb_(n_out * n_in * n_params_, 0.0),
      dy_(n_out, n_params_) {}

std::size_t GradientAccumulator::index_of(ParamKind kind, std::size_t j, std::size_t k) const {
    switch (kind) {
        case ParamKind::W: return j * n_in_ + k;
        case ParamKind::Alpha: return n_out_ * n_in_ + j * n_in_ + k;
        case ParamKind::B: return 2 * n_out_ * n_in_ + j;
    }
    return 0;
}

ParamId GradientAccumulator::param_at(std::size_t theta) const {
    const std::size_t block = n_out_ * n_in_;
    if (theta < block) return {0, ParamKind::W, theta / n_in_, theta % n_in_};
    if (theta < 2 * block) return {0, ParamKind::Alpha, (theta - block) / n_in_, (theta - block) % n_in_};
    return {0, ParamKind::B, theta - 2 * block, 0};
}

void GradientAccumulator::reset() {
    std::fill(dhebb_.begin(), dhebb_.end(), 0.0);
    dy_.fill(0.0);
}

void plastic_grad_step(const LayerParams& params, const HebbianState& pre_state,
                       GradientAccumulator& acc, std::span<const double> x,
                       std::span<const double> y, GradientFault fault) {
    const std::size_t n_in = params.n_in();
    const std::size_t n_out = params.n_out();
    require(params.plastic(), "plastic_grad_step needs a plastic layer");
    require(acc.n_in() == n_in && acc.n_out() == n_out, "accumulator shape mismatch");
    require(x.size() == n_in && y.size() == n_out, "plastic_grad_step: x/y length mismatch");
    require(pre_state.hebb.same_shape(params.w), "plastic_grad_step: trace shape mismatch");

    const double gamma = pre_state.gamma;
    Matrix& dy = acc.dy();
    dy.fill(0.0);

    // A cell's traces only depend on that cell's own parameters, so only the
    // diagonal block (cell j, parameters of cell j) is ever nonzero.
    std::vector<std::size_t> own(2 * n_in + 1);
    for (std::size_t j = 0; j < n_out; ++j) {
        for (std::size_t k = 0; k < n_in; ++k) {
            own[k] = acc.index_of(ParamKind::W, j, k);
            own[n_in + k] = acc.index_of(ParamKind::Alpha, j, k);
        }
        own[2 * n_in] = acc.index_of(ParamKind::B, j);

        const double gain = 1.0 - y[j] * y[j];
        for (std::size_t p = 0; p < own.size(); ++p) {
            const std::size_t theta = own[p];
            const bool is_bias = p == 2 * n_in;
            const std::size_t k = is_bias ? 0 : p % n_in;

            // Influence of theta on earlier outputs, carried through every trace of cell j.
            double through_traces = 0.0;
            if (fault == GradientFault::DropCrossInputCoupling && !is_bias) {
                through_traces = params.alpha(j, k) * x[k] * acc.dhebb(j, k, theta);
            } else {
                for (std::size_t l = 0; l < n_in; ++l)
                    through_traces += params.alpha(j, l) * x[l] * acc.dhebb(j, l, theta);
            }

            double direct;
            if (is_bias) direct = 1.0;
            else if (p < n_in) direct = x[k];
            else direct = x[k] * pre_state.hebb(j, k);

            dy(j, theta) = gain * (direct + through_traces);
        }

        // hebb'[j][l] = (1 - gamma) hebb[j][l] + gamma x_l y_j, differentiated.
        for (std::size_t l = 0; l < n_in; ++l) {
            for (std::size_t theta : own) {
                double& d = acc.dhebb(j, l, theta);
                d = (1.0 - gamma) * d + gamma * x[l] * dy(j, theta);
            }
        }
    }

    if (fault == GradientFault::NegateAlpha) {
        for (std::size_t j = 0; j < n_out; ++j)
            for (std::size_t k = 0; k < n_in; ++k) {
                double& d = dy(j, acc.index_of(ParamKind::Alpha, j, k));
                d = -d;
            }
    }
}

UpperGradient upper_backprop(const std::vector<LayerParams>& layers,
                             std::span<const LayerActivation> acts,
                             std::span<const double> top_grad, GradSite site) {
    require(!layers.empty() && acts.size() == layers.size(),
            "upper_backprop: one activation per layer required");
    require(top_grad.size() == layers.back().n_out(), "upper_backprop: top gradient length mismatch");

    UpperGradient out;
    out.layers = EpisodeGradient::zeros_like(layers).layers;

    if (layers.size() == 1) {
        require(site == GradSite::Output,
                "upper_backprop: a lone plastic layer takes gradients w.r.t. its output");
        out.dloss_dhidden.assign(top_grad.begin(), top_grad.end());
        return out;
    }

    Vector g(top_grad.begin(), top_grad.end());
    for (std::size_t i = layers.size() - 1; i >= 1; --i) {
        const auto& l = layers[i];
        const auto& a = acts[i];
        Vector dz(l.n_out());
        if (i == layers.size() - 1 && site == GradSite::PreActivation) {
            dz = g;
        } else if (l.kind == LayerKind::FixedSoftmax) {
            double dot = 0.0;
            for (std::size_t m = 0; m < dz.size(); ++m) dot += g[m] * a.y[m];
            for (std::size_t m = 0; m < dz.size(); ++m) dz[m] = a.y[m] * (g[m] - dot);
        } else {
            for (std::size_t m = 0; m < dz.size(); ++m) dz[m] = g[m] * (1.0 - a.y[m] * a.y[m]);
        }

        auto& gl = out.layers[i];
        Vector below(l.n_in(), 0.0);
        for (std::size_t m = 0; m < l.n_out(); ++m) {
            gl.b[m] += dz[m];
            for (std::size_t k = 0; k < l.n_in(); ++k) {
                gl.w(m, k) += dz[m] * a.x[k];
                below[k] += l.w(m, k) * dz[m];
            }
        }
        g = std::move(below);
    }
    out.dloss_dhidden = std::move(g);
    return out;
}

EpisodeGradient accumulate_episode_gradient(const std::vector<LayerParams>& shape,
                                            std::span<const StepGradient> steps,
                                            const std::vector<bool>& mask) {
    require(steps.size() == mask.size(), "accumulate_episode_gradient: series length mismatch");
    require(!shape.empty() && shape.front().plastic(),
            "accumulate_episode_gradient: first layer must be plastic");
    EpisodeGradient grad = EpisodeGradient::zeros_like(shape);
    const auto& plastic = shape.front();
    const std::size_t n_in = plastic.n_in();
    const std::size_t n_out = plastic.n_out();
    const std::size_t block = n_out * n_in;
    auto& g0 = grad.layers.front();

    for (std::size_t t = 0; t < steps.size(); ++t) {
        if (!mask[t]) continue;
        const auto& s = steps[t];
        require(s.dloss_dhidden.size() == n_out, "accumulate_episode_gradient: hidden gradient length");
        require(s.dhidden_dtheta.rows() == n_out && s.dhidden_dtheta.cols() == 2 * block + n_out,
                "accumulate_episode_gradient: sensitivity shape");
        for (std::size_t j = 0; j < n_out; ++j) {
            const double gj = s.dloss_dhidden[j];
            if (gj == 0.0) continue;
            auto row = s.dhidden_dtheta.row(j);
            for (std::size_t i = 0; i < block; ++i) {
                g0.w.data()[i] += gj * row[i];
                g0.alpha.data()[i] += gj * row[block + i];
            }
            for (std::size_t m = 0; m < n_out; ++m) g0.b[m] += gj * row[2 * block + m];
        }
        if (s.upper.empty()) continue;
        require(s.upper.size() == shape.size(), "accumulate_episode_gradient: upper layer count");
        for (std::size_t li = 1; li < shape.size(); ++li) {
            auto& dst = grad.layers[li];
            const auto& src = s.upper[li];
            require(src.w.same_shape(dst.w) && src.b.size() == dst.b.size(),
                    "accumulate_episode_gradient: upper gradient shape");
            for (std::size_t i = 0; i < dst.w.size(); ++i) dst.w.data()[i] += src.w.data()[i];
            for (std::size_t i = 0; i < dst.b.size(); ++i) dst.b[i] += src.b[i];
        }
    }
    return grad;
}

}  // namespace bohp
