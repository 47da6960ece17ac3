#include "bohp/fd_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace bohp {

namespace {

double step_loss_value(LossKind loss, const Vector& y, const EpisodeStep& step) {
    switch (loss) {
        case LossKind::L1: return loss_l1(y, step.target).loss;
        case LossKind::Mse: return loss_mse(y, step.target).loss;
        case LossKind::CrossEntropy: return loss_cross_entropy(y, step.target_class.value()).loss;
    }
    throw UsageError("bad loss kind");
}

// Output of layer `layer` at every step.
std::vector<Vector> simulate_layer(Network net, const EpisodeScript& script, std::size_t layer) {
    reset_traces(net.trace);
    std::vector<Vector> out;
    out.reserve(script.steps.size());
    for (const auto& step : script.steps) out.push_back(network_forward(net, step.input).at(layer).y);
    return out;
}

// Independent re-simulation in extended precision. The finite-difference
// quotient divides a loss difference by 2*eps, so double rounding in the
// loss (~1e-16 * L) would swamp gradients near 1e-8.
using Ext = long double;

struct ExtLayer {
    LayerKind kind;
    std::size_t n_in;
    std::size_t n_out;
    std::vector<Ext> w, alpha, b;
};

std::vector<ExtLayer> widen(const std::vector<LayerParams>& layers) {
    std::vector<ExtLayer> out;
    for (const auto& l : layers) {
        ExtLayer e{l.kind, l.n_in(), l.n_out(), {}, {}, {}};
        e.w.assign(l.w.data().begin(), l.w.data().end());
        e.alpha.assign(l.alpha.data().begin(), l.alpha.data().end());
        e.b.assign(l.b.begin(), l.b.end());
        out.push_back(std::move(e));
    }
    return out;
}

Ext& ext_ref(std::vector<ExtLayer>& layers, const ParamId& id) {
    auto& l = layers.at(id.layer);
    switch (id.kind) {
        case ParamKind::W: return l.w.at(id.row * l.n_in + id.col);
        case ParamKind::Alpha: return l.alpha.at(id.row * l.n_in + id.col);
        case ParamKind::B: return l.b.at(id.row);
    }
    throw UsageError("bad parameter kind");
}

// One plastic-layer timestep: response from the current trace, then the
// trace update.
std::vector<Ext> ext_plastic_step(const ExtLayer& p, std::vector<Ext>& hebb, Ext gamma,
                                  const std::vector<Ext>& x) {
    std::vector<Ext> y(p.n_out);
    for (std::size_t j = 0; j < p.n_out; ++j) {
        Ext acc = p.b[j];
        for (std::size_t k = 0; k < p.n_in; ++k)
            acc += (p.w[j * p.n_in + k] + p.alpha[j * p.n_in + k] * hebb[j * p.n_in + k]) * x[k];
        y[j] = std::tanh(acc);
    }
    for (std::size_t j = 0; j < p.n_out; ++j)
        for (std::size_t k = 0; k < p.n_in; ++k)
            hebb[j * p.n_in + k] = (1.0L - gamma) * hebb[j * p.n_in + k] + gamma * x[k] * y[j];
    return y;
}

std::vector<std::vector<Ext>> ext_plastic_outputs(const std::vector<ExtLayer>& layers, Ext gamma,
                                                  const EpisodeScript& script) {
    const auto& p = layers.front();
    std::vector<Ext> hebb(p.n_out * p.n_in, 0.0L);
    std::vector<std::vector<Ext>> out;
    for (const auto& step : script.steps)
        out.push_back(ext_plastic_step(p, hebb, gamma, {step.input.begin(), step.input.end()}));
    return out;
}

Ext ext_episode_loss(const std::vector<ExtLayer>& layers, Ext gamma, const EpisodeScript& script) {
    const auto& p = layers.front();
    std::vector<Ext> hebb(p.n_out * p.n_in, 0.0L);
    Ext total = 0.0L;
    for (const auto& step : script.steps) {
        std::vector<Ext> y = ext_plastic_step(p, hebb, gamma, {step.input.begin(), step.input.end()});

        for (std::size_t li = 1; li < layers.size(); ++li) {
            const auto& l = layers[li];
            std::vector<Ext> z(l.n_out);
            for (std::size_t m = 0; m < l.n_out; ++m) {
                Ext acc = l.b[m];
                for (std::size_t k = 0; k < l.n_in; ++k) acc += l.w[m * l.n_in + k] * y[k];
                z[m] = acc;
            }
            if (l.kind == LayerKind::FixedSoftmax) {
                const Ext top = *std::max_element(z.begin(), z.end());
                Ext sum = 0.0L;
                for (auto& v : z) sum += (v = std::exp(v - top));
                for (auto& v : z) v /= sum;
            } else {
                for (auto& v : z) v = std::tanh(v);
            }
            y = std::move(z);
        }

        if (!step.loss_active) continue;
        switch (script.loss) {
            case LossKind::L1:
                for (std::size_t i = 0; i < y.size(); ++i) total += std::fabs(y[i] - step.target.at(i));
                break;
            case LossKind::Mse:
                for (std::size_t i = 0; i < y.size(); ++i) {
                    const Ext d = y[i] - step.target.at(i);
                    total += d * d / static_cast<Ext>(y.size());
                }
                break;
            case LossKind::CrossEntropy:
                total -= std::log(std::max(y.at(step.target_class.value()), static_cast<Ext>(kProbabilityFloor)));
                break;
        }
    }
    return total;
}

}  // namespace

void FdConfig::validate() const {
    require(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be positive");
    require(tolerance > 0.0 && std::isfinite(tolerance), "tolerance must be positive");
}

double central_difference(const std::function<double(double)>& f, double x, double epsilon) {
    return (f(x + epsilon) - f(x - epsilon)) / (2.0 * epsilon);
}

double simulate_episode_loss(Network net, const EpisodeScript& script) {
    reset_traces(net.trace);
    double total = 0.0;
    for (const auto& step : script.steps) {
        auto acts = network_forward(net, step.input);
        if (step.loss_active) total += step_loss_value(script.loss, acts.back().y, step);
    }
    if (!std::isfinite(total)) throw OracleError("episode loss is not finite");
    return total;
}

std::vector<Vector> simulate_episode_outputs(Network net, const EpisodeScript& script) {
    const std::size_t top = net.layers.size() - 1;
    return simulate_layer(std::move(net), script, top);
}

double fd_episode_gradient(const Network& net, const EpisodeScript& script, const ParamId& id,
                           const FdConfig& cfg) {
    cfg.validate();
    std::vector<ExtLayer> probe = widen(net.layers);
    const Ext origin = ext_ref(probe, id);
    const Ext eps = cfg.epsilon;
    const Ext gamma = net.trace.gamma;
    ext_ref(probe, id) = origin + eps;
    const Ext up = ext_episode_loss(probe, gamma, script);
    ext_ref(probe, id) = origin - eps;
    const Ext down = ext_episode_loss(probe, gamma, script);
    const double g = static_cast<double>((up - down) / (2.0L * eps));
    if (!std::isfinite(g)) throw OracleError("finite-difference gradient is not finite for " + id.to_string());
    return g;
}

EpisodeGradient fd_full_gradient(const Network& net, const EpisodeScript& script, const FdConfig& cfg) {
    EpisodeGradient g = EpisodeGradient::zeros_like(net.layers);
    for (const auto& id : enumerate_params(net.layers))
        param_ref(g.layers, id) = fd_episode_gradient(net, script, id, cfg);
    return g;
}

std::vector<Matrix> fd_plastic_output_sensitivities(const Network& net, const EpisodeScript& script,
                                                    const FdConfig& cfg) {
    cfg.validate();
    const auto& p = net.plastic();
    const std::size_t n_out = p.n_out();
    const std::size_t n_in = p.n_in();
    const std::size_t block = n_out * n_in;
    const std::size_t n_params = 2 * block + n_out;

    std::vector<Matrix> sens(script.steps.size(), Matrix(n_out, n_params));
    std::vector<ExtLayer> probe = widen(net.layers);
    const Ext eps = cfg.epsilon;
    const Ext gamma = net.trace.gamma;
    for (std::size_t theta = 0; theta < n_params; ++theta) {
        ParamId id;
        if (theta < block) id = {0, ParamKind::W, theta / n_in, theta % n_in};
        else if (theta < 2 * block) id = {0, ParamKind::Alpha, (theta - block) / n_in, (theta - block) % n_in};
        else id = {0, ParamKind::B, theta - 2 * block, 0};

        const Ext origin = ext_ref(probe, id);
        ext_ref(probe, id) = origin + eps;
        const auto up = ext_plastic_outputs(probe, gamma, script);
        ext_ref(probe, id) = origin - eps;
        const auto down = ext_plastic_outputs(probe, gamma, script);
        ext_ref(probe, id) = origin;
        for (std::size_t t = 0; t < script.steps.size(); ++t)
            for (std::size_t j = 0; j < n_out; ++j)
                sens[t](j, theta) = static_cast<double>((up[t][j] - down[t][j]) / (2.0L * eps));
    }
    return sens;
}

double relative_error(double analytical, double fd) {
    const double denom = std::max({std::abs(analytical), std::abs(fd), 1e-8});
    return std::abs(analytical - fd) / denom;
}

std::vector<ParamId> GradcheckReport::failures() const {
    std::vector<ParamId> ids;
    for (const auto& e : entries)
        if (!e.pass) ids.push_back(e.id);
    return ids;
}

void GradcheckReport::merge(const GradcheckReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    max_rel_error = 0.0;
    double sum = 0.0;
    pass = true;
    for (const auto& e : entries) {
        max_rel_error = std::max(max_rel_error, e.rel_error);
        sum += e.rel_error;
        pass = pass && e.pass;
    }
    mean_rel_error = entries.empty() ? 0.0 : sum / static_cast<double>(entries.size());
}

nlohmann::json GradcheckReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries) {
        rows.push_back({{"param", e.id.to_string()},
                        {"analytical", e.analytical},
                        {"finite_difference", e.finite_difference},
                        {"relative_error", e.rel_error}});
    }
    nlohmann::json failed = nlohmann::json::array();
    for (const auto& id : failures()) failed.push_back(id.to_string());
    return {{"entries", std::move(rows)},
            {"summary",
             {{"count", entries.size()},
              {"max_relative_error", max_rel_error},
              {"mean_relative_error", mean_rel_error},
              {"pass", pass},
              {"failures", std::move(failed)}}}};
}

GradcheckReport compare_gradients(const EpisodeGradient& analytical, const EpisodeGradient& fd,
                                  const FdConfig& cfg) {
    cfg.validate();
    const auto ids = enumerate_params(analytical.layers);
    require(ids == enumerate_params(fd.layers), "compare_gradients: parameter layouts differ");
    GradcheckReport report;
    for (const auto& id : ids) {
        GradientComparison c;
        c.id = id;
        c.analytical = analytical.at(id);
        c.finite_difference = fd.at(id);
        c.rel_error = relative_error(c.analytical, c.finite_difference);
        c.pass = c.rel_error <= cfg.tolerance;
        report.entries.push_back(c);
    }
    report.merge({});
    return report;
}

}  // namespace bohp
