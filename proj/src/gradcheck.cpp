#include "bohp/gradcheck.hpp"

#include <cmath>

#include "bohp/trainer.hpp"

namespace bohp {

namespace {

bool near_kink(const GradcheckInstance& inst, double margin) {
    if (inst.script.loss != LossKind::L1) return false;
    const auto outputs = simulate_episode_outputs(inst.net, inst.script);
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        const auto& step = inst.script.steps[t];
        if (!step.loss_active) continue;
        for (std::size_t i = 0; i < outputs[t].size(); ++i)
            if (std::abs(outputs[t][i] - step.target[i]) < margin) return true;
    }
    return false;
}

}  // namespace

void GradcheckSuiteConfig::validate() const {
    require(instances > 0, "empty suite");
    require(max_n_in >= 1 && max_n_out >= 1 && max_steps >= 1, "instance size bounds must be positive");
    require(kink_margin >= 0.0, "kink margin must be non-negative");
    fd.validate();
}

GradcheckInstance random_gradcheck_instance(std::mt19937_64& rng, const GradcheckSuiteConfig& cfg) {
    std::uniform_int_distribution<std::size_t> n_in_d(1, cfg.max_n_in);
    std::uniform_int_distribution<std::size_t> n_out_d(1, cfg.max_n_out);
    std::uniform_int_distribution<std::size_t> steps_d(1, cfg.max_steps);
    std::uniform_int_distribution<int> topology_d(0, 3);
    std::uniform_int_distribution<int> input_d(-1, 1);
    std::uniform_real_distribution<double> gamma_d(0.1, 1.0);
    std::uniform_real_distribution<double> target_d(-1.0, 1.0);
    std::bernoulli_distribution active_d(0.7);

    const std::size_t n_in = n_in_d(rng);
    const std::size_t n_hidden = n_out_d(rng);
    const int topology = topology_d(rng);

    NetworkSpec spec;
    spec.layers.push_back({LayerKind::PlasticTanh, n_in, n_hidden});
    LossKind loss = LossKind::L1;
    std::size_t n_classes = 0;
    switch (topology) {
        case 0: loss = LossKind::L1; break;
        case 1: loss = LossKind::Mse; break;
        case 2:
            n_classes = std::max<std::size_t>(2, n_out_d(rng));
            spec.layers.push_back({LayerKind::FixedSoftmax, n_hidden, n_classes});
            loss = LossKind::CrossEntropy;
            break;
        default: {
            const std::size_t mid = n_out_d(rng);
            n_classes = std::max<std::size_t>(2, n_out_d(rng));
            spec.layers.push_back({LayerKind::FixedTanh, n_hidden, mid});
            spec.layers.push_back({LayerKind::FixedSoftmax, mid, n_classes});
            loss = LossKind::CrossEntropy;
            break;
        }
    }

    GradcheckInstance inst;
    inst.net = Network::random(spec, gamma_d(rng), 1.0, rng);
    inst.script.kind = TaskKind::Custom;
    inst.script.loss = loss;
    const std::size_t n_steps = steps_d(rng);
    std::uniform_int_distribution<std::size_t> class_d(0, n_classes == 0 ? 0 : n_classes - 1);
    bool any_active = false;
    for (std::size_t t = 0; t < n_steps; ++t) {
        EpisodeStep s;
        s.input.resize(n_in);
        for (auto& v : s.input) v = static_cast<double>(input_d(rng));
        s.loss_active = active_d(rng);
        if (loss == LossKind::CrossEntropy) {
            s.target_class = class_d(rng);
        } else {
            s.target.resize(n_hidden);
            for (auto& v : s.target) v = target_d(rng);
        }
        any_active |= s.loss_active;
        inst.script.steps.push_back(std::move(s));
    }
    if (!any_active) inst.script.steps.back().loss_active = true;
    return inst;
}

GradcheckSuiteResult run_gradcheck_suite(const GradcheckSuiteConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    GradcheckSuiteResult result;
    EpisodeOptions opts;
    opts.collect_grads = true;
    opts.fault = cfg.fault;

    while (result.instances < cfg.instances) {
        GradcheckInstance inst = random_gradcheck_instance(rng, cfg);
        if (near_kink(inst, cfg.kink_margin)) {
            ++result.rejected;
            continue;
        }
        Network net = inst.net;
        const EpisodeGradient analytical = *run_episode(net, inst.script, opts).gradient;
        const EpisodeGradient fd = fd_full_gradient(inst.net, inst.script, cfg.fd);
        GradcheckReport r = compare_gradients(analytical, fd, cfg.fd);
        if (!r.pass) result.failed_instances.push_back(result.instances);
        result.report.merge(r);
        ++result.instances;
    }
    return result;
}

}  // namespace bohp
