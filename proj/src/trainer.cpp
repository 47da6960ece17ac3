#include "bohp/trainer.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

namespace bohp {

namespace {

bool finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

template <typename F>
void for_each_param(std::vector<LayerParams>& params, const EpisodeGradient& grad, F&& f) {
    std::size_t flat = 0;
    for (std::size_t li = 0; li < params.size(); ++li) {
        auto& p = params[li];
        const auto& g = grad.layers[li];
        for (std::size_t i = 0; i < p.w.size(); ++i) f(flat++, p.w.data()[i], g.w.data()[i]);
        for (std::size_t i = 0; i < p.alpha.size(); ++i) f(flat++, p.alpha.data()[i], g.alpha.data()[i]);
        for (std::size_t i = 0; i < p.b.size(); ++i) f(flat++, p.b[i], g.b[i]);
    }
}

std::size_t param_count(const std::vector<LayerParams>& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += p.w.size() + p.alpha.size() + p.b.size();
    return n;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kEpisodeStream = 2;

}  // namespace

std::string_view to_string(OptimizerKind kind) {
    return kind == OptimizerKind::Sgd ? "sgd" : "adam";
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "adam") return OptimizerKind::Adam;
    throw UsageError("unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
    require(episodes_total > 0, "episodes_total must be positive");
    require(freeze_last < episodes_total, "freeze_last must be smaller than episodes_total");
    require(std::isfinite(learning_rate) && learning_rate >= 0.0, "learning rate must be >= 0");
    require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
    require(std::isfinite(init_scale) && init_scale >= 0.0, "init_scale must be >= 0");
    require(completion_loss != LossKind::CrossEntropy, "completion needs an l1 or mse loss");
    task.validate();
}

NetworkSpec network_spec_for(const TaskConfig& task) {
    task.validate();
    NetworkSpec spec;
    if (task.kind == TaskKind::Completion) {
        spec.layers.push_back({LayerKind::PlasticTanh, task.n, task.n});
    } else {
        spec.layers.push_back({LayerKind::PlasticTanh, task.n + 2, 2});
        spec.layers.push_back({LayerKind::FixedSoftmax, 2, 2});
    }
    return spec;
}

StepLoss step_loss(LossKind loss, std::span<const double> top_output, const EpisodeStep& step) {
    switch (loss) {
        case LossKind::L1:
            require(!step.target.empty(), "l1 loss needs a vector target");
            return {loss_l1(top_output, step.target), GradSite::Output};
        case LossKind::Mse:
            require(!step.target.empty(), "mse loss needs a vector target");
            return {loss_mse(top_output, step.target), GradSite::Output};
        case LossKind::CrossEntropy:
            require(step.target_class.has_value(), "cross-entropy loss needs a target class");
            return {loss_cross_entropy(top_output, *step.target_class), GradSite::PreActivation};
    }
    throw UsageError("bad loss kind");
}

EpisodeResult run_episode(Network& net, const EpisodeScript& script, const EpisodeOptions& opts) {
    require(!net.layers.empty() && net.plastic().plastic(), "run_episode: first layer must be plastic");
    if (script.loss == LossKind::CrossEntropy)
        require(net.layers.back().kind == LayerKind::FixedSoftmax,
                "cross-entropy loss needs a softmax top layer");
    else
        require(net.layers.back().kind != LayerKind::FixedSoftmax,
                "l1/mse losses need a tanh top layer");

    reset_traces(net.trace);
    const auto& plastic = net.plastic();
    GradientAccumulator acc;
    std::vector<StepGradient> step_grads;
    if (opts.collect_grads) {
        acc = GradientAccumulator(plastic.n_out(), plastic.n_in());
        step_grads.reserve(script.steps.size());
    }

    EpisodeResult result;
    result.outputs.reserve(script.steps.size());
    for (std::size_t t = 0; t < script.steps.size(); ++t) {
        const auto& step = script.steps[t];
        std::vector<LayerActivation> acts;
        acts.reserve(net.layers.size());
        acts.push_back(plastic_forward(plastic, net.trace, step.input));
        if (!finite(acts.front().y)) throw DivergedError("non-finite plastic-layer activation");
        if (opts.collect_grads)
            plastic_grad_step(plastic, net.trace, acc, acts.front().x, acts.front().y, opts.fault);
        hebb_update(net.trace, acts.front().x, acts.front().y);
        for (std::size_t i = 1; i < net.layers.size(); ++i)
            acts.push_back(fixed_forward(net.layers[i], acts.back().y));
        if (!finite(acts.back().y)) throw DivergedError("non-finite network output");

        if (step.loss_active) {
            StepLoss sl = step_loss(script.loss, acts.back().y, step);
            if (!std::isfinite(sl.value.loss)) throw DivergedError("non-finite loss");
            result.loss += sl.value.loss;
            result.probability_clamped |= sl.value.clamped;
            if (opts.collect_grads) {
                UpperGradient up = upper_backprop(net.layers, acts, sl.value.grad, sl.site);
                StepGradient sg;
                sg.dloss_dhidden = std::move(up.dloss_dhidden);
                sg.dhidden_dtheta = acc.dy();
                if (net.layers.size() > 1) sg.upper = std::move(up.layers);
                step_grads.push_back(std::move(sg));
            }
        } else if (opts.collect_grads) {
            // Placeholder keeps the series aligned with the mask.
            step_grads.emplace_back();
        }
        result.outputs.push_back(acts.back().y);
        if (opts.on_step) opts.on_step(t, net);
    }

    result.mae = metric_mean_abs_error(result.outputs, script);
    if (script.loss == LossKind::CrossEntropy) {
        result.accuracy = metric_accuracy(result.outputs, script);
        if (script.kind == TaskKind::Reversal)
            result.post_reversal_accuracy = metric_accuracy(result.outputs, script, StepFilter::AfterReversal);
    }
    if (opts.collect_grads) {
        result.gradient = accumulate_episode_gradient(net.layers, step_grads, script.loss_mask());
        if (!result.gradient->finite()) throw DivergedError("non-finite gradient");
    }
    return result;
}

void apply_update(std::vector<LayerParams>& params, const EpisodeGradient& grad,
                  const TrainConfig& cfg, OptimizerState& state) {
    require(grad.layers.size() == params.size(), "apply_update: layer count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i)
        require(grad.layers[i].w.same_shape(params[i].w) && grad.layers[i].alpha.same_shape(params[i].alpha) &&
                    grad.layers[i].b.size() == params[i].b.size(),
                "apply_update: gradient shape mismatch");

    const double lr = cfg.learning_rate;
    if (cfg.optimizer == OptimizerKind::Sgd) {
        for_each_param(params, grad, [&](std::size_t, double& p, double g) { p -= lr * g; });
    } else {
        const std::size_t n = param_count(params);
        if (state.m.size() != n) {
            state.m.assign(n, 0.0);
            state.v.assign(n, 0.0);
            state.steps = 0;
        }
        ++state.steps;
        const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.steps));
        const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.steps));
        for_each_param(params, grad, [&](std::size_t i, double& p, double g) {
            state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * g;
            state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * g * g;
            const double m_hat = state.m[i] / c1;
            const double v_hat = state.v[i] / c2;
            p -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
        });
    }

    if (cfg.clip_alpha_nonnegative)
        for (auto& layer : params)
            for (auto& a : layer.alpha.data()) a = std::max(a, 0.0);
}

std::uint64_t episode_seed(std::uint64_t run_seed, std::size_t episode) {
    return derive_seed(run_seed, kEpisodeStream, episode);
}

RunRecord train_run(const TrainConfig& cfg, const TrainHooks& hooks) {
    cfg.validate();
    const NetworkSpec spec = network_spec_for(cfg.task);
    std::mt19937_64 init_rng(derive_seed(cfg.seed, kInitStream, 0));

    RunRecord rec;
    rec.seed = cfg.seed;
    rec.initial = Network::random(spec, cfg.gamma, cfg.init_scale, init_rng);
    Network net = rec.initial;
    OptimizerState opt;
    rec.series.reserve(cfg.episodes_total);

    TaskConfig task = cfg.task;
    for (std::size_t e = 0; e < cfg.episodes_total; ++e) {
        task.seed = episode_seed(cfg.seed, e);
        EpisodeScript script = generate_episode(task);
        if (script.kind == TaskKind::Completion) script.loss = cfg.completion_loss;

        const bool training = e < cfg.training_episodes();
        EpisodeOptions opts;
        opts.collect_grads = training;
        EpisodeResult r;
        try {
            r = run_episode(net, script, opts);
            if (training) {
                apply_update(net.layers, *r.gradient, cfg, opt);
                if (!EpisodeGradient{net.layers}.finite()) throw DivergedError("non-finite parameters");
            }
        } catch (const DivergedError& err) {
            throw DivergedError(std::string(err.what()) + " at episode " + std::to_string(e + 1), e);
        }
        rec.series.push_back({r.loss, r.mae, r.accuracy, r.post_reversal_accuracy});
        if (hooks.on_episode_end) hooks.on_episode_end(e, net);
    }
    reset_traces(net.trace);
    rec.final_model = std::move(net);
    return rec;
}

double percentile(std::vector<double> values, double q) {
    require(!values.empty(), "percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<std::uint64_t> run_seeds(std::uint64_t base_seed, std::size_t n_runs) {
    std::vector<std::uint64_t> seeds(n_runs);
    for (std::size_t i = 0; i < n_runs; ++i) seeds[i] = base_seed + i;
    return seeds;
}

RunStats multi_run(const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds, unsigned threads) {
    require(!seeds.empty(), "multi_run needs at least one run");
    cfg.validate();

    std::vector<std::optional<RunRecord>> records(seeds.size());
    std::vector<std::optional<DivergedRun>> failures(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            TrainConfig c = cfg;
            c.seed = seeds[i];
            try {
                records[i] = train_run(c);
            } catch (const DivergedError& err) {
                failures[i] = DivergedRun{i, seeds[i], err.episode(), err.what()};
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    RunStats stats;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (records[i]) stats.runs.push_back(std::move(*records[i]));
        if (failures[i]) stats.diverged.push_back(*failures[i]);
    }
    if (stats.runs.empty()) return stats;

    const std::size_t n_ep = cfg.episodes_total;
    stats.median.resize(n_ep);
    stats.q25.resize(n_ep);
    stats.q75.resize(n_ep);
    std::vector<double> column(stats.runs.size());
    for (std::size_t e = 0; e < n_ep; ++e) {
        for (std::size_t r = 0; r < stats.runs.size(); ++r) column[r] = stats.runs[r].series[e].error;
        stats.median[e] = percentile(column, 0.5);
        stats.q25[e] = percentile(column, 0.25);
        stats.q75[e] = percentile(column, 0.75);
    }
    return stats;
}

RunStats multi_run(const TrainConfig& cfg, std::size_t n_runs, unsigned threads) {
    require(n_runs >= 1, "multi_run needs at least one run");
    return multi_run(cfg, run_seeds(cfg.seed, n_runs), threads);
}

double frozen_mean(const RunRecord& run, const TrainConfig& cfg, Metric metric) {
    require(run.series.size() == cfg.episodes_total, "run series does not match the config");
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t e = cfg.training_episodes(); e < run.series.size(); ++e) {
        const auto& m = run.series[e];
        std::optional<double> v;
        switch (metric) {
            case Metric::Loss: v = m.loss; break;
            case Metric::Error: v = m.error; break;
            case Metric::Accuracy: v = m.accuracy; break;
            case Metric::PostReversalAccuracy: v = m.post_reversal_accuracy; break;
        }
        require(v.has_value(), "metric not recorded for this task");
        total += *v;
        ++count;
    }
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

void write_curve_csv(const RunStats& stats, std::ostream& os) {
    os << "episode,median,q25,q75\n";
    os << std::setprecision(17);
    for (std::size_t e = 0; e < stats.median.size(); ++e)
        os << (e + 1) << ',' << stats.median[e] << ',' << stats.q25[e] << ',' << stats.q75[e] << '\n';
}

}  // namespace bohp
