#include "bohp/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace bohp {

namespace {

Vector suffixed(const Vector& pattern, double first, double second) {
    Vector v = pattern;
    v.push_back(first);
    v.push_back(second);
    return v;
}

Vector label_suffix_input(const Vector& pattern, std::size_t label_class) {
    return label_class == kLabel01 ? suffixed(pattern, 0.0, 1.0) : suffixed(pattern, 1.0, 0.0);
}

Vector random_sign_pattern(std::size_t n, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(0.5);
    Vector p(n);
    for (auto& v : p) v = coin(rng) ? 1.0 : -1.0;
    return p;
}

std::pair<Vector, Vector> distinct_pair(std::size_t n, std::mt19937_64& rng) {
    Vector a = random_sign_pattern(n, rng);
    Vector b;
    do {
        b = random_sign_pattern(n, rng);
    } while (a == b);
    return {std::move(a), std::move(b)};
}

EpisodeStep query(const Vector& pattern, std::size_t cls, bool after_reversal) {
    EpisodeStep s;
    s.input = suffixed(pattern, 0.0, 0.0);
    s.target_class = cls;
    s.loss_active = true;
    s.after_reversal = after_reversal;
    return s;
}

EpisodeStep instruction(const Vector& pattern, std::size_t cls, bool after_reversal) {
    EpisodeStep s;
    s.input = label_suffix_input(pattern, cls);
    s.loss_active = false;
    s.after_reversal = after_reversal;
    return s;
}

}  // namespace

std::string_view to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Completion: return "completion";
        case TaskKind::OneShot: return "oneshot";
        case TaskKind::Reversal: return "reversal";
        case TaskKind::Custom: return "custom";
    }
    return "unknown";
}

TaskKind task_kind_from_string(std::string_view name) {
    if (name == "completion") return TaskKind::Completion;
    if (name == "oneshot") return TaskKind::OneShot;
    if (name == "reversal") return TaskKind::Reversal;
    if (name == "custom") return TaskKind::Custom;
    throw UsageError("unknown task '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::L1: return "l1";
        case LossKind::Mse: return "mse";
        case LossKind::CrossEntropy: return "cross-entropy";
    }
    return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
    if (name == "l1") return LossKind::L1;
    if (name == "mse") return LossKind::Mse;
    if (name == "cross-entropy") return LossKind::CrossEntropy;
    throw UsageError("unknown loss '" + std::string(name) + "'");
}

std::vector<bool> EpisodeScript::loss_mask() const {
    std::vector<bool> mask;
    mask.reserve(steps.size());
    for (const auto& s : steps) mask.push_back(s.loss_active);
    return mask;
}

void TaskConfig::validate() const {
    require(kind != TaskKind::Custom, "custom scripts have no generator");
    if (kind == TaskKind::Completion) require(n >= 1, "pattern length must be at least 1");
    else require(n >= 2, "pattern length must be at least 2");
}

EpisodeScript gen_pattern_completion(const TaskConfig& cfg) {
    require(cfg.n >= 1, "pattern length must be at least 1");
    std::mt19937_64 rng(cfg.seed);
    std::bernoulli_distribution coin(0.5);

    Vector pattern(cfg.n);
    do {
        for (auto& v : pattern) v = coin(rng) ? 1.0 : 0.0;
    } while (std::all_of(pattern.begin(), pattern.end(), [](double v) { return v == 0.0; }));

    std::vector<std::size_t> on;
    for (std::size_t i = 0; i < cfg.n; ++i)
        if (pattern[i] != 0.0) on.push_back(i);
    std::uniform_int_distribution<std::size_t> pick(0, on.size() - 1);

    EpisodeScript script;
    script.kind = TaskKind::Completion;
    script.loss = LossKind::L1;

    EpisodeStep show;
    show.input = pattern;
    script.steps.push_back(show);

    EpisodeStep cue;
    cue.input = Vector(cfg.n, 0.0);
    cue.input[on[pick(rng)]] = 1.0;
    cue.target = pattern;
    cue.loss_active = true;
    script.steps.push_back(cue);
    return script;
}

EpisodeScript gen_one_shot(const TaskConfig& cfg) {
    require(cfg.n >= 2, "pattern length must be at least 2");
    std::mt19937_64 rng(cfg.seed);
    auto [a, b] = distinct_pair(cfg.n, rng);

    EpisodeScript script;
    script.kind = TaskKind::OneShot;
    script.loss = LossKind::CrossEntropy;
    script.steps.push_back(instruction(a, kLabel01, false));
    script.steps.push_back(instruction(b, kLabel10, false));

    std::bernoulli_distribution coin(0.5);
    while (script.steps.size() < kClassEpisodeLength) {
        const bool pick_a = coin(rng);
        script.steps.push_back(query(pick_a ? a : b, pick_a ? kLabel01 : kLabel10, false));
    }
    return script;
}

EpisodeScript gen_reversal(const TaskConfig& cfg) {
    require(cfg.n >= 2, "pattern length must be at least 2");
    std::mt19937_64 rng(cfg.seed);
    auto [a, b] = distinct_pair(cfg.n, rng);

    EpisodeScript script;
    script.kind = TaskKind::Reversal;
    script.loss = LossKind::CrossEntropy;
    script.steps.push_back(instruction(a, kLabel01, false));
    script.steps.push_back(instruction(b, kLabel10, false));

    std::bernoulli_distribution coin(0.5);
    while (script.steps.size() < kReversalStep) {
        const bool pick_a = coin(rng);
        script.steps.push_back(query(pick_a ? a : b, pick_a ? kLabel01 : kLabel10, false));
    }
    script.steps.push_back(instruction(a, kLabel10, true));
    script.steps.push_back(instruction(b, kLabel01, true));
    while (script.steps.size() < kClassEpisodeLength) {
        const bool pick_a = coin(rng);
        script.steps.push_back(query(pick_a ? a : b, pick_a ? kLabel10 : kLabel01, true));
    }
    return script;
}

EpisodeScript generate_episode(const TaskConfig& cfg) {
    switch (cfg.kind) {
        case TaskKind::Completion: return gen_pattern_completion(cfg);
        case TaskKind::OneShot: return gen_one_shot(cfg);
        case TaskKind::Reversal: return gen_reversal(cfg);
        case TaskKind::Custom: break;
    }
    throw UsageError("custom scripts have no generator");
}

LossValue loss_l1(std::span<const double> output, std::span<const double> target) {
    require(output.size() == target.size(), "loss_l1: length mismatch");
    LossValue lv;
    lv.grad.resize(output.size());
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double d = output[i] - target[i];
        lv.loss += std::abs(d);
        lv.grad[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    }
    return lv;
}

LossValue loss_mse(std::span<const double> output, std::span<const double> target) {
    require(output.size() == target.size() && !output.empty(), "loss_mse: length mismatch");
    LossValue lv;
    lv.grad.resize(output.size());
    const double n = static_cast<double>(output.size());
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double d = output[i] - target[i];
        lv.loss += d * d / n;
        lv.grad[i] = 2.0 * d / n;
    }
    return lv;
}

LossValue loss_cross_entropy(std::span<const double> softmax_output, std::size_t target) {
    require(target < softmax_output.size(), "loss_cross_entropy: target class out of range");
    LossValue lv;
    double p = softmax_output[target];
    if (p < kProbabilityFloor) {
        p = kProbabilityFloor;
        lv.clamped = true;
    }
    lv.loss = -std::log(p);
    lv.grad.assign(softmax_output.begin(), softmax_output.end());
    lv.grad[target] -= 1.0;
    return lv;
}

double metric_mean_abs_error(std::span<const Vector> outputs, const EpisodeScript& script) {
    require(outputs.size() == script.steps.size(), "metric: one output per step required");
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        const auto& step = script.steps[t];
        if (!step.loss_active) continue;
        const auto& y = outputs[t];
        for (std::size_t i = 0; i < y.size(); ++i) {
            double target;
            if (step.target_class) target = (i == *step.target_class) ? 1.0 : 0.0;
            else target = step.target.at(i);
            total += std::abs(y[i] - target);
            ++count;
        }
    }
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

double metric_accuracy(std::span<const Vector> outputs, const EpisodeScript& script,
                       StepFilter filter) {
    require(outputs.size() == script.steps.size(), "metric: one output per step required");
    std::size_t hits = 0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        const auto& step = script.steps[t];
        if (!step.loss_active || !step.target_class) continue;
        if (filter == StepFilter::AfterReversal && !step.after_reversal) continue;
        const auto& y = outputs[t];
        const auto best = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
        hits += best == *step.target_class;
        ++count;
    }
    return count == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(count);
}

nlohmann::json to_json(const EpisodeScript& script) {
    nlohmann::json steps = nlohmann::json::array();
    for (std::size_t t = 0; t < script.steps.size(); ++t) {
        const auto& s = script.steps[t];
        nlohmann::json j;
        j["step"] = t + 1;
        j["input"] = s.input;
        if (!s.target.empty()) j["target"] = s.target;
        if (s.target_class) j["target_class"] = *s.target_class;
        j["loss_active"] = s.loss_active;
        if (script.kind == TaskKind::Reversal) j["after_reversal"] = s.after_reversal;
        steps.push_back(std::move(j));
    }
    return {{"task", to_string(script.kind)}, {"loss", to_string(script.loss)}, {"steps", std::move(steps)}};
}

}  // namespace bohp
