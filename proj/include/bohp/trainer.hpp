#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bohp/grad_engine.hpp"
#include "bohp/plastic_core.hpp"
#include "bohp/tasks.hpp"

namespace bohp {

enum class OptimizerKind { Sgd, Adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(std::string_view name);

struct TrainConfig {
    std::size_t episodes_total = 10500;
    std::size_t freeze_last = 500;
    double learning_rate = 0.01;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    double gamma = 0.5;
    double init_scale = 0.1;
    bool clip_alpha_nonnegative = false;
    std::uint64_t seed = 0;
    TaskConfig task;
    LossKind completion_loss = LossKind::L1;

    std::size_t training_episodes() const { return episodes_total - freeze_last; }
    void validate() const;
};

/// Non-finite activation, loss or gradient. `episode` is 0-based; it is
/// filled in by train_run.
class DivergedError : public std::runtime_error {
public:
    DivergedError(const std::string& what, std::size_t episode = 0)
        : std::runtime_error(what), episode_(episode) {}
    std::size_t episode() const { return episode_; }

private:
    std::size_t episode_;
};

NetworkSpec network_spec_for(const TaskConfig& task);

/// Loss of one step given the top layer's output, and where its gradient sits.
struct StepLoss {
    LossValue value;
    GradSite site;
};
StepLoss step_loss(LossKind loss, std::span<const double> top_output, const EpisodeStep& step);

struct EpisodeOptions {
    bool collect_grads = false;
    GradientFault fault = GradientFault::None;
    /// Called after every timestep with the network as it stands.
    std::function<void(std::size_t, const Network&)> on_step;
};

struct EpisodeResult {
    double loss = 0.0;
    double mae = 0.0;
    std::optional<double> accuracy;
    std::optional<double> post_reversal_accuracy;
    bool probability_clamped = false;
    std::vector<Vector> outputs;  // top-layer output per step
    std::optional<EpisodeGradient> gradient;
};

/// Resets traces, runs the script step by step and, when asked, returns the
/// analytical gradient of the summed loss over loss-active steps. Parameters
/// are never modified.
EpisodeResult run_episode(Network& net, const EpisodeScript& script, const EpisodeOptions& opts = {});

struct OptimizerState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t steps = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

void apply_update(std::vector<LayerParams>& params, const EpisodeGradient& grad,
                  const TrainConfig& cfg, OptimizerState& state);

struct EpisodeMetrics {
    double loss = 0.0;
    double error = 0.0;  // per-element mean absolute error
    std::optional<double> accuracy;
    std::optional<double> post_reversal_accuracy;
};

struct RunRecord {
    std::uint64_t seed = 0;
    std::vector<EpisodeMetrics> series;
    Network initial;
    Network final_model;
};

struct TrainHooks {
    /// Called after each episode (0-based index) with the current network.
    std::function<void(std::size_t, const Network&)> on_episode_end;
};

/// Per-episode task seed for a run.
std::uint64_t episode_seed(std::uint64_t run_seed, std::size_t episode);

RunRecord train_run(const TrainConfig& cfg, const TrainHooks& hooks = {});

struct DivergedRun {
    std::size_t run_index;
    std::uint64_t seed;
    std::size_t episode;
    std::string message;
};

struct RunStats {
    std::vector<RunRecord> runs;  // successful runs, in seed order
    std::vector<DivergedRun> diverged;
    std::vector<double> median;
    std::vector<double> q25;
    std::vector<double> q75;
};

/// Linear-interpolation percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

std::vector<std::uint64_t> run_seeds(std::uint64_t base_seed, std::size_t n_runs);

/// Independent runs, one per seed, executed on up to `threads` workers
/// (0 = hardware concurrency). Diverged runs are excluded from aggregation.
RunStats multi_run(const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds, unsigned threads = 0);
RunStats multi_run(const TrainConfig& cfg, std::size_t n_runs, unsigned threads = 0);

/// Mean over the frozen-phase episodes of the chosen metric.
enum class Metric { Loss, Error, Accuracy, PostReversalAccuracy };
double frozen_mean(const RunRecord& run, const TrainConfig& cfg, Metric metric);

/// "episode,median,q25,q75" header then one row per episode (1-based).
void write_curve_csv(const RunStats& stats, std::ostream& os);

}  // namespace bohp
