#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "bohp/grad_engine.hpp"
#include "bohp/plastic_core.hpp"
#include "bohp/tasks.hpp"

namespace bohp {

// Brute-force gradients by re-simulation. Nothing in here touches the
// forward-mode accumulators; it only uses the forward dynamics and the losses.

struct FdConfig {
    double epsilon = 1e-4;
    double tolerance = 1e-4;

    void validate() const;
};

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (f(x + eps) - f(x - eps)) / (2 eps)
double central_difference(const std::function<double(double)>& f, double x, double epsilon);

/// Summed loss over loss-active steps, starting from zero traces. `net` is
/// taken by value so the caller's traces are left alone.
double simulate_episode_loss(Network net, const EpisodeScript& script);

/// Top-layer outputs per step, starting from zero traces.
std::vector<Vector> simulate_episode_outputs(Network net, const EpisodeScript& script);

double fd_episode_gradient(const Network& net, const EpisodeScript& script, const ParamId& id,
                           const FdConfig& cfg);

EpisodeGradient fd_full_gradient(const Network& net, const EpisodeScript& script, const FdConfig& cfg);

/// d y_j(t) / d theta for the plastic layer's output at every step, by
/// central differences. Result[t] is [n_out x n_plastic_params] in the
/// GradientAccumulator layout.
std::vector<Matrix> fd_plastic_output_sensitivities(const Network& net, const EpisodeScript& script,
                                                    const FdConfig& cfg);

/// |a - f| / max(|a|, |f|, 1e-8)
double relative_error(double analytical, double fd);

struct GradientComparison {
    ParamId id;
    double analytical = 0.0;
    double finite_difference = 0.0;
    double rel_error = 0.0;
    bool pass = true;
};

struct GradcheckReport {
    std::vector<GradientComparison> entries;
    double max_rel_error = 0.0;
    double mean_rel_error = 0.0;
    bool pass = true;

    std::vector<ParamId> failures() const;
    /// Appends another report's entries and refreshes the summary.
    void merge(const GradcheckReport& other);
    nlohmann::json to_json() const;
};

GradcheckReport compare_gradients(const EpisodeGradient& analytical, const EpisodeGradient& fd,
                                  const FdConfig& cfg);

}  // namespace bohp
