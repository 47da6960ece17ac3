#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bohp/fd_oracle.hpp"
#include "bohp/grad_engine.hpp"
#include "bohp/tasks.hpp"

namespace bohp {

/// Random-instance comparison of the analytical episode gradient against
/// central finite differences.
struct GradcheckSuiteConfig {
    std::size_t instances = 100;
    std::uint64_t seed = 0;
    std::size_t max_n_in = 10;
    std::size_t max_n_out = 4;
    std::size_t max_steps = 10;
    FdConfig fd;
    GradientFault fault = GradientFault::None;
    /// L1 instances whose output sits this close to the target at any
    /// loss-active step are redrawn.
    double kink_margin = 1e-3;

    void validate() const;
};

struct GradcheckInstance {
    Network net;
    EpisodeScript script;
};

/// Random topology (lone plastic layer with L1 or MSE, plastic + softmax,
/// plastic + tanh + softmax), params ~ U(-1, 1), inputs in {-1, 0, 1}.
GradcheckInstance random_gradcheck_instance(std::mt19937_64& rng, const GradcheckSuiteConfig& cfg);

struct GradcheckSuiteResult {
    GradcheckReport report;
    std::size_t instances = 0;
    std::size_t rejected = 0;  // redrawn for sitting on an L1 kink
    std::vector<std::size_t> failed_instances;
};

/// Throws UsageError("empty suite") when cfg.instances == 0.
GradcheckSuiteResult run_gradcheck_suite(const GradcheckSuiteConfig& cfg);

}  // namespace bohp
