#pragma once

#include <random>

#include "bohp/plastic_core.hpp"
#include "bohp/tasks.hpp"

namespace bohp::fixtures {

inline NetworkSpec single_plastic(std::size_t n_in, std::size_t n_out) {
    return NetworkSpec{{{LayerKind::PlasticTanh, n_in, n_out}}};
}

inline NetworkSpec plastic_softmax(std::size_t n_in, std::size_t n_hidden, std::size_t n_classes) {
    return NetworkSpec{{{LayerKind::PlasticTanh, n_in, n_hidden}, {LayerKind::FixedSoftmax, n_hidden, n_classes}}};
}

inline Vector random_input(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> d(-1, 1);
    Vector x(n);
    for (auto& v : x) v = static_cast<double>(d(rng));
    return x;
}

inline Vector random_unit(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vector x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

/// Vector-target script with every step loss-active.
inline EpisodeScript random_regression_script(std::mt19937_64& rng, std::size_t n_in, std::size_t n_out,
                                              std::size_t steps, LossKind loss) {
    EpisodeScript s;
    s.loss = loss;
    for (std::size_t t = 0; t < steps; ++t) {
        EpisodeStep step;
        step.input = random_input(rng, n_in);
        step.target = random_unit(rng, n_out);
        step.loss_active = true;
        s.steps.push_back(std::move(step));
    }
    return s;
}

}  // namespace bohp::fixtures
