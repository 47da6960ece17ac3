#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bohp/linalg.hpp"

namespace bohp {

enum class TaskKind { Completion, OneShot, Reversal, Custom };
enum class LossKind { L1, Mse, CrossEntropy };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);
std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

struct EpisodeStep {
    Vector input;
    Vector target;                          // empty when there is no vector target
    std::optional<std::size_t> target_class;
    bool loss_active = false;
    bool after_reversal = false;

    friend bool operator==(const EpisodeStep&, const EpisodeStep&) = default;
};

struct EpisodeScript {
    TaskKind kind = TaskKind::Custom;
    LossKind loss = LossKind::L1;
    std::vector<EpisodeStep> steps;

    std::vector<bool> loss_mask() const;
    friend bool operator==(const EpisodeScript&, const EpisodeScript&) = default;
};

struct TaskConfig {
    TaskKind kind = TaskKind::Completion;
    std::size_t n = 8;  // pattern length
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr std::size_t kClassEpisodeLength = 20;
inline constexpr std::size_t kReversalStep = 10;  // 0-based index of the first swapped instruction

// Label 01 is class 1 and label 10 is class 0: the class is the position of the set bit.
inline constexpr std::size_t kLabel01 = 1;
inline constexpr std::size_t kLabel10 = 0;

/// Step 1 shows a random nonzero {0,1} pattern, step 2 shows one of its set
/// bits alone and asks for the full pattern back.
EpisodeScript gen_pattern_completion(const TaskConfig& cfg);

/// Two distinct {-1,1} patterns taught once with labels 01 and 10, then
/// queried with a neutral 00 suffix for the remaining 18 steps.
EpisodeScript gen_one_shot(const TaskConfig& cfg);

/// As gen_one_shot, but the labels are swapped and re-taught halfway through
/// (steps 11-12), and later queries expect the swapped labels.
EpisodeScript gen_reversal(const TaskConfig& cfg);

EpisodeScript generate_episode(const TaskConfig& cfg);

struct LossValue {
    double loss = 0.0;
    Vector grad;
    bool clamped = false;  // cross-entropy only: target probability hit the floor
};

/// Sum of absolute differences; gradient is sign(y - t) with 0 at ties.
LossValue loss_l1(std::span<const double> output, std::span<const double> target);

/// Mean squared difference over elements.
LossValue loss_mse(std::span<const double> output, std::span<const double> target);

/// -ln(output[target]); grad is the fused softmax/cross-entropy gradient
/// with respect to the softmax pre-activation.
LossValue loss_cross_entropy(std::span<const double> softmax_output, std::size_t target);

inline constexpr double kProbabilityFloor = 1e-12;

/// Per-element mean absolute error over loss-active steps. Class targets are
/// compared as one-hot vectors.
double metric_mean_abs_error(std::span<const Vector> outputs, const EpisodeScript& script);

enum class StepFilter { LossActive, AfterReversal };

/// Fraction of selected loss-active steps whose argmax equals the target class.
double metric_accuracy(std::span<const Vector> outputs, const EpisodeScript& script,
                       StepFilter filter = StepFilter::LossActive);

nlohmann::json to_json(const EpisodeScript& script);

}  // namespace bohp
