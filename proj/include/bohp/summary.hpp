#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bohp/model_io.hpp"

namespace bohp {

enum class ConnectionClass { FixedExcitatory, FixedInhibitory, PlasticExcitatory, PlasticInhibitory, Inactive };

std::string_view to_string(ConnectionClass c);

/// Fraction of the layer-wide maximum magnitude above which a weight (or a
/// plasticity coefficient) counts as strong.
inline constexpr double kStrongFraction = 0.2;

/// A strong plasticity coefficient makes the connection plastic (signed by
/// alpha); otherwise a strong baseline weight makes it fixed (signed by w);
/// otherwise it is inactive. Maxima are per layer and per role.
ConnectionClass classify_connection(double w, double alpha, double max_abs_w, double max_abs_alpha,
                                    double fraction = kStrongFraction);

struct ConnectionInfo {
    std::size_t layer = 0;
    std::size_t output = 0;
    std::size_t input = 0;
    double w = 0.0;
    double alpha = 0.0;
    ConnectionClass cls = ConnectionClass::Inactive;
};

/// Signs of the plasticity coefficients from pattern inputs to hidden cells
/// (classification tasks only).
struct PatternAlphaSigns {
    std::size_t negative = 0;
    std::size_t positive = 0;
    std::size_t zero = 0;
    bool all_negative() const { return positive == 0 && zero == 0 && negative > 0; }
};

struct ConnectionSummary {
    std::vector<ConnectionInfo> connections;
    std::optional<PatternAlphaSigns> pattern_alpha;

    const ConnectionInfo& at(std::size_t layer, std::size_t output, std::size_t input) const;
    nlohmann::json to_json() const;
    std::string table() const;
};

ConnectionSummary summarize(const ModelDocument& doc);

/// The trained pattern-completion layout: for every input i the largest
/// baseline weight leaving i lands on output i, and every off-diagonal
/// connection is plastic.
struct CompletionStructure {
    bool diagonal_fixed = true;
    bool cross_plastic = true;
    bool ok() const { return diagonal_fixed && cross_plastic; }
};
CompletionStructure check_completion_structure(const Network& net);

}  // namespace bohp
