#include "bohp/summary.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace bohp {

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double d : v) m = std::max(m, std::abs(d));
    return m;
}

bool strong(double v, double max_abs_v, double fraction) {
    return max_abs_v > 0.0 && std::abs(v) >= fraction * max_abs_v;
}

}  // namespace

std::string_view to_string(ConnectionClass c) {
    switch (c) {
        case ConnectionClass::FixedExcitatory: return "fixed-excitatory";
        case ConnectionClass::FixedInhibitory: return "fixed-inhibitory";
        case ConnectionClass::PlasticExcitatory: return "plastic-excitatory";
        case ConnectionClass::PlasticInhibitory: return "plastic-inhibitory";
        case ConnectionClass::Inactive: return "inactive";
    }
    return "unknown";
}

ConnectionClass classify_connection(double w, double alpha, double max_abs_w, double max_abs_alpha,
                                    double fraction) {
    if (strong(alpha, max_abs_alpha, fraction))
        return alpha > 0.0 ? ConnectionClass::PlasticExcitatory : ConnectionClass::PlasticInhibitory;
    if (strong(w, max_abs_w, fraction))
        return w > 0.0 ? ConnectionClass::FixedExcitatory : ConnectionClass::FixedInhibitory;
    return ConnectionClass::Inactive;
}

const ConnectionInfo& ConnectionSummary::at(std::size_t layer, std::size_t output, std::size_t input) const {
    for (const auto& c : connections)
        if (c.layer == layer && c.output == output && c.input == input) return c;
    throw UsageError("no such connection");
}

nlohmann::json ConnectionSummary::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : connections) {
        rows.push_back({{"layer", c.layer},
                        {"output", c.output},
                        {"input", c.input},
                        {"w", c.w},
                        {"alpha", c.alpha},
                        {"abs_w", std::abs(c.w)},
                        {"abs_alpha", std::abs(c.alpha)},
                        {"class", to_string(c.cls)}});
    }
    nlohmann::json j{{"strong_fraction", kStrongFraction}, {"connections", std::move(rows)}};
    if (pattern_alpha) {
        j["pattern_alpha_signs"] = {{"negative", pattern_alpha->negative},
                                    {"positive", pattern_alpha->positive},
                                    {"zero", pattern_alpha->zero},
                                    {"all_negative", pattern_alpha->all_negative()}};
    }
    return j;
}

std::string ConnectionSummary::table() const {
    std::ostringstream os;
    os << std::left << std::setw(6) << "layer" << std::setw(7) << "input" << std::setw(7) << "output"
       << std::right << std::setw(11) << "w" << std::setw(11) << "alpha" << "  class\n";
    os << std::fixed << std::setprecision(4);
    for (const auto& c : connections) {
        os << std::left << std::setw(6) << c.layer << std::setw(7) << c.input << std::setw(7) << c.output
           << std::right << std::setw(11) << c.w << std::setw(11) << c.alpha << "  " << to_string(c.cls)
           << '\n';
    }
    if (pattern_alpha) {
        os << "pattern->hidden alpha signs: " << pattern_alpha->negative << " negative, "
           << pattern_alpha->positive << " positive, " << pattern_alpha->zero << " zero"
           << (pattern_alpha->all_negative() ? " (all negative)" : "") << '\n';
    }
    return os.str();
}

ConnectionSummary summarize(const ModelDocument& doc) {
    doc.network.validate();
    ConnectionSummary s;
    for (std::size_t li = 0; li < doc.network.layers.size(); ++li) {
        const auto& l = doc.network.layers[li];
        const double mw = max_abs(l.w.data());
        const double ma = max_abs(l.alpha.data());
        for (std::size_t j = 0; j < l.n_out(); ++j) {
            for (std::size_t k = 0; k < l.n_in(); ++k) {
                ConnectionInfo c;
                c.layer = li;
                c.output = j;
                c.input = k;
                c.w = l.w(j, k);
                c.alpha = l.plastic() ? l.alpha(j, k) : 0.0;
                c.cls = classify_connection(c.w, c.alpha, mw, ma);
                s.connections.push_back(c);
            }
        }
    }

    if (doc.task && (doc.task->kind == TaskKind::OneShot || doc.task->kind == TaskKind::Reversal)) {
        const auto& p = doc.network.plastic();
        require(p.n_in() == doc.task->n + 2, "model input width does not match its task");
        PatternAlphaSigns signs;
        for (std::size_t j = 0; j < p.n_out(); ++j) {
            for (std::size_t k = 0; k < doc.task->n; ++k) {
                const double a = p.alpha(j, k);
                if (a < 0.0) ++signs.negative;
                else if (a > 0.0) ++signs.positive;
                else ++signs.zero;
            }
        }
        s.pattern_alpha = signs;
    }
    return s;
}

CompletionStructure check_completion_structure(const Network& net) {
    const auto& p = net.plastic();
    require(p.n_in() == p.n_out(), "completion layout needs a square plastic layer");
    const double mw = max_abs(p.w.data());
    const double ma = max_abs(p.alpha.data());
    CompletionStructure out;
    for (std::size_t i = 0; i < p.n_in(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < p.n_out(); ++j)
            if (p.w(j, i) > p.w(best, i)) best = j;
        if (best != i) out.diagonal_fixed = false;
        for (std::size_t j = 0; j < p.n_out(); ++j) {
            if (j == i) continue;
            const auto cls = classify_connection(p.w(j, i), p.alpha(j, i), mw, ma);
            if (cls != ConnectionClass::PlasticExcitatory && cls != ConnectionClass::PlasticInhibitory)
                out.cross_plastic = false;
        }
    }
    return out;
}

}  // namespace bohp
