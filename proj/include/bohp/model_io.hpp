#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bohp/plastic_core.hpp"
#include "bohp/tasks.hpp"

namespace bohp {

/// Malformed model document. `where` is a JSON pointer or a byte offset.
class ModelParseError : public std::runtime_error {
public:
    ModelParseError(const std::string& where, const std::string& detail)
        : std::runtime_error(where + ": " + detail), where_(where), detail_(detail) {}
    const std::string& where() const { return where_; }
    const std::string& detail() const { return detail_; }

private:
    std::string where_;
    std::string detail_;
};

struct ModelDocument {
    Network network;
    std::optional<TaskConfig> task;  // which experiment produced it, if any
};

/// {"format": "bohp-model", "version": 1, "gamma": g, "task": {...},
///  "layers": [{"kind", "n_in", "n_out", "w", "alpha", "b"}, ...]}
/// Doubles are written with 17 significant digits, so a dump re-reads to the
/// same bits.
nlohmann::json model_to_json(const ModelDocument& doc);
ModelDocument model_from_json(const nlohmann::json& j);

std::string dump_model(const ModelDocument& doc);
ModelDocument parse_model(const std::string& text);
ModelDocument load_model(const std::string& path);
void save_model(const ModelDocument& doc, const std::string& path);

}  // namespace bohp
