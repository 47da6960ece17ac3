#include "bohp/model_io.hpp"

#include <fstream>
#include <sstream>

namespace bohp {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "bohp-model";
constexpr int kVersion = 1;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

const json& field(const json& obj, const std::string& key, const std::string& at) {
    if (!obj.is_object()) throw ModelParseError(at, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ModelParseError(at, "missing field '" + key + "'");
    return *it;
}

double number(const json& v, const std::string& at) {
    if (!v.is_number()) throw ModelParseError(at, "expected a number");
    return v.get<double>();
}

std::size_t count(const json& v, const std::string& at) {
    if (!v.is_number_unsigned() || v.get<std::size_t>() == 0)
        throw ModelParseError(at, "expected a positive integer");
    return v.get<std::size_t>();
}

Vector vector_from(const json& v, std::size_t n, const std::string& at) {
    if (!v.is_array() || v.size() != n)
        throw ModelParseError(at, "expected an array of " + std::to_string(n) + " numbers");
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = number(v[i], at + "/" + std::to_string(i));
    return out;
}

Matrix matrix_from(const json& v, std::size_t rows, std::size_t cols, const std::string& at) {
    if (!v.is_array() || v.size() != rows)
        throw ModelParseError(at, "expected " + std::to_string(rows) + " rows");
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        Vector row = vector_from(v[r], cols, at + "/" + std::to_string(r));
        std::copy(row.begin(), row.end(), m.row(r).begin());
    }
    return m;
}

}  // namespace

json model_to_json(const ModelDocument& doc) {
    json layers = json::array();
    for (const auto& l : doc.network.layers) {
        json jl;
        jl["kind"] = to_string(l.kind);
        jl["n_in"] = l.n_in();
        jl["n_out"] = l.n_out();
        jl["w"] = matrix_to_json(l.w);
        jl["alpha"] = l.plastic() ? matrix_to_json(l.alpha) : json::array();
        jl["b"] = l.b;
        layers.push_back(std::move(jl));
    }
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["gamma"] = doc.network.trace.gamma;
    if (doc.task) j["task"] = {{"kind", to_string(doc.task->kind)}, {"n", doc.task->n}};
    j["layers"] = std::move(layers);
    return j;
}

ModelDocument model_from_json(const json& j) {
    if (!j.is_object()) throw ModelParseError("/", "expected an object");
    const json& format = field(j, "format", "/");
    if (!format.is_string() || format.get<std::string>() != kFormat)
        throw ModelParseError("/format", "expected \"bohp-model\"");
    const json& version = field(j, "version", "/");
    if (!version.is_number_integer() || version.get<int>() != kVersion)
        throw ModelParseError("/version", "unsupported version");

    ModelDocument doc;
    const double gamma = number(field(j, "gamma", "/"), "/gamma");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ModelParseError("/gamma", "gamma must lie in (0, 1]");

    if (auto it = j.find("task"); it != j.end()) {
        TaskConfig task;
        const json& kind = field(*it, "kind", "/task");
        if (!kind.is_string()) throw ModelParseError("/task/kind", "expected a string");
        try {
            task.kind = task_kind_from_string(kind.get<std::string>());
        } catch (const UsageError& e) {
            throw ModelParseError("/task/kind", e.what());
        }
        task.n = count(field(*it, "n", "/task"), "/task/n");
        doc.task = task;
    }

    const json& layers = field(j, "layers", "/");
    if (!layers.is_array() || layers.empty()) throw ModelParseError("/layers", "expected a non-empty array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string at = "/layers/" + std::to_string(i);
        const json& jl = layers[i];
        const json& kind = field(jl, "kind", at);
        if (!kind.is_string()) throw ModelParseError(at + "/kind", "expected a string");
        LayerParams p;
        try {
            p.kind = layer_kind_from_string(kind.get<std::string>());
        } catch (const UsageError& e) {
            throw ModelParseError(at + "/kind", e.what());
        }
        const std::size_t n_in = count(field(jl, "n_in", at), at + "/n_in");
        const std::size_t n_out = count(field(jl, "n_out", at), at + "/n_out");
        p.w = matrix_from(field(jl, "w", at), n_out, n_in, at + "/w");
        if (p.plastic()) {
            p.alpha = matrix_from(field(jl, "alpha", at), n_out, n_in, at + "/alpha");
        } else if (auto a = jl.find("alpha"); a != jl.end() && !(a->is_array() && a->empty())) {
            throw ModelParseError(at + "/alpha", "fixed layers carry no plasticity coefficients");
        }
        p.b = vector_from(field(jl, "b", at), n_out, at + "/b");
        doc.network.layers.push_back(std::move(p));
    }
    const auto& first = doc.network.layers.front();
    doc.network.trace = HebbianState(first.n_out(), first.n_in(), gamma);
    try {
        doc.network.validate();
    } catch (const UsageError& e) {
        throw ModelParseError("/layers", e.what());
    }
    return doc;
}

std::string dump_model(const ModelDocument& doc) { return model_to_json(doc).dump(2); }

ModelDocument parse_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelParseError("byte " + std::to_string(e.byte), e.what());
    }
    return model_from_json(j);
}

ModelDocument load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_model(ss.str());
    } catch (const ModelParseError& e) {
        throw ModelParseError(path + " " + e.where(), e.detail());
    }
}

void save_model(const ModelDocument& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
    out << dump_model(doc) << '\n';
    if (!out) throw std::runtime_error("failed writing model file '" + path + "'");
}

}  // namespace bohp
