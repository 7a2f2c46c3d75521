#include "hmg/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hmg/textio.hpp"

namespace hmg {

namespace {

using nlohmann::json;

void emit_matrix(JsonWriter& w, const std::string& key, const Mat& m) {
    w.begin_array(key);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) w.array_number(m(i, j));
    w.end_array();
}

void emit_labels(JsonWriter& w, const std::string& key, const std::vector<std::string>& ls) {
    w.begin_array(key);
    for (const auto& l : ls) w.array_string(l);
    w.end_array();
}

Mat matrix_from(const json& j, const std::string& field, std::size_t rows, std::size_t cols) {
    if (!j.contains(field) || !j[field].is_array())
        throw ConfigError(field, "missing matrix array");
    const auto& arr = j[field];
    if (arr.size() != rows * cols)
        throw ConfigError(field, "expected " + std::to_string(rows * cols) + " entries, got " +
                                     std::to_string(arr.size()));
    Mat m(rows, cols);
    std::size_t k = 0;
    for (const auto& v : arr) {
        if (!v.is_number()) throw ConfigError(field, "non-numeric entry");
        m.data()[k++] = v.get<double>();
    }
    return m;
}

std::vector<std::string> labels_from(const json& j, const std::string& field, std::size_t count) {
    if (!j.contains(field) || !j[field].is_array())
        throw ConfigError(field, "missing label array");
    const auto& arr = j[field];
    if (arr.size() != count)
        throw ConfigError(field, "expected " + std::to_string(count) + " labels");
    std::vector<std::string> out;
    out.reserve(count);
    for (const auto& v : arr) {
        if (!v.is_string()) throw ConfigError(field, "non-string label");
        out.push_back(v.get<std::string>());
    }
    return out;
}

void emit_complex_list(JsonWriter& w, const std::string& key, const std::vector<Complex>& zs) {
    w.begin_array(key);
    for (const Complex& z : zs) {
        std::string item = "{\"re\":" + fmt_g17(z.real()) + ",\"im\":" + fmt_g17(z.imag()) + "}";
        w.array_raw(item);
    }
    w.end_array();
}

std::vector<Complex> complex_list_from(const json& j, const std::string& field) {
    std::vector<Complex> out;
    if (!j.contains(field)) return out;
    if (!j[field].is_array()) throw ConfigError(field, "expected array");
    for (const auto& v : j[field]) {
        if (!v.is_object() || !v.contains("re") || !v.contains("im"))
            throw ConfigError(field, "entries must be {re, im} objects");
        out.emplace_back(v["re"].get<double>(), v["im"].get<double>());
    }
    return out;
}

} // namespace

std::string to_model_json(const Lti& m) {
    JsonWriter w;
    w.begin_object();
    w.key_integer("n", static_cast<long long>(m.n()));
    w.key_integer("m", static_cast<long long>(m.m()));
    w.key_integer("p", static_cast<long long>(m.p()));
    emit_matrix(w, "a", m.a);
    emit_matrix(w, "b", m.b);
    emit_matrix(w, "c", m.c);
    emit_matrix(w, "d", m.d);
    emit_labels(w, "states", m.state_names);
    emit_labels(w, "inputs", m.input_names);
    emit_labels(w, "outputs", m.output_names);
    w.end_object();
    return w.str() + "\n";
}

Lti from_model_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError("<root>", std::string("model parse failure: ") + e.what());
    }
    for (const char* f : {"n", "m", "p"})
        if (!j.contains(f) || !j[f].is_number_unsigned())
            throw ConfigError(f, "missing dimension");
    const std::size_t n = j["n"].get<std::size_t>();
    const std::size_t mm = j["m"].get<std::size_t>();
    const std::size_t p = j["p"].get<std::size_t>();
    Lti m;
    m.a = matrix_from(j, "a", n, n);
    m.b = matrix_from(j, "b", n, mm);
    m.c = matrix_from(j, "c", p, n);
    m.d = matrix_from(j, "d", p, mm);
    m.state_names = labels_from(j, "states", n);
    m.input_names = labels_from(j, "inputs", mm);
    m.output_names = labels_from(j, "outputs", p);
    validate_lti(m);
    return m;
}

std::string to_gains_json(const GainsDoc& g) {
    JsonWriter w;
    w.begin_object();
    w.key_integer("rows", static_cast<long long>(g.f.rows()));
    w.key_integer("cols", static_cast<long long>(g.f.cols()));
    emit_matrix(w, "f", g.f);
    emit_complex_list(w, "targets", g.targets);
    emit_complex_list(w, "achieved", g.achieved);
    w.key_number("max_rel_error", g.max_rel_error);
    w.end_object();
    return w.str() + "\n";
}

GainsDoc from_gains_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError("<root>", std::string("gains parse failure: ") + e.what());
    }
    if (!j.contains("rows") || !j.contains("cols"))
        throw ConfigError("rows/cols", "missing gain shape");
    GainsDoc g;
    const std::size_t r = j["rows"].get<std::size_t>();
    const std::size_t c = j["cols"].get<std::size_t>();
    g.f = matrix_from(j, "f", r, c);
    g.targets = complex_list_from(j, "targets");
    g.achieved = complex_list_from(j, "achieved");
    g.max_rel_error = j.value("max_rel_error", 0.0);
    return g;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path, "cannot write file");
    out << content;
}

} // namespace hmg
