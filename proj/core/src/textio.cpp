#include "hmg/textio.hpp"

#include <cstdio>

namespace hmg {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += ch;
        }
    }
    return out;
}

void JsonWriter::comma() {
    if (need_comma_) out_ += ',';
    need_comma_ = false;
}

void JsonWriter::begin_object() {
    comma();
    out_ += '{';
    need_comma_ = false;
}

void JsonWriter::end_object() {
    out_ += '}';
    need_comma_ = true;
}

void JsonWriter::begin_array(const std::string& key) {
    comma();
    out_ += '"';
    out_ += json_escape(key);
    out_ += "\":[";
    need_comma_ = false;
}

void JsonWriter::end_array() {
    out_ += ']';
    need_comma_ = true;
}

void JsonWriter::key_string(const std::string& key, const std::string& value) {
    comma();
    out_ += '"';
    out_ += json_escape(key);
    out_ += "\":\"";
    out_ += json_escape(value);
    out_ += '"';
    need_comma_ = true;
}

void JsonWriter::key_number(const std::string& key, double value) {
    comma();
    out_ += '"';
    out_ += json_escape(key);
    out_ += "\":";
    out_ += fmt_g17(value);
    need_comma_ = true;
}

void JsonWriter::key_integer(const std::string& key, long long value) {
    comma();
    out_ += '"';
    out_ += json_escape(key);
    out_ += "\":";
    out_ += std::to_string(value);
    need_comma_ = true;
}

void JsonWriter::key_raw(const std::string& key, const std::string& raw) {
    comma();
    out_ += '"';
    out_ += json_escape(key);
    out_ += "\":";
    out_ += raw;
    need_comma_ = true;
}

void JsonWriter::array_number(double value) {
    comma();
    out_ += fmt_g17(value);
    need_comma_ = true;
}

void JsonWriter::array_string(const std::string& value) {
    comma();
    out_ += '"';
    out_ += json_escape(value);
    out_ += '"';
    need_comma_ = true;
}

void JsonWriter::array_raw(const std::string& raw) {
    comma();
    out_ += raw;
    need_comma_ = true;
}

} // namespace hmg
