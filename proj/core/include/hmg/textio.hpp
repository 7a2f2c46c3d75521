#pragma once

#include <string>
#include <vector>

namespace hmg {

/// Shortest text that still round-trips a double exactly: printf %.17g.
std::string fmt_g17(double v);

/// Minimal append-style JSON emitter. Key order is the call order, doubles
/// are rendered with fmt_g17, so output bytes are a pure function of input.
class JsonWriter {
public:
    void begin_object();
    void end_object();
    void begin_array(const std::string& key);
    void end_array();
    void key_string(const std::string& key, const std::string& value);
    void key_number(const std::string& key, double value);
    void key_integer(const std::string& key, long long value);
    void key_raw(const std::string& key, const std::string& raw);
    void array_number(double value);
    void array_string(const std::string& value);
    void array_raw(const std::string& raw);
    std::string str() const { return out_; }

private:
    void comma();
    std::string out_;
    bool need_comma_ = false;
};

std::string json_escape(const std::string& s);

} // namespace hmg
