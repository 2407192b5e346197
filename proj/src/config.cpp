#include "magnomech/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace magnomech {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, const std::string& context) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
        throw ConfigError("config: bad number '" + tok + "' at " + context);
    }
    return v;
}

}  // namespace

double ConfigValue::as_number(const std::string& key) const {
    if (auto* p = std::get_if<double>(&v)) return *p;
    throw ConfigError("config: key '" + key + "' is not a number");
}

bool ConfigValue::as_bool(const std::string& key) const {
    if (auto* p = std::get_if<bool>(&v)) return *p;
    throw ConfigError("config: key '" + key + "' is not a boolean");
}

const std::string& ConfigValue::as_string(const std::string& key) const {
    if (auto* p = std::get_if<std::string>(&v)) return *p;
    throw ConfigError("config: key '" + key + "' is not a string");
}

const std::vector<double>& ConfigValue::as_array(const std::string& key) const {
    if (auto* p = std::get_if<std::vector<double>>(&v)) return *p;
    throw ConfigError("config: key '" + key + "' is not an array");
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string ctx = "line " + std::to_string(lineno);
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config: unterminated section at " + ctx);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("config: empty section name at " + ctx);
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config: expected key = value at " + ctx);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ConfigError("config: empty key or value at " + ctx);
        std::string full = section.empty() ? key : section + "." + key;

        ConfigValue cv;
        if (val == "true" || val == "false") {
            cv.v = (val == "true");
        } else if (val.front() == '"') {
            if (val.size() < 2 || val.back() != '"') {
                throw ConfigError("config: unterminated string at " + ctx);
            }
            cv.v = val.substr(1, val.size() - 2);
        } else if (val.front() == '[') {
            if (val.back() != ']') throw ConfigError("config: unterminated array at " + ctx);
            std::vector<double> arr;
            std::string body = trim(val.substr(1, val.size() - 2));
            if (!body.empty()) {
                std::istringstream bs(body);
                std::string tok;
                while (std::getline(bs, tok, ',')) {
                    arr.push_back(parse_number(trim(tok), ctx));
                }
            }
            cv.v = arr;
        } else {
            cv.v = parse_number(val, ctx);
        }
        cfg.entries_[full] = std::move(cv);
    }
    return cfg;
}

bool ConfigFile::has(const std::string& key) const { return entries_.count(key) > 0; }

std::optional<double> ConfigFile::number(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.as_number(key);
}

std::optional<bool> ConfigFile::boolean(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.as_bool(key);
}

std::optional<std::string> ConfigFile::string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.as_string(key);
}

std::optional<std::vector<double>> ConfigFile::array(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.as_array(key);
}

}  // namespace magnomech
