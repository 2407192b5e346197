#pragma once

// Minimal TOML-syntax configuration reader: [section] headers, key = value
// pairs with numbers, booleans, quoted strings, and flat numeric arrays.
// Keys are exposed flattened as "section.key".

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "magnomech/errors.hpp"

namespace magnomech {

struct ConfigValue {
    std::variant<double, bool, std::string, std::vector<double>> v;

    double as_number(const std::string& key) const;
    bool as_bool(const std::string& key) const;
    const std::string& as_string(const std::string& key) const;
    const std::vector<double>& as_array(const std::string& key) const;
};

class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text);

    bool has(const std::string& key) const;
    std::optional<double> number(const std::string& key) const;
    std::optional<bool> boolean(const std::string& key) const;
    std::optional<std::string> string(const std::string& key) const;
    std::optional<std::vector<double>> array(const std::string& key) const;

    const std::map<std::string, ConfigValue>& entries() const { return entries_; }

  private:
    std::map<std::string, ConfigValue> entries_;
};

}  // namespace magnomech
