#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rtlforge::toml_lite {

// The subset of TOML used by knowledge entries and config files: [section]
// headers, bare keys, basic/literal strings (single- and multi-line),
// integers, floats, booleans and arrays of strings.
using Value = std::variant<std::string, long long, double, bool, std::vector<std::string>>;

class Table {
public:
    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    const Value* find(const std::string& key) const;

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<double> get_number(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<std::string>> get_strings(const std::string& key) const;

    const std::map<std::string, Value>& values() const { return values_; }
    void set(std::string key, Value v) { values_[std::move(key)] = std::move(v); }

private:
    std::map<std::string, Value> values_;
};

struct Document {
    Table root;
    std::map<std::string, Table> sections;

    /// Returns the named section, or the root table for "".
    const Table* section(const std::string& name) const;
};

/// Throws Error(kParseError) with "line N: reason".
Document parse(std::string_view source);

}  // namespace rtlforge::toml_lite
