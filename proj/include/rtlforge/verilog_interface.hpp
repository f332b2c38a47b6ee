#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtlforge::verilog {

struct Port {
    enum class Direction { kInput, kOutput, kInout };

    std::string name;
    Direction direction = Direction::kInput;
    int msb = 0;
    int lsb = 0;
    bool is_reg = false;
    bool is_signed = false;

    int width() const { return (msb >= lsb ? msb - lsb : lsb - msb) + 1; }
    bool operator==(const Port&) const = default;
};

struct ModuleInterface {
    std::string name;
    std::vector<Port> ports;

    const Port* find(std::string_view port_name) const;
    std::vector<const Port*> inputs() const;
    std::vector<const Port*> outputs() const;
};

/// Parses the first module header in `source`. Accepts ANSI port lists
/// (`module m(input [3:0] a, output reg y);`) and the older style where
/// directions are declared in the body. Widths must be integer constants.
/// Throws Error(kParseError).
ModuleInterface parse_module_header(std::string_view source);

/// Removes // and /* */ comments, keeping newlines.
std::string strip_comments(std::string_view source);

/// "[msb:lsb] " or "" for 1-bit ports.
std::string range_text(const Port& p);

/// Canonical ANSI header; ports are plain wires. Ends with ");\n".
std::string render_header(const ModuleInterface& iface);

}  // namespace rtlforge::verilog
