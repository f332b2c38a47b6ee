#include "rtlforge/verilog_interface.hpp"

#include <cctype>
#include <map>
#include <regex>

#include "rtlforge/error.hpp"
#include "rtlforge/text.hpp"

namespace rtlforge::verilog {

const Port* ModuleInterface::find(std::string_view port_name) const {
    for (const auto& p : ports)
        if (p.name == port_name) return &p;
    return nullptr;
}

std::vector<const Port*> ModuleInterface::inputs() const {
    std::vector<const Port*> out;
    for (const auto& p : ports)
        if (p.direction == Port::Direction::kInput) out.push_back(&p);
    return out;
}

std::vector<const Port*> ModuleInterface::outputs() const {
    std::vector<const Port*> out;
    for (const auto& p : ports)
        if (p.direction == Port::Direction::kOutput) out.push_back(&p);
    return out;
}

std::string strip_comments(std::string_view src) {
    std::string out;
    out.reserve(src.size());
    for (size_t i = 0; i < src.size(); ++i) {
        if (src[i] == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') ++i;
            if (i < src.size()) out.push_back('\n');
        } else if (src[i] == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            i += 2;
            while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) {
                if (src[i] == '\n') out.push_back('\n');
                ++i;
            }
            ++i;
        } else if (src[i] == '"') {
            out.push_back(src[i++]);
            while (i < src.size() && src[i] != '"') {
                if (src[i] == '\\' && i + 1 < src.size()) out.push_back(src[i++]);
                out.push_back(src[i++]);
            }
            if (i < src.size()) out.push_back(src[i]);
        } else {
            out.push_back(src[i]);
        }
    }
    return out;
}

namespace {

struct Decl {
    std::optional<Port::Direction> direction;
    bool is_reg = false;
    bool is_signed = false;
    int msb = 0;
    int lsb = 0;
};

// Parses declaration keywords and an optional range from the start of `tokens`
// (already split on whitespace); returns the remaining identifier text.
std::string parse_decl_prefix(std::string item, Decl& decl, bool& had_keywords) {
    static const std::regex kRange(R"(^\s*\[\s*(-?\d+)\s*:\s*(-?\d+)\s*\]\s*)");
    had_keywords = false;
    while (true) {
        auto trimmed = std::string(text::trim(item));
        auto word_end = trimmed.find_first_of(" \t\n[");
        std::string word = trimmed.substr(0, word_end);
        std::string rest = word_end == std::string::npos ? "" : trimmed.substr(word_end);
        if (word == "input" || word == "output" || word == "inout") {
            decl = Decl{};
            decl.direction = word == "input"    ? Port::Direction::kInput
                             : word == "output" ? Port::Direction::kOutput
                                                : Port::Direction::kInout;
            had_keywords = true;
            item = rest;
        } else if (word == "reg" || word == "logic" || word == "var") {
            decl.is_reg = true;
            had_keywords = true;
            item = rest;
        } else if (word == "wire" || word == "tri") {
            had_keywords = true;
            item = rest;
        } else if (word == "signed") {
            decl.is_signed = true;
            had_keywords = true;
            item = rest;
        } else if (word == "unsigned") {
            had_keywords = true;
            item = rest;
        } else if (!trimmed.empty() && trimmed.front() == '[') {
            std::smatch m;
            if (!std::regex_search(trimmed, m, kRange))
                throw Error(ErrorCode::kParseError, "unsupported port range in '" + trimmed + "'");
            decl.msb = std::stoi(m[1].str());
            decl.lsb = std::stoi(m[2].str());
            had_keywords = true;
            item = trimmed.substr(static_cast<size_t>(m.length(0)));
        } else {
            return trimmed;
        }
    }
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$')) return false;
    return true;
}

}  // namespace

ModuleInterface parse_module_header(std::string_view source) {
    const std::string src = strip_comments(source);
    static const std::regex kModule(R"(\bmodule\s+([A-Za-z_][A-Za-z0-9_$]*)\s*)");
    std::smatch m;
    if (!std::regex_search(src, m, kModule)) throw Error(ErrorCode::kParseError, "no module header found");

    ModuleInterface iface;
    iface.name = m[1].str();
    size_t pos = static_cast<size_t>(m.position(0) + m.length(0));
    if (pos < src.size() && src[pos] == '#') {
        throw Error(ErrorCode::kParseError, "parameterized module headers are not supported");
    }
    std::string list;
    size_t after = pos;
    if (pos < src.size() && src[pos] == '(') {
        int depth = 0;
        size_t i = pos;
        for (; i < src.size(); ++i) {
            if (src[i] == '(') ++depth;
            else if (src[i] == ')' && --depth == 0) break;
        }
        if (i >= src.size()) throw Error(ErrorCode::kParseError, "unterminated port list");
        list = src.substr(pos + 1, i - pos - 1);
        after = i + 1;
    }
    while (after < src.size() && std::isspace(static_cast<unsigned char>(src[after]))) ++after;
    if (after >= src.size() || src[after] != ';') throw Error(ErrorCode::kParseError, "module header must end with ';'");

    Decl decl;
    std::vector<std::string> order;
    std::map<std::string, Port> ports;
    bool any_direction = false;
    for (auto& item : text::split(list, ',')) {
        if (text::trim(item).empty()) continue;
        bool had_keywords = false;
        std::string name = parse_decl_prefix(item, decl, had_keywords);
        if (!is_identifier(name)) throw Error(ErrorCode::kParseError, "bad port name '" + name + "'");
        Port p;
        p.name = name;
        if (decl.direction) {
            any_direction = true;
            p.direction = *decl.direction;
            p.is_reg = decl.is_reg;
            p.is_signed = decl.is_signed;
            p.msb = decl.msb;
            p.lsb = decl.lsb;
        }
        if (ports.count(name)) throw Error(ErrorCode::kParseError, "port '" + name + "' listed twice");
        order.push_back(name);
        ports.emplace(name, p);
    }

    if (!any_direction && !order.empty()) {
        // Non-ANSI: directions come from body declarations up to endmodule.
        size_t end = src.find("endmodule", after);
        std::string body = src.substr(after + 1, end == std::string::npos ? std::string::npos : end - after - 1);
        std::map<std::string, bool> seen;
        for (auto& stmt : text::split(body, ';')) {
            auto t = std::string(text::trim(stmt));
            if (!(t.rfind("input", 0) == 0 || t.rfind("output", 0) == 0 || t.rfind("inout", 0) == 0 ||
                  t.rfind("reg", 0) == 0))
                continue;
            Decl d;
            const bool is_reg_only = t.rfind("reg", 0) == 0;
            bool first = true;
            for (auto& piece : text::split(t, ',')) {
                bool kw = false;
                Decl before = d;
                std::string name = parse_decl_prefix(piece, d, kw);
                if (!first && !kw) d = before;
                first = false;
                auto it = ports.find(name);
                if (it == ports.end()) continue;
                if (is_reg_only) {
                    it->second.is_reg = true;
                    continue;
                }
                it->second.direction = *d.direction;
                it->second.is_reg = it->second.is_reg || d.is_reg;
                it->second.is_signed = d.is_signed;
                it->second.msb = d.msb;
                it->second.lsb = d.lsb;
                seen[name] = true;
            }
        }
        for (const auto& n : order)
            if (!seen.count(n)) throw Error(ErrorCode::kParseError, "no direction declared for port '" + n + "'");
    }
    for (const auto& n : order) iface.ports.push_back(ports.at(n));
    return iface;
}

std::string range_text(const Port& p) {
    if (p.msb == 0 && p.lsb == 0) return "";
    return "[" + std::to_string(p.msb) + ":" + std::to_string(p.lsb) + "] ";
}

std::string render_header(const ModuleInterface& iface) {
    std::string out = "module " + iface.name + " (\n";
    for (size_t i = 0; i < iface.ports.size(); ++i) {
        const auto& p = iface.ports[i];
        const char* dir = p.direction == Port::Direction::kInput    ? "input"
                          : p.direction == Port::Direction::kOutput ? "output"
                                                                    : "inout";
        out += "    " + std::string(dir) + " " + (p.is_signed ? "signed " : "") + range_text(p) + p.name;
        out += i + 1 < iface.ports.size() ? ",\n" : "\n";
    }
    out += ");\n";
    return out;
}

}  // namespace rtlforge::verilog
