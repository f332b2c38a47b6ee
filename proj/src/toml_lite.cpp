#include "rtlforge/toml_lite.hpp"

#include <cctype>
#include <charconv>

#include "rtlforge/error.hpp"

namespace rtlforge::toml_lite {

const Value* Table::find(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

std::optional<std::string> Table::get_string(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(v)) return *s;
    return std::nullopt;
}

std::optional<double> Table::get_number(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (const auto* i = std::get_if<long long>(v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(v)) return *d;
    return std::nullopt;
}

std::optional<bool> Table::get_bool(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (const auto* b = std::get_if<bool>(v)) return *b;
    return std::nullopt;
}

std::optional<std::vector<std::string>> Table::get_strings(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (const auto* a = std::get_if<std::vector<std::string>>(v)) return *a;
    return std::nullopt;
}

const Table* Document::section(const std::string& name) const {
    if (name.empty()) return &root;
    auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Document run() {
        Document doc;
        Table* current = &doc.root;
        while (true) {
            skip_blank_and_comments();
            if (eof()) break;
            if (peek() == '[') {
                ++pos_;
                size_t end = src_.find(']', pos_);
                if (end == std::string_view::npos || src_.substr(pos_, end - pos_).find('\n') != std::string_view::npos)
                    fail("unterminated section header");
                std::string name(trim(src_.substr(pos_, end - pos_)));
                if (name.empty()) fail("empty section name");
                pos_ = end + 1;
                expect_line_end();
                current = &doc.sections[name];
                continue;
            }
            std::string key = parse_key();
            skip_inline_ws();
            if (eof() || peek() != '=') fail("expected '=' after key '" + key + "'");
            ++pos_;
            skip_inline_ws();
            if (current->contains(key)) fail("duplicate key '" + key + "'");
            current->set(key, parse_value());
            expect_line_end();
        }
        return doc;
    }

private:
    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;

    bool eof() const { return pos_ >= src_.size(); }
    char peek() const { return src_[pos_]; }

    [[noreturn]] void fail(const std::string& why) const {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_) + ": " + why);
    }

    static std::string_view trim(std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    }

    void advance() {
        if (src_[pos_] == '\n') ++line_;
        ++pos_;
    }

    void skip_inline_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_blank_and_comments() {
        while (!eof()) {
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    void expect_line_end() {
        skip_inline_ws();
        if (eof()) return;
        if (peek() == '#') {
            while (!eof() && peek() != '\n') ++pos_;
        }
        if (eof()) return;
        if (peek() == '\r') ++pos_;
        if (eof()) return;
        if (peek() != '\n') fail("unexpected trailing characters");
        advance();
    }

    std::string parse_key() {
        size_t start = pos_;
        while (!eof()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
                ++pos_;
            } else {
                break;
            }
        }
        if (pos_ == start) fail("expected a key");
        return std::string(src_.substr(start, pos_ - start));
    }

    bool starts(std::string_view token) const { return src_.substr(pos_, token.size()) == token; }

    std::string parse_basic_escape() {
        // positioned after the backslash
        if (eof()) fail("dangling escape");
        char c = peek();
        ++pos_;
        switch (c) {
            case 'n': return "\n";
            case 't': return "\t";
            case 'r': return "\r";
            case '"': return "\"";
            case '\\': return "\\";
            default: fail(std::string("unsupported escape \\") + c);
        }
    }

    std::string parse_string() {
        if (starts("\"\"\"") || starts("'''")) {
            const bool basic = peek() == '"';
            const std::string_view delim = basic ? "\"\"\"" : "'''";
            pos_ += 3;
            if (!eof() && peek() == '\n') advance();  // first newline trimmed, as in TOML
            else if (starts("\r\n")) { ++pos_; advance(); }
            std::string out;
            while (true) {
                if (eof()) fail("unterminated multi-line string");
                if (starts(delim)) {
                    pos_ += 3;
                    return out;
                }
                if (basic && peek() == '\\') {
                    ++pos_;
                    out += parse_basic_escape();
                    continue;
                }
                out.push_back(peek());
                advance();
            }
        }
        const char quote = peek();
        ++pos_;
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = peek();
            if (c == quote) {
                ++pos_;
                return out;
            }
            if (quote == '"' && c == '\\') {
                ++pos_;
                out += parse_basic_escape();
                continue;
            }
            out.push_back(c);
            ++pos_;
        }
    }

    Value parse_value() {
        if (eof()) fail("missing value");
        char c = peek();
        if (c == '"' || c == '\'') return parse_string();
        if (c == '[') {
            ++pos_;
            std::vector<std::string> items;
            while (true) {
                skip_blank_and_comments();
                if (eof()) fail("unterminated array");
                if (peek() == ']') {
                    ++pos_;
                    return items;
                }
                if (peek() != '"' && peek() != '\'') fail("arrays may only hold strings");
                items.push_back(parse_string());
                skip_blank_and_comments();
                if (eof()) fail("unterminated array");
                if (peek() == ',') {
                    ++pos_;
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
        }
        size_t start = pos_;
        while (!eof() && peek() != '\n' && peek() != '#' && peek() != '\r') ++pos_;
        std::string_view raw = trim(src_.substr(start, pos_ - start));
        if (raw == "true") return true;
        if (raw == "false") return false;
        long long iv = 0;
        auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), iv);
        if (ec == std::errc() && p == raw.data() + raw.size()) return iv;
        try {
            size_t used = 0;
            double dv = std::stod(std::string(raw), &used);
            if (used == raw.size()) return dv;
        } catch (const std::exception&) {
        }
        fail("cannot parse value '" + std::string(raw) + "'");
    }
};

}  // namespace

Document parse(std::string_view source) { return Parser(source).run(); }

}  // namespace rtlforge::toml_lite
