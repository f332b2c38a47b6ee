#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include "mm_cubes.hpp"
#include "rtlforge/error.hpp"
#include "rtlforge/multimodal.hpp"
#include "rtlforge/text.hpp"

namespace rtlforge::mm {

namespace {

struct Line {
    size_t start = 0;
    size_t end = 0;
    std::string content;  // trimmed, leading // removed
};

std::string line_content(std::string_view raw) {
    auto t = text::trim(raw);
    if (t.substr(0, 2) == "//") t = text::trim(t.substr(2));
    return std::string(t);
}

std::vector<Line> split_with_offsets(std::string_view s) {
    std::vector<Line> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t nl = s.find('\n', pos);
        size_t end = nl == std::string_view::npos ? s.size() : nl;
        size_t content_end = end;
        if (content_end > pos && s[content_end - 1] == '\r') --content_end;
        out.push_back({pos, content_end, line_content(s.substr(pos, content_end - pos))});
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

std::vector<std::string> content_lines(std::string_view raw) {
    std::vector<std::string> out;
    for (const auto& l : text::split_lines(raw)) {
        auto c = line_content(l);
        if (!c.empty()) out.push_back(std::move(c));
    }
    return out;
}

bool is_separator_row(std::string_view s) {
    bool any_dash = false;
    for (char c : s) {
        if (c == '-' || c == '=') any_dash = true;
        else if (c != '|' && c != ':' && c != '+' && c != ' ' && c != '\t') return false;
    }
    return any_dash;
}

// Cells of a pipe-delimited row; empty leading/trailing cells from border
// pipes are dropped, empty inner cells are kept.
std::vector<std::string> pipe_cells(std::string_view line) {
    std::vector<std::string> cells;
    for (auto& c : text::split(line, '|')) cells.emplace_back(text::trim(c));
    if (!cells.empty() && cells.front().empty()) cells.erase(cells.begin());
    if (!cells.empty() && cells.back().empty()) cells.pop_back();
    return cells;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

bool is_binary(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c != '0' && c != '1') return false;
    return true;
}

bool is_value_token(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isxdigit(static_cast<unsigned char>(c)) && c != 'x' && c != 'X' && c != 'z' && c != 'Z' && c != '-')
            return false;
    return true;
}

bool is_clock_name(std::string_view s) {
    auto l = text::to_lower(s);
    return l == "clk" || l == "clock";
}

bool is_time_name(std::string_view s) {
    auto l = text::to_lower(s);
    return l == "time" || l == "t" || l == "cycle";
}

// "name", "name[3:0]" or "name[4]" -> Signal.
Signal parse_signal_name(std::string_view cell) {
    static const std::regex kRange(R"(^([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*:\s*(\d+)\s*\]$)");
    static const std::regex kCount(R"(^([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]$)");
    std::string s(text::trim(cell));
    std::smatch m;
    if (std::regex_match(s, m, kRange)) {
        int a = std::stoi(m[2].str()), b = std::stoi(m[3].str());
        return {m[1].str(), std::abs(a - b) + 1};
    }
    if (std::regex_match(s, m, kCount)) return {m[1].str(), std::max(1, std::stoi(m[2].str()))};
    if (is_identifier(s)) return {s, 1};
    throw Error(ErrorCode::kBadHeader, "bad signal name '" + s + "'");
}

// Splits a header cell into signal names; tolerates descriptive words
// ("input x" -> x).
std::vector<Signal> header_signals(std::string_view cell) {
    std::vector<Signal> out;
    std::string compact = std::regex_replace(std::string(cell), std::regex(R"(\s*\[\s*)"), "[");
    compact = std::regex_replace(compact, std::regex(R"(\s*\]\s*)"), "] ");
    compact = std::regex_replace(compact, std::regex(R"(\s*:\s*)"), ":");
    for (auto& tok : text::split_ws(text::replace_all(compact, ",", " "))) out.push_back(parse_signal_name(tok));
    return out;
}

char symbol_of(char c, bool allow_d) {
    switch (c) {
        case '0': return '0';
        case '1': return '1';
        case '-':
        case 'x':
        case 'X': return '-';
        case 'd':
        case 'D':
            if (allow_d) return '-';
            break;
        default: break;
    }
    throw Error(ErrorCode::kBadCellSymbol, std::string("bad cell symbol '") + c + "'");
}

// Value token for a `width`-bit signal: binary digits, a single don't-care,
// or a sized Verilog literal.
std::string value_bits(std::string_view token, int width, const std::string& where) {
    static const std::regex kLiteral(R"(^(\d+)'([bBhHdD])([0-9a-fA-FxX_]+)$)");
    std::string t(text::trim(token));
    std::smatch m;
    if (std::regex_match(t, m, kLiteral)) {
        if (std::stoi(m[1].str()) != width)
            throw Error(ErrorCode::kWidthMismatch, where + ": literal '" + t + "' has the wrong width");
        std::string digits = text::replace_all(m[3].str(), "_", "");
        char base = static_cast<char>(std::tolower(static_cast<unsigned char>(m[2].str()[0])));
        if (base == 'b') {
            t = digits;
        } else {
            unsigned long long v = std::stoull(digits, nullptr, base == 'h' ? 16 : 10);
            if (width < 64 && v >> width) throw Error(ErrorCode::kWidthMismatch, where + ": value too wide");
            t.clear();
            for (int i = width - 1; i >= 0; --i) t.push_back(((v >> i) & 1) ? '1' : '0');
        }
    }
    if (t.size() == 1 && width > 1 && (t == "-" || t == "x" || t == "X" || t == "d"))
        return std::string(static_cast<size_t>(width), '-');
    if (static_cast<int>(t.size()) != width)
        throw Error(ErrorCode::kWidthMismatch,
                    where + ": expected " + std::to_string(width) + " bits, got '" + t + "'");
    std::string out;
    for (char c : t) out.push_back(symbol_of(c, true));
    return out;
}

}  // namespace

// ---------------------------------------------------------------- K-maps

bool is_gray_sequence(const std::vector<std::string>& labels) {
    if (labels.size() < 2) return false;
    const size_t w = labels.front().size();
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (l.size() != w || !is_binary(l) || !seen.insert(l).second) return false;
    }
    for (size_t i = 0; i < labels.size(); ++i) {
        const auto& a = labels[i];
        const auto& b = labels[(i + 1) % labels.size()];
        int diff = 0;
        for (size_t k = 0; k < w; ++k) diff += a[k] != b[k];
        if (diff != 1) return false;
    }
    return true;
}

namespace {

std::vector<std::string> split_var_group(std::string_view group) {
    std::string g(text::trim(group));
    if (g.find_first_of(", ") != std::string::npos) {
        std::vector<std::string> out;
        for (auto& t : text::split_ws(text::replace_all(g, ",", " "))) out.push_back(t);
        return out;
    }
    static const std::regex kVar(R"([A-Za-z](?:_?[0-9]+)?)");
    std::vector<std::string> out;
    size_t covered = 0;
    for (auto it = std::sregex_iterator(g.begin(), g.end(), kVar); it != std::sregex_iterator(); ++it) {
        if (static_cast<size_t>(it->position()) != covered)
            throw Error(ErrorCode::kBadHeader, "cannot split variable group '" + g + "'");
        out.push_back(it->str());
        covered += static_cast<size_t>(it->length());
    }
    if (covered != g.size() || out.empty()) throw Error(ErrorCode::kBadHeader, "cannot split variable group '" + g + "'");
    return out;
}

std::vector<std::string> row_tokens(std::string_view line) {
    std::vector<std::string> out;
    for (auto& t : text::split_ws(text::replace_all(std::string(line), "|", " "))) out.push_back(t);
    return out;
}

}  // namespace

TruthTableIR parse_kmap(std::string_view raw, const std::string& output_name) {
    auto lines = content_lines(raw);
    lines.erase(std::remove_if(lines.begin(), lines.end(), [](const auto& l) { return is_separator_row(l); }),
                lines.end());
    if (lines.size() < 2) throw Error(ErrorCode::kBadHeader, "K-map needs a header and at least one row");

    std::vector<std::string> row_vars, col_vars, col_labels;
    size_t first_row = 1;
    auto header = row_tokens(lines[0]);
    if (lines[0].find('\\') != std::string::npos) {
        // "ab\cd | 00 01 11 10"
        if (header.empty() || header[0].find('\\') == std::string::npos)
            throw Error(ErrorCode::kBadHeader, "K-map header must start with rowvars\\colvars");
        auto slash = header[0].find('\\');
        row_vars = split_var_group(header[0].substr(0, slash));
        col_vars = split_var_group(header[0].substr(slash + 1));
        col_labels.assign(header.begin() + 1, header.end());
    } else {
        // Column variables on their own line, then "rowvars 00 01 11 10".
        if (header.size() != 1 || lines.size() < 3)
            throw Error(ErrorCode::kBadHeader, "K-map header must name row and column variables");
        auto labels = row_tokens(lines[1]);
        if (labels.size() < 3) throw Error(ErrorCode::kBadHeader, "K-map column label line is too short");
        col_vars = split_var_group(header[0]);
        row_vars = split_var_group(labels[0]);
        col_labels.assign(labels.begin() + 1, labels.end());
        first_row = 2;
    }
    for (const auto& l : col_labels)
        if (!is_binary(l)) throw Error(ErrorCode::kBadHeader, "column label '" + l + "' is not binary");
    if (!is_gray_sequence(col_labels))
        throw Error(ErrorCode::kBadGraySequence, "column labels " + text::join(col_labels, " ") + " are not Gray coded");
    if (col_labels.front().size() != col_vars.size())
        throw Error(ErrorCode::kBadHeader, "column labels do not match the column variables");

    std::vector<std::string> row_labels;
    std::vector<std::vector<std::string>> cells;
    for (size_t i = first_row; i < lines.size(); ++i) {
        auto toks = row_tokens(lines[i]);
        if (toks.empty()) continue;
        if (!is_binary(toks[0])) throw Error(ErrorCode::kBadHeader, "row label '" + toks[0] + "' is not binary");
        if (toks.size() - 1 != col_labels.size())
            throw Error(ErrorCode::kCellCountMismatch, "row " + toks[0] + " has " + std::to_string(toks.size() - 1) +
                                                           " cells, expected " + std::to_string(col_labels.size()));
        row_labels.push_back(toks[0]);
        cells.emplace_back(toks.begin() + 1, toks.end());
    }
    if (!is_gray_sequence(row_labels))
        throw Error(ErrorCode::kBadGraySequence, "row labels " + text::join(row_labels, " ") + " are not Gray coded");
    if (row_labels.front().size() != row_vars.size())
        throw Error(ErrorCode::kBadHeader, "row labels do not match the row variables");

    TruthTableIR ir;
    for (const auto& v : row_vars) ir.inputs.push_back({v, 1});
    for (const auto& v : col_vars) ir.inputs.push_back({v, 1});
    ir.outputs.push_back({output_name, 1});
    for (size_t r = 0; r < row_labels.size(); ++r) {
        for (size_t c = 0; c < col_labels.size(); ++c) {
            const auto& cell = cells[r][c];
            if (cell.size() != 1) throw Error(ErrorCode::kBadCellSymbol, "bad K-map cell '" + cell + "'");
            ir.rows.push_back({row_labels[r] + col_labels[c], std::string(1, symbol_of(cell[0], true))});
        }
    }
    ir.validate();
    return ir;
}

// ----------------------------------------------------------- truth tables

namespace {

struct TableLine {
    std::vector<std::vector<std::string>> cells;  // tokens per cell
    int split = -1;                                // cell index where outputs start, -1 if unknown
};

bool is_split_token(std::string_view t) { return t == "->" || t == "=>" || t == "||"; }

TableLine tokenize_table_line(std::string_view line) {
    TableLine out;
    std::string s(line);
    for (const char* tok : {"||", "->", "=>"}) s = text::replace_all(s, tok, " \x01 ");
    const bool has_pipes = s.find('|') != std::string::npos;
    std::vector<std::string> raw_cells = has_pipes ? pipe_cells(s) : std::vector<std::string>{s};
    for (const auto& rc : raw_cells) {
        std::vector<std::string> cur;
        for (auto& tok : text::split_ws(rc)) {
            if (tok == "\x01") {
                if (!cur.empty()) out.cells.push_back(std::move(cur));
                cur.clear();
                out.split = static_cast<int>(out.cells.size());
            } else {
                cur.push_back(tok);
            }
        }
        if (!cur.empty()) out.cells.push_back(std::move(cur));
        else if (rc.empty() && has_pipes) out.split = static_cast<int>(out.cells.size());  // "a | | y"
    }
    return out;
}

bool is_index_name(std::string_view s) {
    auto l = text::to_lower(s);
    return l == "row" || l == "#" || l == "no" || l == "no." || l == "index" || l == "idx";
}

}  // namespace

TruthTableIR parse_truth_table(std::string_view raw) {
    auto lines = content_lines(raw);
    lines.erase(std::remove_if(lines.begin(), lines.end(), [](const auto& l) { return is_separator_row(l); }),
                lines.end());
    if (lines.empty()) throw Error(ErrorCode::kBadHeader, "empty truth table");

    auto head = tokenize_table_line(lines[0]);
    if (head.cells.empty()) throw Error(ErrorCode::kBadHeader, "empty truth table header");
    bool index_column = !head.cells.empty() && is_index_name(head.cells[0][0]);
    if (index_column) {
        head.cells[0].erase(head.cells[0].begin());
        if (head.cells[0].empty()) {
            head.cells.erase(head.cells.begin());
            if (head.split > 0) --head.split;
        }
    }
    // Without an explicit split, a two-cell header splits between its
    // cells; otherwise the last name is the output.
    std::vector<std::vector<Signal>> groups;
    for (const auto& cell : head.cells) {
        std::vector<Signal> g;
        for (const auto& tok : cell) {
            auto sigs = header_signals(tok);
            g.insert(g.end(), sigs.begin(), sigs.end());
        }
        groups.push_back(std::move(g));
    }
    std::vector<Signal> flat;
    for (const auto& g : groups) flat.insert(flat.end(), g.begin(), g.end());
    if (flat.size() < 2) throw Error(ErrorCode::kBadHeader, "truth table needs at least one input and one output");

    size_t n_inputs = 0;
    if (head.split > 0 && head.split < static_cast<int>(groups.size())) {
        for (int i = 0; i < head.split; ++i) n_inputs += groups[static_cast<size_t>(i)].size();
    } else if (groups.size() == 2 || (groups.size() > 2 && groups.back().size() > 1)) {
        n_inputs = flat.size() - groups.back().size();
    } else {
        n_inputs = flat.size() - 1;
    }

    TruthTableIR ir;
    ir.inputs.assign(flat.begin(), flat.begin() + static_cast<long>(n_inputs));
    ir.outputs.assign(flat.begin() + static_cast<long>(n_inputs), flat.end());

    for (size_t li = 1; li < lines.size(); ++li) {
        const std::string where = "row " + std::to_string(li);
        auto row = tokenize_table_line(lines[li]);
        std::vector<std::string> flat_tokens;
        for (const auto& c : row.cells) flat_tokens.insert(flat_tokens.end(), c.begin(), c.end());
        if (index_column && !flat_tokens.empty()) {
            flat_tokens.erase(flat_tokens.begin());
            if (!row.cells.empty()) {
                row.cells[0].erase(row.cells[0].begin());
                if (row.cells[0].empty()) row.cells.erase(row.cells.begin());
            }
        }
        if (flat_tokens.empty()) continue;
        std::string bits;
        if (flat_tokens.size() == flat.size()) {
            for (size_t i = 0; i < flat.size(); ++i) bits += value_bits(flat_tokens[i], flat[i].width, where);
        } else if (row.cells.size() == groups.size()) {
            for (size_t g = 0; g < groups.size(); ++g) {
                std::string joined;
                for (const auto& t : row.cells[g]) joined += t;
                bits += value_bits(joined, total_width(groups[g]), where);
            }
        } else if (flat_tokens.size() == 2) {
            bits = value_bits(flat_tokens[0], ir.input_bits(), where) +
                   value_bits(flat_tokens[1], ir.output_bits(), where);
        } else {
            throw Error(ErrorCode::kWidthMismatch, where + ": " + std::to_string(flat_tokens.size()) +
                                                       " values for " + std::to_string(flat.size()) + " signals");
        }
        const auto ib = static_cast<size_t>(ir.input_bits());
        ir.rows.push_back({bits.substr(0, ib), bits.substr(ib)});
    }
    if (ir.rows.empty()) throw Error(ErrorCode::kBadHeader, "truth table has no rows");
    ir.validate();
    return ir;
}

// ----------------------------------------------------------- state tables

namespace {

struct ResetAnnotation {
    std::string state;
    std::optional<ResetKind> kind;
    std::optional<bool> active_high;
};

void read_annotation(std::string_view line, ResetAnnotation& reset, std::optional<bool>& moore,
                     std::optional<ClockEdge>& edge) {
    static const std::regex kReset(R"(reset(?:\s+state)?\s*[:=]\s*([A-Za-z_][A-Za-z0-9_]*))", std::regex::icase);
    std::string s(line);
    std::string l = text::to_lower(s);
    std::smatch m;
    if (std::regex_search(s, m, kReset)) reset.state = m[1].str();
    if (l.find("reset") != std::string::npos) {
        if (std::regex_search(l, std::regex(R"(\basync|\basynchronous)"))) reset.kind = ResetKind::kAsync;
        else if (std::regex_search(l, std::regex(R"(\bsync|\bsynchronous)"))) reset.kind = ResetKind::kSync;
        if (std::regex_search(l, std::regex(R"(active[- ]low)"))) reset.active_high = false;
        else if (std::regex_search(l, std::regex(R"(active[- ]high)"))) reset.active_high = true;
    }
    if (std::regex_search(l, std::regex(R"(\bmoore\b)"))) moore = true;
    else if (std::regex_search(l, std::regex(R"(\bmealy\b)"))) moore = false;
    if (std::regex_search(l, std::regex(R"(\bnegedge\b|falling edge)"))) edge = ClockEdge::kNeg;
    else if (std::regex_search(l, std::regex(R"(\bposedge\b|rising edge)"))) edge = ClockEdge::kPos;
}

// Strips a reset marker ("A*", "*A", "A (reset)") from a state cell.
std::string state_cell(std::string cell, bool& is_reset) {
    is_reset = false;
    cell = std::string(text::trim(cell));
    static const std::regex kMark(R"(\s*\(\s*reset\s*\)\s*$)", std::regex::icase);
    if (std::regex_search(cell, kMark)) {
        is_reset = true;
        cell = std::regex_replace(cell, kMark, "");
    }
    while (!cell.empty() && (cell.back() == '*')) {
        is_reset = true;
        cell.pop_back();
    }
    while (!cell.empty() && cell.front() == '*') {
        is_reset = true;
        cell.erase(cell.begin());
    }
    cell = std::string(text::trim(cell));
    if (!is_identifier(cell)) throw Error(ErrorCode::kBadHeader, "bad state name '" + cell + "'");
    return cell;
}

Signal last_signal(std::string_view cell) {
    static const std::regex kName(R"(([A-Za-z_][A-Za-z0-9_]*)\s*(\[\s*\d+\s*(?::\s*\d+\s*)?\])?\s*$)");
    std::string s(text::trim(cell));
    std::smatch m;
    if (!std::regex_search(s, m, kName)) throw Error(ErrorCode::kBadHeader, "cannot read signal name from '" + s + "'");
    return parse_signal_name(m[1].str() + m[2].str());
}

}  // namespace

StateTransitionIR parse_state_table(std::string_view raw) {
    ResetAnnotation reset;
    std::optional<bool> moore;
    std::optional<ClockEdge> edge;
    std::vector<std::vector<std::string>> rows;
    for (const auto& line : content_lines(raw)) {
        if (is_separator_row(line)) continue;
        if (line.find('|') == std::string::npos) {
            read_annotation(line, reset, moore, edge);
            continue;
        }
        rows.push_back(pipe_cells(line));
    }
    if (rows.size() < 2) throw Error(ErrorCode::kBadHeader, "state table needs a header and at least one row");
    const auto& header = rows[0];

    StateTransitionIR ir;
    std::vector<std::string> listed;  // first-column order
    std::string marked_reset;
    struct Pending {
        std::string cur, in, next, out;
    };
    std::vector<Pending> pending;

    // Compact Moore form: "State | Next state in=0 | Next state in=1 | Output".
    static const std::regex kNextEq(R"(next\s*state\s*[\(\[]?\s*(?:,?\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([01]+)))",
                                    std::regex::icase);
    std::vector<std::pair<size_t, std::string>> next_cols;  // (cell index, input bits)
    std::string compact_var;
    for (size_t c = 0; c < header.size(); ++c) {
        const std::string& cell = header[c];
        for (auto it = std::sregex_iterator(cell.begin(), cell.end(), kNextEq); it != std::sregex_iterator(); ++it) {
            if (!compact_var.empty() && compact_var != (*it)[1].str())
                throw Error(ErrorCode::kBadHeader, "next-state columns name different inputs");
            compact_var = (*it)[1].str();
            next_cols.emplace_back(c, (*it)[2].str());
        }
    }

    if (!next_cols.empty()) {
        const size_t width = next_cols.front().second.size();
        for (const auto& [_, bits] : next_cols)
            if (bits.size() != width) throw Error(ErrorCode::kWidthMismatch, "next-state input values differ in width");
        ir.inputs.push_back({compact_var, static_cast<int>(width)});
        const size_t last_next_cell = next_cols.back().first;
        for (size_t c = last_next_cell + 1; c < header.size(); ++c)
            for (auto& s : header_signals(header[c])) ir.outputs.push_back(s);
        ir.moore = true;
        std::map<std::string, std::string> outputs_of;
        for (size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            bool is_reset = false;
            std::string cur = state_cell(row.at(0), is_reset);
            if (is_reset) marked_reset = cur;
            listed.push_back(cur);
            // Next states: one cell per value, or all in one cell.
            std::vector<std::string> nexts;
            size_t c = 1;
            for (; c <= last_next_cell && c < row.size(); ++c)
                for (auto& t : text::split_ws(text::replace_all(row[c], ",", " "))) nexts.push_back(t);
            if (nexts.size() != next_cols.size())
                throw Error(ErrorCode::kCellCountMismatch, "state " + cur + ": expected " +
                                                               std::to_string(next_cols.size()) + " next states");
            std::string out;
            size_t oi = 0;
            for (; c < row.size() && oi < ir.outputs.size(); ++c, ++oi)
                out += value_bits(row[c], ir.outputs[oi].width, "state " + cur);
            if (oi != ir.outputs.size() || c != row.size())
                throw Error(ErrorCode::kCellCountMismatch, "state " + cur + ": wrong number of output cells");
            outputs_of[cur] = out;
            for (size_t k = 0; k < nexts.size(); ++k) {
                bool dummy = false;
                pending.push_back({cur, next_cols[k].second, state_cell(nexts[k], dummy), out});
            }
        }
        for (const auto& s : listed) ir.states.push_back(s);
        for (const auto& p : pending)
            if (ir.state_index(p.next) < 0)
                throw Error(ErrorCode::kUnknownStateReference, "next state '" + p.next + "' is not listed");
        for (const auto& s : ir.states) ir.state_outputs.push_back(outputs_of[s]);
    } else {
        int cur_col = -1, next_col = -1;
        for (size_t c = 0; c < header.size(); ++c) {
            auto l = text::to_lower(header[c]);
            if (l.find("next") != std::string::npos) {
                if (next_col < 0) next_col = static_cast<int>(c);
            } else if (l.find("state") != std::string::npos && cur_col < 0) {
                cur_col = static_cast<int>(c);
            }
        }
        if (cur_col < 0 || next_col < 0 || next_col < cur_col)
            throw Error(ErrorCode::kBadHeader, "state table header needs state and next-state columns");
        std::vector<size_t> in_cols, out_cols;
        for (size_t c = 0; c < header.size(); ++c) {
            if (static_cast<int>(c) == cur_col || static_cast<int>(c) == next_col) continue;
            auto sig = last_signal(header[c]);
            if (static_cast<int>(c) < next_col) {
                in_cols.push_back(c);
                ir.inputs.push_back(sig);
            } else {
                out_cols.push_back(c);
                ir.outputs.push_back(sig);
            }
        }
        for (size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.size() != header.size())
                throw Error(ErrorCode::kCellCountMismatch, "state table row " + std::to_string(r) + " has " +
                                                               std::to_string(row.size()) + " cells");
            bool is_reset = false;
            std::string cur = state_cell(row[static_cast<size_t>(cur_col)], is_reset);
            if (is_reset) marked_reset = cur;
            if (std::find(listed.begin(), listed.end(), cur) == listed.end()) listed.push_back(cur);
            Pending p;
            p.cur = cur;
            for (size_t k = 0; k < in_cols.size(); ++k) p.in += value_bits(row[in_cols[k]], ir.inputs[k].width, cur);
            bool dummy = false;
            p.next = state_cell(row[static_cast<size_t>(next_col)], dummy);
            for (size_t k = 0; k < out_cols.size(); ++k)
                p.out += value_bits(row[out_cols[k]], ir.outputs[k].width, cur);
            pending.push_back(std::move(p));
        }
        ir.states = listed;
        for (const auto& p : pending)
            if (ir.state_index(p.next) < 0)
                throw Error(ErrorCode::kUnknownStateReference, "next state '" + p.next + "' is not listed");
        ir.moore = moore.value_or(ir.inputs.empty());
        if (ir.moore) {
            for (const auto& s : ir.states) {
                std::string merged(static_cast<size_t>(ir.output_bits()), '-');
                for (const auto& p : pending)
                    if (p.cur == s && !detail::merge_symbols(merged, p.out))
                        throw Error(ErrorCode::kNondeterministicTransition,
                                    "Moore state '" + s + "' has conflicting outputs");
                ir.state_outputs.push_back(merged);
            }
        }
    }
    for (auto& p : pending) ir.transitions.push_back({p.cur, p.in, p.next, p.out});

    if (!reset.state.empty()) {
        ir.reset_state = reset.state;
    } else if (!marked_reset.empty()) {
        ir.reset_state = marked_reset;
    } else {
        ir.reset_state = ir.states.front();
        ir.reset_state_inferred = true;
    }
    if (reset.kind) ir.reset.kind = *reset.kind;
    if (reset.active_high) ir.reset.active_high = *reset.active_high;
    if (edge) ir.clock_edge = *edge;
    ir.validate();
    return ir;
}

// --------------------------------------------------------------- waveforms

WaveformIR parse_waveform(std::string_view raw) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& line : content_lines(raw)) {
        if (is_separator_row(line)) continue;
        auto toks = row_tokens(line);
        if (!toks.empty()) rows.push_back(std::move(toks));
    }
    if (rows.size() < 2) throw Error(ErrorCode::kBadHeader, "waveform needs at least two rows");

    WaveformIR w;
    if (is_time_name(rows[0][0]) && rows[0].size() >= 2 && is_identifier(rows[0][1])) {
        // Column-major: "time clk d q" then one line per sample.
        const auto& head = rows[0];
        for (size_t c = 1; c < head.size(); ++c) w.signals.push_back({head[c], {}});
        for (size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != head.size())
                throw Error(ErrorCode::kWidthMismatch, "waveform sample " + std::to_string(r) + " has " +
                                                           std::to_string(rows[r].size()) + " fields");
            w.time_axis.push_back(rows[r][0]);
            for (size_t c = 1; c < head.size(); ++c) w.signals[c - 1].second.push_back(rows[r][c]);
        }
    } else {
        // Row-major: "clk 0 1 0 1".
        size_t n = 0;
        for (const auto& row : rows) {
            std::string name = row[0];
            if (!name.empty() && name.back() == ':') name.pop_back();
            if (!is_identifier(name)) throw Error(ErrorCode::kBadHeader, "bad waveform signal name '" + name + "'");
            std::vector<std::string> values(row.begin() + 1, row.end());
            if (n == 0) n = values.size();
            if (values.size() != n || n == 0)
                throw Error(ErrorCode::kWidthMismatch, "waveform row '" + name + "' has " +
                                                           std::to_string(values.size()) + " samples, expected " +
                                                           std::to_string(n));
            if (is_time_name(name)) w.time_axis = std::move(values);
            else w.signals.push_back({name, std::move(values)});
        }
        if (w.time_axis.empty())
            for (size_t i = 0; i < n; ++i) w.time_axis.push_back(std::to_string(i));
    }
    for (const auto& [name, values] : w.signals) {
        if (!is_clock_name(name)) continue;
        w.clock_name = name;
        for (const auto& v : values)
            if (v != "0" && v != "1") throw Error(ErrorCode::kBadCellSymbol, "clock sample '" + v + "' is not 0 or 1");
    }
    if (w.signals.empty()) throw Error(ErrorCode::kBadHeader, "waveform has no signals");
    return w;
}

namespace {

// Bits of one sample; unknown (x/z) samples give all '-'.
std::string sample_bits(const std::string& token, int width, const std::string& name) {
    if (token == "x" || token == "X" || token == "z" || token == "Z" || token == "-")
        return std::string(static_cast<size_t>(width), '-');
    if (static_cast<int>(token.size()) == width && is_binary(token)) return token;
    if (width > 1) {
        bool hex = !token.empty();
        for (char c : token) hex = hex && std::isxdigit(static_cast<unsigned char>(c));
        if (hex) {
            unsigned long long v = std::stoull(token, nullptr, 16);
            if (width < 64 && v >> width)
                throw Error(ErrorCode::kWidthMismatch, "sample '" + token + "' of " + name + " is too wide");
            std::string out;
            for (int i = width - 1; i >= 0; --i) out.push_back(((v >> i) & 1) ? '1' : '0');
            return out;
        }
    }
    throw Error(ErrorCode::kBadCellSymbol, "bad sample '" + token + "' for " + name);
}

bool known(std::string_view bits) { return bits.find('-') == std::string_view::npos; }

}  // namespace

ConvertedIR waveform_to_ir(const WaveformIR& w, const std::vector<std::string>& output_names,
                           const std::map<std::string, int>& widths) {
    auto width_of = [&](const std::string& n) {
        auto it = widths.find(n);
        return it == widths.end() ? 1 : it->second;
    };
    std::vector<Signal> inputs, outputs;
    for (const auto& o : output_names) {
        if (!w.find(o)) throw Error(ErrorCode::kPortMismatch, "output '" + o + "' is not in the waveform");
        outputs.push_back({o, width_of(o)});
    }
    if (outputs.empty()) throw Error(ErrorCode::kBadHeader, "waveform conversion needs at least one output");
    for (const auto& [name, _] : w.signals) {
        if (name == w.clock_name) continue;
        if (std::find(output_names.begin(), output_names.end(), name) != output_names.end()) continue;
        inputs.push_back({name, width_of(name)});
    }
    const size_t n = w.signals.front().second.size();
    auto bits_at = [&](const std::vector<Signal>& sigs, size_t k) {
        std::string out;
        for (const auto& s : sigs) out += sample_bits(w.find(s.name)->at(k), s.width, s.name);
        return out;
    };

    if (w.clock_name.empty()) {
        if (inputs.empty()) throw Error(ErrorCode::kBadHeader, "combinational waveform has no inputs");
        TruthTableIR ir;
        ir.inputs = inputs;
        ir.outputs = outputs;
        std::map<std::string, std::string> seen;
        std::vector<std::string> order;
        for (size_t k = 0; k < n; ++k) {
            auto in = bits_at(inputs, k);
            if (!known(in)) continue;
            auto out = bits_at(outputs, k);
            auto [it, fresh] = seen.emplace(in, out);
            if (fresh) {
                order.push_back(in);
            } else if (!detail::merge_symbols(it->second, out)) {
                throw Error(ErrorCode::kContradictorySamples,
                            "input " + in + " is sampled with different outputs at " + w.time_axis.at(k));
            }
        }
        for (const auto& in : order) ir.rows.push_back({in, seen[in]});
        if (ir.rows.empty()) throw Error(ErrorCode::kContradictorySamples, "no fully known input samples");
        ir.validate();
        return ir;
    }

    const auto& clk = *w.find(w.clock_name);
    StateTransitionIR ir;
    ir.inputs = inputs;
    ir.outputs = outputs;
    ir.clock_name = w.clock_name;
    ir.reset_name.clear();
    ir.moore = true;
    std::map<std::pair<std::string, std::string>, std::string> next_of;
    std::vector<std::pair<std::string, std::string>> order;
    auto add_state = [&](const std::string& bits) {
        std::string name = "Q" + bits;
        if (ir.state_index(name) < 0) {
            ir.states.push_back(name);
            ir.state_outputs.push_back(bits);
        }
        return name;
    };
    for (size_t k = 0; k + 1 < n; ++k) {
        if (clk[k] != "0" || clk[k + 1] != "1") continue;
        auto before = bits_at(outputs, k);
        auto in = bits_at(inputs, k);
        auto after = bits_at(outputs, k + 1);
        if (!known(before) || !known(in) || !known(after)) continue;
        auto cur = add_state(before);
        auto next = add_state(after);
        auto [it, fresh] = next_of.emplace(std::make_pair(cur, in), next);
        if (fresh) {
            order.emplace_back(cur, in);
        } else if (it->second != next) {
            throw Error(ErrorCode::kContradictorySamples, "state " + cur + " under input " + in +
                                                              " moves to both " + it->second + " and " + next);
        }
    }
    if (order.empty()) throw Error(ErrorCode::kContradictorySamples, "no rising clock edge with known samples");
    for (const auto& key : order) {
        const auto& cur = key.first;
        ir.transitions.push_back({cur, key.second, next_of[key], cur.substr(1)});
    }
    ir.reset_state = ir.transitions.front().current;
    ir.reset_state_inferred = true;
    ir.validate();
    return ir;
}

// ---------------------------------------------------------------- detect

namespace {

bool is_label_line(const std::string& content) {
    auto toks = text::split_ws(content);
    if (toks.size() < 3) return false;
    if (toks[0].find('\\') == std::string::npos && !is_identifier(toks[0])) return false;
    for (size_t i = 1; i < toks.size(); ++i)
        if (!is_binary(toks[i]) || toks[i].size() != toks[1].size()) return false;
    return true;
}

BlockKind classify_grid(const std::vector<std::string>& contents) {
    const std::string& head = contents.front();
    if (head.find('\\') != std::string::npos) return BlockKind::kKmap;
    if (head.find('|') == std::string::npos && contents.size() > 1 && is_label_line(contents[1])) return BlockKind::kKmap;
    if (is_label_line(head) && head.find('|') == std::string::npos) return BlockKind::kKmap;
    auto l = text::to_lower(head);
    if (l.find("state") != std::string::npos && l.find("next") != std::string::npos) return BlockKind::kStateTable;
    auto first = pipe_cells(head);
    if (!first.empty() && is_time_name(first[0])) return BlockKind::kWaveform;
    for (const auto& c : contents) {
        auto cells = pipe_cells(c);
        if (!cells.empty() && is_clock_name(cells[0]) && cells.size() > 2) return BlockKind::kWaveform;
    }
    return BlockKind::kTruthTable;
}

bool is_waveform_row(const std::string& content, size_t& count) {
    auto toks = text::split_ws(content);
    if (toks.size() < 3) return false;
    std::string name = toks[0];
    if (name.back() == ':') name.pop_back();
    if (!is_identifier(name)) return false;
    for (size_t i = 1; i < toks.size(); ++i)
        if (!is_value_token(toks[i]) || toks[i].size() > 8) return false;
    count = toks.size();
    return true;
}

bool is_column_waveform_header(const std::string& content) {
    auto toks = text::split_ws(content);
    if (toks.size() < 2 || !is_time_name(toks[0])) return false;
    for (size_t i = 1; i < toks.size(); ++i)
        if (!is_identifier(toks[i])) return false;
    return true;
}

bool all_value_tokens(const std::string& content, size_t count, bool first_is_time) {
    auto toks = text::split_ws(content);
    if (toks.size() != count) return false;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (i == 0 && first_is_time) {
            if (!std::isdigit(static_cast<unsigned char>(toks[0][0]))) return false;
        } else if (!is_value_token(toks[i])) {
            return false;
        }
    }
    return true;
}

bool is_plain_table_header(const std::string& content, size_t& count) {
    auto toks = text::split_ws(content);
    size_t names = 0;
    for (const auto& t : toks) {
        if (is_split_token(t)) continue;
        if (!is_identifier(t) || t.size() > 12) return false;
        ++names;
    }
    count = toks.size();
    return names >= 2;
}

bool is_plain_table_row(const std::string& content, size_t count) {
    auto toks = text::split_ws(content);
    if (toks.size() != count) return false;
    for (const auto& t : toks) {
        if (is_split_token(t)) continue;
        for (char c : t)
            if (c != '0' && c != '1' && c != 'x' && c != 'X' && c != '-') return false;
    }
    return true;
}

}  // namespace

std::vector<MultimodalBlock> detect(std::string_view description) {
    auto lines = split_with_offsets(description);
    std::vector<bool> used(lines.size(), false);
    struct Span {
        size_t first, last;
        BlockKind kind;
    };
    std::vector<Span> spans;

    // Pipe grids, plus K-map label lines directly above them.
    for (size_t i = 0; i < lines.size();) {
        if (lines[i].content.find('|') == std::string::npos) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < lines.size() && lines[j].content.find('|') != std::string::npos) ++j;
        size_t first = i;
        if (first > 0 && is_label_line(lines[first - 1].content)) {
            --first;
            if (first > 0 && text::split_ws(lines[first - 1].content).size() == 1 &&
                is_identifier(lines[first - 1].content))
                --first;
        }
        // Keep state-table annotations such as "reset: A" that directly follow.
        size_t last = j - 1;
        if (j - i >= 2) {
            std::vector<std::string> contents;
            for (size_t k = first; k <= last; ++k) contents.push_back(lines[k].content);
            auto kind = classify_grid(contents);
            if (kind == BlockKind::kStateTable) {
                while (last + 1 < lines.size() && !lines[last + 1].content.empty() &&
                       std::regex_search(lines[last + 1].content,
                                         std::regex(R"(^(reset|moore|mealy|clock)\b)", std::regex::icase)))
                    ++last;
            }
            spans.push_back({first, last, kind});
            for (size_t k = first; k <= last; ++k) used[k] = true;
        }
        i = std::max(j, last + 1);
    }

    for (size_t i = 0; i < lines.size(); ++i) {
        if (used[i]) continue;
        size_t count = 0;
        // Column-major waveform.
        if (is_column_waveform_header(lines[i].content)) {
            count = text::split_ws(lines[i].content).size();
            size_t j = i + 1;
            while (j < lines.size() && !used[j] && all_value_tokens(lines[j].content, count, true)) ++j;
            if (j - i >= 3) {
                spans.push_back({i, j - 1, BlockKind::kWaveform});
                for (size_t k = i; k < j; ++k) used[k] = true;
                i = j - 1;
                continue;
            }
        }
        // Row-major waveform.
        if (is_waveform_row(lines[i].content, count)) {
            size_t j = i, c = 0;
            bool clocked = false;
            while (j < lines.size() && !used[j] && is_waveform_row(lines[j].content, c) && c == count) {
                auto name = text::split_ws(lines[j].content)[0];
                if (name.back() == ':') name.pop_back();
                clocked = clocked || is_clock_name(name) || is_time_name(name);
                ++j;
            }
            if (j - i >= 2 && clocked) {
                spans.push_back({i, j - 1, BlockKind::kWaveform});
                for (size_t k = i; k < j; ++k) used[k] = true;
                i = j - 1;
                continue;
            }
        }
        // Whitespace truth table.
        if (is_plain_table_header(lines[i].content, count)) {
            size_t j = i + 1;
            while (j < lines.size() && !used[j] && is_plain_table_row(lines[j].content, count)) ++j;
            if (j - i >= 3) {
                spans.push_back({i, j - 1, BlockKind::kTruthTable});
                for (size_t k = i; k < j; ++k) used[k] = true;
                i = j - 1;
            }
        }
    }

    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.first < b.first; });
    std::vector<MultimodalBlock> out;
    for (const auto& s : spans) {
        MultimodalBlock b;
        b.kind = s.kind;
        b.start = lines[s.first].start;
        b.end = lines[s.last].end;
        b.raw = std::string(description.substr(b.start, b.end - b.start));
        out.push_back(std::move(b));
    }
    return out;
}

// ------------------------------------------------------------- interfaces

void apply_interface_conventions(StateTransitionIR& ir, const verilog::ModuleInterface& iface) {
    if (!iface.find(ir.clock_name)) {
        for (const char* c : {"clk", "clock", "CLK", "i_clk"})
            if (iface.find(c)) {
                ir.clock_name = c;
                break;
            }
    }
    if (ir.reset_name.empty()) return;
    struct Convention {
        const char* name;
        std::optional<ResetKind> kind;
        bool active_high;
    };
    static const Convention kConventions[] = {
        {"areset", ResetKind::kAsync, true},   {"arst", ResetKind::kAsync, true},
        {"aresetn", ResetKind::kAsync, false}, {"areset_n", ResetKind::kAsync, false},
        {"arst_n", ResetKind::kAsync, false},  {"reset", std::nullopt, true},
        {"rst", std::nullopt, true},           {"resetn", std::nullopt, false},
        {"reset_n", std::nullopt, false},      {"rst_n", std::nullopt, false},
    };
    for (const auto& c : kConventions) {
        if (!iface.find(c.name)) continue;
        ir.reset_name = c.name;
        if (c.kind) ir.reset.kind = *c.kind;
        ir.reset.active_high = c.active_high;
        return;
    }
    ir.reset_name.clear();
}

namespace {

// Renames a lone unmatched IR signal to the lone unmatched port of the same
// direction and width.
void align_names(std::vector<Signal>& sigs, const std::vector<const verilog::Port*>& ports,
                 const std::set<std::string>& reserved) {
    std::vector<Signal*> unmatched;
    std::set<std::string> taken;
    for (auto& s : sigs) {
        bool found = false;
        for (const auto* p : ports) found = found || p->name == s.name;
        if (found) taken.insert(s.name);
        else unmatched.push_back(&s);
    }
    std::vector<const verilog::Port*> free_ports;
    for (const auto* p : ports)
        if (!taken.count(p->name) && !reserved.count(p->name)) free_ports.push_back(p);
    if (unmatched.size() == 1 && free_ports.size() == 1 && free_ports[0]->width() == unmatched[0]->width)
        unmatched[0]->name = free_ports[0]->name;
}

}  // namespace

ConvertedIR convert_block(const MultimodalBlock& block, const verilog::ModuleInterface& iface) {
    std::set<std::string> reserved;
    auto outputs = iface.outputs();
    auto inputs = iface.inputs();
    switch (block.kind) {
        case BlockKind::kKmap: {
            auto ir = parse_kmap(block.raw, outputs.size() == 1 ? outputs[0]->name : "out");
            return ir;
        }
        case BlockKind::kTruthTable: {
            auto ir = parse_truth_table(block.raw);
            align_names(ir.outputs, outputs, reserved);
            align_names(ir.inputs, inputs, reserved);
            return ir;
        }
        case BlockKind::kStateTable: {
            auto ir = parse_state_table(block.raw);
            apply_interface_conventions(ir, iface);
            reserved = {ir.clock_name, ir.reset_name};
            align_names(ir.outputs, outputs, reserved);
            align_names(ir.inputs, inputs, reserved);
            return ir;
        }
        case BlockKind::kWaveform: {
            auto w = parse_waveform(block.raw);
            std::vector<std::string> names;
            std::map<std::string, int> widths;
            for (const auto& p : iface.ports) widths[p.name] = p.width();
            for (const auto* p : outputs)
                if (w.find(p->name)) names.push_back(p->name);
            if (names.empty() && !w.signals.empty()) names.push_back(w.signals.back().first);
            return waveform_to_ir(w, names, widths);
        }
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown block kind");
}

}  // namespace rtlforge::mm
