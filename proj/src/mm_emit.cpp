#include <algorithm>
#include <functional>
#include <set>

#include "mm_cubes.hpp"
#include "rtlforge/error.hpp"
#include "rtlforge/multimodal.hpp"
#include "rtlforge/text.hpp"

namespace rtlforge::mm {

namespace {

using verilog::ModuleInterface;
using verilog::Port;

void require_port(const ModuleInterface& iface, const Signal& s, Port::Direction dir) {
    const Port* p = iface.find(s.name);
    const char* what = dir == Port::Direction::kInput ? "input" : "output";
    if (!p) throw Error(ErrorCode::kPortMismatch, std::string(what) + " '" + s.name + "' is not a module port");
    if (p->direction != dir)
        throw Error(ErrorCode::kPortMismatch, "port '" + s.name + "' is not an " + std::string(what));
    if (p->width() != s.width)
        throw Error(ErrorCode::kPortMismatch, "port '" + s.name + "' is " + std::to_string(p->width()) +
                                                  " bits wide, the table uses " + std::to_string(s.width));
}

std::string concat(const std::vector<Signal>& sigs) {
    if (sigs.size() == 1) return sigs[0].name;
    std::vector<std::string> names;
    for (const auto& s : sigs) names.push_back(s.name);
    return "{" + text::join(names, ", ") + "}";
}

std::string literal(std::string_view bits, char dont_care) {
    std::string b(bits);
    std::replace(b.begin(), b.end(), '-', dont_care);
    return std::to_string(bits.size()) + "'b" + b;
}

std::string decl_range(int width) { return width == 1 ? "" : "[" + std::to_string(width - 1) + ":0] "; }

// An internal name that does not collide with any port.
std::string internal_name(const ModuleInterface& iface, const std::string& base) {
    std::string name = base;
    for (int i = 1; iface.find(name); ++i) name = base + "_" + std::to_string(i);
    return name;
}

std::string module_header(const ModuleInterface& iface, const std::string& module_name) {
    ModuleInterface named = iface;
    if (!module_name.empty()) named.name = module_name;
    return verilog::render_header(named);
}

// Output ports the IR does not drive are tied to zero.
std::string tie_off(const ModuleInterface& iface, const std::vector<Signal>& driven) {
    std::string out;
    for (const auto* p : iface.outputs()) {
        bool used = std::any_of(driven.begin(), driven.end(), [&](const Signal& s) { return s.name == p->name; });
        if (!used) out += "    assign " + p->name + " = " + std::to_string(p->width()) + "'b0;\n";
    }
    return out;
}

}  // namespace

std::string emit_verilog(const TruthTableIR& ir, const std::string& module_name, const ModuleInterface& iface) {
    ir.validate();
    for (const auto& s : ir.inputs) require_port(iface, s, Port::Direction::kInput);
    for (const auto& s : ir.outputs) require_port(iface, s, Port::Direction::kOutput);

    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& r : ir.rows) rows.emplace_back(r.inputs, r.outputs);
    auto cover = detail::disjoint_cover<std::string>(rows, [](const std::string& a, const std::string& b) {
        std::string m = a;
        if (!detail::merge_symbols(m, b)) throw Error(ErrorCode::kInconsistentRows, "overlapping rows disagree");
        return m;
    });

    const int ob = ir.output_bits();
    const std::string out = internal_name(iface, "rf_out");
    std::string v = module_header(iface, module_name);
    v += "    reg " + decl_range(ob) + out + ";\n";
    v += "    assign " + concat(ir.outputs) + " = " + out + ";\n";
    v += tie_off(iface, ir.outputs);
    v += "\n    always @(*) begin\n";
    v += "        casez (" + concat(ir.inputs) + ")\n";
    for (const auto& [cube, value] : cover) {
        // The default branch already drives zero.
        if (value.find('1') == std::string::npos) continue;
        v += "            " + literal(cube, '?') + ": " + out + " = " + literal(value, '0') + ";\n";
    }
    v += "            default: " + out + " = " + std::to_string(ob) + "'b0;\n";
    v += "        endcase\n    end\nendmodule\n";
    return v;
}

std::string emit_verilog(const StateTransitionIR& ir, const std::string& module_name, const ModuleInterface& iface) {
    ir.validate();
    for (const auto& s : ir.inputs) require_port(iface, s, Port::Direction::kInput);
    for (const auto& s : ir.outputs) require_port(iface, s, Port::Direction::kOutput);
    require_port(iface, {ir.clock_name, 1}, Port::Direction::kInput);
    if (!ir.reset_name.empty()) require_port(iface, {ir.reset_name, 1}, Port::Direction::kInput);

    const int n = static_cast<int>(ir.states.size());
    int bits = 1;
    while ((1 << bits) < n) ++bits;
    const int ob = ir.output_bits();
    const std::string state = internal_name(iface, "rf_state");
    const std::string next = internal_name(iface, "rf_next");
    const std::string out = internal_name(iface, "rf_out");
    auto code = [&](const std::string& s) { return internal_name(iface, "RF_S" + std::to_string(ir.state_index(s))); };

    std::string v = module_header(iface, module_name);
    for (int i = 0; i < n; ++i)
        v += "    localparam " + decl_range(bits) + code(ir.states[static_cast<size_t>(i)]) + " = " +
             std::to_string(bits) + "'d" + std::to_string(i) + ";  // " + ir.states[static_cast<size_t>(i)] + "\n";
    v += "\n    reg " + decl_range(bits) + state;
    if (ir.reset_name.empty()) v += " = " + code(ir.reset_state);
    v += ";\n    reg " + decl_range(bits) + next + ";\n";
    if (ob > 0) {
        v += "    reg " + decl_range(ob) + out + ";\n";
        v += "    assign " + concat(ir.outputs) + " = " + out + ";\n";
    }
    v += tie_off(iface, ir.outputs);

    // State register.
    const std::string edge = (ir.clock_edge == ClockEdge::kPos ? "posedge " : "negedge ") + ir.clock_name;
    if (ir.reset_name.empty()) {
        v += "\n    always @(" + edge + ") begin\n        " + state + " <= " + next + ";\n    end\n";
    } else {
        const std::string cond = ir.reset.active_high ? ir.reset_name : "!" + ir.reset_name;
        std::string sens = edge;
        if (ir.reset.kind == ResetKind::kAsync)
            sens += std::string(" or ") + (ir.reset.active_high ? "posedge " : "negedge ") + ir.reset_name;
        v += "\n    always @(" + sens + ") begin\n";
        v += "        if (" + cond + ") " + state + " <= " + code(ir.reset_state) + ";\n";
        v += "        else " + state + " <= " + next + ";\n    end\n";
    }

    // Next state and outputs.
    v += "\n    always @(*) begin\n";
    v += "        " + next + " = " + state + ";\n";
    if (ob > 0) v += "        " + out + " = " + std::to_string(ob) + "'b0;\n";
    v += "        case (" + state + ")\n";
    for (int i = 0; i < n; ++i) {
        const std::string& s = ir.states[static_cast<size_t>(i)];
        std::vector<std::pair<std::string, std::pair<std::string, std::string>>> rows;
        for (const auto& t : ir.transitions)
            if (t.current == s) rows.push_back({t.inputs, {t.next, ir.moore ? std::string() : t.outputs}});
        auto cover = detail::disjoint_cover<std::pair<std::string, std::string>>(
            rows, [](const auto& a, const auto& b) {
                auto m = a;
                if (a.first != b.first || !detail::merge_symbols(m.second, b.second))
                    throw Error(ErrorCode::kNondeterministicTransition, "overlapping transitions disagree");
                return m;
            });
        v += "            " + code(s) + ": begin\n";
        if (ir.moore && ob > 0)
            v += "                " + out + " = " + literal(ir.state_outputs[static_cast<size_t>(i)], '0') + ";\n";
        auto assignments = [&](const std::pair<std::string, std::string>& val) {
            std::string a = next + " = " + code(val.first) + ";";
            if (!ir.moore && ob > 0) a += " " + out + " = " + literal(val.second, '0') + ";";
            return a;
        };
        if (ir.inputs.empty()) {
            if (!cover.empty()) v += "                " + assignments(cover.front().second) + "\n";
        } else if (!cover.empty()) {
            v += "                casez (" + concat(ir.inputs) + ")\n";
            for (const auto& [cube, val] : cover)
                v += "                    " + literal(cube, '?') + ": begin " + assignments(val) + " end\n";
            v += "                    default: ;\n                endcase\n";
        }
        v += "            end\n";
    }
    if ((1 << bits) != n) v += "            default: " + next + " = " + code(ir.reset_state) + ";\n";
    v += "        endcase\n    end\nendmodule\n";
    return v;
}

std::string emit_verilog(const ConvertedIR& ir, const std::string& module_name, const ModuleInterface& iface) {
    return std::visit([&](const auto& v) { return emit_verilog(v, module_name, iface); }, ir);
}

}  // namespace rtlforge::mm
