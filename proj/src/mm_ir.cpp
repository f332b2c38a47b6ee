#include <algorithm>
#include <set>

#include "mm_cubes.hpp"
#include "rtlforge/error.hpp"
#include "rtlforge/multimodal.hpp"
#include "rtlforge/text.hpp"

namespace rtlforge::mm {

using detail::intersects;
using detail::is_pattern;
using detail::merge_symbols;

int total_width(const std::vector<Signal>& signals) {
    int n = 0;
    for (const auto& s : signals) n += s.width;
    return n;
}

namespace {

void check_signals(const std::vector<Signal>& signals, const char* what) {
    std::set<std::string> names;
    for (const auto& s : signals) {
        if (s.name.empty()) throw Error(ErrorCode::kBadHeader, std::string(what) + " signal without a name");
        if (s.width < 1) throw Error(ErrorCode::kWidthMismatch, "signal '" + s.name + "' has width < 1");
        if (!names.insert(s.name).second)
            throw Error(ErrorCode::kBadHeader, "signal '" + s.name + "' declared twice");
    }
}

void check_pattern(std::string_view p, int width, const std::string& where) {
    if (static_cast<int>(p.size()) != width)
        throw Error(ErrorCode::kWidthMismatch, where + ": expected " + std::to_string(width) + " bits, got '" +
                                                   std::string(p) + "'");
    if (!is_pattern(p)) throw Error(ErrorCode::kBadCellSymbol, where + ": bad symbol in '" + std::string(p) + "'");
}

std::string signal_list(const std::vector<Signal>& signals) {
    std::vector<std::string> parts;
    for (const auto& s : signals)
        parts.push_back(s.width == 1 ? s.name : s.name + "[" + std::to_string(s.width - 1) + ":0]");
    return text::join(parts, ",");
}

std::string zero_dont_cares(std::string s) {
    std::replace(s.begin(), s.end(), '-', '0');
    return s;
}

}  // namespace

void TruthTableIR::validate() const {
    if (inputs.empty()) throw Error(ErrorCode::kBadHeader, "truth table has no inputs");
    if (outputs.empty()) throw Error(ErrorCode::kBadHeader, "truth table has no outputs");
    check_signals(inputs, "input");
    check_signals(outputs, "output");
    const int ib = input_bits(), ob = output_bits();
    for (size_t i = 0; i < rows.size(); ++i) {
        check_pattern(rows[i].inputs, ib, "row " + std::to_string(i + 1) + " inputs");
        check_pattern(rows[i].outputs, ob, "row " + std::to_string(i + 1) + " outputs");
    }
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = i + 1; j < rows.size(); ++j) {
            if (!intersects(rows[i].inputs, rows[j].inputs)) continue;
            std::string merged = rows[i].outputs;
            if (!merge_symbols(merged, rows[j].outputs))
                throw Error(ErrorCode::kInconsistentRows, "rows " + std::to_string(i + 1) + " (" + rows[i].inputs +
                                                              ") and " + std::to_string(j + 1) + " (" +
                                                              rows[j].inputs + ") disagree");
        }
    }
}

std::string specified_outputs(const TruthTableIR& ir, std::string_view assignment) {
    if (static_cast<int>(assignment.size()) != ir.input_bits())
        throw Error(ErrorCode::kWidthMismatch, "assignment width differs from the table's inputs");
    std::string out(static_cast<size_t>(ir.output_bits()), '-');
    for (const auto& row : ir.rows) {
        if (!detail::matches(row.inputs, assignment)) continue;
        if (!merge_symbols(out, row.outputs))
            throw Error(ErrorCode::kInconsistentRows, "rows disagree at " + std::string(assignment));
    }
    return out;
}

int StateTransitionIR::state_index(std::string_view name) const {
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i] == name) return static_cast<int>(i);
    return -1;
}

void StateTransitionIR::validate() const {
    if (states.empty()) throw Error(ErrorCode::kBadHeader, "state machine has no states");
    std::set<std::string> seen;
    for (const auto& s : states) {
        if (s.empty()) throw Error(ErrorCode::kBadHeader, "empty state name");
        if (!seen.insert(s).second) throw Error(ErrorCode::kBadHeader, "state '" + s + "' listed twice");
    }
    if (state_index(reset_state) < 0)
        throw Error(ErrorCode::kUnknownStateReference, "reset state '" + reset_state + "' is not a state");
    check_signals(inputs, "input");
    check_signals(outputs, "output");
    if (clock_name.empty()) throw Error(ErrorCode::kBadHeader, "state machine needs a clock");
    const int ib = input_bits(), ob = output_bits();
    for (size_t i = 0; i < transitions.size(); ++i) {
        const auto& t = transitions[i];
        const std::string where = "transition " + std::to_string(i + 1);
        if (state_index(t.current) < 0)
            throw Error(ErrorCode::kUnknownStateReference, where + ": unknown state '" + t.current + "'");
        if (state_index(t.next) < 0)
            throw Error(ErrorCode::kUnknownStateReference, where + ": unknown next state '" + t.next + "'");
        check_pattern(t.inputs, ib, where + " inputs");
        check_pattern(t.outputs, ob, where + " outputs");
    }
    if (moore) {
        if (state_outputs.size() != states.size())
            throw Error(ErrorCode::kWidthMismatch, "Moore machine needs one output pattern per state");
        for (size_t i = 0; i < states.size(); ++i) check_pattern(state_outputs[i], ob, "outputs of " + states[i]);
    }
    for (size_t i = 0; i < transitions.size(); ++i) {
        for (size_t j = i + 1; j < transitions.size(); ++j) {
            const auto& a = transitions[i];
            const auto& b = transitions[j];
            if (a.current != b.current || !intersects(a.inputs, b.inputs)) continue;
            std::string merged = a.outputs;
            if (a.next != b.next || !merge_symbols(merged, b.outputs))
                throw Error(ErrorCode::kNondeterministicTransition,
                            "state '" + a.current + "' under input " + (a.inputs.empty() ? "-" : a.inputs) +
                                " has conflicting transitions");
        }
    }
}

FsmInterpreter::FsmInterpreter(const StateTransitionIR& ir) : ir_(ir) {
    ir_.validate();
    reset();
}

void FsmInterpreter::reset() { state_ = ir_.reset_state; }

std::string FsmInterpreter::outputs(std::string_view inputs) const {
    if (static_cast<int>(inputs.size()) != ir_.input_bits())
        throw Error(ErrorCode::kWidthMismatch, "input vector width differs from the machine's inputs");
    if (ir_.moore) return zero_dont_cares(ir_.state_outputs[static_cast<size_t>(ir_.state_index(state_))]);
    std::string out(static_cast<size_t>(ir_.output_bits()), '-');
    for (const auto& t : ir_.transitions)
        if (t.current == state_ && detail::matches(t.inputs, inputs)) merge_symbols(out, t.outputs);
    return zero_dont_cares(out);
}

std::string FsmInterpreter::step(std::string_view inputs) {
    std::string out = outputs(inputs);
    for (const auto& t : ir_.transitions) {
        if (t.current == state_ && detail::matches(t.inputs, inputs)) {
            state_ = t.next;
            break;
        }
    }
    return out;
}

const std::vector<std::string>* WaveformIR::find(std::string_view name) const {
    for (const auto& [n, values] : signals)
        if (n == name) return &values;
    return nullptr;
}

std::string_view to_string(BlockKind k) {
    switch (k) {
        case BlockKind::kKmap: return "kmap";
        case BlockKind::kTruthTable: return "truth_table";
        case BlockKind::kStateTable: return "state_table";
        case BlockKind::kWaveform: return "waveform";
    }
    return "unknown";
}

std::string render(const TruthTableIR& ir) {
    std::string out = "TRUTH TABLE(inputs=" + signal_list(ir.inputs) + "; outputs=" + signal_list(ir.outputs) + ")\n";
    for (const auto& r : ir.rows) out += r.inputs + " -> " + r.outputs + "\n";
    return out;
}

std::string render(const StateTransitionIR& ir) {
    std::string out = "STATE MACHINE(states=" + text::join(ir.states, ",") + "; reset=" + ir.reset_state;
    if (ir.reset_name.empty()) {
        out += " (initial)";
    } else {
        out += std::string(" (") + (ir.reset.kind == ResetKind::kAsync ? "async" : "sync") + ", " +
               (ir.reset.active_high ? "active-high " : "active-low ") + ir.reset_name + ")";
    }
    out += std::string("; clock=") + (ir.clock_edge == ClockEdge::kPos ? "posedge " : "negedge ") + ir.clock_name;
    out += "; inputs=" + signal_list(ir.inputs) + "; outputs=" + signal_list(ir.outputs);
    out += ir.moore ? "; moore)\n" : "; mealy)\n";
    if (ir.moore)
        for (size_t i = 0; i < ir.states.size(); ++i) out += "OUTPUT " + ir.states[i] + " = " + ir.state_outputs[i] + "\n";
    for (const auto& t : ir.transitions) {
        out += "STATE " + t.current + " | " + (t.inputs.empty() ? "-" : t.inputs) + " -> " + t.next;
        if (!ir.moore) out += " | " + t.outputs;
        out += "\n";
    }
    return out;
}

std::string render(const ConvertedIR& ir) {
    return std::visit([](const auto& v) { return render(v); }, ir);
}

std::string rewrite_description(std::string_view description,
                                const std::vector<std::pair<MultimodalBlock, ConvertedIR>>& blocks) {
    std::vector<const std::pair<MultimodalBlock, ConvertedIR>*> order;
    for (const auto& b : blocks) order.push_back(&b);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->first.start < b->first.start; });
    std::string out;
    size_t pos = 0;
    for (const auto* b : order) {
        const auto& blk = b->first;
        if (blk.start > blk.end || blk.end > description.size())
            throw Error(ErrorCode::kOverlapError, "block span lies outside the description");
        if (blk.start < pos) throw Error(ErrorCode::kOverlapError, "multimodal blocks overlap");
        out.append(description.substr(pos, blk.start - pos));
        std::string rendered = render(b->second);
        while (!rendered.empty() && rendered.back() == '\n') rendered.pop_back();
        out += rendered;
        pos = blk.end;
    }
    out.append(description.substr(pos));
    return out;
}

}  // namespace rtlforge::mm
