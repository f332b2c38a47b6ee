#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rtlforge/verilog_interface.hpp"

// Multimodal design data (K-maps, truth tables, state tables, textual
// waveforms) and the truth-table style intermediate representations they are
// converted into.
//
// Bit patterns are strings over {'0','1','-'}; '-' is a don't-care. A
// pattern is the concatenation of its signals in declaration order, each
// signal written MSB first.
namespace rtlforge::mm {

struct Signal {
    std::string name;
    int width = 1;

    bool operator==(const Signal&) const = default;
};

int total_width(const std::vector<Signal>& signals);

struct TruthRow {
    std::string inputs;
    std::string outputs;

    bool operator==(const TruthRow&) const = default;
    bool operator<(const TruthRow& o) const {
        return inputs != o.inputs ? inputs < o.inputs : outputs < o.outputs;
    }
};

struct TruthTableIR {
    std::vector<Signal> inputs;
    std::vector<Signal> outputs;
    std::vector<TruthRow> rows;

    int input_bits() const { return total_width(inputs); }
    int output_bits() const { return total_width(outputs); }

    /// Throws kWidthMismatch, kBadCellSymbol or kInconsistentRows.
    void validate() const;
};

/// Output symbols specified for one fully-specified input assignment: the
/// merge of every matching row, '-' where no row specifies a bit.
std::string specified_outputs(const TruthTableIR& ir, std::string_view assignment);

enum class ResetKind { kSync, kAsync };
enum class ClockEdge { kPos, kNeg };

struct ResetSpec {
    ResetKind kind = ResetKind::kSync;
    bool active_high = true;

    bool operator==(const ResetSpec&) const = default;
};

struct Transition {
    std::string current;
    std::string inputs;
    std::string next;
    std::string outputs;

    bool operator==(const Transition&) const = default;
};

struct StateTransitionIR {
    std::vector<std::string> states;
    std::string reset_state;
    bool reset_state_inferred = false;  // taken from the first listed state
    ResetSpec reset;
    ClockEdge clock_edge = ClockEdge::kPos;
    std::string clock_name = "clk";
    /// Empty when the machine has no reset port; the state register then
    /// starts in reset_state.
    std::string reset_name = "reset";
    std::vector<Signal> inputs;
    std::vector<Signal> outputs;
    std::vector<Transition> transitions;
    bool moore = false;
    /// Moore machines: outputs per state, parallel to `states`.
    std::vector<std::string> state_outputs;

    int input_bits() const { return total_width(inputs); }
    int output_bits() const { return total_width(outputs); }
    int state_index(std::string_view name) const;

    /// Throws kUnknownStateReference, kNondeterministicTransition, kWidthMismatch.
    void validate() const;
};

/// Steps a StateTransitionIR directly from its transition list. A
/// (state, input) pair covered by no transition holds its state and drives
/// all-zero Mealy outputs; don't-care output bits read as 0.
class FsmInterpreter {
public:
    explicit FsmInterpreter(const StateTransitionIR& ir);

    void reset();
    const std::string& state() const { return state_; }
    /// Output bits for the current state and `inputs` (before the clock edge).
    std::string outputs(std::string_view inputs) const;
    /// Returns outputs() and then advances one clock edge.
    std::string step(std::string_view inputs);

private:
    const StateTransitionIR& ir_;
    std::string state_;
};

struct WaveformIR {
    std::vector<std::string> time_axis;
    /// Signals in listing order.
    std::vector<std::pair<std::string, std::vector<std::string>>> signals;
    /// Empty when the listing has no clock row (combinational sampling).
    std::string clock_name;

    const std::vector<std::string>* find(std::string_view name) const;
};

enum class BlockKind { kKmap, kTruthTable, kStateTable, kWaveform };
std::string_view to_string(BlockKind k);

struct MultimodalBlock {
    BlockKind kind = BlockKind::kTruthTable;
    size_t start = 0;  // character offsets into the description, [start, end)
    size_t end = 0;
    std::string raw;
};

using ConvertedIR = std::variant<TruthTableIR, StateTransitionIR>;

std::vector<MultimodalBlock> detect(std::string_view description);

/// Each cell becomes one row; Gray labels are used verbatim as variable
/// values. Inputs are the row variables followed by the column variables.
TruthTableIR parse_kmap(std::string_view raw, const std::string& output_name = "out");

/// True iff `labels` are distinct, equally wide binary strings and
/// consecutive labels (cyclically) differ in exactly one bit.
bool is_gray_sequence(const std::vector<std::string>& labels);

TruthTableIR parse_truth_table(std::string_view raw);
StateTransitionIR parse_state_table(std::string_view raw);
WaveformIR parse_waveform(std::string_view raw);

/// Sequential when the waveform has a clock: every rising edge yields a
/// transition from the outputs before the edge, under the inputs sampled
/// before the edge, to the outputs after it. Without a clock, each distinct
/// input sample becomes one truth-table row. Multi-bit values are binary
/// when they have exactly `width` digits, hexadecimal otherwise.
ConvertedIR waveform_to_ir(const WaveformIR& w, const std::vector<std::string>& output_names,
                           const std::map<std::string, int>& widths = {});

/// Fills clock/reset names and reset kind from the interface's port names
/// (areset, aresetn, reset, resetn, rst, rst_n, clk, clock).
void apply_interface_conventions(StateTransitionIR& ir, const verilog::ModuleInterface& iface);

/// Parses one detected block, using `iface` for output names, widths and
/// clock/reset conventions.
ConvertedIR convert_block(const MultimodalBlock& block, const verilog::ModuleInterface& iface);

std::string emit_verilog(const TruthTableIR& ir, const std::string& module_name,
                         const verilog::ModuleInterface& iface);
std::string emit_verilog(const StateTransitionIR& ir, const std::string& module_name,
                         const verilog::ModuleInterface& iface);
std::string emit_verilog(const ConvertedIR& ir, const std::string& module_name,
                         const verilog::ModuleInterface& iface);

/// Canonical text: "TRUTH TABLE(inputs=...; outputs=...)" then "pattern -> values" lines.
std::string render(const TruthTableIR& ir);
/// Canonical text: "STATE MACHINE(...)" then "STATE cur | in -> next | out" lines.
std::string render(const StateTransitionIR& ir);
std::string render(const ConvertedIR& ir);

std::string rewrite_description(std::string_view description,
                                const std::vector<std::pair<MultimodalBlock, ConvertedIR>>& blocks);

}  // namespace rtlforge::mm
