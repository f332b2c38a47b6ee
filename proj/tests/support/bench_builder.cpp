#include "bench_builder.hpp"

#include <cstdlib>
#include <stdexcept>

#include "rtlforge/text.hpp"

namespace rtlforge::testing {

namespace {

using verilog::Port;

std::string literal(const std::string& bits) { return std::to_string(bits.size()) + "'b" + bits; }

// "{expected[n-1] ... expected[0]}" so that chunk i sits at [i*w +: w].
void pack(const std::vector<std::string>& chunks, std::string& values, std::string& care) {
    values.clear();
    care.clear();
    for (auto it = chunks.rbegin(); it != chunks.rend(); ++it) {
        for (char c : *it) {
            values.push_back(c == '1' ? '1' : '0');
            care.push_back(c == '-' ? '0' : '1');
        }
    }
}

std::string range(int width) { return "[" + std::to_string(width - 1) + ":0] "; }

// Port connections slicing a packed input/output vector, port order MSB first.
std::string connections(const verilog::ModuleInterface& iface, const std::string& in_vec,
                        const std::string& out_vec, const std::vector<std::string>& skip = {},
                        const std::vector<std::pair<std::string, std::string>>& fixed = {}) {
    std::vector<std::string> conns;
    auto bind = [&](const std::vector<const Port*>& ports, const std::string& vec) {
        int total = 0;
        for (const auto* p : ports)
            if (std::find(skip.begin(), skip.end(), p->name) == skip.end()) total += p->width();
        int hi = total - 1;
        for (const auto* p : ports) {
            if (std::find(skip.begin(), skip.end(), p->name) != skip.end()) continue;
            int lo = hi - p->width() + 1;
            conns.push_back("." + p->name + "(" + vec + "[" + std::to_string(hi) + ":" + std::to_string(lo) + "])");
            hi = lo - 1;
        }
    };
    bind(iface.inputs(), in_vec);
    bind(iface.outputs(), out_vec);
    for (const auto& [port, sig] : fixed) conns.push_back("." + port + "(" + sig + ")");
    return text::join(conns, ", ");
}

int width_of(const std::vector<const Port*>& ports, const std::vector<std::string>& skip = {}) {
    int w = 0;
    for (const auto* p : ports)
        if (std::find(skip.begin(), skip.end(), p->name) == skip.end()) w += p->width();
    return w;
}

const char* kHeader =
    "`timescale 1ns/1ps\n"
    "module tb;\n"
    "    integer errors = 0;\n"
    "    integer samples = 0;\n"
    "    integer i, s, t;\n";

const char* kFooter =
    "        $display(\"Mismatches: %0d in %0d samples\", errors, samples);\n"
    "        $finish;\n"
    "    end\n"
    "endmodule\n";

}  // namespace

std::string comb_bench(const std::vector<CombCase>& cases) {
    std::string decls, body;
    for (size_t k = 0; k < cases.size(); ++k) {
        const auto& c = cases[k];
        const std::string p = "c" + std::to_string(k) + "_";
        const int ib = width_of(c.iface.inputs());
        const int ob = width_of(c.iface.outputs());
        const size_t n = size_t{1} << ib;
        if (c.expected.size() != n) throw std::invalid_argument("comb case needs 2^inputs expectations");
        std::string values, care;
        pack(c.expected, values, care);
        decls += "    reg " + range(ib) + p + "in;\n";
        decls += "    wire " + range(ob) + p + "out;\n";
        decls += "    localparam " + range(static_cast<int>(values.size())) + p + "EXP = " + literal(values) + ";\n";
        decls += "    localparam " + range(static_cast<int>(care.size())) + p + "CARE = " + literal(care) + ";\n";
        decls += "    " + c.module_name + " " + p + "dut (" + connections(c.iface, p + "in", p + "out") + ");\n";
        const std::string w = std::to_string(ob);
        body += "        for (i = 0; i < " + std::to_string(n) + "; i = i + 1) begin\n";
        body += "            " + p + "in = i;\n            #1;\n";
        body += "            if (((" + p + "out ^ " + p + "EXP[i*" + w + " +: " + w + "]) & " + p + "CARE[i*" + w +
                " +: " + w + "]) !== 0) begin\n";
        body += "                if (errors < 20) $display(\"MISMATCH time=%0t sig=" + c.module_name +
                " exp=%b got=%b in=%b\", $time, " + p + "EXP[i*" + w + " +: " + w + "], " + p + "out, " + p +
                "in);\n";
        body += "                errors = errors + 1;\n            end\n";
        body += "            samples = samples + 1;\n        end\n";
    }
    return std::string(kHeader) + decls + "\n    initial begin\n" + body + kFooter;
}

std::string seq_bench(const std::vector<SeqCase>& cases) {
    std::string decls, body;
    for (size_t k = 0; k < cases.size(); ++k) {
        const auto& c = cases[k];
        const std::string p = "q" + std::to_string(k) + "_";
        std::vector<std::string> skip{c.clock_name};
        if (!c.reset_name.empty()) skip.push_back(c.reset_name);
        const int ib = width_of(c.iface.inputs(), skip);
        const int ob = width_of(c.iface.outputs());
        if (c.inputs.size() != c.expected.size() || c.inputs.empty())
            throw std::invalid_argument("sequence case needs matching input and expectation lists");
        const size_t len = c.inputs.front().size();
        std::vector<std::string> ins, exp;
        for (size_t s = 0; s < c.inputs.size(); ++s) {
            if (c.inputs[s].size() != len || c.expected[s].size() != len)
                throw std::invalid_argument("sequences must have equal lengths");
            for (size_t t = 0; t < len; ++t) {
                ins.push_back(ib == 0 ? "0" : c.inputs[s][t]);
                exp.push_back(c.expected[s][t]);
            }
        }
        std::string in_values, unused, values, care;
        pack(ins, in_values, unused);
        pack(exp, values, care);
        const int iw = std::max(ib, 1);
        const std::string idle = c.negedge ? "1'b1" : "1'b0";
        const std::string active = c.negedge ? "1'b0" : "1'b1";
        decls += "    reg " + p + "clk = " + idle + ";\n";
        decls += "    reg " + p + "rst = 1'b0;\n";
        decls += "    reg " + range(iw) + p + "in = 0;\n";
        decls += "    wire " + range(ob) + p + "out;\n";
        decls += "    localparam " + range(static_cast<int>(in_values.size())) + p + "INS = " + literal(in_values) + ";\n";
        decls += "    localparam " + range(static_cast<int>(values.size())) + p + "EXP = " + literal(values) + ";\n";
        decls += "    localparam " + range(static_cast<int>(care.size())) + p + "CARE = " + literal(care) + ";\n";
        std::vector<std::pair<std::string, std::string>> fixed{{c.clock_name, p + "clk"}};
        if (!c.reset_name.empty()) fixed.emplace_back(c.reset_name, p + "rst");
        decls += "    " + c.module_name + " " + p + "dut (" + connections(c.iface, p + "in", p + "out", skip, fixed) +
                 ");\n";
        const std::string w = std::to_string(ob), iws = std::to_string(iw), l = std::to_string(len);
        const std::string on = c.reset_active_high ? "1'b1" : "1'b0";
        const std::string off = c.reset_active_high ? "1'b0" : "1'b1";
        decls += "    initial " + p + "rst = " + off + ";\n";
        body += "        for (s = 0; s < " + std::to_string(c.inputs.size()) + "; s = s + 1) begin\n";
        if (!c.reset_name.empty()) {
            body += "            " + p + "in = 0;\n            " + p + "rst = " + on + ";\n            #1;\n";
            body += "            " + p + "clk = " + active + ";\n            #1;\n";
            body += "            " + p + "clk = " + idle + ";\n            " + p + "rst = " + off + ";\n";
            body += "            #1;\n";
        }
        body += "            for (t = 0; t < " + l + "; t = t + 1) begin\n";
        body += "                i = s * " + l + " + t;\n";
        body += "                " + p + "in = " + p + "INS[i*" + iws + " +: " + iws + "];\n                #1;\n";
        body += "                if (((" + p + "out ^ " + p + "EXP[i*" + w + " +: " + w + "]) & " + p + "CARE[i*" +
                w + " +: " + w + "]) !== 0) begin\n";
        body += "                    if (errors < 20) $display(\"MISMATCH time=%0t sig=" + c.module_name +
                " exp=%b got=%b seq=%0d step=%0d\", $time, " + p + "EXP[i*" + w + " +: " + w + "], " + p +
                "out, s, t);\n";
        body += "                    errors = errors + 1;\n                end\n";
        body += "                samples = samples + 1;\n";
        body += "                " + p + "clk = " + active + ";\n                #1;\n";
        body += "                " + p + "clk = " + idle + ";\n";
        body += "            end\n        end\n";
    }
    return std::string(kHeader) + decls + "\n    initial begin\n        #1;\n" + body + kFooter;
}

int comb_samples(const std::vector<CombCase>& cases) {
    int n = 0;
    for (const auto& c : cases) n += static_cast<int>(c.expected.size());
    return n;
}

int seq_samples(const std::vector<SeqCase>& cases) {
    int n = 0;
    for (const auto& c : cases)
        for (const auto& s : c.expected) n += static_cast<int>(s.size());
    return n;
}

std::optional<sim::SimulatorConfig> available_simulator() {
    if (const char* forced = std::getenv("RTLFORGE_SIMULATOR"); forced && *forced)
        return sim::SimulatorConfig::preset(forced);
    return sim::SimulatorConfig::detect();
}

sim::SimulationReport run_bench(const std::string& design, const std::string& bench) {
    auto cfg = available_simulator();
    if (!cfg) throw std::runtime_error("no Verilog simulator available");
    sim::ExternalSimulator s(*cfg);
    return s.run(design, bench);
}

std::string oracle_outputs(const mm::TruthTableIR& ir, const std::string& assignment) {
    std::string out(static_cast<size_t>(ir.output_bits()), '-');
    for (const auto& row : ir.rows) {
        bool hit = true;
        for (size_t i = 0; i < assignment.size() && hit; ++i)
            hit = row.inputs[i] == '-' || row.inputs[i] == assignment[i];
        if (!hit) continue;
        for (size_t b = 0; b < out.size(); ++b)
            if (row.outputs[b] != '-') out[b] = row.outputs[b];
    }
    return out;
}

std::string to_bits(unsigned long long value, int width) {
    std::string s;
    for (int i = width - 1; i >= 0; --i) s.push_back(((value >> i) & 1) ? '1' : '0');
    return s;
}

mm::TruthTableIR random_table(std::mt19937& rng, int input_bits, int output_bits) {
    mm::TruthTableIR ir;
    for (int i = 0; i < input_bits; ++i) ir.inputs.push_back({"i" + std::to_string(i), 1});
    for (int i = 0; i < output_bits; ++i) ir.outputs.push_back({"o" + std::to_string(i), 1});
    std::uniform_int_distribution<int> pct(0, 99);
    const int target = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min(64, 1 << input_bits)));
    for (int attempt = 0; static_cast<int>(ir.rows.size()) < target && attempt < target * 8; ++attempt) {
        mm::TruthRow row;
        const bool cube = pct(rng) < 30;
        for (int b = 0; b < input_bits; ++b) row.inputs.push_back(cube && pct(rng) < 25 ? '-' : (rng() & 1 ? '1' : '0'));
        for (int b = 0; b < output_bits; ++b) row.outputs.push_back(pct(rng) < 10 ? '-' : (rng() & 1 ? '1' : '0'));
        bool ok = true;
        for (const auto& other : ir.rows) {
            bool overlap = true;
            for (int b = 0; b < input_bits && overlap; ++b)
                overlap = row.inputs[b] == '-' || other.inputs[b] == '-' || row.inputs[b] == other.inputs[b];
            if (!overlap) continue;
            for (int b = 0; b < output_bits && ok; ++b)
                ok = row.outputs[b] == '-' || other.outputs[b] == '-' || row.outputs[b] == other.outputs[b];
        }
        if (ok) ir.rows.push_back(row);
    }
    return ir;
}

verilog::ModuleInterface make_iface(const std::string& name, const std::vector<mm::Signal>& inputs,
                                    const std::vector<mm::Signal>& outputs) {
    verilog::ModuleInterface iface;
    iface.name = name;
    for (const auto& s : inputs) iface.ports.push_back({s.name, Port::Direction::kInput, s.width - 1, 0, false, false});
    for (const auto& s : outputs)
        iface.ports.push_back({s.name, Port::Direction::kOutput, s.width - 1, 0, false, false});
    return iface;
}

mm::StateTransitionIR random_fsm(std::mt19937& rng) {
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
    mm::StateTransitionIR ir;
    const int n = pick(2, 6);
    for (int i = 0; i < n; ++i) ir.states.push_back("S" + std::to_string(i));
    ir.reset_state = ir.states[static_cast<size_t>(pick(0, n - 1))];
    ir.reset.kind = rng() & 1 ? mm::ResetKind::kAsync : mm::ResetKind::kSync;
    ir.reset.active_high = rng() & 1;
    ir.reset_name = ir.reset.active_high ? "reset" : "resetn";
    ir.clock_edge = rng() % 4 == 0 ? mm::ClockEdge::kNeg : mm::ClockEdge::kPos;
    const int ib = pick(1, 3), ob = pick(1, 2);
    for (int i = 0; i < ib; ++i) ir.inputs.push_back({"x" + std::to_string(i), 1});
    for (int i = 0; i < ob; ++i) ir.outputs.push_back({"y" + std::to_string(i), 1});
    ir.moore = rng() & 1;
    auto rand_out = [&] {
        std::string o;
        for (int b = 0; b < ob; ++b) o.push_back(rng() & 1 ? '1' : '0');
        return o;
    };
    for (const auto& s : ir.states) {
        if (ir.moore) ir.state_outputs.push_back(rand_out());
        // Each state covers a random subset of its input space with minterms.
        for (int v = 0; v < (1 << ib); ++v) {
            if (rng() % 5 == 0) continue;
            std::string out = ir.moore ? ir.state_outputs.back() : rand_out();
            ir.transitions.push_back({s, to_bits(static_cast<unsigned>(v), ib),
                                      ir.states[static_cast<size_t>(pick(0, n - 1))], out});
        }
    }
    return ir;
}

verilog::ModuleInterface fsm_iface(const mm::StateTransitionIR& ir, const std::string& name) {
    std::vector<mm::Signal> ins{{ir.clock_name, 1}};
    if (!ir.reset_name.empty()) ins.push_back({ir.reset_name, 1});
    ins.insert(ins.end(), ir.inputs.begin(), ir.inputs.end());
    return make_iface(name, ins, ir.outputs);
}

SeqCase fsm_case(const mm::StateTransitionIR& ir, const std::string& module_name, std::mt19937& rng,
                 int sequences, int steps) {
    SeqCase c;
    c.module_name = module_name;
    c.iface = fsm_iface(ir, module_name);
    c.clock_name = ir.clock_name;
    c.reset_name = ir.reset_name;
    c.reset_active_high = ir.reset.active_high;
    c.negedge = ir.clock_edge == mm::ClockEdge::kNeg;
    mm::FsmInterpreter interp(ir);
    const int ib = ir.input_bits();
    for (int s = 0; s < sequences; ++s) {
        if (!ir.reset_name.empty()) interp.reset();
        std::vector<std::string> ins, outs;
        for (int t = 0; t < steps; ++t) {
            std::string in = to_bits(rng(), ib);
            ins.push_back(in);
            outs.push_back(interp.step(in));
        }
        c.inputs.push_back(std::move(ins));
        c.expected.push_back(std::move(outs));
    }
    return c;
}

}  // namespace rtlforge::testing
