#include <gtest/gtest.h>

#include <map>
#include <set>

#include "rtlforge/debugger.hpp"
#include "rtlforge/text.hpp"
#include "test_util.hpp"

namespace rtlforge {
namespace {

using namespace rtlforge::testing;
using debug::Outcome;
using sim::Status;

sim::SimulationReport failing(int mismatches) {
    sim::SimulationReport r;
    r.status = Status::kSimFailure;
    r.mismatch_count = mismatches;
    r.total_samples = 100;
    r.first_failure = sim::FirstFailure{"25", "out", "1", "0"};
    return r;
}

sim::SimulationReport passing() {
    sim::SimulationReport r;
    r.status = Status::kPass;
    r.total_samples = 100;
    return r;
}

sim::SimulationReport compile_error() {
    sim::SimulationReport r;
    r.status = Status::kCompileError;
    r.compile_messages.push_back(
        {"design.v", 3, "Procedural assignment to wire, perhaps intended var (IEEE 1800-2023 6.5): 'out'"});
    return r;
}

// Answers from a table keyed by design text; unknown designs fail with 50 mismatches.
class TableSimulator : public sim::Simulator {
public:
    std::map<std::string, sim::SimulationReport> table;
    int calls = 0;

    sim::SimulationReport run(std::string_view design, std::string_view) override {
        ++calls;
        auto it = table.find(std::string(design));
        return it == table.end() ? failing(50) : it->second;
    }
};

std::string fenced(const std::string& code) { return "Reasoning first.\n```verilog\n" + code + "```\n"; }

std::string design(int v) {
    return "module m(input a, output y);\n  assign y = a ^ 1'b" + std::to_string(v % 2) + "; // v" +
           std::to_string(v) + "\nendmodule\n";
}

const char* kSpec = "y is the inverse of a.";

TEST(NumberLines, RightAlignsNumbers) {
    std::string code;
    for (int i = 0; i < 10; ++i) code += "l" + std::to_string(i) + "\n";
    auto numbered = debug::number_lines(code);
    auto lines = text::split_lines(numbered);
    EXPECT_EQ(lines[0], " 1 | l0");
    EXPECT_EQ(lines[9], "10 | l9");
}

TEST(ParseLocalization, ReadsRankedDistinctLines) {
    const std::string code = "a\nb\nc\nd\n";
    auto loc = debug::parse_localization("Thoughts.\nLINE 3: wrong op\n**LINE 1**: maybe\nline 3: again\n", code);
    ASSERT_EQ(loc.candidates.size(), 2u);
    EXPECT_EQ(loc.candidates[0], (debug::CandidateLine{3, "c", "wrong op"}));
    EXPECT_EQ(loc.candidates[1].line, 1);
}

TEST(ParseLocalization, OutOfRangeAndMissingLines) {
    const std::string code = "a\nb\n";
    EXPECT_ERROR_CODE(debug::parse_localization("LINE 9999: nowhere\n", code), ErrorCode::kLineOutOfRange);
    EXPECT_ERROR_CODE(debug::parse_localization("LINE 0: nowhere\n", code), ErrorCode::kLineOutOfRange);
    EXPECT_ERROR_CODE(debug::parse_localization("The bug is on the second line.\n", code), ErrorCode::kFormatError);
}

TEST(ParseCorrection, ExactlyOneBlock) {
    EXPECT_EQ(debug::parse_correction("```verilog\nmodule m;\nendmodule\n```\n"), "module m;\nendmodule\n");
    EXPECT_ERROR_CODE(debug::parse_correction("module m; endmodule"), ErrorCode::kFormatError);
    EXPECT_ERROR_CODE(debug::parse_correction("```\nmodule a;\nendmodule\n```\n```\nmodule b;\nendmodule\n```\n"),
                      ErrorCode::kFormatError);
    EXPECT_ERROR_CODE(debug::parse_correction("```verilog\n\n```\n"), ErrorCode::kFormatError);
}

TEST(Localize, StatusPreconditions) {
    llm::ScriptedProvider p;
    p.push("localize", "LINE 1: x");
    EXPECT_ERROR_CODE(debug::localize(kSpec, design(0), passing(), p), ErrorCode::kWrongStatus);
    sim::SimulationReport tool;
    tool.status = Status::kToolError;
    EXPECT_ERROR_CODE(debug::localize(kSpec, design(0), tool, p), ErrorCode::kWrongStatus);
    sim::SimulationReport timeout;
    timeout.status = Status::kTimeout;
    EXPECT_EQ(debug::localize(kSpec, design(0), timeout, p).candidates.size(), 1u);
    llm::ScriptedProvider silent;
    EXPECT_ERROR_CODE(debug::localize(kSpec, design(0), failing(1), silent), ErrorCode::kLlmFailure);
}

// Rising-edge detector whose reset branch clears prev; the spec says the
// history register is not reset.
const char* kRiseCode =
    "module rise(input clk, input reset, input in, output reg pulse);\n"  // 1
    "  reg prev;\n"                                                        // 2
    "  always @(posedge clk) begin\n"                                      // 3
    "    if (reset) begin\n"                                               // 4
    "      prev <= 1'b0;\n"                                                // 5
    "      pulse <= 1'b0;\n"                                               // 6
    "    end else begin\n"                                                 // 7
    "      prev <= in;\n"                                                  // 8
    "      pulse <= in & ~prev;\n"                                         // 9
    "    end\n"                                                            // 10
    "  end\n"                                                              // 11
    "endmodule\n";                                                         // 12

TEST(Localize, RiseDetectorCandidatesIncludeResetLine) {
    llm::ScriptedProvider p;
    p.push("localize",
           "LINE 5: prev is cleared on reset although it must keep tracking in\n"
           "LINE 9: the pulse depends on prev\n");
    auto loc = debug::localize("Output a one-cycle pulse when in rises. Reset clears pulse only.", kRiseCode,
                               failing(3), p);
    ASSERT_EQ(loc.candidates.size(), 2u);
    EXPECT_EQ(loc.candidates[0].line, 5);
    EXPECT_EQ(loc.candidates[0].statement, "prev <= 1'b0;");
    EXPECT_EQ(loc.candidates[1].statement, "pulse <= in & ~prev;");
    EXPECT_NE(loc.request.user_text.find(" 5 |       prev <= 1'b0;"), std::string::npos);
}

std::set<int> changed_lines(const std::string& before, const std::string& after) {
    auto a = text::split_lines(before), b = text::split_lines(after);
    std::set<int> out;
    for (size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        if (i >= a.size() || i >= b.size() || a[i] != b[i]) out.insert(static_cast<int>(i + 1));
    }
    return out;
}

TEST(Correct, RevisionTouchesACandidateLine) {
    std::string fixed = text::replace_all(kRiseCode, "      prev <= 1'b0;\n", "      prev <= in;\n");
    llm::ScriptedProvider p;
    p.push("localize", "LINE 5: prev cleared\nLINE 9: pulse\n");
    p.push("correct", fenced(fixed));
    auto loc = debug::localize("spec", kRiseCode, failing(3), p);
    auto revised = debug::correct("spec", kRiseCode, loc, failing(3), p);
    EXPECT_EQ(revised, fixed);
    std::set<int> candidates;
    for (const auto& c : loc.candidates) candidates.insert(c.line);
    auto changed = changed_lines(kRiseCode, revised);
    ASSERT_FALSE(changed.empty());
    for (int line : changed) EXPECT_TRUE(candidates.count(line)) << line;
}

TEST(LocalizeRequest, CompileErrorsPullWireKnowledge) {
    auto kb = kb::load_kb(source_dir() / "kb");
    auto with = debug::build_localize_request(kSpec, design(0), compile_error(), &kb);
    EXPECT_NE(with.user_text.find("Relevant knowledge:\n### wire_in_always"), std::string::npos);
    auto sim_fail = debug::build_localize_request(kSpec, design(0), failing(2), &kb);
    EXPECT_EQ(sim_fail.user_text.find("Relevant knowledge"), std::string::npos);
    auto no_kb = debug::build_localize_request(kSpec, design(0), compile_error(), nullptr);
    EXPECT_EQ(no_kb.user_text.find("Relevant knowledge"), std::string::npos);
}

TEST(RelevantSpec, ShortSpecIsKept) {
    debug::Localization loc;
    loc.candidates.push_back({1, "count <= 0;", ""});
    EXPECT_EQ(debug::relevant_spec(kSpec, loc), kSpec);
}

TEST(RelevantSpec, LongSpecKeepsParagraphsSharingSignals) {
    const std::string filler(450, 'z');
    std::vector<std::string> paras = {
        "Overview paragraph. " + filler,
        "The register count increments every cycle. " + filler,
        "Unrelated detail about documentation. " + filler,
        "When load is high, count takes the value of din. " + filler,
        "Another unrelated remark. " + filler,
        "The flag full is high when count equals 15. " + filler,
    };
    const std::string spec = text::join(paras, "\n\n");
    ASSERT_GT(spec.size(), debug::kLongSpecChars);
    debug::Localization loc;
    loc.candidates.push_back({4, "if (load) count <= din;", ""});
    loc.candidates.push_back({7, "assign full = (count == 4'd15);", ""});
    // Shared identifiers: p1 {count}, p3 {load, count, din}, p5 {full, count}.
    EXPECT_EQ(debug::relevant_spec(spec, loc), paras[1] + "\n\n" + paras[3] + "\n\n" + paras[5]);

    auto req = debug::build_correct_request(spec, "x\n", loc, failing(1));
    EXPECT_EQ(req.user_text.find("Overview paragraph"), std::string::npos);
    EXPECT_NE(req.user_text.find("When load is high"), std::string::npos);
}

TEST(CorrectRequest, AsksForOneFencedBlock) {
    debug::Localization loc;
    loc.candidates.push_back({2, "assign y = a;", "missing inversion"});
    auto req = debug::build_correct_request(kSpec, design(0), loc, failing(4));
    EXPECT_EQ(req.tag, "correct");
    EXPECT_NE(req.system_text.find("exactly one ```verilog fenced code block"), std::string::npos);
    EXPECT_NE(req.user_text.find("- line 2: assign y = a;\n  reason: missing inversion"), std::string::npos);
    EXPECT_NE(req.user_text.find("Mismatches: 4 in 100 samples"), std::string::npos);
}

TEST(DebugLoop, FixedAtRoundThree) {
    TableSimulator sim;
    sim.table[design(0)] = failing(40);
    sim.table[design(1)] = failing(30);
    sim.table[design(2)] = failing(20);
    sim.table[design(3)] = passing();
    llm::ScriptedProvider p;
    p.push("localize", "LINE 2: wrong constant");
    for (int v = 1; v <= 3; ++v) p.push("correct", fenced(design(v)));
    auto r = debug::debug_loop(kSpec, design(0), "tb", sim, p);
    EXPECT_EQ(r.outcome, Outcome::kFixed);
    ASSERT_EQ(r.iterations.size(), 3u);
    EXPECT_EQ(r.final_code, design(3));
    EXPECT_EQ(sim.calls, 4);
}

TEST(DebugLoop, ExhaustedAfterMaxIterations) {
    TableSimulator sim;
    sim.table[design(0)] = failing(10);
    sim.table[design(1)] = failing(12);
    llm::ScriptedProvider p;
    p.push("localize", "LINE 2: wrong constant");
    for (int i = 0; i < 10; ++i) p.push("correct", fenced(design(i % 2 == 0 ? 1 : 0)));
    auto r = debug::debug_loop(kSpec, design(0), "tb", sim, p);
    EXPECT_EQ(r.outcome, Outcome::kExhausted);
    EXPECT_EQ(r.iterations.size(), static_cast<size_t>(debug::kDefaultMaxIter));
}

TEST(DebugLoop, MaxIterIsHonoured) {
    TableSimulator sim;
    llm::ScriptedProvider p;
    p.push("localize", "LINE 1: x");
    for (int i = 1; i <= 5; ++i) p.push("correct", fenced(design(i * 2)));
    debug::DebugOptions opts;
    opts.max_iter = 4;
    auto r = debug::debug_loop(kSpec, design(0), "tb", sim, p, opts);
    EXPECT_EQ(r.outcome, Outcome::kExhausted);
    EXPECT_EQ(r.iterations.size(), 4u);
    opts.max_iter = 0;
    EXPECT_ERROR_CODE(debug::debug_loop(kSpec, design(0), "tb", sim, p, opts), ErrorCode::kInvalidArgument);
}

TEST(DebugLoop, IdenticalRevisionsStagnate) {
    TableSimulator sim;
    sim.table[design(0)] = failing(8);
    llm::ScriptedProvider p;
    p.push("localize", "LINE 2: wrong constant");
    p.push("correct", fenced(design(0)));
    auto r = debug::debug_loop(kSpec, design(0), "tb", sim, p);
    EXPECT_EQ(r.outcome, Outcome::kStagnated);
    EXPECT_EQ(r.iterations.size(), 2u);
}

TEST(DebugLoop, OneIdleRoundDoesNotStagnate) {
    TableSimulator sim;
    sim.table[design(0)] = failing(8);
    sim.table[design(2)] = passing();
    llm::ScriptedProvider p;
    p.push("localize", "LINE 2: wrong constant");
    p.push("correct", fenced(design(0)));
    p.push("correct", fenced(design(2)));
    auto r = debug::debug_loop(kSpec, design(0), "tb", sim, p);
    EXPECT_EQ(r.outcome, Outcome::kFixed);
    EXPECT_EQ(r.iterations.size(), 2u);
}

TEST(DebugLoop, PassingInitialReportSkipsTheModel) {
    TableSimulator sim;
    llm::ScriptedProvider p;
    debug::DebugOptions opts;
    opts.initial_report = passing();
    auto r = debug::debug_loop(kSpec, design(0), "tb", sim, p, opts);
    EXPECT_EQ(r.outcome, Outcome::kFixed);
    EXPECT_TRUE(r.iterations.empty());
    EXPECT_EQ(sim.calls, 0);
    EXPECT_TRUE(p.requests().empty());
}

TEST(DebugLoop, IterationsChainReports) {
    TableSimulator sim;
    for (int v = 0; v < 6; ++v) sim.table[design(v)] = failing(60 - v);
    llm::ScriptedProvider p;
    p.push("localize", "LINE 2: wrong constant");
    for (int v = 1; v <= 10; ++v) p.push("correct", fenced(design(v)));
    auto r = debug::debug_loop(kSpec, design(0), "tb", sim, p);
    ASSERT_EQ(r.iterations.size(), 10u);
    for (size_t i = 0; i < r.iterations.size(); ++i) {
        const auto& it = r.iterations[i];
        EXPECT_EQ(it.index, static_cast<int>(i + 1));
        ASSERT_TRUE(it.localization);
        EXPECT_FALSE(it.localization->candidates.empty());
        if (i > 0) EXPECT_EQ(it.report_before, r.iterations[i - 1].report_after);
    }
    EXPECT_EQ(r.iterations.front().report_before, failing(60));
    EXPECT_EQ(r.final_code, r.iterations.back().revised_code);
}

TEST(DebugLoop, FailuresAbortWithPartialResult) {
    TableSimulator sim;
    sim.table[design(0)] = failing(8);
    llm::ScriptedProvider p;
    p.push("localize", "LINE 2: wrong constant");
    p.push("localize", "LINE 9999: nowhere");
    p.push("correct", fenced(design(1)));
    try {
        debug::debug_loop(kSpec, design(0), "tb", sim, p);
        FAIL() << "expected DebugAborted";
    } catch (const debug::DebugAborted& e) {
        EXPECT_EQ(e.code(), ErrorCode::kLineOutOfRange);
        EXPECT_EQ(e.partial().iterations.size(), 1u);
        EXPECT_EQ(e.partial().final_code, design(1));
    }
}

TEST(DebugLoop, ToolErrorAborts) {
    TableSimulator sim;
    sim::SimulationReport tool;
    tool.status = Status::kToolError;
    sim.table[design(0)] = tool;
    llm::ScriptedProvider p;
    p.push("localize", "LINE 2: x");
    p.push("correct", fenced(design(0)));
    EXPECT_ERROR_CODE(debug::debug_loop(kSpec, design(0), "tb", sim, p), ErrorCode::kToolError);

    sim.table[design(1)] = tool;
    debug::DebugOptions opts;
    opts.initial_report = failing(3);
    llm::ScriptedProvider q;
    q.push("localize", "LINE 2: x");
    q.push("correct", fenced(design(1)));
    try {
        debug::debug_loop(kSpec, design(0), "tb", sim, q, opts);
        FAIL() << "expected DebugAborted";
    } catch (const debug::DebugAborted& e) {
        EXPECT_EQ(e.code(), ErrorCode::kToolError);
        ASSERT_EQ(e.partial().iterations.size(), 1u);
        EXPECT_EQ(e.partial().iterations[0].report_after.status, Status::kToolError);
    }
}

TEST(DebugLoop, MalformedCorrectionAborts) {
    TableSimulator sim;
    llm::ScriptedProvider p;
    p.push("localize", "LINE 2: x");
    p.push("correct", "```\nmodule a;\nendmodule\n```\n```\nmodule b;\nendmodule\n```\n");
    EXPECT_ERROR_CODE(debug::debug_loop(kSpec, design(0), "tb", sim, p), ErrorCode::kFormatError);
}

}  // namespace
}  // namespace rtlforge
