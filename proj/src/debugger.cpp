#include "rtlforge/debugger.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "rtlforge/text.hpp"

namespace rtlforge::debug {

namespace {

constexpr size_t kKbBudget = 3000;

const std::set<std::string>& verilog_keywords() {
    static const std::set<std::string> kw = {
        "always", "assign", "begin", "case", "casez", "casex", "default", "else", "end", "endcase",
        "endmodule", "for", "if", "initial", "input", "integer", "localparam", "module", "negedge",
        "output", "parameter", "posedge", "reg", "wire", "logic", "or", "and", "not", "genvar",
        "generate", "endgenerate", "signed", "unsigned", "inout", "function", "endfunction", "b", "d", "h"};
    return kw;
}

std::set<std::string> identifiers(std::string_view s) {
    static const std::regex kIdent(R"([A-Za-z_][A-Za-z0-9_$]*)");
    std::set<std::string> out;
    std::string str(s);
    for (auto it = std::sregex_iterator(str.begin(), str.end(), kIdent); it != std::sregex_iterator(); ++it) {
        std::string id = it->str();
        if (!verilog_keywords().count(id)) out.insert(std::move(id));
    }
    return out;
}

std::string llm_text(llm::Provider& llm, const llm::ChatRequest& req) {
    auto answer = llm.complete(req);
    if (!answer.ok())
        throw Error(ErrorCode::kLlmFailure,
                    req.tag + ": " + std::string(llm::to_string(answer.status)) + ": " + answer.diagnostic);
    return answer.response_text;
}

bool localizable(sim::Status s) {
    return s == sim::Status::kCompileError || s == sim::Status::kSimFailure || s == sim::Status::kTimeout;
}

}  // namespace

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::kFixed: return "fixed";
        case Outcome::kExhausted: return "exhausted";
        case Outcome::kStagnated: return "stagnated";
    }
    return "?";
}

std::string number_lines(std::string_view code) {
    auto lines = text::split_lines(code);
    const size_t width = std::to_string(lines.size()).size();
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string n = std::to_string(i + 1);
        out += std::string(width - n.size(), ' ') + n + " | " + lines[i] + "\n";
    }
    return out;
}

std::string describe_failure(const sim::SimulationReport& report) {
    std::string out = "Status: " + std::string(sim::to_string(report.status)) + "\n";
    if (report.status == sim::Status::kSimFailure)
        out += "Mismatches: " + std::to_string(report.mismatch_count) + " in " +
               std::to_string(report.total_samples) + " samples\n";
    if (report.first_failure) {
        const auto& f = *report.first_failure;
        out += "First failure: time " + f.time_label + ", signal " + f.signal + ", expected " + f.expected +
               ", got " + f.got + "\n";
    }
    if (!report.compile_messages.empty()) {
        out += "Compiler messages:\n";
        for (const auto& m : report.compile_messages)
            out += "  " + (m.line > 0 ? "line " + std::to_string(m.line) + ": " : std::string()) + m.text + "\n";
    }
    if (!report.raw_excerpt.empty()) {
        out += "Tool output:\n" + report.raw_excerpt;
        if (out.back() != '\n') out.push_back('\n');
    }
    return out;
}

llm::ChatRequest build_localize_request(std::string_view spec, std::string_view code,
                                        const sim::SimulationReport& report, const kb::KnowledgeBase* kb) {
    std::string system =
        "You are an expert Verilog debugging engineer. Given a design description, the current Verilog code "
        "with line numbers and the simulation report, identify the statements most likely responsible for the "
        "failure.\n"
        "Answer with one line per suspect statement, most likely first, in the form\n"
        "LINE <n>: <reason>\n"
        "where <n> is a line number of the code shown.\n";
    std::string user = "Design description:\n" + std::string(spec) + "\n\nCode:\n" + number_lines(code) +
                       "\nSimulation report:\n" + describe_failure(report);
    if (kb && report.status == sim::Status::kCompileError) {
        auto hits = kb::search_keyword(*kb, sim::error_keywords(report, *kb));
        auto ctx = kb::assemble_context(hits, *kb, kKbBudget);
        if (!ctx.text.empty()) user += "\nRelevant knowledge:\n" + ctx.text;
    }
    if (user.back() != '\n') user.push_back('\n');
    return {std::move(system), std::move(user), "localize", std::nullopt};
}

Localization parse_localization(std::string_view response, std::string_view code) {
    static const std::regex kLine(R"(^\s*\**LINE\s+(\d+)\s*\**\s*:\s*(.*?)\s*$)", std::regex::icase);
    const auto lines = text::split_lines(code);
    Localization loc;
    loc.response_text = std::string(response);
    std::set<int> seen;
    for (const auto& raw : text::split_lines(response)) {
        std::smatch m;
        if (!std::regex_match(raw, m, kLine)) continue;
        const std::string digits = m[1].str();
        const long n = digits.size() > 9 ? -1 : std::stol(digits);
        if (n < 1 || static_cast<size_t>(n) > lines.size())
            throw Error(ErrorCode::kLineOutOfRange,
                        "line " + digits + " is outside the " + std::to_string(lines.size()) + "-line code");
        if (!seen.insert(static_cast<int>(n)).second) continue;
        loc.candidates.push_back(
            {static_cast<int>(n), std::string(text::trim(lines[static_cast<size_t>(n - 1)])), m[2].str()});
    }
    if (loc.candidates.empty()) throw Error(ErrorCode::kFormatError, "no 'LINE <n>: <reason>' lines in response");
    return loc;
}

Localization localize(std::string_view spec, std::string_view code, const sim::SimulationReport& report,
                      llm::Provider& llm, const kb::KnowledgeBase* kb) {
    if (!localizable(report.status))
        throw Error(ErrorCode::kWrongStatus,
                    "cannot localize a " + std::string(sim::to_string(report.status)) + " report");
    auto request = build_localize_request(spec, code, report, kb);
    Localization loc = parse_localization(llm_text(llm, request), code);
    loc.request = std::move(request);
    return loc;
}

std::string relevant_spec(std::string_view spec, const Localization& loc) {
    if (spec.size() <= kLongSpecChars) return std::string(spec);
    std::set<std::string> signals;
    for (const auto& c : loc.candidates) signals.merge(identifiers(c.statement));

    std::vector<std::string> paragraphs;
    std::string cur;
    for (const auto& line : text::split_lines(spec)) {
        if (text::trim(line).empty()) {
            if (!cur.empty()) paragraphs.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += cur.empty() ? line : "\n" + line;
        }
    }
    if (!cur.empty()) paragraphs.push_back(std::move(cur));
    if (paragraphs.size() <= kSpecChunks) return std::string(spec);

    std::vector<std::pair<size_t, size_t>> scored;  // (shared count, index)
    for (size_t i = 0; i < paragraphs.size(); ++i) {
        auto ids = identifiers(paragraphs[i]);
        size_t shared = static_cast<size_t>(
            std::count_if(signals.begin(), signals.end(), [&](const std::string& s) { return ids.count(s) > 0; }));
        scored.emplace_back(shared, i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<size_t> keep;
    for (size_t i = 0; i < kSpecChunks; ++i) keep.push_back(scored[i].second);
    std::sort(keep.begin(), keep.end());
    std::vector<std::string> chosen;
    for (size_t i : keep) chosen.push_back(paragraphs[i]);
    return text::join(chosen, "\n\n");
}

llm::ChatRequest build_correct_request(std::string_view spec, std::string_view code, const Localization& loc,
                                       const sim::SimulationReport& report) {
    std::string system =
        "You are an expert Verilog design engineer. Fix the Verilog module so that it meets the design "
        "description. Reason step by step about why each suspect statement causes the failing case, then "
        "give the complete corrected module in exactly one ```verilog fenced code block.\n";
    std::string user = "Design description:\n" + relevant_spec(spec, loc) + "\n\nFailing case:\n" +
                       describe_failure(report) + "\nSuspect statements:\n";
    for (const auto& c : loc.candidates)
        user += "- line " + std::to_string(c.line) + ": " + c.statement + "\n  reason: " + c.rationale + "\n";
    user += "\nCurrent code:\n```verilog\n" + std::string(code);
    if (user.back() != '\n') user.push_back('\n');
    user += "```\n";
    return {std::move(system), std::move(user), "correct", std::nullopt};
}

std::string parse_correction(std::string_view response) {
    auto blocks = text::fenced_blocks(response);
    if (blocks.size() != 1)
        throw Error(ErrorCode::kFormatError,
                    "expected exactly one fenced code block, found " + std::to_string(blocks.size()));
    if (text::trim(blocks[0]).empty()) throw Error(ErrorCode::kFormatError, "the fenced code block is empty");
    return blocks[0];
}

std::string correct(std::string_view spec, std::string_view code, const Localization& loc,
                    const sim::SimulationReport& report, llm::Provider& llm) {
    if (loc.candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "localization has no candidates");
    return parse_correction(llm_text(llm, build_correct_request(spec, code, loc, report)));
}

DebugResult debug_loop(std::string_view spec, std::string_view code, std::string_view testbench,
                       sim::Simulator& sim, llm::Provider& llm, const DebugOptions& opts) {
    if (opts.max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "max_iter must be at least 1");
    DebugResult result;
    result.final_code = std::string(code);

    auto abort_with = [&](const Error& e) -> DebugAborted { return DebugAborted(e, result); };

    sim::SimulationReport report = opts.initial_report ? *opts.initial_report : sim.run(code, testbench);
    if (report.passed()) {
        result.outcome = Outcome::kFixed;
        return result;
    }
    if (report.status == sim::Status::kToolError)
        throw abort_with(Error(ErrorCode::kToolError, "simulator failed before debugging"));

    int idle_rounds = 0;
    for (int i = 1; i <= opts.max_iter; ++i) {
        DebugIteration it;
        it.index = i;
        it.report_before = report;
        try {
            it.localization = localize(spec, result.final_code, report, llm, opts.kb);
            it.correct_request = build_correct_request(spec, result.final_code, *it.localization, report);
            it.correct_response = llm_text(llm, it.correct_request);
            it.revised_code = parse_correction(it.correct_response);
        } catch (const Error& e) {
            throw abort_with(e);
        }
        it.report_after = sim.run(it.revised_code, testbench);

        const bool idle = it.revised_code == result.final_code &&
                          it.report_after.mismatch_count == it.report_before.mismatch_count;
        idle_rounds = idle ? idle_rounds + 1 : 0;
        result.final_code = it.revised_code;
        report = it.report_after;
        result.iterations.push_back(std::move(it));

        if (report.status == sim::Status::kToolError)
            throw abort_with(Error(ErrorCode::kToolError, "simulator failed in debug round " + std::to_string(i)));
        if (report.passed()) {
            result.outcome = Outcome::kFixed;
            return result;
        }
        if (idle_rounds >= 2) {
            result.outcome = Outcome::kStagnated;
            return result;
        }
    }
    result.outcome = Outcome::kExhausted;
    return result;
}

}  // namespace rtlforge::debug
