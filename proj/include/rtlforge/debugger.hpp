#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtlforge/error.hpp"
#include "rtlforge/knowledge_base.hpp"
#include "rtlforge/llm_client.hpp"
#include "rtlforge/simulation.hpp"

namespace rtlforge::debug {

inline constexpr int kDefaultMaxIter = 10;
/// Specs longer than this are cut down to their most relevant paragraphs
/// in the correction prompt.
inline constexpr size_t kLongSpecChars = 2000;
inline constexpr size_t kSpecChunks = 3;

struct CandidateLine {
    int line = 0;  // 1-based
    std::string statement;
    std::string rationale;

    bool operator==(const CandidateLine&) const = default;
};

/// Candidates in the order the model ranked them.
struct Localization {
    std::vector<CandidateLine> candidates;
    llm::ChatRequest request;
    std::string response_text;
};

struct DebugIteration {
    int index = 0;  // 1-based
    sim::SimulationReport report_before;
    std::optional<Localization> localization;
    llm::ChatRequest correct_request;
    std::string correct_response;
    std::string revised_code;
    sim::SimulationReport report_after;
};

enum class Outcome { kFixed, kExhausted, kStagnated };

std::string_view to_string(Outcome o);

struct DebugResult {
    std::string final_code;
    std::vector<DebugIteration> iterations;
    Outcome outcome = Outcome::kExhausted;
};

/// Thrown when an LLM or tool failure stops the loop. Carries the
/// iterations completed so far.
class DebugAborted : public Error {
public:
    DebugAborted(const Error& cause, DebugResult partial)
        : Error(cause.code(), cause.what()), partial_(std::move(partial)) {}
    const DebugResult& partial() const { return partial_; }

private:
    DebugResult partial_;
};

/// "  7 | code" with the number right-aligned.
std::string number_lines(std::string_view code);

/// Failure summary shared by both prompts: first failure, mismatch counts,
/// compiler messages and a bounded excerpt of the tool output.
std::string describe_failure(const sim::SimulationReport& report);

/// `kb` supplies error-driven context for compile errors; may be null.
llm::ChatRequest build_localize_request(std::string_view spec, std::string_view code,
                                        const sim::SimulationReport& report, const kb::KnowledgeBase* kb);

/// Parses "LINE <n>: <reason>" lines. Throws kFormatError when there are
/// none and kLineOutOfRange when n is not a line of `code`.
Localization parse_localization(std::string_view response, std::string_view code);

/// Precondition: report is compile_error, sim_failure or timeout
/// (kWrongStatus otherwise). Throws kLlmFailure on provider failure.
Localization localize(std::string_view spec, std::string_view code, const sim::SimulationReport& report,
                      llm::Provider& llm, const kb::KnowledgeBase* kb = nullptr);

/// The spec itself when short; otherwise the top paragraphs by the number of
/// identifiers they share with the candidate statements, in original order.
std::string relevant_spec(std::string_view spec, const Localization& loc);

llm::ChatRequest build_correct_request(std::string_view spec, std::string_view code, const Localization& loc,
                                       const sim::SimulationReport& report);

/// The single fenced block of `response`; kFormatError for zero or several.
std::string parse_correction(std::string_view response);

std::string correct(std::string_view spec, std::string_view code, const Localization& loc,
                    const sim::SimulationReport& report, llm::Provider& llm);

struct DebugOptions {
    int max_iter = kDefaultMaxIter;
    const kb::KnowledgeBase* kb = nullptr;
    /// Report for `code` if the caller already simulated it.
    std::optional<sim::SimulationReport> initial_report;
};

/// Localize, correct, simulate; repeat until the design passes (fixed),
/// max_iter rounds ran (exhausted) or two consecutive rounds left both the
/// code and the mismatch count unchanged (stagnated). A passing initial
/// report returns fixed with no iterations. Failures throw DebugAborted.
DebugResult debug_loop(std::string_view spec, std::string_view code, std::string_view testbench,
                       sim::Simulator& sim, llm::Provider& llm, const DebugOptions& opts = {});

}  // namespace rtlforge::debug
