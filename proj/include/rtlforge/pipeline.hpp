#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtlforge/debugger.hpp"
#include "rtlforge/knowledge_base.hpp"
#include "rtlforge/llm_client.hpp"
#include "rtlforge/simulation.hpp"
#include "rtlforge/spec_refiner.hpp"

namespace rtlforge::pipeline {

struct DesignTask {
    std::string id;
    std::string description;
    std::string interface_text;
    std::string testbench;
    /// Only for reporting; never shown to the model.
    std::optional<std::string> golden_ref;
    std::vector<std::string> tags;

    /// Throws kInvalidArgument or kParseError (interface).
    void validate() const;
};

/// Reads <dir>/{description.txt, interface.v, testbench.v, golden.v?, tags.txt?};
/// the id is the directory name.
DesignTask load_task(const std::filesystem::path& dir);

/// Tasks under <suite>/tasks/, sorted by id. Throws kIoError if the
/// directory is missing.
std::vector<DesignTask> load_suite(const std::filesystem::path& suite_dir);

enum class StageKind { kRefine, kGenerate, kMmdConvert, kRagFix, kDebug };

std::string_view to_string(StageKind k);
std::optional<StageKind> stage_from_string(std::string_view s);

/// Summary of a SimulationReport kept in traces.
struct Verdict {
    sim::Status status = sim::Status::kToolError;
    int mismatch_count = 0;
    int total_samples = 0;

    bool passed() const { return status == sim::Status::kPass; }
    bool operator==(const Verdict&) const = default;
};

Verdict summarize(const sim::SimulationReport& r);

struct Exchange {
    std::string tag;
    std::string prompt_digest;
    std::string response_digest;

    bool operator==(const Exchange&) const = default;
};

struct StageRecord {
    StageKind kind = StageKind::kRefine;
    /// Digests of the exchange that produced the stage's result.
    std::string prompt_digest;
    std::string response_digest;
    /// Every model exchange of the stage (debug rounds have two).
    std::vector<Exchange> exchanges;
    std::optional<Verdict> verdict;  // none for refine
    std::string code_digest;         // design simulated by this stage
    std::string note;

    bool operator==(const StageRecord&) const = default;
};

enum class FinalStatus { kPass, kFail };

struct PipelineTrace {
    std::string task_id;
    /// Whether refinement changed the description.
    bool description_refined = false;
    std::vector<StageRecord> stages;
    FinalStatus final_status = FinalStatus::kFail;
    std::string final_code;
    /// Set when an LLM or tool failure stopped the run.
    std::string failure_reason;
    std::optional<debug::Outcome> debug_outcome;
    std::optional<double> wall_time_s;

    bool operator==(const PipelineTrace&) const = default;
};

std::string to_json(const PipelineTrace& t);  // pretty printed, ends with \n
PipelineTrace trace_from_json(std::string_view json);  // throws kParseError

/// Stage kind after which the task first passed, if it passed.
std::optional<StageKind> passing_stage(const PipelineTrace& t);

/// Throws kInvalidArgument if the stage order is not one the state machine
/// can produce (including a stage after a passing verdict, or both branch
/// kinds in one trace).
void check_trace_shape(const PipelineTrace& t);

struct PipelineConfig {
    double temperature = llm::kBenchmarkTemperature;
    int max_iter = debug::kDefaultMaxIter;
    size_t kb_top_k = kb::kDefaultTopK;
    size_t kb_budget_chars = 4000;
    /// Off in replay mode so traces are byte-stable.
    bool record_wall_time = true;
    std::vector<refine::Rule> codegen_rules = refine::codegen_rules();
};

/// The content of the single fenced block, or the span from the first
/// "module" to the next "endmodule". Throws kNoModuleFound.
std::string extract_module(std::string_view response);

/// Role statement, description, interface header and the instruction to
/// answer with one module.
std::string generation_user_prompt(std::string_view description, std::string_view interface_text);

llm::ChatRequest build_generate_request(std::string_view description, std::string_view interface_text,
                                        std::string_view kb_context, const PipelineConfig& cfg,
                                        std::string_view tag = "generate");

/// refine, generate, one mmd_convert or rag_fix round, then debug_loop.
/// LLM and tool failures end the run with failure_reason set; the trace is
/// returned either way.
PipelineTrace run_task(const DesignTask& task, const PipelineConfig& cfg, const kb::KnowledgeBase& kb,
                       llm::Provider& llm, sim::Simulator& sim);

/// <dir>/<task_id>.json
void write_trace(const PipelineTrace& t, const std::filesystem::path& dir);

}  // namespace rtlforge::pipeline
