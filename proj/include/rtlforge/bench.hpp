#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtlforge/llm_client.hpp"
#include "rtlforge/pipeline.hpp"
#include "rtlforge/simulation.hpp"

namespace rtlforge::bench {

enum class Mode { kLive, kRecord, kReplay };

std::string_view to_string(Mode m);
/// Throws kInvalidArgument.
Mode mode_from_string(std::string_view s);

/// Repair mechanisms credited with a task's first pass.
/// RDR: refinement changed the description and the first generation passed.
/// RAG: the rag_fix round passed. MDC: the mmd_convert round passed.
/// TDM: a debug round passed.
enum class Mechanism { kRDR, kRAG, kMDC, kTDM };

std::string_view to_string(Mechanism m);

struct TaskResult {
    std::string task_id;
    pipeline::FinalStatus final_status = pipeline::FinalStatus::kFail;
    std::optional<pipeline::StageKind> passing_stage;
    bool description_refined = false;
    int stage_count = 0;
    std::optional<debug::Outcome> debug_outcome;
    std::string failure_reason;
    std::optional<double> wall_time_s;
};

TaskResult summarize(const pipeline::PipelineTrace& t);

/// Credited mechanism for a passing result; nullopt for a pass at generate
/// with an unchanged description, and for failures.
std::optional<Mechanism> credited_mechanism(const TaskResult& r);

/// 100 * passed / total rounded half up to one decimal. Throws kEmptySuite
/// for total 0.
double pass_at_1(int passed, int total);
/// pass_at_1 with exactly one decimal ("91.0").
std::string format_pass_at_1(double v);

struct SuiteResult {
    std::string suite_name;
    Mode mode = Mode::kReplay;
    std::vector<TaskResult> tasks;  // suite order (by task id)
    int passed = 0;
    int total = 0;
    double pass_at_1 = 0.0;
    std::map<Mechanism, int> repairs;
    int passes_at_generate = 0;
    int fails = 0;
    /// Absent in replay mode so reports are byte-stable.
    std::optional<double> wall_time_s;
};

/// Fills the counts of a result from its task list. Throws kEmptySuite.
void tally(SuiteResult& r);

struct BenchConfig {
    pipeline::PipelineConfig pipeline;
    llm::ProviderConfig provider;
    std::optional<sim::SimulatorConfig> simulator;  // detected when empty
    std::filesystem::path kb_dir;
    int jobs = 1;
    /// Reports and traces go here; defaults to <suite>/out.
    std::filesystem::path output_dir;
    /// Defaults to <suite>/llm.jsonl and <suite>/sim.jsonl.
    std::filesystem::path transcript_path;
    std::filesystem::path sim_cache_path;
    /// Replaces the HTTP provider in live and record modes.
    llm::Provider* provider_override = nullptr;
};

/// Reads a config file. Sections: [provider] (model, temperature,
/// max_output_tokens, endpoint_url, api_key_env, request_timeout_s,
/// max_retries), [simulator] (preset, compile_cmd, run_cmd, top,
/// compile_timeout_s, sim_timeout_s), [paths] (kb, output, transcript,
/// sim_cache), [pipeline] (max_iter, kb_top_k, jobs). Relative paths are
/// resolved against the file's directory.
BenchConfig load_config(const std::filesystem::path& path);

/// Runs every task of <suite_dir>/tasks with up to cfg.jobs workers, writes
/// traces/<id>.json, report.txt, report.csv, ablation.txt and ablation.csv
/// under the output directory. Live mode calls the provider and simulator;
/// record mode also appends both to the transcript and simulation cache;
/// replay mode answers from them only. A task that throws fails with the
/// reason recorded; the suite still completes.
SuiteResult run_suite(const std::filesystem::path& suite_dir, const BenchConfig& cfg, Mode mode);

std::string render_report_text(const SuiteResult& r);
std::string render_report_csv(const SuiteResult& r);
/// Mechanism table with the generate and fail rows that complete the total.
std::string report_ablation(const SuiteResult& r);
std::string report_ablation_csv(const SuiteResult& r);

void write_reports(const SuiteResult& r, const std::filesystem::path& dir);

}  // namespace rtlforge::bench
