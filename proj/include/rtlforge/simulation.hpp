#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rtlforge/knowledge_base.hpp"

namespace rtlforge::sim {

enum class Status { kPass, kCompileError, kSimFailure, kToolError, kTimeout };

std::string_view to_string(Status s);
std::optional<Status> status_from_string(std::string_view s);

struct CompileMessage {
    std::string file;
    int line = 0;
    std::string text;

    bool operator==(const CompileMessage&) const = default;
};

struct FirstFailure {
    std::string time_label;
    std::string signal;
    std::string expected;
    std::string got;

    bool operator==(const FirstFailure&) const = default;
};

struct SimulationReport {
    static constexpr size_t kMaxExcerpt = 8192;

    Status status = Status::kToolError;
    std::vector<CompileMessage> compile_messages;
    int mismatch_count = 0;
    int total_samples = 0;
    std::optional<FirstFailure> first_failure;
    std::string raw_excerpt;

    bool passed() const { return status == Status::kPass; }
    bool operator==(const SimulationReport&) const = default;
};

/// Truncates to SimulationReport::kMaxExcerpt bytes.
std::string bounded_excerpt(std::string_view text);

std::string to_json(const SimulationReport& r);
SimulationReport report_from_json(std::string_view json);  // throws kParseError

/// Command templates. Placeholders: {sources} (space separated file names
/// in the work directory), {out} (tool scratch directory), {exe} (compiled
/// image), {top} (testbench top module).
struct SimulatorConfig {
    std::string name = "icarus";
    std::string compile_cmd = "iverilog -g2012 -s {top} -o {exe} {sources}";
    std::string run_cmd = "vvp -n {exe}";
    std::string top = "tb";
    std::chrono::duration<double> compile_timeout{300.0};
    std::chrono::duration<double> sim_timeout{20.0};

    static SimulatorConfig icarus();
    static SimulatorConfig verilator(const std::string& program = "verilator");
    /// Icarus if iverilog is on PATH, else Verilator (verilator-cli or verilator).
    static std::optional<SimulatorConfig> detect();
    /// Preset by name ("icarus", "verilator"); throws kInvalidArgument.
    static SimulatorConfig preset(std::string_view name);
};

/// Compiler diagnostics in either Icarus ("f.v:6: error: ...") or Verilator
/// ("%Error-KIND: f.v:6:13: ...") form.
std::vector<CompileMessage> parse_compile_messages(std::string_view tool_output);

/// Reads MISMATCH lines and the "Mismatches: <n> in <m> samples" summary.
/// Never throws; unparsable output becomes tool_error.
SimulationReport parse_simulation_output(std::string_view output);

struct CompileOutcome {
    bool ok = false;
    bool tool_error = false;
    bool timed_out = false;
    std::filesystem::path executable;
    std::vector<CompileMessage> messages;
    std::string raw;
};

struct SourceFile {
    std::string name;
    std::string text;
};

/// Writes `sources` into `workdir` and runs the compile command there.
CompileOutcome compile(const SimulatorConfig& cfg, const std::vector<SourceFile>& sources,
                       const std::filesystem::path& workdir);

/// Runs a compiled image. `timeout` overrides cfg.sim_timeout.
SimulationReport simulate(const SimulatorConfig& cfg, const CompileOutcome& compiled,
                          const std::filesystem::path& workdir,
                          std::optional<std::chrono::duration<double>> timeout = std::nullopt);

/// Knowledge-base keywords for a compile_error report. Throws kWrongStatus otherwise.
std::vector<std::string> error_keywords(const SimulationReport& report, const kb::KnowledgeBase& kb);

class Simulator {
public:
    virtual ~Simulator() = default;
    virtual SimulationReport run(std::string_view design, std::string_view testbench) = 0;
};

/// Compiles design.v + tb.v in a fresh temporary directory per run.
class ExternalSimulator : public Simulator {
public:
    explicit ExternalSimulator(SimulatorConfig cfg, bool keep_workdirs = false)
        : cfg_(std::move(cfg)), keep_(keep_workdirs) {}
    SimulationReport run(std::string_view design, std::string_view testbench) override;
    const SimulatorConfig& config() const { return cfg_; }

private:
    SimulatorConfig cfg_;
    bool keep_;
};

/// Record/replay cache of simulation reports keyed by sha256 of the design
/// and testbench, stored as JSON lines. With no inner simulator a miss is a
/// tool_error report.
class CachedSimulator : public Simulator {
public:
    CachedSimulator(std::filesystem::path file, std::shared_ptr<Simulator> inner);
    SimulationReport run(std::string_view design, std::string_view testbench) override;

    static std::string key(std::string_view design, std::string_view testbench);
    size_t size() const;
    size_t misses() const;

private:
    std::filesystem::path file_;
    std::shared_ptr<Simulator> inner_;
    mutable std::mutex mu_;
    std::vector<std::pair<std::string, SimulationReport>> entries_;
    size_t misses_ = 0;
};

}  // namespace rtlforge::sim
