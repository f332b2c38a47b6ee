#include "rtlforge/simulation.hpp"

#include <stdlib.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <regex>

#include "rtlforge/digest.hpp"
#include "rtlforge/error.hpp"
#include "rtlforge/process.hpp"
#include "rtlforge/text.hpp"

namespace rtlforge::sim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Status s) {
    switch (s) {
        case Status::kPass: return "pass";
        case Status::kCompileError: return "compile_error";
        case Status::kSimFailure: return "sim_failure";
        case Status::kToolError: return "tool_error";
        case Status::kTimeout: return "timeout";
    }
    return "unknown";
}

std::optional<Status> status_from_string(std::string_view s) {
    for (auto st : {Status::kPass, Status::kCompileError, Status::kSimFailure, Status::kToolError, Status::kTimeout})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

std::string bounded_excerpt(std::string_view text) {
    return std::string(text.substr(0, SimulationReport::kMaxExcerpt));
}

std::string to_json(const SimulationReport& r) {
    json j;
    j["status"] = std::string(to_string(r.status));
    j["compile_messages"] = json::array();
    for (const auto& m : r.compile_messages)
        j["compile_messages"].push_back({{"file", m.file}, {"line", m.line}, {"text", m.text}});
    j["mismatch_count"] = r.mismatch_count;
    j["total_samples"] = r.total_samples;
    if (r.first_failure) {
        const auto& f = *r.first_failure;
        j["first_failure"] = {{"time", f.time_label}, {"signal", f.signal}, {"expected", f.expected}, {"got", f.got}};
    } else {
        j["first_failure"] = nullptr;
    }
    j["raw_excerpt"] = r.raw_excerpt;
    return j.dump();
}

SimulationReport report_from_json(std::string_view text) {
    try {
        auto j = json::parse(text);
        SimulationReport r;
        auto st = status_from_string(j.at("status").get<std::string>());
        if (!st) throw Error(ErrorCode::kParseError, "unknown status");
        r.status = *st;
        for (const auto& m : j.at("compile_messages"))
            r.compile_messages.push_back({m.at("file").get<std::string>(), m.at("line").get<int>(),
                                          m.at("text").get<std::string>()});
        r.mismatch_count = j.at("mismatch_count").get<int>();
        r.total_samples = j.at("total_samples").get<int>();
        if (!j.at("first_failure").is_null()) {
            const auto& f = j["first_failure"];
            r.first_failure = FirstFailure{f.at("time").get<std::string>(), f.at("signal").get<std::string>(),
                                           f.at("expected").get<std::string>(), f.at("got").get<std::string>()};
        }
        r.raw_excerpt = bounded_excerpt(j.at("raw_excerpt").get<std::string>());
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParseError, std::string("simulation report: ") + e.what());
    }
}

SimulatorConfig SimulatorConfig::icarus() { return SimulatorConfig{}; }

SimulatorConfig SimulatorConfig::verilator(const std::string& program) {
    SimulatorConfig c;
    c.name = "verilator";
    // PYTHON3 is passed explicitly because some installs lack a `python` alias.
    // Unsplit output keeps large designs off the precompiled-header path,
    // which some packaged builds get wrong.
    c.compile_cmd = program +
                    " --binary --timing -Wno-fatal -Wno-lint -Wno-style -Wno-TIMESCALEMOD --output-split 0 "
                    "--top-module {top} "
                    "-Mdir {out} -o {exe} {sources} -MAKEFLAGS PYTHON3=python3";
    c.run_cmd = "{exe}";
    return c;
}

std::optional<SimulatorConfig> SimulatorConfig::detect() {
    if (program_on_path("iverilog") && program_on_path("vvp")) return icarus();
    for (const char* v : {"verilator-cli", "verilator"})
        if (program_on_path(v)) return verilator(v);
    return std::nullopt;
}

SimulatorConfig SimulatorConfig::preset(std::string_view name) {
    if (name == "icarus") return icarus();
    if (name == "verilator") {
        return verilator(program_on_path("verilator-cli") ? "verilator-cli" : "verilator");
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown simulator preset '" + std::string(name) + "'");
}

std::vector<CompileMessage> parse_compile_messages(std::string_view tool_output) {
    static const std::regex kVerilator(R"(^%Error(?:-[A-Z0-9_]+)?:\s*([^:\s]+):(\d+):(?:\d+:)?\s*(.*)$)");
    static const std::regex kIcarus(R"(^([^:\s]+\.s?v):(\d+):\s*(.*)$)");
    std::vector<CompileMessage> out;
    for (const auto& line : text::split_lines(tool_output)) {
        std::smatch m;
        if (std::regex_match(line, m, kVerilator) || std::regex_match(line, m, kIcarus)) {
            std::string msg(text::trim(m[3].str()));
            if (msg.rfind(": ", 0) == 0) msg = std::string(text::trim(msg.substr(2)));
            out.push_back({m[1].str(), std::stoi(m[2].str()), msg});
        }
    }
    return out;
}

namespace {

std::optional<double> numeric_time(const std::string& label) {
    const char* s = label.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s) return std::nullopt;
    return v;
}

}  // namespace

SimulationReport parse_simulation_output(std::string_view output) {
    static const std::regex kMismatch(R"(MISMATCH\s+time=(\S+)\s+sig=(\S+)\s+exp=(\S+)\s+got=(\S+))");
    static const std::regex kSummary(R"(Mismatches:\s*(\d+)\s+in\s+(\d+)\s+samples)");
    static const std::regex kHint(R"(Output '([^']+)' has \d+ mismatches\. First mismatch occurred at time (\S+?)\.?$)");
    SimulationReport r;
    r.raw_excerpt = bounded_excerpt(output);
    std::vector<FirstFailure> mismatches;
    std::optional<FirstFailure> hint;
    std::optional<std::pair<int, int>> summary;
    for (const auto& line : text::split_lines(output)) {
        std::smatch m;
        if (std::regex_search(line, m, kMismatch)) {
            mismatches.push_back({m[1].str(), m[2].str(), m[3].str(), m[4].str()});
        } else if (std::regex_search(line, m, kSummary)) {
            try {
                summary = {std::stoi(m[1].str()), std::stoi(m[2].str())};
            } catch (const std::exception&) {
                summary.reset();
            }
        } else if (!hint && std::regex_search(line, m, kHint)) {
            hint = FirstFailure{m[2].str(), m[1].str(), "?", "?"};
        }
    }
    if (!summary && mismatches.empty()) {
        r.status = Status::kToolError;
        return r;
    }
    r.mismatch_count = summary ? summary->first : static_cast<int>(mismatches.size());
    r.total_samples = summary ? summary->second : 0;
    if (r.mismatch_count == 0 && mismatches.empty()) {
        r.status = Status::kPass;
        return r;
    }
    r.status = Status::kSimFailure;
    if (r.mismatch_count == 0) r.mismatch_count = static_cast<int>(mismatches.size());
    if (!mismatches.empty()) {
        size_t best = 0;
        for (size_t i = 1; i < mismatches.size(); ++i) {
            auto a = numeric_time(mismatches[i].time_label), b = numeric_time(mismatches[best].time_label);
            if (a && b && *a < *b) best = i;
        }
        r.first_failure = mismatches[best];
    } else {
        // Summary only: the failing locus is unknown.
        r.first_failure = hint ? *hint : FirstFailure{"?", "?", "?", "?"};
    }
    return r;
}

namespace {

std::string fill(std::string cmd, const std::vector<std::pair<std::string, std::string>>& values) {
    for (const auto& [k, v] : values) cmd = text::replace_all(cmd, k, v);
    return cmd;
}

std::vector<std::pair<std::string, std::string>> placeholders(const SimulatorConfig& cfg,
                                                              const std::vector<SourceFile>& sources,
                                                              const fs::path& workdir) {
    std::vector<std::string> names;
    for (const auto& s : sources) names.push_back(shell_quote(s.name));
    return {{"{sources}", text::join(names, " ")},
            {"{out}", shell_quote((workdir / "obj").string())},
            {"{exe}", shell_quote((workdir / "sim.out").string())},
            {"{top}", cfg.top}};
}

}  // namespace

CompileOutcome compile(const SimulatorConfig& cfg, const std::vector<SourceFile>& sources, const fs::path& workdir) {
    CompileOutcome out;
    for (const auto& s : sources) text::write_file(workdir / s.name, s.text);
    auto res = run_shell(fill(cfg.compile_cmd, placeholders(cfg, sources, workdir)), workdir, cfg.compile_timeout);
    out.raw = res.stderr_text + res.stdout_text;
    out.executable = workdir / "sim.out";
    if (res.timed_out) {
        out.timed_out = true;
        return out;
    }
    out.messages = parse_compile_messages(out.raw);
    if (res.exit_code == 0 && out.messages.empty()) {
        out.ok = true;
        return out;
    }
    if (out.messages.empty()) {
        // 126/127: the shell could not run the compiler at all.
        if (res.exit_code == 126 || res.exit_code == 127 || res.exit_code < 0) {
            out.tool_error = true;
        } else {
            auto lines = text::split_lines(out.raw);
            out.messages.push_back({"", 0, lines.empty() ? "compiler exited with status " +
                                                               std::to_string(res.exit_code)
                                                         : std::string(text::trim(lines.front()))});
        }
    }
    return out;
}

namespace {

// Drops tool banners and timing statistics and makes paths relative to the
// work directory, so reports of equal runs compare equal.
std::string clean_output(std::string_view raw, const fs::path& workdir) {
    static const std::regex kNoise(R"(^- (V e r i l a t|S i m u l a t|Verilator:))");
    std::string out;
    for (auto& line : text::split_lines(raw)) {
        if (std::regex_search(line, kNoise)) continue;
        out += text::replace_all(line, workdir.string() + "/", "") + "\n";
    }
    return out;
}

}  // namespace

SimulationReport simulate(const SimulatorConfig& cfg, const CompileOutcome& compiled, const fs::path& workdir,
                          std::optional<std::chrono::duration<double>> timeout) {
    SimulationReport r;
    if (!compiled.ok) {
        r.status = compiled.timed_out ? Status::kTimeout
                   : compiled.tool_error ? Status::kToolError
                                         : Status::kCompileError;
        r.compile_messages = compiled.messages;
        r.raw_excerpt = bounded_excerpt(clean_output(compiled.raw, workdir));
        return r;
    }
    auto res = run_shell(fill(cfg.run_cmd, placeholders(cfg, {}, workdir)), workdir, timeout.value_or(cfg.sim_timeout));
    if (res.timed_out) {
        r.status = Status::kTimeout;
        r.raw_excerpt = bounded_excerpt(clean_output(res.stdout_text + res.stderr_text, workdir));
        return r;
    }
    r = parse_simulation_output(clean_output(res.stdout_text + res.stderr_text, workdir));
    return r;
}

std::vector<std::string> error_keywords(const SimulationReport& report, const kb::KnowledgeBase& kb) {
    if (report.status != Status::kCompileError)
        throw Error(ErrorCode::kWrongStatus,
                    "error keywords need a compile_error report, got " + std::string(to_string(report.status)));
    std::string joined;
    for (const auto& m : report.compile_messages) joined += m.text + "\n";
    if (joined.empty()) joined = report.raw_excerpt;
    return kb::extract_keywords(kb, joined, kb::SourceKind::kCompilerError);
}

SimulationReport ExternalSimulator::run(std::string_view design, std::string_view testbench) {
    std::string tmpl = (fs::temp_directory_path() / "rtlforge-sim-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw Error(ErrorCode::kIoError, "cannot create a simulation directory");
    const fs::path dir = tmpl;
    SimulationReport r;
    try {
        auto compiled = compile(cfg_, {{"design.v", std::string(design)}, {"tb.v", std::string(testbench)}}, dir);
        r = simulate(cfg_, compiled, dir);
    } catch (...) {
        if (!keep_) fs::remove_all(dir);
        throw;
    }
    if (!keep_) {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    return r;
}

CachedSimulator::CachedSimulator(fs::path file, std::shared_ptr<Simulator> inner)
    : file_(std::move(file)), inner_(std::move(inner)) {
    if (!fs::exists(file_)) return;
    int lineno = 0;
    for (const auto& line : text::split_lines(text::read_file(file_))) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            entries_.emplace_back(j.at("key").get<std::string>(), report_from_json(j.at("report").dump()));
        } catch (const std::exception& e) {
            throw Error(ErrorCode::kParseError, file_.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::string CachedSimulator::key(std::string_view design, std::string_view testbench) {
    std::string buf(design);
    buf.push_back('\0');
    buf.append(testbench);
    return sha256_hex(buf);
}

size_t CachedSimulator::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

size_t CachedSimulator::misses() const {
    std::lock_guard lock(mu_);
    return misses_;
}

SimulationReport CachedSimulator::run(std::string_view design, std::string_view testbench) {
    const std::string k = key(design, testbench);
    {
        std::lock_guard lock(mu_);
        for (const auto& [key, report] : entries_)
            if (key == k) return report;
        ++misses_;
    }
    if (!inner_) {
        SimulationReport r;
        r.status = Status::kToolError;
        r.raw_excerpt = "no recorded simulation for " + k;
        return r;
    }
    SimulationReport r = inner_->run(design, testbench);
    std::lock_guard lock(mu_);
    for (const auto& [key, report] : entries_)
        if (key == k) return report;
    entries_.emplace_back(k, r);
    json line{{"key", k}, {"report", json::parse(to_json(r))}};
    if (!file_.parent_path().empty()) fs::create_directories(file_.parent_path());
    std::ofstream f(file_, std::ios::app);
    if (!f) throw Error(ErrorCode::kIoError, "cannot append to " + file_.string());
    f << line.dump() << "\n";
    return r;
}

}  // namespace rtlforge::sim
