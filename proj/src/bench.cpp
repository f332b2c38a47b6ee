#include "rtlforge/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <thread>

#include "rtlforge/error.hpp"
#include "rtlforge/knowledge_base.hpp"
#include "rtlforge/text.hpp"
#include "rtlforge/toml_lite.hpp"

namespace rtlforge::bench {

namespace fs = std::filesystem;

namespace {

constexpr Mechanism kMechanisms[] = {Mechanism::kRDR, Mechanism::kRAG, Mechanism::kMDC, Mechanism::kTDM};

std::string pad(const std::string& s, size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    return "\"" + text::replace_all(s, "\"", "\"\"") + "\"";
}

std::string fmt_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", s);
    return buf;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::kLive: return "live";
        case Mode::kRecord: return "record";
        case Mode::kReplay: return "replay";
    }
    return "?";
}

Mode mode_from_string(std::string_view s) {
    for (auto m : {Mode::kLive, Mode::kRecord, Mode::kReplay})
        if (to_string(m) == s) return m;
    throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(s) + "'");
}

std::string_view to_string(Mechanism m) {
    switch (m) {
        case Mechanism::kRDR: return "RDR";
        case Mechanism::kRAG: return "RAG";
        case Mechanism::kMDC: return "MDC";
        case Mechanism::kTDM: return "TDM";
    }
    return "?";
}

TaskResult summarize(const pipeline::PipelineTrace& t) {
    TaskResult r;
    r.task_id = t.task_id;
    r.final_status = t.final_status;
    if (t.final_status == pipeline::FinalStatus::kPass) r.passing_stage = pipeline::passing_stage(t);
    r.description_refined = t.description_refined;
    r.stage_count = static_cast<int>(t.stages.size());
    r.debug_outcome = t.debug_outcome;
    r.failure_reason = t.failure_reason;
    r.wall_time_s = t.wall_time_s;
    return r;
}

std::optional<Mechanism> credited_mechanism(const TaskResult& r) {
    if (r.final_status != pipeline::FinalStatus::kPass || !r.passing_stage) return std::nullopt;
    switch (*r.passing_stage) {
        case pipeline::StageKind::kGenerate:
            return r.description_refined ? std::optional(Mechanism::kRDR) : std::nullopt;
        case pipeline::StageKind::kRagFix: return Mechanism::kRAG;
        case pipeline::StageKind::kMmdConvert: return Mechanism::kMDC;
        case pipeline::StageKind::kDebug: return Mechanism::kTDM;
        case pipeline::StageKind::kRefine: break;
    }
    return std::nullopt;
}

double pass_at_1(int passed, int total) {
    if (total <= 0) throw Error(ErrorCode::kEmptySuite, "no tasks");
    if (passed < 0 || passed > total) throw Error(ErrorCode::kInvalidArgument, "passed outside [0, total]");
    // Integer half-up rounding of 1000 * passed / total, in tenths of a percent.
    const long long tenths = (2000LL * passed + total) / (2LL * total);
    return static_cast<double>(tenths) / 10.0;
}

std::string format_pass_at_1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

void tally(SuiteResult& r) {
    r.total = static_cast<int>(r.tasks.size());
    r.passed = 0;
    r.fails = 0;
    r.passes_at_generate = 0;
    r.repairs.clear();
    for (auto m : kMechanisms) r.repairs[m] = 0;
    for (const auto& t : r.tasks) {
        if (t.final_status != pipeline::FinalStatus::kPass) {
            ++r.fails;
            continue;
        }
        ++r.passed;
        if (auto m = credited_mechanism(t)) ++r.repairs[*m];
        else ++r.passes_at_generate;
    }
    r.pass_at_1 = pass_at_1(r.passed, r.total);
}

BenchConfig load_config(const fs::path& path) {
    const auto doc = toml_lite::parse(text::read_file(path));
    const fs::path base = path.parent_path();
    BenchConfig cfg;
    if (const auto* p = doc.section("provider")) {
        if (auto v = p->get_string("model")) cfg.provider.model_name = *v;
        if (auto v = p->get_number("temperature")) cfg.provider.temperature = *v;
        if (auto v = p->get_number("max_output_tokens")) cfg.provider.max_output_tokens = static_cast<int>(*v);
        if (auto v = p->get_string("endpoint_url")) cfg.provider.endpoint_url = *v;
        if (auto v = p->get_string("api_key_env")) cfg.provider.api_key_env = *v;
        if (auto v = p->get_number("request_timeout_s")) cfg.provider.request_timeout = std::chrono::duration<double>(*v);
        if (auto v = p->get_number("max_retries")) cfg.provider.max_retries = static_cast<int>(*v);
        if (p->contains("api_key"))
            throw Error(ErrorCode::kInvalidArgument, "config files name the key variable (api_key_env), not the key");
        cfg.provider.validate();
        cfg.pipeline.temperature = cfg.provider.temperature;
    }
    if (const auto* s = doc.section("simulator")) {
        sim::SimulatorConfig sc = s->get_string("preset") ? sim::SimulatorConfig::preset(*s->get_string("preset"))
                                                          : sim::SimulatorConfig{};
        if (auto v = s->get_string("name")) sc.name = *v;
        if (auto v = s->get_string("compile_cmd")) sc.compile_cmd = *v;
        if (auto v = s->get_string("run_cmd")) sc.run_cmd = *v;
        if (auto v = s->get_string("top")) sc.top = *v;
        if (auto v = s->get_number("compile_timeout_s")) sc.compile_timeout = std::chrono::duration<double>(*v);
        if (auto v = s->get_number("sim_timeout_s")) sc.sim_timeout = std::chrono::duration<double>(*v);
        cfg.simulator = sc;
    }
    if (const auto* p = doc.section("paths")) {
        if (auto v = p->get_string("kb")) cfg.kb_dir = resolve(base, *v);
        if (auto v = p->get_string("output")) cfg.output_dir = resolve(base, *v);
        if (auto v = p->get_string("transcript")) cfg.transcript_path = resolve(base, *v);
        if (auto v = p->get_string("sim_cache")) cfg.sim_cache_path = resolve(base, *v);
    }
    if (const auto* p = doc.section("pipeline")) {
        if (auto v = p->get_number("max_iter")) cfg.pipeline.max_iter = static_cast<int>(*v);
        if (auto v = p->get_number("kb_top_k")) cfg.pipeline.kb_top_k = static_cast<size_t>(*v);
        if (auto v = p->get_number("jobs")) cfg.jobs = static_cast<int>(*v);
    }
    return cfg;
}

SuiteResult run_suite(const fs::path& suite_dir, const BenchConfig& cfg, Mode mode) {
    const auto started = std::chrono::steady_clock::now();
    if (!fs::is_directory(suite_dir)) throw Error(ErrorCode::kIoError, "no suite at " + suite_dir.string());
    const fs::path tasks_dir = suite_dir / "tasks";
    std::vector<fs::path> dirs;
    if (fs::is_directory(tasks_dir))
        for (const auto& e : fs::directory_iterator(tasks_dir))
            if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw Error(ErrorCode::kEmptySuite, "no tasks under " + tasks_dir.string());

    const fs::path out = cfg.output_dir.empty() ? suite_dir / "out" : cfg.output_dir;
    const fs::path transcript_path = cfg.transcript_path.empty() ? suite_dir / "llm.jsonl" : cfg.transcript_path;
    const fs::path sim_path = cfg.sim_cache_path.empty() ? suite_dir / "sim.jsonl" : cfg.sim_cache_path;
    const fs::path kb_dir = cfg.kb_dir.empty() ? suite_dir / "kb" : cfg.kb_dir;
    const kb::KnowledgeBase kb = kb::load_kb(kb_dir);

    pipeline::PipelineConfig pcfg = cfg.pipeline;
    pcfg.record_wall_time = mode != Mode::kReplay;

    // Provider and simulator per mode.
    llm::Transcript transcript;
    std::unique_ptr<llm::Provider> base_provider;
    std::unique_ptr<llm::Provider> provider;
    std::shared_ptr<sim::Simulator> simulator;
    auto external = [&]() -> std::shared_ptr<sim::Simulator> {
        auto sc = cfg.simulator ? cfg.simulator : sim::SimulatorConfig::detect();
        if (!sc) throw Error(ErrorCode::kToolError, "no simulator configured or found on PATH");
        return std::make_shared<sim::ExternalSimulator>(*sc);
    };
    llm::Provider* live = cfg.provider_override;
    if (mode != Mode::kReplay && !live) {
        base_provider = std::make_unique<llm::HttpProvider>(cfg.provider);
        live = base_provider.get();
    }
    switch (mode) {
        case Mode::kLive:
            simulator = external();
            break;
        case Mode::kRecord:
            if (fs::exists(transcript_path)) transcript = llm::Transcript::load(transcript_path);
            provider = std::make_unique<llm::RecordingProvider>(*live, transcript);
            live = provider.get();
            simulator = std::make_shared<sim::CachedSimulator>(sim_path, external());
            break;
        case Mode::kReplay:
            if (!fs::exists(transcript_path))
                throw Error(ErrorCode::kIoError, "replay needs a transcript at " + transcript_path.string());
            transcript = llm::Transcript::load(transcript_path);
            provider = std::make_unique<llm::ReplayProvider>(transcript);
            live = provider.get();
            simulator = std::make_shared<sim::CachedSimulator>(sim_path, nullptr);
            break;
    }

    std::vector<TaskResult> results(dirs.size());
    std::vector<pipeline::PipelineTrace> traces(dirs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < dirs.size(); i = next++) {
            pipeline::PipelineTrace trace;
            trace.task_id = dirs[i].filename().string();
            try {
                trace = pipeline::run_task(pipeline::load_task(dirs[i]), pcfg, kb, *live, *simulator);
            } catch (const std::exception& e) {
                trace.final_status = pipeline::FinalStatus::kFail;
                trace.failure_reason = e.what();
            }
            traces[i] = std::move(trace);
        }
    };
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(dirs.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // Reports are written single-threaded once every task is done.
    SuiteResult r;
    r.suite_name = fs::absolute(suite_dir).lexically_normal().filename().string();
    if (r.suite_name.empty()) r.suite_name = fs::absolute(suite_dir).lexically_normal().parent_path().filename().string();
    r.mode = mode;
    for (size_t i = 0; i < traces.size(); ++i) {
        pipeline::write_trace(traces[i], out / "traces");
        results[i] = summarize(traces[i]);
    }
    r.tasks = std::move(results);
    tally(r);
    if (mode == Mode::kRecord) transcript.save(transcript_path);
    if (mode != Mode::kReplay)
        r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_reports(r, out);
    return r;
}

std::string render_report_text(const SuiteResult& r) {
    std::string out = "suite: " + r.suite_name + "\nmode: " + std::string(to_string(r.mode)) + "\n";
    out += "tasks: " + std::to_string(r.total) + "\npassed: " + std::to_string(r.passed) + "\n";
    out += "pass@1: " + format_pass_at_1(r.pass_at_1) + "\n";
    if (r.wall_time_s) out += "wall time (s): " + fmt_seconds(*r.wall_time_s) + "\n";
    size_t w = 7;
    for (const auto& t : r.tasks) w = std::max(w, t.task_id.size());
    out += "\n" + pad("task", w) + "  status  first pass   stages  debug      note\n";
    for (const auto& t : r.tasks) {
        std::string stage = t.passing_stage ? std::string(pipeline::to_string(*t.passing_stage)) : "-";
        std::string dbg = t.debug_outcome ? std::string(debug::to_string(*t.debug_outcome)) : "-";
        out += pad(t.task_id, w) + "  " + pad(t.final_status == pipeline::FinalStatus::kPass ? "pass" : "fail", 6) +
               "  " + pad(stage, 11) + "  " + pad(std::to_string(t.stage_count), 6) + "  " + pad(dbg, 9) + "  " +
               (t.failure_reason.empty() ? "" : t.failure_reason.substr(0, 120));
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += "\n";
    }
    return out;
}

std::string render_report_csv(const SuiteResult& r) {
    std::string out = "task_id,final_status,passing_stage,mechanism,stages,debug_outcome,failure_reason\n";
    for (const auto& t : r.tasks) {
        auto m = credited_mechanism(t);
        out += csv_field(t.task_id) + "," + (t.final_status == pipeline::FinalStatus::kPass ? "pass" : "fail") + "," +
               (t.passing_stage ? std::string(pipeline::to_string(*t.passing_stage)) : "") + "," +
               (m ? std::string(to_string(*m)) : "") + "," + std::to_string(t.stage_count) + "," +
               (t.debug_outcome ? std::string(debug::to_string(*t.debug_outcome)) : "") + "," +
               csv_field(t.failure_reason) + "\n";
    }
    out += "TOTAL,pass_at_1=" + format_pass_at_1(r.pass_at_1) + ",,,,," + "\n";
    return out;
}

std::string report_ablation(const SuiteResult& r) {
    std::string out = "mechanism          tasks\n";
    auto row = [&](const std::string& name, int n) {
        std::string c = std::to_string(n);
        out += pad(name, 18) + std::string(c.size() < 5 ? 5 - c.size() : 0, ' ') + c + "\n";
    };
    for (auto m : kMechanisms) {
        auto it = r.repairs.find(m);
        row(std::string(to_string(m)), it == r.repairs.end() ? 0 : it->second);
    }
    row("pass at generate", r.passes_at_generate);
    row("fail", r.fails);
    row("total", r.total);
    return out;
}

std::string report_ablation_csv(const SuiteResult& r) {
    std::string out = "mechanism,tasks\n";
    for (auto m : kMechanisms) {
        auto it = r.repairs.find(m);
        out += std::string(to_string(m)) + "," + std::to_string(it == r.repairs.end() ? 0 : it->second) + "\n";
    }
    out += "GENERATE," + std::to_string(r.passes_at_generate) + "\nFAIL," + std::to_string(r.fails) + "\nTOTAL," +
           std::to_string(r.total) + "\n";
    return out;
}

void write_reports(const SuiteResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    text::write_file(dir / "report.txt", render_report_text(r));
    text::write_file(dir / "report.csv", render_report_csv(r));
    text::write_file(dir / "ablation.txt", report_ablation(r));
    text::write_file(dir / "ablation.csv", report_ablation_csv(r));
}

}  // namespace rtlforge::bench
