#include "rtlforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <regex>
#include <set>

#include <json.hpp>

#include "rtlforge/digest.hpp"
#include "rtlforge/error.hpp"
#include "rtlforge/multimodal.hpp"
#include "rtlforge/text.hpp"
#include "rtlforge/verilog_interface.hpp"

namespace rtlforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string response_digest(std::string_view response) { return sha256_hex(llm::normalize(response)); }

Exchange exchange_of(const llm::ChatRequest& req, std::string_view response) {
    return {req.tag, llm::request_digest(req), response_digest(response)};
}

std::string ask(llm::Provider& llm, const llm::ChatRequest& req) {
    auto answer = llm.complete(req);
    if (!answer.ok())
        throw Error(ErrorCode::kLlmFailure,
                    req.tag + ": " + std::string(llm::to_string(answer.status)) + ": " + answer.diagnostic);
    return answer.response_text;
}

StageRecord model_stage(StageKind kind, const llm::ChatRequest& req, std::string_view response) {
    StageRecord s;
    s.kind = kind;
    s.exchanges.push_back(exchange_of(req, response));
    s.prompt_digest = s.exchanges.back().prompt_digest;
    s.response_digest = s.exchanges.back().response_digest;
    return s;
}

void append_unique(std::vector<kb::RetrievalHit>& into, const std::vector<kb::RetrievalHit>& hits) {
    for (const auto& h : hits) {
        bool dup = std::any_of(into.begin(), into.end(), [&](const auto& x) { return x.entry_id == h.entry_id; });
        if (!dup) into.push_back(h);
    }
}

std::string ids_note(const std::string& label, const std::vector<std::string>& ids) {
    return label + "=" + (ids.empty() ? std::string("none") : text::join(ids, ","));
}

StageRecord debug_stage(const debug::DebugIteration& it) {
    StageRecord s;
    s.kind = StageKind::kDebug;
    if (it.localization) s.exchanges.push_back(exchange_of(it.localization->request, it.localization->response_text));
    s.exchanges.push_back(exchange_of(it.correct_request, it.correct_response));
    s.prompt_digest = s.exchanges.back().prompt_digest;
    s.response_digest = s.exchanges.back().response_digest;
    s.verdict = summarize(it.report_after);
    s.code_digest = sha256_hex(it.revised_code);
    std::vector<std::string> lines;
    if (it.localization)
        for (const auto& c : it.localization->candidates) lines.push_back(std::to_string(c.line));
    s.note = "round=" + std::to_string(it.index) + " " + ids_note("lines", lines);
    return s;
}

ordered_json verdict_json(const Verdict& v) {
    return {{"status", sim::to_string(v.status)}, {"mismatch_count", v.mismatch_count},
            {"total_samples", v.total_samples}};
}

}  // namespace

void DesignTask::validate() const {
    if (id.empty()) throw Error(ErrorCode::kInvalidArgument, "task id is empty");
    if (text::trim(description).empty()) throw Error(ErrorCode::kInvalidArgument, id + ": description is empty");
    if (text::trim(testbench).empty()) throw Error(ErrorCode::kInvalidArgument, id + ": testbench is empty");
    verilog::parse_module_header(interface_text);
}

DesignTask load_task(const fs::path& dir) {
    DesignTask t;
    t.id = dir.filename().string();
    t.description = text::read_file(dir / "description.txt");
    t.interface_text = text::read_file(dir / "interface.v");
    t.testbench = text::read_file(dir / "testbench.v");
    if (fs::exists(dir / "golden.v")) t.golden_ref = text::read_file(dir / "golden.v");
    if (fs::exists(dir / "tags.txt")) t.tags = text::split_ws(text::read_file(dir / "tags.txt"));
    t.validate();
    return t;
}

std::vector<DesignTask> load_suite(const fs::path& suite_dir) {
    const fs::path root = suite_dir / "tasks";
    if (!fs::is_directory(root)) throw Error(ErrorCode::kIoError, "no task directory at " + root.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    std::vector<DesignTask> tasks;
    for (const auto& d : dirs) tasks.push_back(load_task(d));
    return tasks;
}

std::string_view to_string(StageKind k) {
    switch (k) {
        case StageKind::kRefine: return "refine";
        case StageKind::kGenerate: return "generate";
        case StageKind::kMmdConvert: return "mmd_convert";
        case StageKind::kRagFix: return "rag_fix";
        case StageKind::kDebug: return "debug";
    }
    return "?";
}

std::optional<StageKind> stage_from_string(std::string_view s) {
    for (auto k : {StageKind::kRefine, StageKind::kGenerate, StageKind::kMmdConvert, StageKind::kRagFix,
                   StageKind::kDebug})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

Verdict summarize(const sim::SimulationReport& r) { return {r.status, r.mismatch_count, r.total_samples}; }

std::string to_json(const PipelineTrace& t) {
    ordered_json j;
    j["task_id"] = t.task_id;
    j["description_refined"] = t.description_refined;
    j["final_status"] = t.final_status == FinalStatus::kPass ? "pass" : "fail";
    if (t.debug_outcome) j["debug_outcome"] = debug::to_string(*t.debug_outcome);
    if (!t.failure_reason.empty()) j["failure_reason"] = t.failure_reason;
    if (t.wall_time_s) j["wall_time_s"] = *t.wall_time_s;
    j["stages"] = ordered_json::array();
    for (const auto& s : t.stages) {
        ordered_json st;
        st["kind"] = to_string(s.kind);
        st["prompt_digest"] = s.prompt_digest;
        st["response_digest"] = s.response_digest;
        st["exchanges"] = ordered_json::array();
        for (const auto& e : s.exchanges)
            st["exchanges"].push_back(
                {{"tag", e.tag}, {"prompt_digest", e.prompt_digest}, {"response_digest", e.response_digest}});
        st["verdict"] = s.verdict ? verdict_json(*s.verdict) : ordered_json(nullptr);
        if (!s.code_digest.empty()) st["code_digest"] = s.code_digest;
        if (!s.note.empty()) st["note"] = s.note;
        j["stages"].push_back(std::move(st));
    }
    j["final_code"] = t.final_code;
    return j.dump(2) + "\n";
}

PipelineTrace trace_from_json(std::string_view text) {
    try {
        auto j = ordered_json::parse(text);
        PipelineTrace t;
        t.task_id = j.at("task_id").get<std::string>();
        const auto fin = j.at("final_status").get<std::string>();
        if (fin != "pass" && fin != "fail") throw Error(ErrorCode::kParseError, "bad final_status '" + fin + "'");
        t.final_status = fin == "pass" ? FinalStatus::kPass : FinalStatus::kFail;
        if (j.contains("debug_outcome")) {
            const auto o = j["debug_outcome"].get<std::string>();
            for (auto c : {debug::Outcome::kFixed, debug::Outcome::kExhausted, debug::Outcome::kStagnated})
                if (debug::to_string(c) == o) t.debug_outcome = c;
            if (!t.debug_outcome) throw Error(ErrorCode::kParseError, "bad debug_outcome '" + o + "'");
        }
        t.description_refined = j.value("description_refined", false);
        t.failure_reason = j.value("failure_reason", "");
        if (j.contains("wall_time_s")) t.wall_time_s = j["wall_time_s"].get<double>();
        for (const auto& st : j.at("stages")) {
            StageRecord s;
            auto kind = stage_from_string(st.at("kind").get<std::string>());
            if (!kind) throw Error(ErrorCode::kParseError, "bad stage kind");
            s.kind = *kind;
            s.prompt_digest = st.at("prompt_digest").get<std::string>();
            s.response_digest = st.at("response_digest").get<std::string>();
            for (const auto& e : st.at("exchanges"))
                s.exchanges.push_back({e.at("tag").get<std::string>(), e.at("prompt_digest").get<std::string>(),
                                       e.at("response_digest").get<std::string>()});
            if (!st.at("verdict").is_null()) {
                const auto& v = st["verdict"];
                auto status = sim::status_from_string(v.at("status").get<std::string>());
                if (!status) throw Error(ErrorCode::kParseError, "bad verdict status");
                s.verdict = Verdict{*status, v.at("mismatch_count").get<int>(), v.at("total_samples").get<int>()};
            }
            s.code_digest = st.value("code_digest", "");
            s.note = st.value("note", "");
            t.stages.push_back(std::move(s));
        }
        t.final_code = j.value("final_code", "");
        return t;
    } catch (const ordered_json::exception& e) {
        throw Error(ErrorCode::kParseError, std::string("trace: ") + e.what());
    }
}

std::optional<StageKind> passing_stage(const PipelineTrace& t) {
    for (const auto& s : t.stages)
        if (s.verdict && s.verdict->passed()) return s.kind;
    return std::nullopt;
}

void check_trace_shape(const PipelineTrace& t) {
    auto bad = [&](const std::string& why) { throw Error(ErrorCode::kInvalidArgument, t.task_id + ": " + why); };
    const auto& st = t.stages;
    // refine, generate, (mmd_convert | rag_fix), debug*
    for (size_t i = 0; i < st.size(); ++i) {
        const StageKind k = st[i].kind;
        bool ok = false;
        if (i == 0) ok = k == StageKind::kRefine;
        else if (i == 1) ok = k == StageKind::kGenerate;
        else if (i == 2) ok = k == StageKind::kMmdConvert || k == StageKind::kRagFix;
        else ok = k == StageKind::kDebug;
        if (!ok) bad("stage " + std::to_string(i) + " is " + std::string(to_string(k)) + " out of order");
        if (i > 0 && st[i - 1].verdict && st[i - 1].verdict->passed()) bad("a stage follows a passing verdict");
        if (k != StageKind::kRefine && !st[i].verdict && i + 1 < st.size()) bad("a stage without verdict");
    }
    bool mmd = std::any_of(st.begin(), st.end(), [](const auto& s) { return s.kind == StageKind::kMmdConvert; });
    bool rag = std::any_of(st.begin(), st.end(), [](const auto& s) { return s.kind == StageKind::kRagFix; });
    if (mmd && rag) bad("both mmd_convert and rag_fix");
    const bool last_pass = !st.empty() && st.back().verdict && st.back().verdict->passed();
    if (last_pass != (t.final_status == FinalStatus::kPass)) bad("final_status disagrees with the last verdict");
}

std::string extract_module(std::string_view response) {
    for (const auto& block : text::fenced_blocks(response)) {
        static const std::regex kModule(R"(\bmodule\b)");
        if (std::regex_search(block, kModule)) return block;
    }
    static const std::regex kSpan(R"(\bmodule\b[\s\S]*?\bendmodule\b)");
    std::string s(response);
    std::smatch m;
    if (!std::regex_search(s, m, kSpan)) throw Error(ErrorCode::kNoModuleFound, "response contains no module");
    return m.str() + "\n";
}

std::string generation_user_prompt(std::string_view description, std::string_view interface_text) {
    std::string u =
        "Please act as a professional Verilog designer and implement the module described below.\n\n"
        "Description:\n" + std::string(text::trim(description)) + "\n\n" +
        "Module interface:\n" + std::string(text::trim(interface_text)) + "\n\n" +
        "Answer with one complete Verilog module that uses exactly this interface, inside a single ```verilog "
        "code block.\n";
    return u;
}

llm::ChatRequest build_generate_request(std::string_view description, std::string_view interface_text,
                                        std::string_view kb_context, const PipelineConfig& cfg,
                                        std::string_view tag) {
    llm::ChatRequest r;
    r.system_text = refine::build_system_prompt(cfg.codegen_rules, kb_context);
    r.user_text = generation_user_prompt(description, interface_text);
    r.tag = std::string(tag);
    r.temperature = cfg.temperature;
    return r;
}

PipelineTrace run_task(const DesignTask& task, const PipelineConfig& cfg, const kb::KnowledgeBase& kb,
                       llm::Provider& llm, sim::Simulator& sim) {
    const auto started = std::chrono::steady_clock::now();
    PipelineTrace trace;
    trace.task_id = task.id;
    llm::TemperatureProvider model(llm, cfg.temperature);

    // Runs one simulation, records the verdict and reports whether to stop.
    auto simulate = [&](StageRecord stage, const std::string& code, sim::SimulationReport& report) {
        report = sim.run(code, task.testbench);
        stage.verdict = summarize(report);
        stage.code_digest = sha256_hex(code);
        trace.stages.push_back(std::move(stage));
        trace.final_code = code;
        if (report.status == sim::Status::kToolError)
            throw Error(ErrorCode::kToolError, "simulator failed: " + report.raw_excerpt.substr(0, 200));
        return report.passed();
    };

    try {
        task.validate();
        const auto iface = verilog::parse_module_header(task.interface_text);

        // (1) refine
        auto refined = refine::refine(task.description, task.interface_text, model);
        StageRecord rs = model_stage(StageKind::kRefine, refined.request, refined.response_text);
        std::vector<std::string> rule_ids;
        for (const auto& f : refined.findings) rule_ids.push_back(f.rule_id);
        rs.note = std::string(refined.changed ? "changed " : "unchanged ") + ids_note("rules", rule_ids);
        trace.stages.push_back(std::move(rs));
        trace.description_refined = refined.changed;
        std::string description = refined.refined_description;

        // (2) generate
        auto gen_hits = kb::search_semantic(kb, description, cfg.kb_top_k);
        auto gen_ctx = kb::assemble_context(gen_hits, kb, cfg.kb_budget_chars);
        auto req = build_generate_request(description, task.interface_text, gen_ctx.text, cfg);
        auto resp = ask(model, req);
        std::string code = extract_module(resp);
        sim::SimulationReport report;
        StageRecord gs = model_stage(StageKind::kGenerate, req, resp);
        gs.note = ids_note("kb", gen_ctx.included_ids);
        if (simulate(std::move(gs), code, report)) {
            trace.final_status = FinalStatus::kPass;
        } else {
            // (3) one single-round correction
            StageRecord fix;
            if (!mm::detect(task.description).empty()) {
                std::string base = mm::detect(description).empty() ? task.description : description;
                std::vector<std::pair<mm::MultimodalBlock, mm::ConvertedIR>> converted;
                std::vector<std::string> kinds;
                for (const auto& b : mm::detect(base)) {
                    try {
                        converted.emplace_back(b, mm::convert_block(b, iface));
                        kinds.emplace_back(mm::to_string(b.kind));
                    } catch (const Error& e) {
                        kinds.push_back(std::string(mm::to_string(b.kind)) + "(unconverted)");
                    }
                }
                description = mm::rewrite_description(base, converted);
                req = build_generate_request(description, task.interface_text, gen_ctx.text, cfg, "mmd_convert");
                resp = ask(model, req);
                fix = model_stage(StageKind::kMmdConvert, req, resp);
                fix.note = ids_note("blocks", kinds);
            } else {
                auto hits = kb::search_semantic(kb, description, cfg.kb_top_k);
                auto keywords = report.status == sim::Status::kCompileError
                                    ? sim::error_keywords(report, kb)
                                    : kb::extract_keywords(kb, description, kb::SourceKind::kSpec);
                append_unique(hits, kb::search_keyword(kb, keywords));
                auto ctx = kb::assemble_context(hits, kb, cfg.kb_budget_chars);
                req = build_generate_request(description, task.interface_text, ctx.text, cfg, "rag_fix");
                req.user_text += "\nA previous implementation failed verification:\n" + debug::describe_failure(report);
                resp = ask(model, req);
                fix = model_stage(StageKind::kRagFix, req, resp);
                fix.note = ids_note("kb", ctx.included_ids);
            }
            code = extract_module(resp);
            if (simulate(std::move(fix), code, report)) {
                trace.final_status = FinalStatus::kPass;
            } else {
                // (4) iterative two-stage debugging
                debug::DebugOptions opts;
                opts.max_iter = cfg.max_iter;
                opts.kb = &kb;
                opts.initial_report = report;
                debug::DebugResult dr;
                try {
                    dr = debug::debug_loop(description, code, task.testbench, sim, model, opts);
                } catch (const debug::DebugAborted& e) {
                    for (const auto& it : e.partial().iterations) trace.stages.push_back(debug_stage(it));
                    if (!e.partial().iterations.empty()) trace.final_code = e.partial().final_code;
                    throw;
                }
                for (const auto& it : dr.iterations) trace.stages.push_back(debug_stage(it));
                trace.debug_outcome = dr.outcome;
                trace.final_code = dr.final_code;
                trace.final_status = dr.outcome == debug::Outcome::kFixed ? FinalStatus::kPass : FinalStatus::kFail;
            }
        }
    } catch (const Error& e) {
        trace.failure_reason = e.what();
        trace.final_status = FinalStatus::kFail;
    }
    if (cfg.record_wall_time)
        trace.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return trace;
}

void write_trace(const PipelineTrace& t, const fs::path& dir) {
    fs::create_directories(dir);
    text::write_file(dir / (t.task_id + ".json"), to_json(t));
}

}  // namespace rtlforge::pipeline
