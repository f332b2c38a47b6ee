#include <CLI11.hpp>

#include <iostream>
#include <memory>

#include "rtlforge/bench.hpp"
#include "rtlforge/error.hpp"
#include "rtlforge/knowledge_base.hpp"
#include "rtlforge/multimodal.hpp"
#include "rtlforge/pipeline.hpp"
#include "rtlforge/taxonomy.hpp"
#include "rtlforge/text.hpp"
#include "rtlforge/verilog_interface.hpp"

namespace fs = std::filesystem;
using namespace rtlforge;

namespace {

struct Common {
    std::string mode = "live";
    std::string config;
    std::string kb;
    std::string transcript;
    std::string sim_cache;
    std::string script;
    int jobs = 1;
    int max_iter = debug::kDefaultMaxIter;
    double temperature = llm::kBenchmarkTemperature;
};

void add_common(CLI::App* app, Common& c, bool with_jobs) {
    app->add_option("--mode", c.mode, "live, record or replay")
        ->check(CLI::IsMember({"live", "record", "replay"}))
        ->capture_default_str();
    app->add_option("--config", c.config, "Config file");
    app->add_option("--kb", c.kb, "Knowledge base directory");
    app->add_option("--transcript", c.transcript, "LLM transcript (JSON lines) for record/replay");
    app->add_option("--sim-cache", c.sim_cache, "Simulation cache (JSON lines) for record/replay");
    app->add_option("--script", c.script, "Answer from a scripted response file instead of the network");
    app->add_option("--max-iter", c.max_iter, "Debug iteration cap")->capture_default_str();
    app->add_option("--temperature", c.temperature, "Sampling temperature")->capture_default_str();
    if (with_jobs) app->add_option("--jobs", c.jobs, "Parallel tasks")->capture_default_str();
}

bool given(const CLI::App& app, const std::string& name) {
    const auto* o = app.get_option_no_throw(name);
    return o && o->count() > 0;
}

bench::BenchConfig make_config(const Common& c, const CLI::App& app) {
    bench::BenchConfig cfg = c.config.empty() ? bench::BenchConfig{} : bench::load_config(c.config);
    if (!c.kb.empty()) cfg.kb_dir = c.kb;
    if (!c.transcript.empty()) cfg.transcript_path = c.transcript;
    if (!c.sim_cache.empty()) cfg.sim_cache_path = c.sim_cache;
    if (c.config.empty() || given(app, "--max-iter")) cfg.pipeline.max_iter = c.max_iter;
    if (c.config.empty() || given(app, "--temperature")) {
        cfg.pipeline.temperature = c.temperature;
        cfg.provider.temperature = c.temperature;
    }
    if (c.config.empty() || given(app, "--jobs")) cfg.jobs = c.jobs;
    if (cfg.kb_dir.empty()) cfg.kb_dir = "kb";
    return cfg;
}

// Provider and simulator for single-task verbs.
struct Backend {
    llm::Transcript transcript;
    std::unique_ptr<llm::Provider> base;
    std::unique_ptr<llm::Provider> top;
    std::shared_ptr<sim::Simulator> simulator;
    fs::path transcript_path;
    bench::Mode mode = bench::Mode::kLive;

    llm::Provider& provider() { return top ? *top : *base; }
    void finish() {
        if (mode == bench::Mode::kRecord) transcript.save(transcript_path);
    }
};

std::unique_ptr<Backend> make_backend(const Common& c, const bench::BenchConfig& cfg, bool need_sim) {
    auto b = std::make_unique<Backend>();
    b->mode = bench::mode_from_string(c.mode);
    b->transcript_path = cfg.transcript_path;
    if (b->mode != bench::Mode::kLive && b->transcript_path.empty())
        throw Error(ErrorCode::kInvalidArgument, "--transcript is required in record and replay modes");
    if (!c.script.empty()) b->base = std::make_unique<llm::ScriptedProvider>(llm::ScriptedProvider::load_script(c.script));
    else b->base = std::make_unique<llm::HttpProvider>(cfg.provider);

    if (b->mode == bench::Mode::kReplay) {
        b->transcript = llm::Transcript::load(b->transcript_path);
        b->top = std::make_unique<llm::ReplayProvider>(b->transcript);
    } else if (b->mode == bench::Mode::kRecord) {
        if (fs::exists(b->transcript_path)) b->transcript = llm::Transcript::load(b->transcript_path);
        b->top = std::make_unique<llm::RecordingProvider>(*b->base, b->transcript);
    }
    if (!need_sim) return b;

    std::shared_ptr<sim::Simulator> external;
    if (b->mode != bench::Mode::kReplay) {
        auto sc = cfg.simulator ? cfg.simulator : sim::SimulatorConfig::detect();
        if (!sc) throw Error(ErrorCode::kToolError, "no simulator configured or found on PATH");
        external = std::make_shared<sim::ExternalSimulator>(*sc);
    }
    if (b->mode == bench::Mode::kLive) b->simulator = external;
    else if (cfg.sim_cache_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--sim-cache is required");
    else b->simulator = std::make_shared<sim::CachedSimulator>(cfg.sim_cache_path, external);
    return b;
}

int run_gen(const Common& c, const CLI::App& app, const std::string& task_dir) {
    auto cfg = make_config(c, app);
    auto task = pipeline::load_task(task_dir);
    auto kb = kb::load_kb(cfg.kb_dir);
    auto backend = make_backend(c, cfg, false);
    llm::TemperatureProvider model(backend->provider(), cfg.pipeline.temperature);
    auto refined = refine::refine(task.description, task.interface_text, model);
    auto hits = kb::search_semantic(kb, refined.refined_description, cfg.pipeline.kb_top_k);
    auto ctx = kb::assemble_context(hits, kb, cfg.pipeline.kb_budget_chars);
    auto req = pipeline::build_generate_request(refined.refined_description, task.interface_text, ctx.text,
                                                cfg.pipeline);
    auto answer = model.complete(req);
    if (!answer.ok())
        throw Error(ErrorCode::kLlmFailure, std::string(llm::to_string(answer.status)) + ": " + answer.diagnostic);
    std::cout << pipeline::extract_module(answer.response_text);
    backend->finish();
    return 0;
}

int run_repair(const Common& c, const CLI::App& app, const std::string& task_dir, const std::string& trace_dir) {
    auto cfg = make_config(c, app);
    cfg.pipeline.record_wall_time = c.mode != "replay";
    auto task = pipeline::load_task(task_dir);
    auto kb = kb::load_kb(cfg.kb_dir);
    auto backend = make_backend(c, cfg, true);
    auto trace = pipeline::run_task(task, cfg.pipeline, kb, backend->provider(), *backend->simulator);
    backend->finish();
    if (!trace_dir.empty()) pipeline::write_trace(trace, trace_dir);
    std::cout << trace.final_code;
    std::cerr << task.id << ": " << (trace.final_status == pipeline::FinalStatus::kPass ? "pass" : "fail");
    for (const auto& s : trace.stages) std::cerr << " " << pipeline::to_string(s.kind);
    if (!trace.failure_reason.empty()) std::cerr << " (" << trace.failure_reason << ")";
    std::cerr << "\n";
    return trace.failure_reason.empty() ? 0 : 1;
}

int run_bench(const Common& c, const CLI::App& app, const std::string& suite, const std::string& out) {
    auto cfg = make_config(c, app);
    if (!out.empty()) cfg.output_dir = out;
    std::unique_ptr<llm::ScriptedProvider> scripted;
    if (!c.script.empty()) {
        scripted = std::make_unique<llm::ScriptedProvider>(llm::ScriptedProvider::load_script(c.script));
        cfg.provider_override = scripted.get();
    }
    if (!given(app, "--kb") && cfg.kb_dir == "kb" && fs::is_directory(fs::path(suite) / "kb")) cfg.kb_dir = fs::path(suite) / "kb";
    auto result = bench::run_suite(suite, cfg, bench::mode_from_string(c.mode));
    std::cout << bench::render_report_text(result) << "\n" << bench::report_ablation(result);
    return 0;
}

int run_kb_search(const std::string& kb_dir, const std::string& query, bool keyword, size_t k) {
    auto kb = kb::load_kb(kb_dir);
    std::vector<kb::RetrievalHit> hits;
    if (keyword) {
        auto kws = kb::extract_keywords(kb, query, kb::SourceKind::kCompilerError);
        auto spec = kb::extract_keywords(kb, query, kb::SourceKind::kSpec);
        kws.insert(kws.end(), spec.begin(), spec.end());
        hits = kb::search_keyword(kb, kws);
    } else {
        hits = kb::search_semantic(kb, query, k);
    }
    for (const auto& h : hits) {
        const auto* e = kb.find(h.entry_id);
        std::printf("%-28s %.4f  %s\n", h.entry_id.c_str(), h.score, e ? e->keyword.c_str() : "");
    }
    return 0;
}

int run_convert(const std::string& file, const std::string& iface_file, const std::string& emit) {
    const std::string source = text::read_file(file);
    auto blocks = mm::detect(source);
    if (blocks.empty()) {
        std::cerr << "no multimodal block found in " << file << "\n";
        return 1;
    }
    verilog::ModuleInterface iface;
    if (!iface_file.empty()) iface = verilog::parse_module_header(text::read_file(iface_file));
    if (emit == "verilog" && iface_file.empty())
        throw Error(ErrorCode::kInvalidArgument, "--interface is required to emit Verilog");
    std::vector<std::pair<mm::MultimodalBlock, mm::ConvertedIR>> converted;
    for (const auto& b : blocks) converted.emplace_back(b, mm::convert_block(b, iface));
    if (emit == "verilog") {
        if (converted.size() != 1) throw Error(ErrorCode::kInvalidArgument, "emitting Verilog needs exactly one block");
        std::cout << mm::emit_verilog(converted[0].second, iface.name, iface);
    } else if (emit == "rewrite") {
        std::cout << mm::rewrite_description(source, converted);
    } else {
        for (const auto& [b, ir] : converted) std::cout << mm::render(ir) << "\n";
    }
    return 0;
}

int run_labels_report(const std::string& file, bool csv) {
    auto report = taxonomy::aggregate(taxonomy::load_labels(file));
    std::cout << (csv ? taxonomy::render_csv(report) : taxonomy::render_text(report));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM-assisted Verilog generation and repair"};
    app.require_subcommand(1);

    Common common;
    std::string task_dir, trace_dir, suite, out_dir;

    auto* gen = app.add_subcommand("gen", "Refine and generate one task's module");
    gen->add_option("task", task_dir, "Task directory")->required();
    add_common(gen, common, false);

    auto* repair = app.add_subcommand("repair", "Run the full pipeline on one task");
    repair->add_option("task", task_dir, "Task directory")->required();
    repair->add_option("--traces", trace_dir, "Write the trace JSON here");
    add_common(repair, common, false);

    auto* benchc = app.add_subcommand("bench", "Run a suite and write reports");
    benchc->add_option("--suite", suite, "Suite directory (with tasks/)")->required();
    benchc->add_option("--out", out_dir, "Output directory (default <suite>/out)");
    add_common(benchc, common, true);

    auto* kbc = app.add_subcommand("kb", "Knowledge base tools");
    kbc->require_subcommand(1);
    std::string kb_dir = "kb", query;
    bool keyword = false;
    size_t k = kb::kDefaultTopK;
    auto* search = kbc->add_subcommand("search", "Query the knowledge base");
    search->add_option("query", query, "Query text or compiler output")->required();
    search->add_option("--kb", kb_dir, "Knowledge base directory")->capture_default_str();
    search->add_flag("--keyword", keyword, "Keyword lookup instead of semantic ranking");
    search->add_option("-k", k, "Number of semantic hits")->capture_default_str();

    std::string convert_file, iface_file, emit = "ir";
    auto* convert = app.add_subcommand("convert", "Convert K-maps, tables and waveforms");
    convert->add_option("file", convert_file, "Description file")->required();
    convert->add_option("--interface", iface_file, "Module header for names and widths");
    convert->add_option("--emit", emit, "ir, rewrite or verilog")
        ->check(CLI::IsMember({"ir", "rewrite", "verilog"}))
        ->capture_default_str();

    auto* labels = app.add_subcommand("labels", "Error label tools");
    labels->require_subcommand(1);
    std::string labels_file;
    bool csv = false;
    auto* lreport = labels->add_subcommand("report", "Aggregate a labels CSV");
    lreport->add_option("file", labels_file, "labels.csv")->required();
    lreport->add_flag("--csv", csv, "Machine-readable output");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return run_gen(common, *gen, task_dir);
        if (*repair) return run_repair(common, *repair, task_dir, trace_dir);
        if (*benchc) return run_bench(common, *benchc, suite, out_dir);
        if (*search) return run_kb_search(kb_dir, query, keyword, k);
        if (*convert) return run_convert(convert_file, iface_file, emit);
        if (*lreport) return run_labels_report(labels_file, csv);
    } catch (const Error& e) {
        std::cerr << "rtlforge: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "rtlforge: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
