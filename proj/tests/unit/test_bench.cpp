#include <gtest/gtest.h>

#include <random>

#include "rtlforge/bench.hpp"
#include "rtlforge/text.hpp"
#include "test_util.hpp"

namespace rtlforge {
namespace {

using namespace rtlforge::testing;
using bench::Mechanism;
using pipeline::FinalStatus;
using pipeline::StageKind;
namespace fs = std::filesystem;

// Independent pass@1: exact rational comparison for half-up rounding to tenths.
std::string oracle_pass_at_1(int passed, int total) {
    long long num = 1000LL * passed;  // tenths of a percent, times total
    long long q = num / total, r = num % total;
    if (2 * r >= total) ++q;
    return std::to_string(q / 10) + "." + std::to_string(q % 10);
}

TEST(PassAt1, PublishedValues) {
    EXPECT_EQ(bench::format_pass_at_1(bench::pass_at_1(142, 156)), "91.0");
    EXPECT_EQ(bench::format_pass_at_1(bench::pass_at_1(91, 156)), "58.3");
    EXPECT_EQ(bench::format_pass_at_1(bench::pass_at_1(0, 7)), "0.0");
    EXPECT_EQ(bench::format_pass_at_1(bench::pass_at_1(7, 7)), "100.0");
}

TEST(PassAt1, MatchesOracleEverywhere) {
    for (int total = 1; total <= 200; ++total)
        for (int passed = 0; passed <= total; ++passed)
            ASSERT_EQ(bench::format_pass_at_1(bench::pass_at_1(passed, total)), oracle_pass_at_1(passed, total))
                << passed << "/" << total;
}

TEST(PassAt1, RejectsEmptyAndOutOfRange) {
    EXPECT_ERROR_CODE(bench::pass_at_1(0, 0), ErrorCode::kEmptySuite);
    EXPECT_ERROR_CODE(bench::pass_at_1(3, 2), ErrorCode::kInvalidArgument);
}

bench::TaskResult result(const std::string& id, std::optional<StageKind> pass_at, bool refined = false,
                         std::optional<debug::Outcome> outcome = std::nullopt) {
    bench::TaskResult r;
    r.task_id = id;
    r.final_status = pass_at ? FinalStatus::kPass : FinalStatus::kFail;
    r.passing_stage = pass_at;
    r.description_refined = refined;
    r.debug_outcome = outcome;
    return r;
}

TEST(Credit, OneMechanismPerPass) {
    EXPECT_EQ(bench::credited_mechanism(result("a", StageKind::kGenerate, true)), Mechanism::kRDR);
    EXPECT_FALSE(bench::credited_mechanism(result("b", StageKind::kGenerate, false)));
    EXPECT_EQ(bench::credited_mechanism(result("c", StageKind::kRagFix)), Mechanism::kRAG);
    EXPECT_EQ(bench::credited_mechanism(result("d", StageKind::kMmdConvert)), Mechanism::kMDC);
    EXPECT_EQ(bench::credited_mechanism(result("e", StageKind::kDebug, false, debug::Outcome::kFixed)), Mechanism::kTDM);
    EXPECT_FALSE(bench::credited_mechanism(result("f", std::nullopt, false, debug::Outcome::kExhausted)));
    EXPECT_FALSE(bench::credited_mechanism(result("g", std::nullopt, false, debug::Outcome::kStagnated)));
}

TEST(Tally, MultimodalRepairsCountThirteen) {
    bench::SuiteResult s;
    for (int i = 0; i < 13; ++i) s.tasks.push_back(result("mm" + std::to_string(i), StageKind::kMmdConvert));
    for (int i = 0; i < 4; ++i) s.tasks.push_back(result("x" + std::to_string(i), std::nullopt, false,
                                                         debug::Outcome::kExhausted));
    bench::tally(s);
    EXPECT_EQ(s.repairs[Mechanism::kMDC], 13);
    EXPECT_EQ(s.repairs[Mechanism::kTDM], 0);
    EXPECT_EQ(s.fails, 4);
    EXPECT_EQ(bench::format_pass_at_1(s.pass_at_1), oracle_pass_at_1(13, 17));
}

TEST(Tally, AblationRowsSumToTotal) {
    std::mt19937 rng(5);
    const std::optional<StageKind> stages[] = {StageKind::kGenerate, StageKind::kRagFix, StageKind::kMmdConvert,
                                               StageKind::kDebug, std::nullopt};
    for (int round = 0; round < 50; ++round) {
        bench::SuiteResult s;
        int n = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) s.tasks.push_back(result(std::to_string(i), stages[rng() % 5], rng() % 2));
        bench::tally(s);
        int sum = s.passes_at_generate + s.fails;
        for (const auto& [m, c] : s.repairs) sum += c;
        EXPECT_EQ(sum, s.total);
        EXPECT_EQ(s.passed + s.fails, s.total);
    }
    bench::SuiteResult empty;
    EXPECT_ERROR_CODE(bench::tally(empty), ErrorCode::kEmptySuite);
}

TEST(Modes, Names) {
    for (auto m : {bench::Mode::kLive, bench::Mode::kRecord, bench::Mode::kReplay})
        EXPECT_EQ(bench::mode_from_string(bench::to_string(m)), m);
    EXPECT_ERROR_CODE(bench::mode_from_string("offline"), ErrorCode::kInvalidArgument);
}

TEST(Config, ResolvesPathsAndRefusesKeys) {
    auto dir = scratch_dir("config");
    text::write_file(dir / "bench.toml",
                     "[provider]\nmodel = \"m\"\ntemperature = 0.1\napi_key_env = \"MY_KEY\"\n"
                     "[paths]\nkb = \"kb\"\n[pipeline]\nmax_iter = 4\njobs = 3\n");
    auto cfg = bench::load_config(dir / "bench.toml");
    EXPECT_EQ(cfg.provider.model_name, "m");
    EXPECT_EQ(cfg.provider.api_key_env, "MY_KEY");
    EXPECT_EQ(cfg.kb_dir, dir / "kb");
    EXPECT_EQ(cfg.pipeline.max_iter, 4);
    EXPECT_EQ(cfg.jobs, 3);
    EXPECT_DOUBLE_EQ(cfg.pipeline.temperature, 0.1);

    text::write_file(dir / "leak.toml", "[provider]\napi_key = \"sk-123\"\n");
    EXPECT_ERROR_CODE(bench::load_config(dir / "leak.toml"), ErrorCode::kInvalidArgument);
    fs::remove_all(dir);
}

fs::path demo_copy(const std::string& tag) {
    auto dir = scratch_dir(tag);
    fs::copy(source_dir() / "suites/demo", dir / "demo", fs::copy_options::recursive);
    fs::remove_all(dir / "demo/out");
    return dir / "demo";
}

bench::BenchConfig demo_config() {
    auto cfg = bench::load_config(source_dir() / "suites/demo/config.toml");
    cfg.kb_dir = source_dir() / "kb";
    return cfg;
}

TEST(Suite, DemoReplayCreditsEveryMechanism) {
    auto suite = demo_copy("replay");
    auto r = bench::run_suite(suite, demo_config(), bench::Mode::kReplay);
    EXPECT_EQ(r.total, 12);
    EXPECT_EQ(r.passed, 10);
    EXPECT_EQ(bench::format_pass_at_1(r.pass_at_1), oracle_pass_at_1(10, 12));
    EXPECT_EQ(r.repairs[Mechanism::kRDR], 1);
    EXPECT_EQ(r.repairs[Mechanism::kRAG], 2);
    EXPECT_EQ(r.repairs[Mechanism::kMDC], 3);
    EXPECT_EQ(r.repairs[Mechanism::kTDM], 3);
    EXPECT_EQ(r.passes_at_generate, 1);
    EXPECT_EQ(r.fails, 2);
    EXPECT_FALSE(r.wall_time_s);
    for (const auto& t : r.tasks) {
        EXPECT_TRUE(t.failure_reason.empty()) << t.task_id << ": " << t.failure_reason;
        auto trace = pipeline::trace_from_json(text::read_file(suite / "out/traces" / (t.task_id + ".json")));
        EXPECT_NO_THROW(pipeline::check_trace_shape(trace)) << t.task_id;
        if (t.task_id == "t11_shift8") {
            EXPECT_EQ(t.debug_outcome, debug::Outcome::kExhausted);
            EXPECT_EQ(t.stage_count, 3 + debug::kDefaultMaxIter);
        }
        if (t.task_id == "t12_parity4") EXPECT_EQ(t.debug_outcome, debug::Outcome::kStagnated);
    }
    for (auto name : {"report.txt", "report.csv", "ablation.txt", "ablation.csv"}) EXPECT_TRUE(fs::exists(suite / "out" / name));
    fs::remove_all(suite.parent_path());
}

TEST(Suite, ReplayIsByteStableAcrossJobCounts) {
    auto suite = demo_copy("stable");
    auto cfg = demo_config();
    cfg.jobs = 1;
    cfg.output_dir = suite / "out1";
    bench::run_suite(suite, cfg, bench::Mode::kReplay);
    cfg.jobs = 6;
    cfg.output_dir = suite / "out2";
    bench::run_suite(suite, cfg, bench::Mode::kReplay);
    for (const auto& e : fs::recursive_directory_iterator(suite / "out1")) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), suite / "out1");
        EXPECT_EQ(text::read_file(e.path()), text::read_file(suite / "out2" / rel)) << rel;
    }
    fs::remove_all(suite.parent_path());
}

TEST(Suite, ReplayMissFailsOnlyThatTask) {
    auto suite = demo_copy("miss");
    text::write_file(suite / "tasks/t01_and3/description.txt", "Something the transcript never saw.\n");
    auto r = bench::run_suite(suite, demo_config(), bench::Mode::kReplay);
    EXPECT_EQ(r.total, 12);
    EXPECT_EQ(r.passed, 9);
    EXPECT_NE(r.tasks[0].failure_reason.find("replay_miss"), std::string::npos);
    fs::remove_all(suite.parent_path());
}

TEST(Suite, EmptySuiteIsRejected) {
    auto dir = scratch_dir("empty");
    fs::create_directories(dir / "tasks");
    EXPECT_ERROR_CODE(bench::run_suite(dir, bench::BenchConfig{}, bench::Mode::kReplay), ErrorCode::kEmptySuite);
    fs::remove_all(dir);
}

}  // namespace
}  // namespace rtlforge
