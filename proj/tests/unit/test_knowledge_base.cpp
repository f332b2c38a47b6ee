#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rtlforge/knowledge_base.hpp"
#include "rtlforge/simulation.hpp"
#include "rtlforge/text.hpp"
#include "test_util.hpp"

namespace rtlforge {
namespace {

using namespace rtlforge::testing;

const kb::KnowledgeBase& shipped_kb() {
    static const kb::KnowledgeBase k = kb::load_kb(source_dir() / "kb");
    return k;
}

kb::KnowledgeEntry entry(const std::string& id, const std::string& keyword, const std::string& description,
                         const std::string& patterns = "") {
    return kb::parse_entry("id = \"" + id + "\"\nkeyword = \"" + keyword +
                               "\"\ncategory = \"miscellaneous\"\ndescription = '''\n" + description +
                               "\n'''\nexample = ''''''\npatterns = [" + patterns + "]\n",
                           id);
}

TEST(KbLoad, ShippedEntriesParse) {
    const auto& k = shipped_kb();
    EXPECT_GE(k.size(), 20u);
    ASSERT_NE(k.find("wire_in_always"), nullptr);
    EXPECT_EQ(k.find("wire_in_always")->category, kb::Category::kRtlSyntax);
    for (const auto& e : k.entries()) {
        EXPECT_FALSE(e.description.empty()) << e.id;
        EXPECT_FALSE(e.patterns.empty()) << e.id;
    }
}

TEST(KbLoad, MissingDirectoryIsIoError) {
    EXPECT_ERROR_CODE(kb::load_kb(source_dir() / "no-such-kb"), ErrorCode::kIoError);
}

TEST(KbLoad, DuplicateIdsAreRejected) {
    kb::KnowledgeBase k;
    k.add(entry("a", "alpha", "first"));
    EXPECT_ERROR_CODE(k.add(entry("a", "beta", "second")), ErrorCode::kDuplicateId);
}

TEST(KbParse, BadFieldsAreParseErrors) {
    EXPECT_ERROR_CODE(kb::parse_entry("id = \"x\"\n", "x"), ErrorCode::kParseError);
    EXPECT_ERROR_CODE(kb::parse_entry("id = \"x\"\nkeyword = \"k\"\ncategory = \"bogus\"\ndescription = \"d\"\n", "x"),
                      ErrorCode::kParseError);
    EXPECT_ERROR_CODE(entry("x", "k", "d", "'('"), ErrorCode::kParseError);
}

TEST(KbParse, OwnKeywordAlwaysMatches) {
    auto e = entry("counter", "counter_wrap", "Counters wrap.", "'spec:\\bdecade\\b'");
    kb::KnowledgeBase k;
    k.add(e);
    EXPECT_EQ(kb::search_keyword(k, {"counter_wrap"}).size(), 1u);
}

TEST(KbVectors, DimensionAndCoverageChecks) {
    kb::KnowledgeBase k;
    k.add(entry("a", "alpha", "x"));
    k.add(entry("b", "beta", "y"));
    EXPECT_ERROR_CODE(k.set_vectors({{"a", {1, 0}}}), ErrorCode::kParseError);
    EXPECT_ERROR_CODE(k.set_vectors({{"a", {1, 0}}, {"b", {1, 0, 0}}}), ErrorCode::kDimensionMismatch);
    EXPECT_ERROR_CODE(k.set_vectors({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {1, 1}}}), ErrorCode::kUnknownId);
    k.set_vectors({{"a", {1, 0}}, {"b", {0, 1}}});
    EXPECT_EQ(k.dimension(), 2u);
}

TEST(SemanticSearch, RanksByCosineWithSuppliedEmbedding) {
    kb::KnowledgeBase k;
    k.add(entry("a", "alpha", "x"));
    k.add(entry("b", "beta", "y"));
    k.add(entry("c", "gamma", "z"));
    k.set_vectors({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {1, 1}}});
    auto embed = [](std::string_view) { return std::vector<double>{0.9, 0.1}; };
    auto hits = kb::search_semantic(k, "q", 3, embed);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].entry_id, "a");
    EXPECT_EQ(hits[1].entry_id, "c");
    EXPECT_EQ(hits[2].entry_id, "b");
    // Independent cosine for the top hit.
    EXPECT_NEAR(hits[0].score, 0.9 / std::hypot(0.9, 0.1), 1e-12);
    EXPECT_NEAR(hits[1].score, 1.0 / (std::sqrt(2.0) * std::hypot(0.9, 0.1)), 1e-12);

    auto wrong_dim = [](std::string_view) { return std::vector<double>{1, 0, 0}; };
    EXPECT_ERROR_CODE(kb::search_semantic(k, "q", 1, wrong_dim), ErrorCode::kDimensionMismatch);
    EXPECT_ERROR_CODE(kb::search_semantic(k, "q", 0, embed), ErrorCode::kInvalidArgument);
}

TEST(SemanticSearch, MissingVectorsWithEmbedder) {
    kb::KnowledgeBase k;
    k.add(entry("a", "alpha", "x"));
    auto embed = [](std::string_view) { return std::vector<double>{1}; };
    EXPECT_ERROR_CODE(kb::search_semantic(k, "q", 1, embed), ErrorCode::kMissingVectors);
}

TEST(SemanticSearch, LexicalFallbackIsDeterministicAndBounded) {
    const auto& k = shipped_kb();
    auto a = kb::search_semantic(k, "a shift register that shifts in the least significant bit first", 3);
    auto b = kb::search_semantic(k, "a shift register that shifts in the least significant bit first", 3);
    EXPECT_EQ(a, b);
    ASSERT_EQ(a.size(), 3u);
    EXPECT_EQ(a[0].entry_id, "shift_lsb_first");
    for (size_t i = 1; i < a.size(); ++i) EXPECT_GE(a[i - 1].score, a[i].score);
    for (const auto& h : a) {
        EXPECT_GE(h.score, 0.0);
        EXPECT_LE(h.score, 1.0 + 1e-12);
    }
}

TEST(KeywordSearch, SpecScopedPatternsIgnoreErrors) {
    const auto& k = shipped_kb();
    auto spec_kw = kb::extract_keywords(k, "The module has an asynchronous active-high reset areset.", kb::SourceKind::kSpec);
    EXPECT_NE(std::find(spec_kw.begin(), spec_kw.end(), "async_reset"), spec_kw.end());
    auto err_kw =
        kb::extract_keywords(k, "The module has an asynchronous active-high reset areset.", kb::SourceKind::kCompilerError);
    EXPECT_EQ(std::find(err_kw.begin(), err_kw.end(), "async_reset"), err_kw.end());
}

TEST(KeywordSearch, VerilatorWireErrorRetrievesWireInAlways) {
    sim::SimulationReport r;
    r.status = sim::Status::kCompileError;
    r.compile_messages.push_back(
        {"design.v", 3, "Procedural assignment to wire, perhaps intended var (IEEE 1800-2023 6.5): 'out'"});
    auto kws = sim::error_keywords(r, shipped_kb());
    ASSERT_FALSE(kws.empty());
    EXPECT_EQ(kws.front(), "wire_in_always");
    auto hits = kb::search_keyword(shipped_kb(), kws);
    ASSERT_FALSE(hits.empty());
    EXPECT_TRUE(std::any_of(hits.begin(), hits.end(), [](const auto& h) { return h.entry_id == "wire_in_always"; }));
}

TEST(KeywordSearch, IcarusWireErrorRetrievesWireInAlways) {
    sim::SimulationReport r;
    r.status = sim::Status::kCompileError;
    r.compile_messages.push_back({"design.v", 6, "out is not a valid l-value in tb.dut."});
    auto kws = sim::error_keywords(r, shipped_kb());
    ASSERT_FALSE(kws.empty());
    EXPECT_EQ(kws.front(), "wire_in_always");
}

TEST(KeywordSearch, ErrorKeywordsNeedCompileError) {
    sim::SimulationReport r;
    r.status = sim::Status::kSimFailure;
    EXPECT_ERROR_CODE(sim::error_keywords(r, shipped_kb()), ErrorCode::kWrongStatus);
}

TEST(KeywordSearch, KeywordsFollowSourceOrder) {
    kb::KnowledgeBase k;
    k.add(entry("a", "alpha", "x", "'zeta'"));
    k.add(entry("b", "beta", "y", "'eta'"));
    auto kws = kb::extract_keywords(k, "eta then zeta", kb::SourceKind::kSpec);
    EXPECT_EQ(kws, (std::vector<std::string>{"beta", "alpha"}));
}

TEST(Context, RespectsBudgetAndHitOrder) {
    const auto& k = shipped_kb();
    std::vector<kb::RetrievalHit> hits;
    for (const auto& e : k.entries()) hits.push_back({e.id, 1.0, kb::SearchMethod::kKeyword});
    std::mt19937 rng(7);
    std::shuffle(hits.begin(), hits.end(), rng);
    for (size_t budget : {50u, 400u, 1200u, 5000u, 100000u}) {
        auto ctx = kb::assemble_context(hits, k, budget);
        EXPECT_LE(ctx.text.size(), budget);
        ASSERT_LE(ctx.included_ids.size(), hits.size());
        for (size_t i = 0; i < ctx.included_ids.size(); ++i) EXPECT_EQ(ctx.included_ids[i], hits[i].entry_id);
        EXPECT_EQ(ctx.truncated, ctx.included_ids.size() < hits.size());
        std::string rebuilt;
        for (const auto& id : ctx.included_ids)
            rebuilt += (rebuilt.empty() ? "" : "\n") + kb::render_entry(*k.find(id));
        EXPECT_EQ(ctx.text, rebuilt);
    }
}

TEST(Context, DuplicateHitsRenderOnce) {
    const auto& k = shipped_kb();
    std::vector<kb::RetrievalHit> hits = {{"wire_in_always", 1.0, kb::SearchMethod::kKeyword},
                                          {"wire_in_always", 0.5, kb::SearchMethod::kSemantic}};
    auto ctx = kb::assemble_context(hits, k, 10000);
    EXPECT_EQ(ctx.included_ids.size(), 1u);
    EXPECT_ERROR_CODE(kb::assemble_context({{"nope", 1.0, kb::SearchMethod::kKeyword}}, k, 100), ErrorCode::kUnknownId);
    EXPECT_ERROR_CODE(kb::assemble_context(hits, k, 0), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace rtlforge
