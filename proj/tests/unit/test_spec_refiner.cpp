#include <gtest/gtest.h>

#include "rtlforge/spec_refiner.hpp"
#include "rtlforge/text.hpp"
#include "test_util.hpp"

namespace rtlforge {
namespace {

using namespace rtlforge::testing;

const char* kDesc = "Build a counter with a reset.";

TEST(Rules, CodegenRulesAreTenWithWireRuleFirst) {
    const auto& rules = refine::codegen_rules();
    ASSERT_EQ(rules.size(), 10u);
    EXPECT_EQ(rules[0].id, "wire_in_always");
    EXPECT_EQ(rules[0].text, "Do not assign values to wire-type variables within always blocks.");
    for (const auto& r : rules) EXPECT_EQ(r.kind, refine::Rule::Kind::kCodegenConstraint);
}

TEST(Rules, ShippedFilesMatchBuiltins) {
    EXPECT_EQ(refine::load_rules(source_dir() / "rules/codegen.rules", refine::Rule::Kind::kCodegenConstraint),
              refine::codegen_rules());
    EXPECT_EQ(refine::load_rules(source_dir() / "rules/spec.rules", refine::Rule::Kind::kSpecCheck),
              refine::spec_rules());
}

TEST(Rules, ParseErrors) {
    using K = refine::Rule::Kind;
    EXPECT_ERROR_CODE(refine::parse_rules("no tab here\n", K::kSpecCheck, "t"), ErrorCode::kParseError);
    EXPECT_ERROR_CODE(refine::parse_rules("a\tone\na\ttwo\n", K::kSpecCheck, "t"), ErrorCode::kDuplicateId);
    auto rules = refine::parse_rules("# comment\n\nx\ttext x\n", K::kSpecCheck, "t");
    ASSERT_EQ(rules.size(), 1u);
    EXPECT_EQ(rules[0].id, "x");
}

TEST(SystemPrompt, NumbersEveryRuleInOrder) {
    auto prompt = refine::build_system_prompt(refine::codegen_rules(), "");
    size_t pos = 0;
    for (size_t i = 0; i < refine::codegen_rules().size(); ++i) {
        auto needle = std::to_string(i + 1) + ". " + refine::codegen_rules()[i].text;
        auto at = prompt.find(needle, pos);
        ASSERT_NE(at, std::string::npos) << needle;
        pos = at;
    }
    EXPECT_EQ(prompt.find("Reference knowledge"), std::string::npos);
    auto with_ctx = refine::build_system_prompt(refine::codegen_rules(), "### counter (arithmetic)\n");
    EXPECT_NE(with_ctx.find("Reference knowledge:\n### counter"), std::string::npos);
}

TEST(RefineRequest, CarriesRulesDescriptionAndInterface) {
    auto req = refine::build_refine_request(kDesc, "module c(input clk, output [3:0] q);");
    EXPECT_EQ(req.tag, "refine");
    for (const auto& r : refine::spec_rules()) EXPECT_NE(req.system_text.find(r.id), std::string::npos);
    EXPECT_NE(req.user_text.find(kDesc), std::string::npos);
    EXPECT_NE(req.user_text.find("output [3:0] q"), std::string::npos);
}

TEST(RefineParse, NoViolationsKeepsDescription) {
    auto r = refine::parse_refine_response(kDesc, "NO_VIOLATIONS\n");
    EXPECT_FALSE(r.changed);
    EXPECT_EQ(r.refined_description, kDesc);
    EXPECT_TRUE(r.findings.empty());
}

TEST(RefineParse, ViolationsWithBlockChangeDescription) {
    auto r = refine::parse_refine_response(kDesc,
                                           "VIOLATION reset_semantics: polarity missing\n"
                                           "VIOLATION register_init: no reset value\n"
                                           "REFINED_BEGIN\n\nBuild a counter.\nActive-high synchronous reset to 0.\n\n"
                                           "REFINED_END\n");
    EXPECT_TRUE(r.changed);
    EXPECT_EQ(r.refined_description, "Build a counter.\nActive-high synchronous reset to 0.");
    ASSERT_EQ(r.findings.size(), 2u);
    EXPECT_EQ(r.findings[0], (refine::Finding{"reset_semantics", "polarity missing"}));
}

TEST(RefineParse, IdenticalBlockIsUnchanged) {
    auto r = refine::parse_refine_response(kDesc, std::string("REFINED_BEGIN\n") + kDesc + "\nREFINED_END\n");
    EXPECT_FALSE(r.changed);
}

TEST(RefineParse, FormatErrors) {
    EXPECT_ERROR_CODE(refine::parse_refine_response(kDesc, "VIOLATION x: y\n"), ErrorCode::kFormatError);
    EXPECT_ERROR_CODE(refine::parse_refine_response(kDesc, "REFINED_BEGIN\ntext\n"), ErrorCode::kFormatError);
    EXPECT_ERROR_CODE(refine::parse_refine_response(kDesc, "Looks fine to me."), ErrorCode::kFormatError);
    EXPECT_ERROR_CODE(refine::parse_refine_response(kDesc, "REFINED_BEGIN\n\nREFINED_END\n"), ErrorCode::kFormatError);
}

TEST(Refine, ProviderFailureIsLlmFailure) {
    llm::ScriptedProvider empty;
    EXPECT_ERROR_CODE(refine::refine(kDesc, "module c;", empty), ErrorCode::kLlmFailure);
    EXPECT_ERROR_CODE(refine::refine("  ", "module c;", empty), ErrorCode::kInvalidArgument);
}

TEST(Refine, RecordsExchange) {
    llm::ScriptedProvider p;
    p.push("refine", "NO_VIOLATIONS");
    auto r = refine::refine(kDesc, "module c;", p);
    EXPECT_EQ(r.request.tag, "refine");
    EXPECT_EQ(r.response_text, "NO_VIOLATIONS");
    EXPECT_EQ(p.requests().size(), 1u);
}

}  // namespace
}  // namespace rtlforge
