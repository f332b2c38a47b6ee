#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rtlforge/llm_client.hpp"

namespace rtlforge::refine {

struct Rule {
    enum class Kind { kSpecCheck, kCodegenConstraint };

    std::string id;
    Kind kind = Kind::kCodegenConstraint;
    std::string text;

    bool operator==(const Rule&) const = default;
};

/// The ten rules injected into every code-generation system prompt. The
/// wire-in-always rule is first; the others are one per common RTL
/// programming error class.
const std::vector<Rule>& codegen_rules();

/// Rules the refinement prompt checks a description against.
const std::vector<Rule>& spec_rules();

/// Reads an "id<TAB>text" rule file ('#' comments and blank lines ignored).
std::vector<Rule> load_rules(const std::filesystem::path& path, Rule::Kind kind);
std::vector<Rule> parse_rules(std::string_view source, Rule::Kind kind, const std::string& origin);

struct Finding {
    std::string rule_id;
    std::string note;

    bool operator==(const Finding&) const = default;
};

struct RefinementResult {
    std::string refined_description;
    std::vector<Finding> findings;
    bool changed = false;
    /// The exchange that produced this result, for tracing.
    llm::ChatRequest request;
    std::string response_text;
};

inline constexpr std::string_view kNoViolations = "NO_VIOLATIONS";
inline constexpr std::string_view kRefinedBegin = "REFINED_BEGIN";
inline constexpr std::string_view kRefinedEnd = "REFINED_END";

llm::ChatRequest build_refine_request(std::string_view description, std::string_view iface,
                                      const std::vector<Rule>& rules = spec_rules());

/// Parses a refinement answer. Throws kFormatError when violations are
/// reported without a REFINED_BEGIN/REFINED_END block.
RefinementResult parse_refine_response(std::string_view description, std::string_view response);

/// One refinement round. Throws kLlmFailure if the provider fails.
RefinementResult refine(std::string_view description, std::string_view iface, llm::Provider& llm);

/// Role line, the rules as a numbered list, then `extra_context` if non-empty.
std::string build_system_prompt(const std::vector<Rule>& rules, std::string_view extra_context);

}  // namespace rtlforge::refine
