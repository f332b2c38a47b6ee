#include "rtlforge/spec_refiner.hpp"

#include <regex>
#include <set>

#include "rtlforge/error.hpp"
#include "rtlforge/text.hpp"

namespace rtlforge::refine {

namespace {

constexpr std::string_view kCodegenRules =
    "wire_in_always\tDo not assign values to wire-type variables within always blocks.\n"
    "nonblocking_sequential\tUse non-blocking assignments (<=) for sequential logic and blocking assignments (=) "
    "for combinational logic.\n"
    "mixed_assign\tDo not mix blocking and non-blocking assignments within the same always block.\n"
    "numeric_logic\tWhen counting or summing bits, add the individual bits explicitly; a vector slice is a number, "
    "not a count of its set bits.\n"
    "bit_select\tOnly select bits that lie within the declared range of each vector.\n"
    "slice_inversion\tWrite part selects in the same direction as the vector declaration, for example [98:0] for a "
    "vector declared [99:0].\n"
    "incomplete_code\tAlways write the complete implementation; never replace repetitive code with comments or "
    "placeholders.\n"
    "var_redef\tDo not redeclare a signal that is already declared in the port list.\n"
    "undefined_var\tDo not use any signal that is not declared in the module interface or the module body.\n"
    "generate_misuse\tNever place generate blocks or genvar loops inside always blocks; use integer for-loops there "
    "instead.\n";

constexpr std::string_view kSpecRules =
    "register_init\tEvery register must have a specified initial or reset value.\n"
    "reset_semantics\tThe reset signal must state its polarity and whether it acts synchronously or "
    "asynchronously.\n"
    "enable_trigger\tEvery enable or control input must state whether it is level-sensitive or edge-triggered.\n"
    "io_description\tEvery input and output signal must have a described function.\n"
    "consistency\tAll parts of the description must agree with one another; resolve any internal contradiction.\n";

std::string strip_blank_edges(std::string_view s) {
    auto lines = text::split_lines(s);
    size_t first = 0, last = lines.size();
    while (first < last && text::trim(lines[first]).empty()) ++first;
    while (last > first && text::trim(lines[last - 1]).empty()) --last;
    std::vector<std::string> kept(lines.begin() + static_cast<long>(first), lines.begin() + static_cast<long>(last));
    return text::join(kept, "\n");
}

}  // namespace

std::vector<Rule> parse_rules(std::string_view source, Rule::Kind kind, const std::string& origin) {
    std::vector<Rule> rules;
    std::set<std::string> ids;
    int lineno = 0;
    for (const auto& raw : text::split_lines(source)) {
        ++lineno;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw Error(ErrorCode::kParseError, origin + ":" + std::to_string(lineno) + ": expected id<TAB>text");
        Rule r{std::string(text::trim(line.substr(0, tab))), kind, std::string(text::trim(line.substr(tab + 1)))};
        if (r.id.empty() || r.text.empty())
            throw Error(ErrorCode::kParseError, origin + ":" + std::to_string(lineno) + ": empty id or text");
        if (!ids.insert(r.id).second)
            throw Error(ErrorCode::kDuplicateId, origin + ":" + std::to_string(lineno) + ": rule '" + r.id + "'");
        rules.push_back(std::move(r));
    }
    return rules;
}

std::vector<Rule> load_rules(const std::filesystem::path& path, Rule::Kind kind) {
    return parse_rules(text::read_file(path), kind, path.string());
}

const std::vector<Rule>& codegen_rules() {
    static const std::vector<Rule> rules = parse_rules(kCodegenRules, Rule::Kind::kCodegenConstraint, "builtin");
    return rules;
}

const std::vector<Rule>& spec_rules() {
    static const std::vector<Rule> rules = parse_rules(kSpecRules, Rule::Kind::kSpecCheck, "builtin");
    return rules;
}

llm::ChatRequest build_refine_request(std::string_view description, std::string_view iface,
                                      const std::vector<Rule>& rules) {
    std::string system =
        "You are an expert digital hardware design reviewer. Check the design description below against "
        "these rules:\n";
    for (const auto& r : rules) system += "- " + r.id + ": " + r.text + "\n";
    system +=
        "\nIf the description violates no rule, answer with exactly " + std::string(kNoViolations) +
        ".\nOtherwise, for each violated rule write one line\n"
        "VIOLATION <rule_id>: <what is missing or contradictory>\n"
        "and then the complete clarified description between a line " +
        std::string(kRefinedBegin) + " and a line " + std::string(kRefinedEnd) +
        ". Resolve ambiguities using the module interface and common design conventions; keep every "
        "requirement that is already clear.\n";
    std::string user = "Design description:\n" + std::string(description) + "\n\nModule interface:\n" +
                       std::string(iface) + "\n";
    return {std::move(system), std::move(user), "refine", std::nullopt};
}

RefinementResult parse_refine_response(std::string_view description, std::string_view response) {
    RefinementResult result;
    result.response_text = std::string(response);
    static const std::regex kViolation(R"(^\s*VIOLATION\s+([A-Za-z0-9_.-]+)\s*:\s*(.*?)\s*$)");

    auto lines = text::split_lines(response);
    std::optional<size_t> begin, end;
    bool saw_no_violations = false;
    for (size_t i = 0; i < lines.size(); ++i) {
        auto t = text::trim(lines[i]);
        if (!begin && t == kRefinedBegin) {
            begin = i;
            continue;
        }
        if (begin && !end && t == kRefinedEnd) {
            end = i;
            continue;
        }
        if (begin && !end) continue;
        std::smatch m;
        if (std::regex_match(lines[i], m, kViolation)) {
            result.findings.push_back({m[1].str(), m[2].str()});
        } else if (t == kNoViolations) {
            saw_no_violations = true;
        }
    }

    if (begin && !end) throw Error(ErrorCode::kFormatError, "REFINED_BEGIN without REFINED_END");
    if (!begin) {
        if (!result.findings.empty())
            throw Error(ErrorCode::kFormatError, "violations reported without a refined description block");
        if (!saw_no_violations)
            throw Error(ErrorCode::kFormatError, "response has neither NO_VIOLATIONS nor a refined block");
        result.refined_description = std::string(description);
        result.changed = false;
        return result;
    }
    std::vector<std::string> block(lines.begin() + static_cast<long>(*begin) + 1,
                                   lines.begin() + static_cast<long>(*end));
    std::string refined = strip_blank_edges(text::join(block, "\n"));
    if (text::trim(refined).empty()) throw Error(ErrorCode::kFormatError, "refined description block is empty");
    if (strip_blank_edges(description) == refined) {
        result.refined_description = std::string(description);
        result.changed = false;
    } else {
        result.refined_description = refined;
        result.changed = true;
    }
    return result;
}

RefinementResult refine(std::string_view description, std::string_view iface, llm::Provider& llm) {
    if (text::trim(description).empty()) throw Error(ErrorCode::kInvalidArgument, "description is empty");
    auto request = build_refine_request(description, iface);
    auto answer = llm.complete(request);
    if (!answer.ok())
        throw Error(ErrorCode::kLlmFailure,
                    "refine: " + std::string(llm::to_string(answer.status)) + ": " + answer.diagnostic);
    RefinementResult result = parse_refine_response(description, answer.response_text);
    result.request = std::move(request);
    return result;
}

std::string build_system_prompt(const std::vector<Rule>& rules, std::string_view extra_context) {
    std::string out =
        "You are a professional Verilog RTL designer. Write synthesizable Verilog-2001 that exactly "
        "implements the requested module.\n"
        "Follow these rules:\n";
    for (size_t i = 0; i < rules.size(); ++i) out += std::to_string(i + 1) + ". " + rules[i].text + "\n";
    if (!text::trim(extra_context).empty()) {
        out += "\nReference knowledge:\n";
        out += std::string(extra_context);
        if (out.back() != '\n') out.push_back('\n');
    }
    return out;
}

}  // namespace rtlforge::refine
