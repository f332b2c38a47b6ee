#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace rtlforge::kb {

enum class Category { kArithmetic, kMemory, kControl, kMiscellaneous, kRtlSyntax };

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);

/// Where a keyword pattern applies. Patterns written as "spec:<re>" or
/// "error:<re>" are restricted to that source kind; plain patterns apply to both.
enum class SourceKind { kSpec, kCompilerError };

struct KeywordPattern {
    enum class Scope { kAny, kSpec, kError };

    std::string source;  // as written, including any scope prefix
    Scope scope = Scope::kAny;
    std::regex re;

    bool applies_to(SourceKind kind) const;
};

struct KnowledgeEntry {
    std::string id;
    std::string keyword;
    Category category = Category::kMiscellaneous;
    std::string description;
    std::string example_code;
    std::vector<KeywordPattern> patterns;
};

/// Parses one entry file. Every entry gets a literal pattern for its own
/// keyword when none of the listed patterns already matches it, so keyword
/// lookups always find the entry that owns the keyword.
KnowledgeEntry parse_entry(std::string_view source, const std::string& origin);

class KnowledgeBase {
public:
    void add(KnowledgeEntry entry);  // throws kDuplicateId
    void set_vectors(std::map<std::string, std::vector<double>> vectors);

    const std::vector<KnowledgeEntry>& entries() const { return entries_; }
    const KnowledgeEntry* find(std::string_view id) const;
    size_t size() const { return entries_.size(); }

    bool has_vectors() const { return !vectors_.empty(); }
    const std::vector<double>* vector(std::string_view id) const;
    size_t dimension() const { return dimension_; }

private:
    std::vector<KnowledgeEntry> entries_;
    std::map<std::string, size_t, std::less<>> index_;
    std::map<std::string, std::vector<double>, std::less<>> vectors_;
    size_t dimension_ = 0;
};

/// Reads <dir>/<category>/<id>.entry plus the optional <dir>/vectors.jsonl sidecar.
KnowledgeBase load_kb(const std::filesystem::path& dir);

enum class SearchMethod { kSemantic, kKeyword };

struct RetrievalHit {
    std::string entry_id;
    double score = 0.0;
    SearchMethod method = SearchMethod::kSemantic;

    bool operator==(const RetrievalHit&) const = default;
};

using EmbedFn = std::function<std::vector<double>(std::string_view)>;

inline constexpr size_t kDefaultTopK = 3;

/// Top-k entries by cosine similarity between embed(query) and the stored vectors.
std::vector<RetrievalHit> search_semantic(const KnowledgeBase& kb, std::string_view query, size_t k,
                                          const EmbedFn& embed);

/// Deterministic lexical fallback: lowercase word tokens, term-frequency
/// vectors over keyword + description, cosine similarity.
std::vector<RetrievalHit> search_semantic(const KnowledgeBase& kb, std::string_view query, size_t k);

/// Word tokens used by the lexical fallback.
std::vector<std::string> lexical_tokens(std::string_view text);

std::vector<std::string> extract_keywords(const KnowledgeBase& kb, std::string_view source, SourceKind kind);

std::vector<RetrievalHit> search_keyword(const KnowledgeBase& kb, const std::vector<std::string>& keywords);

struct AssembledContext {
    std::string text;
    bool truncated = false;
    std::vector<std::string> included_ids;
};

/// Renders one entry the way it appears in a prompt.
std::string render_entry(const KnowledgeEntry& e);

AssembledContext assemble_context(const std::vector<RetrievalHit>& hits, const KnowledgeBase& kb,
                                  size_t budget_chars);

}  // namespace rtlforge::kb
