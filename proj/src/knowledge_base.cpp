#include "rtlforge/knowledge_base.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>
#include <set>
#include <sstream>

#include "rtlforge/error.hpp"
#include "rtlforge/text.hpp"
#include "rtlforge/toml_lite.hpp"

namespace rtlforge::kb {

using json = nlohmann::json;

std::string_view to_string(Category c) {
    switch (c) {
        case Category::kArithmetic: return "arithmetic";
        case Category::kMemory: return "memory";
        case Category::kControl: return "control";
        case Category::kMiscellaneous: return "miscellaneous";
        case Category::kRtlSyntax: return "rtl_syntax";
    }
    return "miscellaneous";
}

std::optional<Category> category_from_string(std::string_view s) {
    for (Category c : {Category::kArithmetic, Category::kMemory, Category::kControl, Category::kMiscellaneous,
                       Category::kRtlSyntax}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

bool KeywordPattern::applies_to(SourceKind kind) const {
    switch (scope) {
        case Scope::kAny: return true;
        case Scope::kSpec: return kind == SourceKind::kSpec;
        case Scope::kError: return kind == SourceKind::kCompilerError;
    }
    return false;
}

namespace {

constexpr auto kRegexFlags = std::regex::ECMAScript | std::regex::icase;

KeywordPattern compile_pattern(const std::string& written, const std::string& origin) {
    KeywordPattern p;
    p.source = written;
    std::string body = written;
    if (body.rfind("spec:", 0) == 0) {
        p.scope = KeywordPattern::Scope::kSpec;
        body = body.substr(5);
    } else if (body.rfind("error:", 0) == 0) {
        p.scope = KeywordPattern::Scope::kError;
        body = body.substr(6);
    }
    if (body.empty()) throw Error(ErrorCode::kParseError, origin + ": empty pattern");
    try {
        p.re = std::regex(body, kRegexFlags);
    } catch (const std::regex_error& e) {
        throw Error(ErrorCode::kParseError, origin + ": invalid pattern '" + written + "': " + e.what());
    }
    return p;
}

std::string escape_regex(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

KnowledgeEntry parse_entry(std::string_view source, const std::string& origin) {
    toml_lite::Document doc;
    try {
        doc = toml_lite::parse(source);
    } catch (const Error& e) {
        throw Error(ErrorCode::kParseError, origin + ": " + e.what());
    }
    const auto& t = doc.root;
    auto require = [&](const char* key) {
        auto v = t.get_string(key);
        if (!v) throw Error(ErrorCode::kParseError, origin + ": missing string field '" + key + "'");
        return *v;
    };
    KnowledgeEntry e;
    e.id = require("id");
    e.keyword = require("keyword");
    if (text::trim(e.id).empty()) throw Error(ErrorCode::kParseError, origin + ": empty id");
    if (text::trim(e.keyword).empty()) throw Error(ErrorCode::kParseError, origin + ": empty keyword");
    auto cat = category_from_string(require("category"));
    if (!cat) throw Error(ErrorCode::kParseError, origin + ": unknown category '" + require("category") + "'");
    e.category = *cat;
    e.description = require("description");
    e.example_code = t.get_string("example").value_or("");
    auto patterns = t.get_strings("patterns").value_or(std::vector<std::string>{});
    for (const auto& p : patterns) e.patterns.push_back(compile_pattern(p, origin));

    bool self_match = std::any_of(e.patterns.begin(), e.patterns.end(),
                                  [&](const KeywordPattern& p) { return std::regex_search(e.keyword, p.re); });
    if (!self_match) e.patterns.push_back(compile_pattern(escape_regex(e.keyword), origin));
    return e;
}

void KnowledgeBase::add(KnowledgeEntry entry) {
    if (index_.count(entry.id)) throw Error(ErrorCode::kDuplicateId, "duplicate knowledge entry id '" + entry.id + "'");
    index_.emplace(entry.id, entries_.size());
    entries_.push_back(std::move(entry));
}

void KnowledgeBase::set_vectors(std::map<std::string, std::vector<double>> vectors) {
    vectors_.clear();
    dimension_ = 0;
    if (vectors.empty()) return;
    for (const auto& e : entries_) {
        if (!vectors.count(e.id)) throw Error(ErrorCode::kParseError, "no vector for entry '" + e.id + "'");
    }
    for (auto& [id, v] : vectors) {
        if (!index_.count(id)) throw Error(ErrorCode::kUnknownId, "vector for unknown entry '" + id + "'");
        if (v.empty()) throw Error(ErrorCode::kParseError, "empty vector for '" + id + "'");
        if (dimension_ == 0) dimension_ = v.size();
        if (v.size() != dimension_)
            throw Error(ErrorCode::kDimensionMismatch, "vector for '" + id + "' has dimension " +
                                                           std::to_string(v.size()) + ", expected " +
                                                           std::to_string(dimension_));
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) throw Error(ErrorCode::kParseError, "zero vector for '" + id + "'");
        for (double& x : v) x /= norm;
        vectors_.emplace(id, std::move(v));
    }
}

const KnowledgeEntry* KnowledgeBase::find(std::string_view id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

const std::vector<double>* KnowledgeBase::vector(std::string_view id) const {
    auto it = vectors_.find(id);
    return it == vectors_.end() ? nullptr : &it->second;
}

KnowledgeBase load_kb(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "knowledge base directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& item : fs::recursive_directory_iterator(dir)) {
        if (item.is_regular_file() && item.path().extension() == ".entry") files.push_back(item.path());
    }
    std::sort(files.begin(), files.end());

    KnowledgeBase kb;
    for (const auto& f : files) kb.add(parse_entry(text::read_file(f), f.string()));

    const fs::path sidecar = dir / "vectors.jsonl";
    if (fs::exists(sidecar)) {
        std::map<std::string, std::vector<double>> vectors;
        std::istringstream in(text::read_file(sidecar));
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            const std::string where = sidecar.string() + ":" + std::to_string(lineno);
            try {
                json obj = json::parse(line);
                auto id = obj.at("id").get<std::string>();
                auto vec = obj.at("vector").get<std::vector<double>>();
                if (!vectors.emplace(id, std::move(vec)).second)
                    throw Error(ErrorCode::kDuplicateId, where + ": second vector for '" + id + "'");
            } catch (const json::exception& e) {
                throw Error(ErrorCode::kParseError, where + ": " + e.what());
            }
        }
        kb.set_vectors(std::move(vectors));
    }
    return kb;
}

namespace {

void rank(std::vector<RetrievalHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entry_id < b.entry_id;
    });
}

std::map<std::string, double> term_frequencies(std::string_view text) {
    std::map<std::string, double> tf;
    for (auto& tok : lexical_tokens(text)) tf[tok] += 1.0;
    return tf;
}

double tf_cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [t, w] : a) {
        na += w * w;
        if (auto it = b.find(t); it != b.end()) dot += w * it->second;
    }
    for (const auto& [t, w] : b) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<std::string> lexical_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<RetrievalHit> search_semantic(const KnowledgeBase& kb, std::string_view query, size_t k,
                                          const EmbedFn& embed) {
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
    if (!embed) return search_semantic(kb, query, k);
    if (!kb.has_vectors()) throw Error(ErrorCode::kMissingVectors, "knowledge base has no vectors");
    std::vector<double> q = embed(query);
    if (q.size() != kb.dimension())
        throw Error(ErrorCode::kDimensionMismatch, "query embedding has dimension " + std::to_string(q.size()) +
                                                       ", knowledge base uses " + std::to_string(kb.dimension()));
    double norm = 0.0;
    for (double x : q) norm += x * x;
    norm = std::sqrt(norm);

    std::vector<RetrievalHit> hits;
    for (const auto& e : kb.entries()) {
        const auto& v = *kb.vector(e.id);
        double dot = 0.0;
        for (size_t i = 0; i < v.size(); ++i) dot += v[i] * q[i];
        double score = norm == 0.0 ? 0.0 : std::clamp(dot / norm, -1.0, 1.0);
        hits.push_back({e.id, score, SearchMethod::kSemantic});
    }
    rank(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::vector<RetrievalHit> search_semantic(const KnowledgeBase& kb, std::string_view query, size_t k) {
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
    const auto q = term_frequencies(query);
    std::vector<RetrievalHit> hits;
    for (const auto& e : kb.entries()) {
        const auto doc = term_frequencies(e.keyword + " " + e.description);
        hits.push_back({e.id, tf_cosine(q, doc), SearchMethod::kSemantic});
    }
    rank(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::vector<std::string> extract_keywords(const KnowledgeBase& kb, std::string_view source, SourceKind kind) {
    struct Found {
        size_t position;
        size_t order;
        const std::string* keyword;
    };
    std::vector<Found> found;
    const std::string src(source);
    for (size_t i = 0; i < kb.entries().size(); ++i) {
        const auto& e = kb.entries()[i];
        std::optional<size_t> first;
        for (const auto& p : e.patterns) {
            if (!p.applies_to(kind)) continue;
            std::smatch m;
            if (std::regex_search(src, m, p.re)) {
                size_t pos = static_cast<size_t>(m.position(0));
                if (!first || pos < *first) first = pos;
            }
        }
        if (first) found.push_back({*first, i, &e.keyword});
    }
    std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
        return a.position != b.position ? a.position < b.position : a.order < b.order;
    });
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& f : found) {
        if (seen.insert(*f.keyword).second) out.push_back(*f.keyword);
    }
    return out;
}

std::vector<RetrievalHit> search_keyword(const KnowledgeBase& kb, const std::vector<std::string>& keywords) {
    std::vector<RetrievalHit> hits;
    for (const auto& e : kb.entries()) {
        bool match = std::any_of(e.patterns.begin(), e.patterns.end(), [&](const KeywordPattern& p) {
            return std::any_of(keywords.begin(), keywords.end(),
                               [&](const std::string& kw) { return std::regex_search(kw, p.re); });
        });
        if (match) hits.push_back({e.id, 1.0, SearchMethod::kKeyword});
    }
    std::sort(hits.begin(), hits.end(),
              [](const RetrievalHit& a, const RetrievalHit& b) { return a.entry_id < b.entry_id; });
    return hits;
}

std::string render_entry(const KnowledgeEntry& e) {
    std::string out = "### " + e.keyword + " (" + std::string(to_string(e.category)) + ")\n";
    out += std::string(text::trim(e.description)) + "\n";
    if (!text::trim(e.example_code).empty()) {
        out += "Example:\n";
        std::string code(e.example_code);
        while (!code.empty() && (code.back() == '\n' || code.back() == ' ')) code.pop_back();
        out += code + "\n";
    }
    return out;
}

AssembledContext assemble_context(const std::vector<RetrievalHit>& hits, const KnowledgeBase& kb,
                                  size_t budget_chars) {
    if (budget_chars == 0) throw Error(ErrorCode::kInvalidArgument, "budget_chars must be positive");
    AssembledContext ctx;
    std::set<std::string> seen;
    for (const auto& h : hits) {
        const KnowledgeEntry* e = kb.find(h.entry_id);
        if (!e) throw Error(ErrorCode::kUnknownId, "hit references unknown entry '" + h.entry_id + "'");
        if (!seen.insert(h.entry_id).second) continue;
        std::string block = render_entry(*e);
        std::string candidate = ctx.text.empty() ? block : ctx.text + "\n" + block;
        if (candidate.size() > budget_chars) {
            ctx.truncated = true;
            break;
        }
        ctx.text = std::move(candidate);
        ctx.included_ids.push_back(h.entry_id);
    }
    return ctx;
}

}  // namespace rtlforge::kb
