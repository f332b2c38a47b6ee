#include "rtlforge/taxonomy.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>

#include "rtlforge/error.hpp"
#include "rtlforge/text.hpp"

namespace rtlforge::taxonomy {

namespace {

template <typename E>
struct Names;

template <>
struct Names<TopLevel> {
    static constexpr std::array<std::string_view, 2> v = {"IKSP", "MDS"};
};
template <>
struct Names<IkspSub> {
    static constexpr std::array<std::string_view, 9> v = {
        "wire_in_always", "numeric_logic", "bit_select", "slice_inversion", "incomplete_code",
        "var_redef",      "undefined_var", "generate_misuse", "mixed_assign"};
};
template <>
struct Names<MdsSub> {
    static constexpr std::array<std::string_view, 5> v = {"IUCC", "ADD", "MMD", "MDLD", "MISC"};
};
template <>
struct Names<IuccSub> {
    static constexpr std::array<std::string_view, 4> v = {"TRC", "SP", "NVP", "SMDC"};
};
template <>
struct Names<AddSub> {
    static constexpr std::array<std::string_view, 3> v = {"UOMF", "AIOD", "MMI"};
};
template <>
struct Names<MmdSub> {
    static constexpr std::array<std::string_view, 4> v = {"KMAP", "TB", "ST", "WAV"};
};

template <typename E>
std::string_view name_of(E e) {
    return Names<E>::v.at(static_cast<size_t>(e));
}

// RFC 4180 fields: quoted fields may hold commas, quotes ("") and newlines.
std::vector<std::vector<std::string>> csv_records(std::string_view s, const std::string& origin) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (quoted) {
            if (c == '"' && i + 1 < s.size() && s[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field.push_back(c);
            any = true;
        }
    }
    if (quoted) throw Error(ErrorCode::kSchemaError, origin + ": unterminated quoted field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    return "\"" + text::replace_all(s, "\"", "\"\"") + "\"";
}

template <typename E>
std::optional<E> optional_enum(const std::string& cell, const std::string& where, const char* column) {
    auto t = text::trim(cell);
    if (t.empty()) return std::nullopt;
    auto v = from_string<E>(t);
    if (!v) throw Error(ErrorCode::kSchemaError, where + ": unknown " + column + " '" + std::string(t) + "'");
    return v;
}

template <typename E>
std::string opt_name(const std::optional<E>& v) {
    return v ? std::string(name_of(*v)) : std::string();
}

std::string fmt_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::string_view to_string(TopLevel v) { return name_of(v); }
std::string_view to_string(IkspSub v) { return name_of(v); }
std::string_view to_string(MdsSub v) { return name_of(v); }
std::string_view to_string(IuccSub v) { return name_of(v); }
std::string_view to_string(AddSub v) { return name_of(v); }
std::string_view to_string(MmdSub v) { return name_of(v); }

template <typename E>
std::optional<E> from_string(std::string_view s) {
    const auto& names = Names<E>::v;
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == s) return static_cast<E>(i);
    return std::nullopt;
}

template <typename E>
const std::vector<E>& all_values() {
    static const std::vector<E> values = [] {
        std::vector<E> v;
        for (size_t i = 0; i < Names<E>::v.size(); ++i) v.push_back(static_cast<E>(i));
        return v;
    }();
    return values;
}

#define RTLFORGE_TAXONOMY_ENUM(E)                                  \
    template std::optional<E> from_string<E>(std::string_view s); \
    template const std::vector<E>& all_values<E>();
RTLFORGE_TAXONOMY_ENUM(TopLevel)
RTLFORGE_TAXONOMY_ENUM(IkspSub)
RTLFORGE_TAXONOMY_ENUM(MdsSub)
RTLFORGE_TAXONOMY_ENUM(IuccSub)
RTLFORGE_TAXONOMY_ENUM(AddSub)
RTLFORGE_TAXONOMY_ENUM(MmdSub)
#undef RTLFORGE_TAXONOMY_ENUM

void ErrorLabel::validate() const {
    auto bad = [&](const std::string& why) { throw Error(ErrorCode::kInconsistentPath, task_id + ": " + why); };
    if (top_level == TopLevel::kIKSP && (mds_sub || iucc_sub || add_sub || mmd_sub))
        bad("an IKSP label carries MDS sub-fields");
    if (top_level == TopLevel::kMDS && iksp_sub) bad("an MDS label carries iksp_sub");
    if (iucc_sub && mds_sub != MdsSub::kIUCC) bad("iucc_sub requires mds_sub IUCC");
    if (add_sub && mds_sub != MdsSub::kADD) bad("add_sub requires mds_sub ADD");
    if (mmd_sub && mds_sub != MdsSub::kMMD) bad("mmd_sub requires mds_sub MMD");
}

std::string ErrorLabel::path() const {
    std::string p(to_string(top_level));
    if (iksp_sub) p += "/" + std::string(to_string(*iksp_sub));
    if (mds_sub) p += "/" + std::string(to_string(*mds_sub));
    if (iucc_sub) p += "/" + std::string(to_string(*iucc_sub));
    if (add_sub) p += "/" + std::string(to_string(*add_sub));
    if (mmd_sub) p += "/" + std::string(to_string(*mmd_sub));
    return p;
}

std::vector<ErrorLabel> parse_labels(std::string_view csv, const std::string& origin) {
    auto records = csv_records(csv, origin);
    if (records.empty()) throw Error(ErrorCode::kSchemaError, origin + ": missing header");
    const auto expected = text::split(kCsvHeader, ',');
    std::vector<std::string> header;
    for (const auto& h : records[0]) header.emplace_back(text::trim(h));
    if (header != expected)
        throw Error(ErrorCode::kSchemaError, origin + ": header must be " + std::string(kCsvHeader));

    std::vector<ErrorLabel> labels;
    for (size_t r = 1; r < records.size(); ++r) {
        const auto& row = records[r];
        const std::string where = origin + ": record " + std::to_string(r + 1);
        if (row.size() != expected.size())
            throw Error(ErrorCode::kSchemaError, where + ": expected " + std::to_string(expected.size()) +
                                                     " fields, found " + std::to_string(row.size()));
        ErrorLabel l;
        l.task_id = std::string(text::trim(row[0]));
        l.model_id = std::string(text::trim(row[1]));
        if (l.task_id.empty() || l.model_id.empty())
            throw Error(ErrorCode::kSchemaError, where + ": task_id and model_id are required");
        auto top = from_string<TopLevel>(text::trim(row[2]));
        if (!top) throw Error(ErrorCode::kSchemaError, where + ": unknown top_level '" + row[2] + "'");
        l.top_level = *top;
        l.iksp_sub = optional_enum<IkspSub>(row[3], where, "iksp_sub");
        l.mds_sub = optional_enum<MdsSub>(row[4], where, "mds_sub");
        l.iucc_sub = optional_enum<IuccSub>(row[5], where, "iucc_sub");
        l.add_sub = optional_enum<AddSub>(row[6], where, "add_sub");
        l.mmd_sub = optional_enum<MmdSub>(row[7], where, "mmd_sub");
        l.notes = row[8];
        try {
            l.validate();
        } catch (const Error& e) {
            throw Error(ErrorCode::kInconsistentPath, where + ": " + e.what());
        }
        labels.push_back(std::move(l));
    }
    return labels;
}

std::vector<ErrorLabel> load_labels(const std::filesystem::path& path) {
    return parse_labels(text::read_file(path), path.string());
}

std::string to_csv(const std::vector<ErrorLabel>& labels) {
    std::string out(kCsvHeader);
    out += "\n";
    for (const auto& l : labels) {
        std::vector<std::string> f = {csv_field(l.task_id),  csv_field(l.model_id),
                                      std::string(to_string(l.top_level)), opt_name(l.iksp_sub),
                                      opt_name(l.mds_sub),   opt_name(l.iucc_sub),
                                      opt_name(l.add_sub),   opt_name(l.mmd_sub),
                                      csv_field(l.notes)};
        out += text::join(f, ",") + "\n";
    }
    return out;
}

int DistributionReport::count(const std::string& model, const std::string& path) const {
    auto m = counts.find(model);
    if (m == counts.end()) return 0;
    auto p = m->second.find(path);
    return p == m->second.end() ? 0 : p->second;
}

double DistributionReport::ratio(const std::string& model, TopLevel t) const {
    auto m = ratios.find(model);
    if (m == ratios.end()) return 0.0;
    auto p = m->second.find(std::string(to_string(t)));
    return p == m->second.end() ? 0.0 : p->second;
}

DistributionReport aggregate(const std::vector<ErrorLabel>& labels) {
    DistributionReport r;
    std::map<std::string, std::set<std::string>> designs;
    std::map<std::string, int> totals;
    for (const auto& l : labels) {
        auto& counts = r.counts[l.model_id];
        const auto parts = text::split(l.path(), '/');
        std::string prefix;
        for (const auto& part : parts) {
            prefix += prefix.empty() ? part : "/" + part;
            ++counts[prefix];
        }
        designs[l.model_id].insert(l.task_id);
        ++totals[l.model_id];
    }
    for (const auto& [model, ids] : designs) r.designs[model] = static_cast<int>(ids.size());
    for (const auto& [model, total] : totals)
        for (auto t : all_values<TopLevel>()) {
            const std::string name(to_string(t));
            r.ratios[model][name] = static_cast<double>(r.count(model, name)) / total;
        }
    return r;
}

std::string render_text(const DistributionReport& r) {
    std::set<std::string> paths;
    for (const auto& [model, counts] : r.counts)
        for (const auto& [path, n] : counts) paths.insert(path);
    size_t w0 = std::string_view("category").size();
    for (const auto& p : paths) w0 = std::max(w0, p.size());
    std::vector<std::string> models;
    for (const auto& [model, counts] : r.counts) models.push_back(model);

    auto cell = [](const std::string& s, size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
    std::vector<size_t> widths;
    for (const auto& m : models) widths.push_back(std::max<size_t>(m.size(), 8));

    std::string out = "category" + std::string(w0 - 8, ' ');
    for (size_t i = 0; i < models.size(); ++i) out += "  " + cell(models[i], widths[i]);
    out += "\n";
    auto row = [&](const std::string& label, auto value) {
        out += label + std::string(w0 > label.size() ? w0 - label.size() : 0, ' ');
        for (size_t i = 0; i < models.size(); ++i) out += "  " + cell(value(models[i]), widths[i]);
        out += "\n";
    };
    for (const auto& p : paths) row(p, [&](const std::string& m) { return std::to_string(r.count(m, p)); });
    row("designs", [&](const std::string& m) {
        auto it = r.designs.find(m);
        return std::to_string(it == r.designs.end() ? 0 : it->second);
    });
    for (auto t : all_values<TopLevel>())
        row("ratio " + std::string(to_string(t)), [&](const std::string& m) { return fmt_ratio(r.ratio(m, t)); });
    return out;
}

std::string render_csv(const DistributionReport& r) {
    std::string out = "model_id,key,value\n";
    for (const auto& [model, counts] : r.counts)
        for (const auto& [path, n] : counts) out += csv_field(model) + "," + path + "," + std::to_string(n) + "\n";
    for (const auto& [model, n] : r.designs) out += csv_field(model) + ",designs," + std::to_string(n) + "\n";
    for (const auto& [model, ratios] : r.ratios)
        for (const auto& [top, v] : ratios) out += csv_field(model) + ",ratio:" + top + "," + fmt_ratio(v) + "\n";
    return out;
}

}  // namespace rtlforge::taxonomy
