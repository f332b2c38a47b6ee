#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtlforge::taxonomy {

enum class TopLevel { kIKSP, kMDS };
enum class IkspSub {
    kWireInAlways,
    kNumericLogic,
    kBitSelect,
    kSliceInversion,
    kIncompleteCode,
    kVarRedef,
    kUndefinedVar,
    kGenerateMisuse,
    kMixedAssign,
};
enum class MdsSub { kIUCC, kADD, kMMD, kMDLD, kMISC };
enum class IuccSub { kTRC, kSP, kNVP, kSMDC };
enum class AddSub { kUOMF, kAIOD, kMMI };
enum class MmdSub { kKMAP, kTB, kST, kWAV };

// Serialized names. from_string returns nullopt for unknown text.
std::string_view to_string(TopLevel v);
std::string_view to_string(IkspSub v);
std::string_view to_string(MdsSub v);
std::string_view to_string(IuccSub v);
std::string_view to_string(AddSub v);
std::string_view to_string(MmdSub v);

template <typename E>
std::optional<E> from_string(std::string_view s);

/// Every value of E in declaration order.
template <typename E>
const std::vector<E>& all_values();

/// One (design, root cause) pair. A design with several causes has several labels.
struct ErrorLabel {
    std::string task_id;
    std::string model_id;
    TopLevel top_level = TopLevel::kIKSP;
    std::optional<IkspSub> iksp_sub;
    std::optional<MdsSub> mds_sub;
    std::optional<IuccSub> iucc_sub;
    std::optional<AddSub> add_sub;
    std::optional<MmdSub> mmd_sub;
    std::string notes;

    /// Throws kInconsistentPath when a sub-field is set off the top-level path.
    void validate() const;
    /// "IKSP/wire_in_always", "MDS/IUCC/TRC", "MDS/MMD", ...
    std::string path() const;
    bool operator==(const ErrorLabel&) const = default;
};

inline constexpr std::string_view kCsvHeader =
    "task_id,model_id,top_level,iksp_sub,mds_sub,iucc_sub,add_sub,mmd_sub,notes";

/// CSV with the kCsvHeader columns. Throws kSchemaError or kInconsistentPath
/// with the offending line number.
std::vector<ErrorLabel> parse_labels(std::string_view csv, const std::string& origin = "labels");
std::vector<ErrorLabel> load_labels(const std::filesystem::path& path);
std::string to_csv(const std::vector<ErrorLabel>& labels);

struct DistributionReport {
    /// model -> path -> count. Every prefix of a label's path is counted:
    /// "MDS", "MDS/IUCC" and "MDS/IUCC/TRC" for one TRC label.
    std::map<std::string, std::map<std::string, int>> counts;
    /// model -> number of distinct task ids.
    std::map<std::string, int> designs;
    /// model -> top level -> share of that model's labels.
    std::map<std::string, std::map<std::string, double>> ratios;

    int count(const std::string& model, const std::string& path) const;
    double ratio(const std::string& model, TopLevel t) const;
    bool operator==(const DistributionReport&) const = default;
};

DistributionReport aggregate(const std::vector<ErrorLabel>& labels);

/// Aligned table: one row per category path, one column per model.
std::string render_text(const DistributionReport& r);
/// model_id,key,value rows: path counts, then designs, then ratio:<top>.
std::string render_csv(const DistributionReport& r);

}  // namespace rtlforge::taxonomy
