#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "rtlforge/taxonomy.hpp"
#include "rtlforge/text.hpp"
#include "test_util.hpp"

namespace rtlforge {
namespace {

using namespace rtlforge::testing;
using namespace rtlforge::taxonomy;

const std::string kHeader(kCsvHeader);

// IKSP counts per model as published.
struct PublishedIksp {
    const char* model;
    int counts[9];  // IkspSub declaration order
    int total;
};

constexpr PublishedIksp kPublished[] = {
    {"qwen-coder-32b", {9, 2, 1, 1, 0, 0, 0, 0, 0}, 13},
    {"gpt-3.5-turbo", {8, 1, 3, 1, 4, 4, 1, 1, 1}, 24},
    {"gpt-4-turbo", {1, 0, 0, 0, 3, 0, 1, 1, 0}, 6},
};

std::vector<ErrorLabel> reference_labels() { return load_labels(source_dir() / "data/labels/reference_labels.csv"); }

TEST(Enums, NamesRoundTrip) {
    for (auto v : all_values<TopLevel>()) EXPECT_EQ(from_string<TopLevel>(to_string(v)), v);
    for (auto v : all_values<IkspSub>()) EXPECT_EQ(from_string<IkspSub>(to_string(v)), v);
    for (auto v : all_values<MdsSub>()) EXPECT_EQ(from_string<MdsSub>(to_string(v)), v);
    for (auto v : all_values<IuccSub>()) EXPECT_EQ(from_string<IuccSub>(to_string(v)), v);
    for (auto v : all_values<AddSub>()) EXPECT_EQ(from_string<AddSub>(to_string(v)), v);
    for (auto v : all_values<MmdSub>()) EXPECT_EQ(from_string<MmdSub>(to_string(v)), v);
    EXPECT_EQ(all_values<IkspSub>().size(), 9u);
    EXPECT_FALSE(from_string<MdsSub>("iucc"));
}

TEST(Labels, ParseQuotedFields) {
    auto labels = parse_labels(kHeader + "\nt1,m,MDS,,IUCC,TRC,,,\"timing, \"\"clock\"\" edge\"\n"
                                         "t2,m,IKSP,wire_in_always,,,,,\n");
    ASSERT_EQ(labels.size(), 2u);
    EXPECT_EQ(labels[0].path(), "MDS/IUCC/TRC");
    EXPECT_EQ(labels[0].notes, "timing, \"clock\" edge");
    EXPECT_EQ(labels[1].path(), "IKSP/wire_in_always");
    EXPECT_EQ(parse_labels(to_csv(labels)), labels);
}

TEST(Labels, SchemaErrors) {
    EXPECT_ERROR_CODE(parse_labels(""), ErrorCode::kSchemaError);
    EXPECT_ERROR_CODE(parse_labels("task,model\n"), ErrorCode::kSchemaError);
    EXPECT_ERROR_CODE(parse_labels(kHeader + "\nt1,m,MDS\n"), ErrorCode::kSchemaError);
    EXPECT_ERROR_CODE(parse_labels(kHeader + "\nt1,m,OTHER,,,,,,\n"), ErrorCode::kSchemaError);
    EXPECT_ERROR_CODE(parse_labels(kHeader + "\nt1,m,MDS,,IUCC,XYZ,,,\n"), ErrorCode::kSchemaError);
}

TEST(Labels, InconsistentPaths) {
    EXPECT_ERROR_CODE(parse_labels(kHeader + "\nt1,m,IKSP,wire_in_always,IUCC,,,,\n"), ErrorCode::kInconsistentPath);
    EXPECT_ERROR_CODE(parse_labels(kHeader + "\nt1,m,MDS,wire_in_always,,,,,\n"), ErrorCode::kInconsistentPath);
    EXPECT_ERROR_CODE(parse_labels(kHeader + "\nt1,m,MDS,,ADD,TRC,,,\n"), ErrorCode::kInconsistentPath);
    EXPECT_ERROR_CODE(parse_labels(kHeader + "\nt1,m,MDS,,IUCC,,,KMAP,\n"), ErrorCode::kInconsistentPath);
}

TEST(Aggregate, PrefixesAreCounted) {
    auto r = aggregate(parse_labels(kHeader + "\nt1,m,MDS,,IUCC,TRC,,,\nt1,m,MDS,,IUCC,SP,,,\nt2,m,IKSP,bit_select,,,,,\n"));
    EXPECT_EQ(r.count("m", "MDS"), 2);
    EXPECT_EQ(r.count("m", "MDS/IUCC"), 2);
    EXPECT_EQ(r.count("m", "MDS/IUCC/TRC"), 1);
    EXPECT_EQ(r.count("m", "IKSP/bit_select"), 1);
    EXPECT_EQ(r.count("m", "MDS/ADD"), 0);
    EXPECT_EQ(r.designs.at("m"), 2);
    EXPECT_DOUBLE_EQ(r.ratio("m", TopLevel::kMDS), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.ratio("m", TopLevel::kIKSP) + r.ratio("m", TopLevel::kMDS), 1.0);
}

TEST(Aggregate, PermutationInvariant) {
    auto labels = reference_labels();
    auto base = aggregate(labels);
    std::mt19937 rng(11);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(labels.begin(), labels.end(), rng);
        EXPECT_EQ(aggregate(labels), base);
        EXPECT_EQ(render_csv(aggregate(labels)), render_csv(base));
        EXPECT_EQ(render_text(aggregate(labels)), render_text(base));
    }
}

TEST(Reference, IkspCountsMatchPublishedTable) {
    auto r = aggregate(reference_labels());
    for (const auto& row : kPublished) {
        for (size_t i = 0; i < 9; ++i) {
            auto path = "IKSP/" + std::string(to_string(all_values<IkspSub>()[i]));
            EXPECT_EQ(r.count(row.model, path), row.counts[i]) << row.model << " " << path;
        }
        EXPECT_EQ(r.count(row.model, "IKSP"), row.total) << row.model;
    }
}

TEST(Reference, MdsDominatesEveryModel) {
    auto r = aggregate(reference_labels());
    const std::pair<const char*, int> mds_totals[] = {{"qwen-coder-32b", 92}, {"gpt-3.5-turbo", 93}, {"gpt-4-turbo", 64}};
    for (const auto& [model, mds] : mds_totals) {
        EXPECT_EQ(r.count(model, "MDS"), mds) << model;
        EXPECT_GT(r.ratio(model, TopLevel::kMDS), 0.70) << model;
    }
}

TEST(Render, CsvListsCountsDesignsAndRatios) {
    auto csv = render_csv(aggregate(parse_labels(kHeader + "\nt1,m,IKSP,bit_select,,,,,\nt2,m,MDS,,MMD,,,KMAP,\n")));
    EXPECT_NE(csv.find("m,IKSP/bit_select,1\n"), std::string::npos);
    EXPECT_NE(csv.find("m,MDS/MMD/KMAP,1\n"), std::string::npos);
    EXPECT_NE(csv.find("m,designs,2\n"), std::string::npos);
    EXPECT_NE(csv.find("m,ratio:MDS,"), std::string::npos);
}

}  // namespace
}  // namespace rtlforge
