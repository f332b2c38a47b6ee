#pragma once

// Cube arithmetic over {'0','1','-'} patterns, shared by the multimodal
// validators and emitters.

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rtlforge::mm::detail {

inline bool is_pattern(std::string_view p) {
    for (char c : p)
        if (c != '0' && c != '1' && c != '-') return false;
    return true;
}

inline bool intersects(std::string_view a, std::string_view b) {
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != '-' && b[i] != '-' && a[i] != b[i]) return false;
    return true;
}

inline bool matches(std::string_view pattern, std::string_view assignment) { return intersects(pattern, assignment); }

inline std::string intersection(std::string_view a, std::string_view b) {
    std::string out(a);
    for (size_t i = 0; i < a.size(); ++i)
        if (out[i] == '-') out[i] = b[i];
    return out;
}

// Disjoint cubes covering a \ b.
inline std::vector<std::string> subtract(std::string_view a, std::string_view b) {
    if (!intersects(a, b)) return {std::string(a)};
    std::vector<std::string> out;
    std::string cur(a);
    for (size_t i = 0; i < cur.size(); ++i) {
        if (b[i] == '-' || cur[i] != '-') continue;
        std::string piece = cur;
        piece[i] = b[i] == '0' ? '1' : '0';
        out.push_back(std::move(piece));
        cur[i] = b[i];
    }
    return out;
}

// Merges two output symbol strings; returns false on a 0/1 conflict.
inline bool merge_symbols(std::string& into, std::string_view other) {
    for (size_t i = 0; i < into.size(); ++i) {
        if (other[i] == '-') continue;
        if (into[i] == '-') into[i] = other[i];
        else if (into[i] != other[i]) return false;
    }
    return true;
}

// Rewrites overlapping (cube, value) rows into disjoint cubes. Where cubes
// overlap the values are combined with `merge`, which may throw.
template <class V>
std::vector<std::pair<std::string, V>> disjoint_cover(const std::vector<std::pair<std::string, V>>& rows,
                                                      const std::function<V(const V&, const V&)>& merge) {
    std::vector<std::pair<std::string, V>> cover;
    for (const auto& [cube, value] : rows) {
        std::vector<std::pair<std::string, V>> next;
        std::vector<std::string> remainder{cube};
        for (const auto& [d, w] : cover) {
            if (!intersects(d, cube)) {
                next.emplace_back(d, w);
                continue;
            }
            next.emplace_back(intersection(d, cube), merge(w, value));
            for (auto& piece : subtract(d, cube)) next.emplace_back(std::move(piece), w);
            std::vector<std::string> left;
            for (const auto& r : remainder)
                for (auto& piece : subtract(r, d)) left.push_back(std::move(piece));
            remainder = std::move(left);
        }
        for (auto& r : remainder) next.emplace_back(std::move(r), value);
        cover = std::move(next);
    }
    return cover;
}

}  // namespace rtlforge::mm::detail
