#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers.
namespace rtlforge::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Splits on `sep`, keeping empty fields.
std::vector<std::string> split(std::string_view s, char sep);
/// Splits on runs of whitespace, dropping empty fields.
std::vector<std::string> split_ws(std::string_view s);
/// Splits into lines; accepts \n, \r\n and lone \r.
std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

/// Contents of each ``` fenced block, verbatim between the fence lines. An
/// unterminated fence runs to the end of the text.
std::vector<std::string> fenced_blocks(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace rtlforge::text
