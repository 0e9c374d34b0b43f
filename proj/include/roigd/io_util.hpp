#pragma once

#include <filesystem>
#include <string>

namespace roigd {

// Reads a whole file; throws ParseError naming the path when unreadable.
std::string slurp_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, const std::string& content);

// snprintf-style fixed formatting, locale-independent.
std::string fmt_fixed(double v, int precision);

// Shortest-ish general formatting for CSV output ("%.12g").
std::string fmt_g(double v);

}  // namespace roigd
