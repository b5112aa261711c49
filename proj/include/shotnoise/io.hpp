#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace shotnoise::io {

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_double(double x)
{
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), x);
    if (result.ec != std::errc{}) {
        throw std::runtime_error("cannot format number");
    }
    return std::string(buf, result.ptr);
}

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view text, double& out)
{
    text = trim(text);
    if (text.empty()) {
        return false;
    }
    const auto result = std::from_chars(text.data(), text.data() + text.size(), out);
    return result.ec == std::errc{} && result.ptr == text.data() + text.size();
}

/// Reads rows of exactly `columns` numbers. Blank lines, '#' comments and a
/// single non-numeric header line are skipped; anything else is an error.
inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t columns)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        std::vector<double> row;
        bool numeric = true;
        std::string_view rest = body;
        while (true) {
            const auto comma = rest.find(',');
            double value = 0.0;
            if (!parse_double(rest.substr(0, comma), value)) {
                numeric = false;
                break;
            }
            row.push_back(value);
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (!numeric) {
            if (rows.empty() && !header_seen) {
                header_seen = true;
                continue;
            }
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": non-numeric row");
        }
        if (row.size() != columns) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(columns) + " columns");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace shotnoise::io
