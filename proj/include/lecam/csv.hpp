#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lecam::csv {

/// Shortest-safe round-trip formatting ("%.17g").
inline std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format(std::size_t v) { return std::to_string(v); }
inline std::string format(const std::string& v) { return v; }
inline std::string format(const char* v) { return v; }

inline void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) out << ',';
        out << cells[k];
    }
    out << '\n';
}

template <class... Ts>
void write(std::ostream& out, const Ts&... values) {
    write_row(out, {format(values)...});
}

/// Splits one CSV line on commas (no quoting; the tool never emits quotes).
inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (auto& cell : out) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    }
    return out;
}

}  // namespace lecam::csv
