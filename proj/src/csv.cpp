#include "pwltc/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace pwltc::csv {

std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

static std::vector<std::string> split(std::string_view ln) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = ln.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(ln.substr(start));
            break;
        }
        out.emplace_back(ln.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

Table parse(std::string_view text) {
    Table t;
    bool first = true;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto ln = text.substr(start, end - start);
        if (!ln.empty() && ln.back() == '\r') ln.remove_suffix(1);
        start = end + 1;
        if (ln.empty()) continue;
        if (first) {
            t.header = split(ln);
            first = false;
        } else {
            t.rows.push_back(split(ln));
            if (t.rows.back().size() != t.header.size())
                throw std::runtime_error("csv: row width does not match header");
        }
    }
    return t;
}

double to_real(const std::string& field) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0') throw std::runtime_error("csv: bad number '" + field + "'");
    return v;
}

std::string line(const std::vector<std::string>& fields) {
    std::string s;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) s += ',';
        s += fields[i];
    }
    s += '\n';
    return s;
}

}  // namespace pwltc::csv
