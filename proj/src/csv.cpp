#include "qtmrl/csv.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <system_error>

namespace qtmrl {

CsvReader::CsvReader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw Error("missing-file", "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in_, line)) {
        throw Error("corrupt-row", "'" + path + "' is empty (no header row)");
    }
    ++line_no_;
    split_line(line, header_);
    for (std::size_t i = 0; i < header_.size(); ++i) {
        columns_[header_[i]] = i;
    }
}

void CsvReader::split_line(const std::string& line, std::vector<std::string>& out) const {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                         : comma - start);
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ' || cell.back() == '\t')) {
            cell.pop_back();
        }
        std::size_t lead = 0;
        while (lead < cell.size() && (cell[lead] == ' ' || cell[lead] == '\t')) ++lead;
        out.push_back(cell.substr(lead));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
}

bool CsvReader::has_column(const std::string& name) const {
    return columns_.count(name) > 0;
}

std::size_t CsvReader::column(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end()) {
        throw Error("bad-config", "'" + path_ + "' has no column '" + name + "'");
    }
    return it->second;
}

bool CsvReader::next_row() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        bool blank = true;
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                blank = false;
                break;
            }
        }
        if (blank) continue;
        split_line(line, fields_);
        return true;
    }
    return false;
}

const std::string& CsvReader::field(std::size_t col) const {
    if (col >= fields_.size()) {
        throw Error("corrupt-row",
                    "'" + path_ + "' row " + std::to_string(line_no_) + " has too few fields");
    }
    return fields_[col];
}

double CsvReader::number(std::size_t col) const {
    const std::string& cell = field(col);
    if (cell.empty()) return kUndefined;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error("corrupt-row", "'" + path_ + "' row " + std::to_string(line_no_) +
                                       ": malformed number '" + cell + "'");
    }
    return v;
}

Date CsvReader::date(std::size_t col) const {
    try {
        return Date::parse(field(col));
    } catch (const Error& e) {
        throw Error("corrupt-row",
                    "'" + path_ + "' row " + std::to_string(line_no_) + ": " + e.what());
    }
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::string format_fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace qtmrl
