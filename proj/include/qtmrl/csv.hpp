#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtmrl/core.hpp"

namespace qtmrl {

/// Minimal CSV reader: header row -> column lookup, then row-at-a-time
/// access with 1-based line numbers for error reporting. Unknown extra
/// columns are simply never looked up. No quoting support; the formats
/// handled here are plain numeric tables.
class CsvReader {
public:
    explicit CsvReader(const std::string& path);

    bool has_column(const std::string& name) const;
    /// Throws Error("bad-config") naming the missing column.
    std::size_t column(const std::string& name) const;

    /// Reads the next data row; false at EOF. Blank lines are skipped.
    bool next_row();

    std::size_t line_number() const { return line_no_; }
    std::size_t field_count() const { return fields_.size(); }
    const std::string& field(std::size_t col) const;

    /// Empty cell -> NaN. Malformed numeric -> Error("corrupt-row") naming the row.
    double number(std::size_t col) const;
    Date date(std::size_t col) const;

private:
    std::ifstream in_;
    std::string path_;
    std::size_t line_no_ = 0;
    std::vector<std::string> header_;
    std::map<std::string, std::size_t> columns_;
    std::vector<std::string> fields_;

    void split_line(const std::string& line, std::vector<std::string>& out) const;
};

/// Shortest round-trip decimal representation (std::to_chars). Reloading
/// the printed value yields the identical double.
std::string format_double(double v);

/// Fixed two-decimal formatting for human-facing report tables.
std::string format_fixed2(double v);

}  // namespace qtmrl
