#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qtmrl {

/// Library-wide error with a stable machine-parsable class slug
/// (e.g. "missing-file", "unknown-ticker"). The CLI prints these as
/// `error[<class>]: <message>` and exits nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string error_class, const std::string& message)
        : std::runtime_error(message), class_(std::move(error_class)) {}

    const std::string& error_class() const { return class_; }

private:
    std::string class_;
};

/// A calendar day. Comparison follows chronological order.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;

    static Date parse(std::string_view iso);  // "YYYY-MM-DD", throws Error("bad-date")
    std::string to_string() const;
    bool valid() const;
};

/// Time series of doubles. Entries before an indicator's warmup are NaN.
using Series = std::vector<double>;

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

inline bool is_defined(double v) { return !std::isnan(v); }

/// Index of the first defined entry, or s.size() when all entries are NaN.
std::size_t first_defined(const Series& s);

}  // namespace qtmrl
