#include "qtmrl/core.hpp"

#include <cstdio>

namespace qtmrl {

namespace {

bool all_digits(std::string_view s) {
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return !s.empty();
}

}  // namespace

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
        !all_digits(iso.substr(0, 4)) || !all_digits(iso.substr(5, 2)) ||
        !all_digits(iso.substr(8, 2))) {
        throw Error("bad-date", "expected YYYY-MM-DD, got '" + std::string(iso) + "'");
    }
    Date d;
    d.year = (iso[0] - '0') * 1000 + (iso[1] - '0') * 100 + (iso[2] - '0') * 10 + (iso[3] - '0');
    d.month = (iso[5] - '0') * 10 + (iso[6] - '0');
    d.day = (iso[8] - '0') * 10 + (iso[9] - '0');
    if (!d.valid()) {
        throw Error("bad-date", "out-of-range calendar day '" + std::string(iso) + "'");
    }
    return d;
}

bool Date::valid() const {
    return year >= 1 && month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::size_t first_defined(const Series& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (is_defined(s[i])) return i;
    }
    return s.size();
}

}  // namespace qtmrl
