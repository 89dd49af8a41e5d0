#include "qtmrl/market_data.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "qtmrl/csv.hpp"

namespace qtmrl {

std::size_t MarketFrame::ticker_index(const std::string& ticker) const {
    for (std::size_t i = 0; i < tickers.size(); ++i) {
        if (tickers[i] == ticker) return i;
    }
    throw Error("unknown-ticker", "ticker '" + ticker + "' not in frame");
}

MarketFrame MarketFrame::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > calendar.size()) {
        throw Error("empty-range", "slice [" + std::to_string(begin) + ", " +
                                       std::to_string(end) + ") out of bounds");
    }
    MarketFrame out;
    out.tickers = tickers;
    out.calendar.assign(calendar.begin() + begin, calendar.begin() + end);
    out.series.reserve(series.size());
    for (const auto& s : series) {
        AssetSeries cut;
        cut.ticker = s.ticker;
        cut.bars.assign(s.bars.begin() + begin, s.bars.begin() + end);
        out.series.push_back(std::move(cut));
    }
    return out;
}

MarketFrame MarketFrame::slice_dates(const Date& from, const Date& to) const {
    auto lo = std::lower_bound(calendar.begin(), calendar.end(), from);
    auto hi = std::upper_bound(calendar.begin(), calendar.end(), to);
    if (lo >= hi) {
        throw Error("empty-range", "no rows between " + from.to_string() + " and " + to.to_string());
    }
    return slice(static_cast<std::size_t>(lo - calendar.begin()),
                 static_cast<std::size_t>(hi - calendar.begin()));
}

MarketFrame load_ohlcv(const std::string& path, const std::vector<std::string>& tickers,
                       const Date& from, const Date& to) {
    if (tickers.empty()) throw Error("bad-config", "no tickers requested");
    if (to < from) {
        throw Error("empty-range",
                    "date range [" + from.to_string() + ", " + to.to_string() + "] is empty");
    }

    CsvReader csv(path);
    const std::size_t c_date = csv.column("date");
    const std::size_t c_ticker = csv.column("ticker");
    const std::size_t c_open = csv.column("open");
    const std::size_t c_high = csv.column("high");
    const std::size_t c_low = csv.column("low");
    const std::size_t c_close = csv.column("close");
    const std::size_t c_volume = csv.column("volume");

    std::map<std::string, std::size_t> wanted;
    for (std::size_t i = 0; i < tickers.size(); ++i) wanted[tickers[i]] = i;

    // Rows per ticker keyed by date; the map keeps each series sorted and
    // surfaces duplicate (ticker, date) rows as corrupt input.
    std::vector<std::map<Date, Bar>> rows(tickers.size());
    std::set<std::string> seen;

    while (csv.next_row()) {
        const std::string& ticker = csv.field(c_ticker);
        seen.insert(ticker);
        auto it = wanted.find(ticker);
        if (it == wanted.end()) continue;
        Date date = csv.date(c_date);
        if (date < from || to < date) continue;

        Bar bar;
        bar.date = date;
        bar.open = csv.number(c_open);
        bar.high = csv.number(c_high);
        bar.low = csv.number(c_low);
        bar.close = csv.number(c_close);
        bar.volume = csv.number(c_volume);
        auto [pos, inserted] = rows[it->second].emplace(date, bar);
        if (!inserted) {
            throw Error("corrupt-row", "'" + path + "' row " + std::to_string(csv.line_number()) +
                                           ": duplicate (" + ticker + ", " + date.to_string() + ")");
        }
    }

    for (const auto& t : tickers) {
        if (!seen.count(t)) {
            throw Error("unknown-ticker", "ticker '" + t + "' not present in '" + path + "'");
        }
    }

    // Union calendar across the requested assets.
    std::set<Date> dates;
    for (const auto& m : rows) {
        for (const auto& [date, bar] : m) dates.insert(date);
    }
    if (dates.empty()) {
        throw Error("empty-range", "no rows for the requested tickers between " +
                                       from.to_string() + " and " + to.to_string());
    }

    MarketFrame frame;
    frame.tickers = tickers;
    frame.calendar.assign(dates.begin(), dates.end());
    frame.series.resize(tickers.size());
    for (std::size_t i = 0; i < tickers.size(); ++i) {
        frame.series[i].ticker = tickers[i];
        frame.series[i].bars.reserve(frame.calendar.size());
        for (const Date& d : frame.calendar) {
            auto it = rows[i].find(d);
            if (it != rows[i].end()) {
                frame.series[i].bars.push_back(it->second);
            } else {
                Bar missing;
                missing.date = d;
                frame.series[i].bars.push_back(missing);
            }
        }
    }
    return frame;
}

MarketFrame clean(const MarketFrame& frame) {
    const std::size_t n = frame.asset_count();
    const std::size_t len = frame.length();

    // Leading prefix where some asset has not traded yet: dropped uniformly
    // so the frame stays rectangular without back-filling.
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t first = len;
        for (std::size_t t = 0; t < len; ++t) {
            if (is_defined(frame.series[i].bars[t].close)) {
                first = t;
                break;
            }
        }
        if (first == len) {
            throw Error("empty-series",
                        "asset '" + frame.series[i].ticker + "' has no observations");
        }
        start = std::max(start, first);
    }

    MarketFrame out = frame.slice(start, len);
    for (std::size_t i = 0; i < n; ++i) {
        Bar last;  // last fully-observed values per field
        bool have_last = false;
        for (auto& bar : out.series[i].bars) {
            if (!is_defined(bar.close) && have_last) bar.close = last.close;
            if (!is_defined(bar.open) && have_last) bar.open = last.open;
            if (!is_defined(bar.high) && have_last) bar.high = last.high;
            if (!is_defined(bar.low) && have_last) bar.low = last.low;
            if (!is_defined(bar.volume)) bar.volume = 0.0;

            if (!is_defined(bar.close) || !is_defined(bar.open) || !is_defined(bar.high) ||
                !is_defined(bar.low)) {
                // Partially-missing first row: complete it from close.
                double anchor = is_defined(bar.close) ? bar.close
                               : is_defined(bar.open) ? bar.open
                               : is_defined(bar.high) ? bar.high
                                                      : bar.low;
                if (!is_defined(bar.close)) bar.close = anchor;
                if (!is_defined(bar.open)) bar.open = anchor;
                if (!is_defined(bar.high)) bar.high = anchor;
                if (!is_defined(bar.low)) bar.low = anchor;
            }
            if (bar.close <= 0.0 || bar.open <= 0.0) {
                throw Error("corrupt-row", "asset '" + out.series[i].ticker +
                                               "' has a nonpositive price on " +
                                               bar.date.to_string());
            }
            // Filling fields independently can leave the envelope violated.
            bar.high = std::max({bar.high, bar.open, bar.close});
            bar.low = std::min({bar.low, bar.open, bar.close});
            if (bar.volume < 0.0) bar.volume = 0.0;

            last = bar;
            have_last = true;
        }
    }
    return out;
}

std::pair<MarketFrame, MarketFrame> split_by_date(const MarketFrame& frame, const Date& train_end,
                                                  const Date& test_from, const Date& test_to) {
    if (!(train_end < test_from)) {
        throw Error("range-overlap", "train end " + train_end.to_string() +
                                         " does not precede test start " + test_from.to_string());
    }
    const auto& cal = frame.calendar;
    auto train_hi = std::upper_bound(cal.begin(), cal.end(), train_end);
    if (train_hi == cal.begin()) {
        throw Error("empty-range", "no training rows on or before " + train_end.to_string());
    }
    auto test_lo = std::lower_bound(cal.begin(), cal.end(), test_from);
    auto test_hi = std::upper_bound(cal.begin(), cal.end(), test_to);
    if (test_lo >= test_hi) {
        throw Error("empty-range", "no test rows between " + test_from.to_string() + " and " +
                                       test_to.to_string());
    }
    MarketFrame train = frame.slice(0, static_cast<std::size_t>(train_hi - cal.begin()));
    MarketFrame test = frame.slice(static_cast<std::size_t>(test_lo - cal.begin()),
                                   static_cast<std::size_t>(test_hi - cal.begin()));
    return {std::move(train), std::move(test)};
}

}  // namespace qtmrl
