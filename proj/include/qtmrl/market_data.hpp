#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qtmrl/core.hpp"

namespace qtmrl {

/// One trading day of an asset. Fields may be NaN between load_ohlcv()
/// and clean(); afterwards prices are positive and volume is >= 0, with
/// low <= min(open, close) and high >= max(open, close).
struct Bar {
    Date date;
    double open = kUndefined;
    double high = kUndefined;
    double low = kUndefined;
    double close = kUndefined;
    double volume = kUndefined;
};

struct AssetSeries {
    std::string ticker;
    std::vector<Bar> bars;  // one per calendar entry of the owning frame
};

/// N assets aligned to one shared calendar. All series have exactly
/// calendar.size() bars with matching dates.
struct MarketFrame {
    std::vector<std::string> tickers;
    std::vector<Date> calendar;
    std::vector<AssetSeries> series;

    std::size_t asset_count() const { return series.size(); }
    std::size_t length() const { return calendar.size(); }

    /// Index of a ticker, or throws Error("unknown-ticker").
    std::size_t ticker_index(const std::string& ticker) const;

    /// Rows [begin, end) as a new frame.
    MarketFrame slice(std::size_t begin, std::size_t end) const;

    /// Rows with from <= date <= to. Throws Error("empty-range") when no
    /// rows fall inside.
    MarketFrame slice_dates(const Date& from, const Date& to) const;
};

/// Per-feature normalization statistics, computed on the training split
/// only. Population standard deviation; a zero entry marks a constant
/// feature (those z-score to 0).
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;

    std::size_t size() const { return mean.size(); }
    bool is_constant(std::size_t f) const { return stddev[f] == 0.0; }
};

/// Loads `date,ticker,open,high,low,close,volume` rows, restricted to the
/// requested tickers and date range, sorted chronologically per ticker and
/// aligned to the union calendar (dates an asset did not trade become
/// all-NaN bars for clean() to fill).
MarketFrame load_ohlcv(const std::string& path,
                       const std::vector<std::string>& tickers,
                       const Date& from, const Date& to);

/// Forward-fills missing prices, zeroes missing volumes, clamps high/low
/// to contain open/close, and drops the leading calendar prefix where any
/// asset has no prior observation yet. An asset with no observations at
/// all is an error naming the ticker.
MarketFrame clean(const MarketFrame& frame);

/// (train, test) split: train covers [frame start, train_end], test covers
/// [test_from, test_to]. train_end must precede test_from and both splits
/// must be nonempty.
std::pair<MarketFrame, MarketFrame> split_by_date(const MarketFrame& frame,
                                                  const Date& train_end,
                                                  const Date& test_from,
                                                  const Date& test_to);

}  // namespace qtmrl
