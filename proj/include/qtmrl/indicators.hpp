#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qtmrl/market_data.hpp"

namespace qtmrl {

// All series kernels return an output aligned to the input length with the
// first `warmup` entries NaN. build_feature_matrix() truncates the maximal
// warmup prefix across the configured set so downstream tensors carry no
// undefined values.

/// Trailing-window mean. warmup = period - 1.
Series sma(const Series& close, int period);

/// Exponential moving average, alpha = 2/(period+1), seeded with the SMA of
/// the first `period` values. warmup = period - 1.
Series ema(const Series& close, int period);

/// Population standard deviation over the trailing window. warmup = period - 1.
Series rolling_stddev(const Series& close, int period);

/// Wilder-smoothed average true range. True range needs the previous close,
/// so TR starts at index 1 and the seed (mean of the first `period` TRs)
/// lands at index `period`. warmup = period.
Series atr(const AssetSeries& bars, int period);

struct BollingerBands {
    Series middle, upper, lower;
};
/// middle = sma(period), upper/lower = middle +/- k * rolling_stddev(period).
BollingerBands bollinger(const Series& close, int period, double k);

/// Wilder-smoothed relative strength index in [0, 100]. Total on degenerate
/// windows: no losses -> 100, no gains -> 0, neither -> 50. warmup = period.
Series rsi(const Series& close, int period);

struct MacdResult {
    Series macd_line, signal_line, histogram;
};
/// macd_line = ema(fast) - ema(slow); signal_line = ema(signal) of the macd
/// line; histogram = macd_line - signal_line. warmup = slow - 1 + signal - 1.
MacdResult macd(const Series& close, int fast, int slow, int signal);

struct HeikenAshi {
    Series open, high, low, close;
};
/// Smoothed candles: ha_close = (O+H+L+C)/4, ha_open recursion seeded with
/// (O[0]+C[0])/2. warmup = 0.
HeikenAshi heiken_ashi(const AssetSeries& bars);

struct Ichimoku {
    Series tenkan, kijun, senkou_a, senkou_b;
};
/// Midpoint lines over p_conv/p_base/p_span windows. Spans are stored at
/// computation time t, not displaced forward, so index t never encodes
/// information from later bars. warmup = p_span - 1.
Ichimoku ichimoku(const AssetSeries& bars, int p_conv = 9, int p_base = 26, int p_span = 52);

struct SuperTrend {
    Series line;
    Series direction;  // +1 uptrend, -1 downtrend
};
/// ATR trailing bands: basic bands at (H+L)/2 +/- multiplier*ATR(period),
/// ratcheted (a band carries forward when the new one does not tighten and
/// close has not crossed), direction flips when close crosses the active
/// band. warmup = period.
SuperTrend supertrend(const AssetSeries& bars, int period = 10, double multiplier = 3.0);

enum class IndicatorFamily { Trend, Volatility, Momentum };

enum class IndicatorKind {
    Sma, Ema, Stddev, Atr, Bollinger, Rsi, Macd, HeikenAshi, Ichimoku, SuperTrend,
};

/// One configured indicator: kind + parameters. Warmup and output column
/// names are deterministic functions of the parameters.
struct IndicatorSpec {
    IndicatorKind kind;
    int period = 0;          // sma/ema/stddev/atr/bollinger/rsi/supertrend
    int fast = 12, slow = 26, signal = 9;       // macd
    int p_conv = 9, p_base = 26, p_span = 52;   // ichimoku
    double k = 2.0;          // bollinger width
    double multiplier = 3.0; // supertrend width

    IndicatorFamily family() const;
    std::string name() const;       // e.g. "RSI_14", "macd_12_26_9"
    std::size_t warmup() const;
    std::size_t column_count() const;
    std::vector<std::string> column_names() const;

    /// Throws Error("bad-config") on out-of-range parameters.
    void validate() const;
};

/// The ten-indicator set used by the full feature profile: SMA_50, EMA_26,
/// ATR_10, RSI_14, STDDEV_20, BBands(20,2), MACD(12,26,9), Heiken Ashi,
/// Ichimoku(9,26,52), SuperTrend(10,3). 21 columns on top of OHLCV.
std::vector<IndicatorSpec> default_indicator_set();

/// Per-asset, per-time feature vectors. values is time-major then asset
/// then feature: value(t, i, f) = values[(t * assets + i) * features + f].
struct FeatureFrame {
    std::vector<std::string> tickers;
    std::vector<Date> calendar;
    std::vector<std::string> feature_names;
    std::vector<double> values;

    std::size_t asset_count() const { return tickers.size(); }
    std::size_t length() const { return calendar.size(); }
    std::size_t feature_count() const { return feature_names.size(); }

    double value(std::size_t t, std::size_t asset, std::size_t feature) const {
        return values[(t * asset_count() + asset) * feature_count() + feature];
    }
    double& value(std::size_t t, std::size_t asset, std::size_t feature) {
        return values[(t * asset_count() + asset) * feature_count() + feature];
    }

    FeatureFrame slice(std::size_t begin, std::size_t end) const;
    std::pair<FeatureFrame, FeatureFrame> split_by_date(const Date& train_end,
                                                        const Date& test_from,
                                                        const Date& test_to) const;
};

/// OHLCV columns followed by every indicator's outputs in spec order, with
/// the global maximum warmup prefix truncated. The frame must be cleaned
/// first. Assets and specs are computed in parallel; results do not depend
/// on the thread count.
FeatureFrame build_feature_matrix(const MarketFrame& frame,
                                  const std::vector<IndicatorSpec>& specs);

/// Per-feature mean and population standard deviation pooled over every
/// (time, asset) cell. Compute on the training split only.
NormStats compute_norm_stats(const FeatureFrame& frame);

/// (v - mean) / stddev per feature; constant features (stddev 0) map to 0.
/// Throws Error("dim-mismatch") when stats do not match the feature count.
FeatureFrame zscore(const FeatureFrame& frame, const NormStats& stats);

}  // namespace qtmrl
