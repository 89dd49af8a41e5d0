#include "qtmrl/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qtmrl {

namespace {

Series undefined_series(std::size_t n) { return Series(n, kUndefined); }

void require(bool cond, const char* what) {
    if (!cond) throw Error("bad-config", what);
}

// (max high + min low) / 2 over the trailing window, via monotone deques.
Series rolling_midpoint(const Series& high, const Series& low, int period) {
    const std::size_t n = high.size();
    Series out = undefined_series(n);
    std::deque<std::size_t> maxq, minq;
    for (std::size_t t = 0; t < n; ++t) {
        while (!maxq.empty() && high[maxq.back()] <= high[t]) maxq.pop_back();
        maxq.push_back(t);
        while (!minq.empty() && low[minq.back()] >= low[t]) minq.pop_back();
        minq.push_back(t);
        const std::size_t lo = t + 1 >= static_cast<std::size_t>(period)
                                   ? t + 1 - static_cast<std::size_t>(period)
                                   : 0;
        while (maxq.front() < lo) maxq.pop_front();
        while (minq.front() < lo) minq.pop_front();
        if (t + 1 >= static_cast<std::size_t>(period)) {
            out[t] = 0.5 * (high[maxq.front()] + low[minq.front()]);
        }
    }
    return out;
}

Series true_range(const AssetSeries& bars) {
    const std::size_t n = bars.bars.size();
    Series tr = undefined_series(n);
    for (std::size_t t = 1; t < n; ++t) {
        const Bar& b = bars.bars[t];
        const double prev_close = bars.bars[t - 1].close;
        tr[t] = std::max({b.high - b.low, std::abs(b.high - prev_close),
                          std::abs(b.low - prev_close)});
    }
    return tr;
}

// Wilder recursion over values defined from `first`: seed at index
// first + period - 1 with the plain mean, then x_t = (x_{t-1}(n-1) + v_t)/n.
Series wilder_smooth(const Series& values, std::size_t first, int period) {
    const std::size_t n = values.size();
    Series out = undefined_series(n);
    const std::size_t seed_at = first + static_cast<std::size_t>(period) - 1;
    if (seed_at >= n) return out;
    double sum = 0.0;
    for (std::size_t t = first; t <= seed_at; ++t) sum += values[t];
    out[seed_at] = sum / period;
    for (std::size_t t = seed_at + 1; t < n; ++t) {
        out[t] = (out[t - 1] * (period - 1) + values[t]) / period;
    }
    return out;
}

}  // namespace

Series sma(const Series& close, int period) {
    require(period >= 1, "sma period must be >= 1");
    if (close.size() < static_cast<std::size_t>(period)) {
        throw Error("short-series", "sma: series shorter than period");
    }
    const std::size_t n = close.size();
    Series out = undefined_series(n);
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        sum += close[t];
        if (t >= static_cast<std::size_t>(period)) sum -= close[t - period];
        if (t + 1 >= static_cast<std::size_t>(period)) out[t] = sum / period;
    }
    return out;
}

Series ema(const Series& close, int period) {
    require(period >= 1, "ema period must be >= 1");
    const std::size_t n = close.size();
    Series out = undefined_series(n);
    if (n < static_cast<std::size_t>(period)) return out;
    const double alpha = 2.0 / (period + 1);
    double seed = 0.0;
    for (int t = 0; t < period; ++t) seed += close[t];
    out[period - 1] = seed / period;
    for (std::size_t t = period; t < n; ++t) {
        out[t] = alpha * close[t] + (1.0 - alpha) * out[t - 1];
    }
    return out;
}

Series rolling_stddev(const Series& close, int period) {
    require(period >= 2, "stddev period must be >= 2");
    const std::size_t n = close.size();
    Series out = undefined_series(n);
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        sum += close[t];
        if (t >= static_cast<std::size_t>(period)) sum -= close[t - period];
        if (t + 1 >= static_cast<std::size_t>(period)) {
            const double mean = sum / period;
            double acc = 0.0;
            for (std::size_t j = t + 1 - period; j <= t; ++j) {
                const double d = close[j] - mean;
                acc += d * d;
            }
            out[t] = std::sqrt(acc / period);  // population
        }
    }
    return out;
}

Series atr(const AssetSeries& bars, int period) {
    require(period >= 1, "atr period must be >= 1");
    return wilder_smooth(true_range(bars), 1, period);
}

BollingerBands bollinger(const Series& close, int period, double k) {
    require(period >= 2, "bollinger period must be >= 2");
    require(k > 0.0, "bollinger k must be > 0");
    BollingerBands bb;
    bb.middle = sma(close, period);
    Series sd = rolling_stddev(close, period);
    const std::size_t n = close.size();
    bb.upper = undefined_series(n);
    bb.lower = undefined_series(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (is_defined(bb.middle[t])) {
            bb.upper[t] = bb.middle[t] + k * sd[t];
            bb.lower[t] = bb.middle[t] - k * sd[t];
        }
    }
    return bb;
}

Series rsi(const Series& close, int period) {
    require(period >= 1, "rsi period must be >= 1");
    if (close.size() < static_cast<std::size_t>(period) + 1) {
        throw Error("short-series", "rsi: need at least period + 1 values");
    }
    const std::size_t n = close.size();
    Series gains = undefined_series(n), losses = undefined_series(n);
    for (std::size_t t = 1; t < n; ++t) {
        const double d = close[t] - close[t - 1];
        gains[t] = d > 0.0 ? d : 0.0;
        losses[t] = d < 0.0 ? -d : 0.0;
    }
    Series avg_gain = wilder_smooth(gains, 1, period);
    Series avg_loss = wilder_smooth(losses, 1, period);
    Series out = undefined_series(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (!is_defined(avg_gain[t])) continue;
        const double g = avg_gain[t], l = avg_loss[t];
        if (g == 0.0 && l == 0.0) {
            out[t] = 50.0;  // no movement either way
        } else if (l == 0.0) {
            out[t] = 100.0;
        } else if (g == 0.0) {
            out[t] = 0.0;
        } else {
            out[t] = 100.0 - 100.0 / (1.0 + g / l);
        }
    }
    return out;
}

MacdResult macd(const Series& close, int fast, int slow, int signal) {
    require(fast >= 1 && slow >= 1 && signal >= 1, "macd periods must be >= 1");
    if (fast >= slow) throw Error("bad-config", "macd fast period must be < slow period");
    const std::size_t n = close.size();
    MacdResult r;
    Series fast_ema = ema(close, fast);
    Series slow_ema = ema(close, slow);
    r.macd_line = undefined_series(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (is_defined(slow_ema[t])) r.macd_line[t] = fast_ema[t] - slow_ema[t];
    }

    // Signal EMA runs over the defined segment of the macd line.
    r.signal_line = undefined_series(n);
    const std::size_t first = static_cast<std::size_t>(slow - 1);
    if (n > first) {
        Series segment(r.macd_line.begin() + first, r.macd_line.end());
        Series sig = ema(segment, signal);
        for (std::size_t j = 0; j < sig.size(); ++j) r.signal_line[first + j] = sig[j];
    }

    r.histogram = undefined_series(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (is_defined(r.signal_line[t])) r.histogram[t] = r.macd_line[t] - r.signal_line[t];
    }
    return r;
}

HeikenAshi heiken_ashi(const AssetSeries& bars) {
    const std::size_t n = bars.bars.size();
    if (n == 0) throw Error("empty-series", "heiken_ashi: no bars");
    HeikenAshi ha;
    ha.open.resize(n);
    ha.high.resize(n);
    ha.low.resize(n);
    ha.close.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const Bar& b = bars.bars[t];
        ha.close[t] = (b.open + b.high + b.low + b.close) / 4.0;
        ha.open[t] = t == 0 ? (b.open + b.close) / 2.0
                            : (ha.open[t - 1] + ha.close[t - 1]) / 2.0;
        ha.high[t] = std::max({b.high, ha.open[t], ha.close[t]});
        ha.low[t] = std::min({b.low, ha.open[t], ha.close[t]});
    }
    return ha;
}

Ichimoku ichimoku(const AssetSeries& bars, int p_conv, int p_base, int p_span) {
    require(p_conv >= 1 && p_conv < p_base && p_base < p_span,
            "ichimoku periods must satisfy p_conv < p_base < p_span");
    const std::size_t n = bars.bars.size();
    Series high(n), low(n);
    for (std::size_t t = 0; t < n; ++t) {
        high[t] = bars.bars[t].high;
        low[t] = bars.bars[t].low;
    }
    Ichimoku out;
    out.tenkan = rolling_midpoint(high, low, p_conv);
    out.kijun = rolling_midpoint(high, low, p_base);
    out.senkou_b = rolling_midpoint(high, low, p_span);
    out.senkou_a = undefined_series(n);
    // Stored at computation time t rather than plotted forward, so the span
    // never leaks future bars into features.
    for (std::size_t t = 0; t < n; ++t) {
        if (is_defined(out.kijun[t])) out.senkou_a[t] = 0.5 * (out.tenkan[t] + out.kijun[t]);
    }
    return out;
}

SuperTrend supertrend(const AssetSeries& bars, int period, double multiplier) {
    require(period >= 1, "supertrend period must be >= 1");
    require(multiplier > 0.0, "supertrend multiplier must be > 0");
    const std::size_t n = bars.bars.size();
    Series a = atr(bars, period);
    SuperTrend st;
    st.line = undefined_series(n);
    st.direction = undefined_series(n);
    const std::size_t first = static_cast<std::size_t>(period);
    if (first >= n) return st;

    auto mid = [&](std::size_t t) { return 0.5 * (bars.bars[t].high + bars.bars[t].low); };
    double final_upper = mid(first) + multiplier * a[first];
    double final_lower = mid(first) - multiplier * a[first];
    double dir = 1.0;
    st.direction[first] = dir;
    st.line[first] = dir > 0 ? final_lower : final_upper;

    for (std::size_t t = first + 1; t < n; ++t) {
        const double basic_upper = mid(t) + multiplier * a[t];
        const double basic_lower = mid(t) - multiplier * a[t];
        const double prev_close = bars.bars[t - 1].close;
        // Ratchet: a band only moves toward price unless price closed
        // through it on the previous bar.
        if (basic_upper < final_upper || prev_close > final_upper) final_upper = basic_upper;
        if (basic_lower > final_lower || prev_close < final_lower) final_lower = basic_lower;

        const double close = bars.bars[t].close;
        if (close > final_upper) {
            dir = 1.0;
        } else if (close < final_lower) {
            dir = -1.0;
        }
        st.direction[t] = dir;
        st.line[t] = dir > 0 ? final_lower : final_upper;
    }
    return st;
}

IndicatorFamily IndicatorSpec::family() const {
    switch (kind) {
        case IndicatorKind::Sma:
        case IndicatorKind::Ema:
        case IndicatorKind::HeikenAshi:
        case IndicatorKind::Ichimoku:
            return IndicatorFamily::Trend;
        case IndicatorKind::Stddev:
        case IndicatorKind::Atr:
        case IndicatorKind::Bollinger:
            return IndicatorFamily::Volatility;
        case IndicatorKind::Rsi:
        case IndicatorKind::Macd:
        case IndicatorKind::SuperTrend:
            return IndicatorFamily::Momentum;
    }
    throw Error("bad-config", "unknown indicator kind");
}

namespace {
std::string trim_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}
}  // namespace

std::string IndicatorSpec::name() const {
    switch (kind) {
        case IndicatorKind::Sma: return "SMA_" + std::to_string(period);
        case IndicatorKind::Ema: return "EMA_" + std::to_string(period);
        case IndicatorKind::Stddev: return "STDDEV_" + std::to_string(period);
        case IndicatorKind::Atr: return "ATR_" + std::to_string(period);
        case IndicatorKind::Bollinger:
            return "BBANDS_" + std::to_string(period) + "_" + trim_number(k);
        case IndicatorKind::Rsi: return "RSI_" + std::to_string(period);
        case IndicatorKind::Macd:
            return "macd_" + std::to_string(fast) + "_" + std::to_string(slow) + "_" +
                   std::to_string(signal);
        case IndicatorKind::HeikenAshi: return "HA";
        case IndicatorKind::Ichimoku:
            return "ICHIMOKU_" + std::to_string(p_conv) + "_" + std::to_string(p_base) + "_" +
                   std::to_string(p_span);
        case IndicatorKind::SuperTrend:
            return "SUPERTREND_" + std::to_string(period) + "_" + trim_number(multiplier);
    }
    throw Error("bad-config", "unknown indicator kind");
}

std::size_t IndicatorSpec::warmup() const {
    switch (kind) {
        case IndicatorKind::Sma:
        case IndicatorKind::Ema:
        case IndicatorKind::Stddev:
        case IndicatorKind::Bollinger:
            return static_cast<std::size_t>(period - 1);
        case IndicatorKind::Atr:
        case IndicatorKind::Rsi:
        case IndicatorKind::SuperTrend:
            return static_cast<std::size_t>(period);
        case IndicatorKind::Macd:
            return static_cast<std::size_t>(slow - 1 + signal - 1);
        case IndicatorKind::HeikenAshi:
            return 0;
        case IndicatorKind::Ichimoku:
            return static_cast<std::size_t>(p_span - 1);
    }
    throw Error("bad-config", "unknown indicator kind");
}

std::size_t IndicatorSpec::column_count() const {
    switch (kind) {
        case IndicatorKind::Sma:
        case IndicatorKind::Ema:
        case IndicatorKind::Stddev:
        case IndicatorKind::Atr:
        case IndicatorKind::Rsi:
            return 1;
        case IndicatorKind::Bollinger:
        case IndicatorKind::Macd:
            return 3;
        case IndicatorKind::HeikenAshi:
        case IndicatorKind::Ichimoku:
            return 4;
        case IndicatorKind::SuperTrend:
            return 2;
    }
    throw Error("bad-config", "unknown indicator kind");
}

std::vector<std::string> IndicatorSpec::column_names() const {
    const std::string base = name();
    switch (kind) {
        case IndicatorKind::Bollinger:
            return {base + "_MID", base + "_UP", base + "_LOW"};
        case IndicatorKind::Macd:
            return {base, base + "_signal", base + "_hist"};
        case IndicatorKind::HeikenAshi:
            return {"HA_open", "HA_high", "HA_low", "HA_close"};
        case IndicatorKind::Ichimoku:
            return {"TENKAN_" + std::to_string(p_conv), "KIJUN_" + std::to_string(p_base),
                    "SENKOU_A", "SENKOU_B_" + std::to_string(p_span)};
        case IndicatorKind::SuperTrend:
            return {base, base + "_dir"};
        default:
            return {base};
    }
}

void IndicatorSpec::validate() const {
    switch (kind) {
        case IndicatorKind::Sma:
        case IndicatorKind::Ema:
        case IndicatorKind::Atr:
        case IndicatorKind::Rsi:
            require(period >= 1, "indicator period must be >= 1");
            break;
        case IndicatorKind::Stddev:
            require(period >= 2, "stddev period must be >= 2");
            break;
        case IndicatorKind::Bollinger:
            require(period >= 2 && k > 0.0, "bollinger needs period >= 2 and k > 0");
            break;
        case IndicatorKind::Macd:
            require(fast >= 1 && signal >= 1 && fast < slow, "macd needs 1 <= fast < slow");
            break;
        case IndicatorKind::HeikenAshi:
            break;
        case IndicatorKind::Ichimoku:
            require(p_conv >= 1 && p_conv < p_base && p_base < p_span,
                    "ichimoku needs p_conv < p_base < p_span");
            break;
        case IndicatorKind::SuperTrend:
            require(period >= 1 && multiplier > 0.0,
                    "supertrend needs period >= 1 and multiplier > 0");
            break;
    }
}

std::vector<IndicatorSpec> default_indicator_set() {
    std::vector<IndicatorSpec> specs;
    specs.push_back({.kind = IndicatorKind::Sma, .period = 50});
    specs.push_back({.kind = IndicatorKind::Ema, .period = 26});
    specs.push_back({.kind = IndicatorKind::Atr, .period = 10});
    specs.push_back({.kind = IndicatorKind::Rsi, .period = 14});
    specs.push_back({.kind = IndicatorKind::Stddev, .period = 20});
    specs.push_back({.kind = IndicatorKind::Bollinger, .period = 20, .k = 2.0});
    specs.push_back({.kind = IndicatorKind::Macd, .fast = 12, .slow = 26, .signal = 9});
    specs.push_back({.kind = IndicatorKind::HeikenAshi});
    specs.push_back({.kind = IndicatorKind::Ichimoku, .p_conv = 9, .p_base = 26, .p_span = 52});
    specs.push_back({.kind = IndicatorKind::SuperTrend, .period = 10, .multiplier = 3.0});
    return specs;
}

FeatureFrame FeatureFrame::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > length()) {
        throw Error("empty-range", "feature slice out of bounds");
    }
    FeatureFrame out;
    out.tickers = tickers;
    out.feature_names = feature_names;
    out.calendar.assign(calendar.begin() + begin, calendar.begin() + end);
    const std::size_t stride = asset_count() * feature_count();
    out.values.assign(values.begin() + begin * stride, values.begin() + end * stride);
    return out;
}

std::pair<FeatureFrame, FeatureFrame> FeatureFrame::split_by_date(const Date& train_end,
                                                                  const Date& test_from,
                                                                  const Date& test_to) const {
    if (!(train_end < test_from)) {
        throw Error("range-overlap", "train end " + train_end.to_string() +
                                         " does not precede test start " + test_from.to_string());
    }
    auto train_hi = std::upper_bound(calendar.begin(), calendar.end(), train_end);
    auto test_lo = std::lower_bound(calendar.begin(), calendar.end(), test_from);
    auto test_hi = std::upper_bound(calendar.begin(), calendar.end(), test_to);
    if (train_hi == calendar.begin()) {
        throw Error("empty-range", "no training rows on or before " + train_end.to_string());
    }
    if (test_lo >= test_hi) {
        throw Error("empty-range", "no test rows between " + test_from.to_string() + " and " +
                                       test_to.to_string());
    }
    return {slice(0, static_cast<std::size_t>(train_hi - calendar.begin())),
            slice(static_cast<std::size_t>(test_lo - calendar.begin()),
                  static_cast<std::size_t>(test_hi - calendar.begin()))};
}

namespace {

// Full-length feature columns for one asset, in layout order. Each entry in
// `out` must have room for frame.length() values.
void compute_asset_columns(const MarketFrame& frame, std::size_t asset,
                           const std::vector<IndicatorSpec>& specs,
                           std::vector<Series>& out) {
    const AssetSeries& bars = frame.series[asset];
    const std::size_t n = frame.length();
    Series close(n);
    for (std::size_t t = 0; t < n; ++t) close[t] = bars.bars[t].close;

    std::size_t col = 0;
    for (std::size_t t = 0; t < n; ++t) {
        out[col + 0][t] = bars.bars[t].open;
        out[col + 1][t] = bars.bars[t].high;
        out[col + 2][t] = bars.bars[t].low;
        out[col + 3][t] = bars.bars[t].close;
        out[col + 4][t] = bars.bars[t].volume;
    }
    col += 5;

    for (const IndicatorSpec& spec : specs) {
        switch (spec.kind) {
            case IndicatorKind::Sma:
                out[col++] = sma(close, spec.period);
                break;
            case IndicatorKind::Ema:
                out[col++] = ema(close, spec.period);
                break;
            case IndicatorKind::Stddev:
                out[col++] = rolling_stddev(close, spec.period);
                break;
            case IndicatorKind::Atr:
                out[col++] = atr(bars, spec.period);
                break;
            case IndicatorKind::Bollinger: {
                BollingerBands bb = bollinger(close, spec.period, spec.k);
                out[col++] = std::move(bb.middle);
                out[col++] = std::move(bb.upper);
                out[col++] = std::move(bb.lower);
                break;
            }
            case IndicatorKind::Rsi:
                out[col++] = rsi(close, spec.period);
                break;
            case IndicatorKind::Macd: {
                MacdResult m = macd(close, spec.fast, spec.slow, spec.signal);
                out[col++] = std::move(m.macd_line);
                out[col++] = std::move(m.signal_line);
                out[col++] = std::move(m.histogram);
                break;
            }
            case IndicatorKind::HeikenAshi: {
                HeikenAshi ha = heiken_ashi(bars);
                out[col++] = std::move(ha.open);
                out[col++] = std::move(ha.high);
                out[col++] = std::move(ha.low);
                out[col++] = std::move(ha.close);
                break;
            }
            case IndicatorKind::Ichimoku: {
                Ichimoku ic = ichimoku(bars, spec.p_conv, spec.p_base, spec.p_span);
                out[col++] = std::move(ic.tenkan);
                out[col++] = std::move(ic.kijun);
                out[col++] = std::move(ic.senkou_a);
                out[col++] = std::move(ic.senkou_b);
                break;
            }
            case IndicatorKind::SuperTrend: {
                SuperTrend st = supertrend(bars, spec.period, spec.multiplier);
                out[col++] = std::move(st.line);
                out[col++] = std::move(st.direction);
                break;
            }
        }
    }
}

}  // namespace

FeatureFrame build_feature_matrix(const MarketFrame& frame,
                                  const std::vector<IndicatorSpec>& specs) {
    if (frame.asset_count() == 0 || frame.length() == 0) {
        throw Error("empty-series", "cannot build features over an empty frame");
    }
    std::size_t max_warmup = 0;
    std::size_t feature_count = 5;
    for (const IndicatorSpec& spec : specs) {
        spec.validate();
        max_warmup = std::max(max_warmup, spec.warmup());
        feature_count += spec.column_count();
    }
    if (frame.length() <= max_warmup) {
        throw Error("short-series", "series length " + std::to_string(frame.length()) +
                                        " does not cover the maximal warmup of " +
                                        std::to_string(max_warmup));
    }

    const std::size_t n_assets = frame.asset_count();
    const std::size_t n = frame.length();
    std::vector<std::vector<Series>> columns(n_assets);
    for (auto& cols : columns) cols.assign(feature_count, Series(n, kUndefined));

    // Assets are independent; results are identical for any thread count.
    const long asset_total = static_cast<long>(n_assets);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long i = 0; i < asset_total; ++i) {
        compute_asset_columns(frame, static_cast<std::size_t>(i), specs, columns[i]);
    }

    FeatureFrame out;
    out.tickers = frame.tickers;
    out.calendar.assign(frame.calendar.begin() + max_warmup, frame.calendar.end());
    out.feature_names = {"open", "high", "low", "close", "volume"};
    for (const IndicatorSpec& spec : specs) {
        for (auto& name : spec.column_names()) out.feature_names.push_back(std::move(name));
    }
    const std::size_t rows = n - max_warmup;
    out.values.resize(rows * n_assets * feature_count);
    for (std::size_t t = 0; t < rows; ++t) {
        for (std::size_t i = 0; i < n_assets; ++i) {
            for (std::size_t f = 0; f < feature_count; ++f) {
                const double v = columns[i][f][t + max_warmup];
                if (!is_defined(v)) {
                    throw Error("short-series", "undefined feature value survived warmup "
                                                "truncation (feature " +
                                                    out.feature_names[f] + ")");
                }
                out.value(t, i, f) = v;
            }
        }
    }
    return out;
}

NormStats compute_norm_stats(const FeatureFrame& frame) {
    const std::size_t F = frame.feature_count();
    const std::size_t cells = frame.length() * frame.asset_count();
    if (cells == 0) throw Error("empty-series", "no rows to compute normalization stats");
    NormStats stats;
    stats.mean.assign(F, 0.0);
    stats.stddev.assign(F, 0.0);
    for (std::size_t f = 0; f < F; ++f) {
        double sum = 0.0;
        for (std::size_t t = 0; t < frame.length(); ++t) {
            for (std::size_t i = 0; i < frame.asset_count(); ++i) {
                sum += frame.value(t, i, f);
            }
        }
        const double mean = sum / static_cast<double>(cells);
        double acc = 0.0;
        for (std::size_t t = 0; t < frame.length(); ++t) {
            for (std::size_t i = 0; i < frame.asset_count(); ++i) {
                const double d = frame.value(t, i, f) - mean;
                acc += d * d;
            }
        }
        stats.mean[f] = mean;
        stats.stddev[f] = std::sqrt(acc / static_cast<double>(cells));
    }
    return stats;
}

FeatureFrame zscore(const FeatureFrame& frame, const NormStats& stats) {
    if (stats.size() != frame.feature_count()) {
        throw Error("dim-mismatch", "normalization stats cover " + std::to_string(stats.size()) +
                                        " features, frame has " +
                                        std::to_string(frame.feature_count()));
    }
    FeatureFrame out = frame;
    for (std::size_t t = 0; t < out.length(); ++t) {
        for (std::size_t i = 0; i < out.asset_count(); ++i) {
            for (std::size_t f = 0; f < out.feature_count(); ++f) {
                double& v = out.value(t, i, f);
                v = stats.is_constant(f) ? 0.0 : (v - stats.mean[f]) / stats.stddev[f];
            }
        }
    }
    return out;
}

}  // namespace qtmrl
