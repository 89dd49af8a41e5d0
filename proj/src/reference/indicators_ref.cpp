#include "qtmrl/reference/indicators_ref.hpp"

#include <algorithm>
#include <cmath>

namespace qtmrl::reference {

namespace {

Series blank(std::size_t n) { return Series(n, kUndefined); }

// Seeded exponential smoothing evaluated as an explicit weighted sum for
// every index: out[t] = (1-a)^(t-s) * seed + sum_{j=s+1..t} a (1-a)^(t-j) v[j]
// with seed = mean(v[first .. s]), s = first + period - 1. No state is
// carried between indices.
Series smooth_direct(const Series& values, std::size_t first, int period, double alpha) {
    const std::size_t n = values.size();
    Series out = blank(n);
    const std::size_t s = first + static_cast<std::size_t>(period) - 1;
    if (s >= n) return out;
    for (std::size_t t = s; t < n; ++t) {
        double seed = 0.0;
        for (std::size_t j = first; j <= s; ++j) seed += values[j];
        seed /= period;
        double acc = 0.0;
        double w = alpha;
        for (std::size_t j = t; j > s; --j) {
            acc += w * values[j];
            w *= (1.0 - alpha);
        }
        // After the loop w = alpha * (1-alpha)^(t-s); the seed weight is w/alpha.
        acc += (alpha > 0.0 ? w / alpha : 0.0) * seed;
        out[t] = t == s ? seed : acc;
    }
    return out;
}

Series direct_true_range(const AssetSeries& bars) {
    const std::size_t n = bars.bars.size();
    Series tr = blank(n);
    for (std::size_t t = 1; t < n; ++t) {
        const Bar& b = bars.bars[t];
        const double pc = bars.bars[t - 1].close;
        tr[t] = std::max({b.high - b.low, std::abs(b.high - pc), std::abs(b.low - pc)});
    }
    return tr;
}

}  // namespace

Series sma(const Series& close, int period) {
    const std::size_t n = close.size();
    Series out = blank(n);
    for (std::size_t t = static_cast<std::size_t>(period) - 1; t < n; ++t) {
        double sum = 0.0;
        for (std::size_t j = t + 1 - period; j <= t; ++j) sum += close[j];
        out[t] = sum / period;
    }
    return out;
}

Series ema(const Series& close, int period) {
    return smooth_direct(close, 0, period, 2.0 / (period + 1));
}

Series rolling_stddev(const Series& close, int period) {
    const std::size_t n = close.size();
    Series out = blank(n);
    for (std::size_t t = static_cast<std::size_t>(period) - 1; t < n; ++t) {
        double mean = 0.0;
        for (std::size_t j = t + 1 - period; j <= t; ++j) mean += close[j];
        mean /= period;
        double acc = 0.0;
        for (std::size_t j = t + 1 - period; j <= t; ++j) {
            acc += (close[j] - mean) * (close[j] - mean);
        }
        out[t] = std::sqrt(acc / period);
    }
    return out;
}

Series atr(const AssetSeries& bars, int period) {
    return smooth_direct(direct_true_range(bars), 1, period, 1.0 / period);
}

BollingerBands bollinger(const Series& close, int period, double k) {
    BollingerBands bb;
    bb.middle = sma(close, period);
    Series sd = rolling_stddev(close, period);
    bb.upper = blank(close.size());
    bb.lower = blank(close.size());
    for (std::size_t t = 0; t < close.size(); ++t) {
        if (is_defined(bb.middle[t])) {
            bb.upper[t] = bb.middle[t] + k * sd[t];
            bb.lower[t] = bb.middle[t] - k * sd[t];
        }
    }
    return bb;
}

Series rsi(const Series& close, int period) {
    const std::size_t n = close.size();
    Series gains = blank(n), losses = blank(n);
    for (std::size_t t = 1; t < n; ++t) {
        const double d = close[t] - close[t - 1];
        gains[t] = std::max(d, 0.0);
        losses[t] = std::max(-d, 0.0);
    }
    Series avg_gain = smooth_direct(gains, 1, period, 1.0 / period);
    Series avg_loss = smooth_direct(losses, 1, period, 1.0 / period);
    Series out = blank(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (!is_defined(avg_gain[t])) continue;
        const double g = avg_gain[t], l = avg_loss[t];
        if (g == 0.0 && l == 0.0) {
            out[t] = 50.0;
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
    const std::size_t n = close.size();
    MacdResult r;
    Series f = ema(close, fast), s = ema(close, slow);
    r.macd_line = blank(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (is_defined(s[t])) r.macd_line[t] = f[t] - s[t];
    }
    r.signal_line = blank(n);
    const std::size_t first = static_cast<std::size_t>(slow - 1);
    if (n > first) {
        Series segment(r.macd_line.begin() + first, r.macd_line.end());
        Series sig = ema(segment, signal);
        for (std::size_t j = 0; j < sig.size(); ++j) r.signal_line[first + j] = sig[j];
    }
    r.histogram = blank(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (is_defined(r.signal_line[t])) r.histogram[t] = r.macd_line[t] - r.signal_line[t];
    }
    return r;
}

HeikenAshi heiken_ashi(const AssetSeries& bars) {
    const std::size_t n = bars.bars.size();
    HeikenAshi ha;
    ha.open.resize(n);
    ha.high.resize(n);
    ha.low.resize(n);
    ha.close.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const Bar& b = bars.bars[t];
        ha.close[t] = (b.open + b.high + b.low + b.close) / 4.0;
    }
    const double open0 = (bars.bars[0].open + bars.bars[0].close) / 2.0;
    for (std::size_t t = 0; t < n; ++t) {
        // ha_open as a closed-form geometric sum over earlier ha_closes.
        double w = 0.5;
        double acc = 0.0;
        for (std::size_t k = t; k-- > 0;) {
            acc += w * ha.close[k];
            w *= 0.5;
        }
        acc += 2.0 * w * open0;  // after the loop w = 0.5^(t+1)
        ha.open[t] = t == 0 ? open0 : acc;
        ha.high[t] = std::max({bars.bars[t].high, ha.open[t], ha.close[t]});
        ha.low[t] = std::min({bars.bars[t].low, ha.open[t], ha.close[t]});
    }
    return ha;
}

namespace {
Series window_midpoint(const AssetSeries& bars, int period) {
    const std::size_t n = bars.bars.size();
    Series out = blank(n);
    for (std::size_t t = static_cast<std::size_t>(period) - 1; t < n; ++t) {
        double hi = bars.bars[t].high, lo = bars.bars[t].low;
        for (std::size_t j = t + 1 - period; j <= t; ++j) {
            hi = std::max(hi, bars.bars[j].high);
            lo = std::min(lo, bars.bars[j].low);
        }
        out[t] = 0.5 * (hi + lo);
    }
    return out;
}
}  // namespace

Ichimoku ichimoku(const AssetSeries& bars, int p_conv, int p_base, int p_span) {
    Ichimoku out;
    out.tenkan = window_midpoint(bars, p_conv);
    out.kijun = window_midpoint(bars, p_base);
    out.senkou_b = window_midpoint(bars, p_span);
    out.senkou_a = blank(bars.bars.size());
    for (std::size_t t = 0; t < bars.bars.size(); ++t) {
        if (is_defined(out.kijun[t])) out.senkou_a[t] = 0.5 * (out.tenkan[t] + out.kijun[t]);
    }
    return out;
}

SuperTrend supertrend(const AssetSeries& bars, int period, double multiplier) {
    const std::size_t n = bars.bars.size();
    Series a = reference::atr(bars, period);
    SuperTrend st;
    st.line = blank(n);
    st.direction = blank(n);
    const std::size_t first = static_cast<std::size_t>(period);
    if (first >= n) return st;

    double up = 0.5 * (bars.bars[first].high + bars.bars[first].low) + multiplier * a[first];
    double dn = 0.5 * (bars.bars[first].high + bars.bars[first].low) - multiplier * a[first];
    double trend = 1.0;
    st.direction[first] = trend;
    st.line[first] = dn;
    for (std::size_t t = first + 1; t < n; ++t) {
        const double mid = 0.5 * (bars.bars[t].high + bars.bars[t].low);
        const double raw_up = mid + multiplier * a[t];
        const double raw_dn = mid - multiplier * a[t];
        const double prev_close = bars.bars[t - 1].close;
        up = (raw_up < up || prev_close > up) ? raw_up : up;
        dn = (raw_dn > dn || prev_close < dn) ? raw_dn : dn;
        if (bars.bars[t].close > up) trend = 1.0;
        if (bars.bars[t].close < dn) trend = -1.0;
        st.direction[t] = trend;
        st.line[t] = trend > 0 ? dn : up;
    }
    return st;
}

FeatureFrame build_feature_matrix(const MarketFrame& frame,
                                  const std::vector<IndicatorSpec>& specs) {
    std::size_t max_warmup = 0;
    std::size_t feature_count = 5;
    for (const IndicatorSpec& spec : specs) {
        max_warmup = std::max(max_warmup, spec.warmup());
        feature_count += spec.column_count();
    }
    if (frame.length() <= max_warmup) {
        throw Error("short-series", "series too short for the configured warmup");
    }
    const std::size_t n = frame.length();
    const std::size_t n_assets = frame.asset_count();

    FeatureFrame out;
    out.tickers = frame.tickers;
    out.calendar.assign(frame.calendar.begin() + max_warmup, frame.calendar.end());
    out.feature_names = {"open", "high", "low", "close", "volume"};
    for (const IndicatorSpec& spec : specs) {
        for (auto& name : spec.column_names()) out.feature_names.push_back(std::move(name));
    }
    out.values.resize((n - max_warmup) * n_assets * feature_count);

    for (std::size_t i = 0; i < n_assets; ++i) {
        const AssetSeries& bars = frame.series[i];
        Series close(n);
        for (std::size_t t = 0; t < n; ++t) close[t] = bars.bars[t].close;

        std::vector<Series> cols;
        cols.reserve(feature_count);
        Series o(n), h(n), l(n), v(n);
        for (std::size_t t = 0; t < n; ++t) {
            o[t] = bars.bars[t].open;
            h[t] = bars.bars[t].high;
            l[t] = bars.bars[t].low;
            v[t] = bars.bars[t].volume;
        }
        cols.push_back(o);
        cols.push_back(h);
        cols.push_back(l);
        cols.push_back(close);
        cols.push_back(v);
        for (const IndicatorSpec& spec : specs) {
            switch (spec.kind) {
                case IndicatorKind::Sma: cols.push_back(sma(close, spec.period)); break;
                case IndicatorKind::Ema: cols.push_back(ema(close, spec.period)); break;
                case IndicatorKind::Stddev:
                    cols.push_back(rolling_stddev(close, spec.period));
                    break;
                case IndicatorKind::Atr: cols.push_back(reference::atr(bars, spec.period)); break;
                case IndicatorKind::Bollinger: {
                    BollingerBands bb = bollinger(close, spec.period, spec.k);
                    cols.push_back(std::move(bb.middle));
                    cols.push_back(std::move(bb.upper));
                    cols.push_back(std::move(bb.lower));
                    break;
                }
                case IndicatorKind::Rsi: cols.push_back(rsi(close, spec.period)); break;
                case IndicatorKind::Macd: {
                    MacdResult m = macd(close, spec.fast, spec.slow, spec.signal);
                    cols.push_back(std::move(m.macd_line));
                    cols.push_back(std::move(m.signal_line));
                    cols.push_back(std::move(m.histogram));
                    break;
                }
                case IndicatorKind::HeikenAshi: {
                    HeikenAshi ha = reference::heiken_ashi(bars);
                    cols.push_back(std::move(ha.open));
                    cols.push_back(std::move(ha.high));
                    cols.push_back(std::move(ha.low));
                    cols.push_back(std::move(ha.close));
                    break;
                }
                case IndicatorKind::Ichimoku: {
                    Ichimoku ic = reference::ichimoku(bars, spec.p_conv, spec.p_base, spec.p_span);
                    cols.push_back(std::move(ic.tenkan));
                    cols.push_back(std::move(ic.kijun));
                    cols.push_back(std::move(ic.senkou_a));
                    cols.push_back(std::move(ic.senkou_b));
                    break;
                }
                case IndicatorKind::SuperTrend: {
                    SuperTrend st = reference::supertrend(bars, spec.period, spec.multiplier);
                    cols.push_back(std::move(st.line));
                    cols.push_back(std::move(st.direction));
                    break;
                }
            }
        }
        for (std::size_t t = max_warmup; t < n; ++t) {
            for (std::size_t f = 0; f < feature_count; ++f) {
                out.value(t - max_warmup, i, f) = cols[f][t];
            }
        }
    }
    return out;
}

}  // namespace qtmrl::reference
