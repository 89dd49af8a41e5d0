#pragma once

#include "qtmrl/indicators.hpp"
#include "qtmrl/market_data.hpp"

// Serial direct-definition implementations of every indicator. These avoid
// the incremental paths of the main kernels entirely: window statistics are
// recomputed from scratch per index and the EMA/Wilder recursions are
// evaluated as explicit weighted sums. They exist for the test suites and
// the benchmark; nothing in the main library calls them.

namespace qtmrl::reference {

Series sma(const Series& close, int period);
Series ema(const Series& close, int period);
Series rolling_stddev(const Series& close, int period);
Series atr(const AssetSeries& bars, int period);
BollingerBands bollinger(const Series& close, int period, double k);
Series rsi(const Series& close, int period);
MacdResult macd(const Series& close, int fast, int slow, int signal);
HeikenAshi heiken_ashi(const AssetSeries& bars);
Ichimoku ichimoku(const AssetSeries& bars, int p_conv = 9, int p_base = 26, int p_span = 52);
SuperTrend supertrend(const AssetSeries& bars, int period = 10, double multiplier = 3.0);

/// Same layout as qtmrl::build_feature_matrix, computed serially from the
/// reference kernels above.
FeatureFrame build_feature_matrix(const MarketFrame& frame,
                                  const std::vector<IndicatorSpec>& specs);

}  // namespace qtmrl::reference
