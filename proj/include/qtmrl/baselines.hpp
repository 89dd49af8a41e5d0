#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qtmrl/market_data.hpp"
#include "qtmrl/trading_env.hpp"

namespace qtmrl {

/// Per-day, per-asset decisions, t-major. TradeOp::Hold means no trade.
struct SignalMatrix {
    std::size_t days = 0;
    std::size_t assets = 0;
    std::vector<TradeOp> ops;

    TradeOp at(std::size_t t, std::size_t asset) const { return ops[t * assets + asset]; }
    TradeOp& at(std::size_t t, std::size_t asset) { return ops[t * assets + asset]; }
};

struct RandomStrategyProbs {
    double buy = 0.2;
    double sell = 0.2;
    double hold = 0.6;
};

/// I.i.d. per-asset, per-day draws from one seeded generator (t-major order,
/// so signals do not depend on how accounts are later processed).
SignalMatrix random_signals(std::size_t days, std::size_t assets,
                            const RandomStrategyProbs& probs, std::uint64_t seed);

/// Crossover events against SMA_T: buy when close crosses above, sell when
/// it crosses below, hold otherwise. Entries before index T are Hold.
std::vector<TradeOp> ma_crossover(const Series& close, int period);

/// First trading day of Jan/Apr/Jul/Oct plus the final trading day.
std::vector<std::size_t> rebalance_indices(const std::vector<Date>& calendar);

/// AR(p) on first differences, ordinary least squares. coefficients[j]
/// multiplies the diff lagged j+1 steps.
struct ArModel {
    int p = 5;
    std::vector<double> coefficients;
    double intercept = 0.0;
    std::vector<double> standard_errors;  // per coefficient, intercept last
    double residual_variance = 0.0;

    /// One-step-ahead diff forecast from the most recent p diffs
    /// (recent_diffs[0] is the latest).
    double predict_diff(const std::vector<double>& recent_diffs) const;
};

/// Fits by least squares on the supplied differenced series. A singular
/// design matrix raises Error("singular-fit") suggesting a longer window;
/// an all-zero diff series (constant prices) yields the zero model.
ArModel fit_ar(const Series& diff_close, int p = 5);

/// Threshold rule on the relative one-step forecast: buy above +threshold,
/// sell below -threshold, hold inside the band.
TradeOp arima_signal(const ArModel& model, const Series& recent_closes,
                     double threshold = 0.005);

struct ArimaStrategyConfig {
    int p = 5;
    double threshold = 0.005;
    int refit_interval = 20;     // trading days between refits
    int fit_window = 504;        // trailing days used per fit
};

/// Per-asset ARIMA(5,1,0)-style signals with a rolling refit schedule.
/// Days before the first possible fit (10*p diffs) are Hold.
SignalMatrix arima_signals(const MarketFrame& frame, const ArimaStrategyConfig& config);

struct BaselineRun {
    std::string strategy;
    // One equity curve per account: per asset for independent strategies,
    // a single "PORTFOLIO" entry for the joint index-tracking account.
    std::vector<std::string> account_names;
    std::vector<std::vector<Date>> dates;
    std::vector<std::vector<double>> equity;
    std::vector<TradeRecord> trades;
};

/// Drives precomputed signals through the shared environment accounting,
/// one independent account per asset, each starting from initial_capital.
/// start_index is the first decision day (signals before it are ignored).
BaselineRun run_rule_based(const std::string& strategy_name, const EnvConfig& config,
                           const MarketFrame& frame, const SignalMatrix& signals,
                           std::size_t start_index);

/// Equal-weight tracking over the whole frame as one joint account: at each
/// rebalance date every asset is bought when flat, otherwise assets above
/// the mean position value are trimmed and assets below it are topped up.
/// All trades route through the shared environment accounting.
BaselineRun run_index_tracking(const EnvConfig& config, const MarketFrame& frame,
                               std::size_t start_index);

}  // namespace qtmrl
