#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtmrl/indicators.hpp"
#include "qtmrl/market_data.hpp"

namespace qtmrl {

struct EnvConfig {
    double initial_capital = 10000.0;
    double fee_rate = 0.0005;
    int window = 20;
    double buy_fraction = 0.2;    // of pre-step cash per buy
    double sell_fraction = 0.5;   // of current holdings per sell
    double invalid_penalty = 0.001;
    int episode_length = 252;

    void validate() const;  // Error("bad-config") on out-of-range fields
};

/// Cash plus integer share positions. equity = cash + sum(positions * close)
/// at the current step; cash and positions never go negative.
struct PortfolioState {
    double cash = 0.0;
    std::vector<long long> positions;
    double equity = 0.0;
};

/// Observation: the most recent W normalized feature vectors per asset
/// (oldest first) plus a portfolio snapshot.
struct MarketState {
    std::vector<double> window;  // W x N x F, time-major
    PortfolioState portfolio;
    std::size_t t = 0;
};

/// Joint action over N assets, integer-coded in [0, 2^N): bit i set means
/// buy asset i, clear means sell.
struct ActionCode {
    std::uint32_t code = 0;
};

enum class TradeOp { Buy, Sell, Hold };

/// Bit decomposition of a joint action. Throws Error("bad-action") when
/// code >= 2^n_assets.
std::vector<TradeOp> decode_action(ActionCode action, std::size_t n_assets);

struct TradeRecord {
    std::size_t t;
    Date date;
    std::string asset;
    TradeOp op;
    long long shares;
    double price;
    double fee;
    double cash_after;
    double equity_after;
};

struct StepInfo {
    std::vector<TradeRecord> trades;
    double fees_paid = 0.0;
    int invalid_actions = 0;
};

struct StepResult {
    MarketState next_state;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

/// The multi-asset trading MDP. Accounting rules:
///
///   - Trades execute at the close of the decision day t. Buys size to
///     floor(buy_fraction * pre-step cash / price) shares; budgets are all
///     taken from the cash held before any trade this step, so buys do not
///     cascade. When cumulative costs would exhaust cash, later buys (in
///     ascending asset index) shrink to what is affordable; a buy that ends
///     at zero shares counts as invalid. Sells size to
///     floor(sell_fraction * position) shares; selling with nothing to
///     sell is a no-op hold, not invalid.
///   - Fees are fee_rate * traded notional, charged on both sides.
///   - After trading, prices advance to t+1 and the reward is the equity
///     change over initial capital minus invalid_penalty per invalid
///     sub-action. done raises when t+1 hits the episode end.
///
/// An instance is single-threaded and stateful; independent instances can
/// run in parallel. `features` may be null for signal-driven strategies
/// that never observe().
class TradingEnv {
public:
    TradingEnv(EnvConfig config, const MarketFrame* prices, const FeatureFrame* features);

    /// Starts an episode at calendar index `start` (needs start >= window-1)
    /// running for at most episode_length steps. The seed is recorded for
    /// run metadata; the environment itself is deterministic.
    MarketState reset(std::size_t start, std::uint64_t seed = 0);

    StepResult step(ActionCode action);
    /// Same accounting with holds allowed; the path rule-based strategies use.
    StepResult step_ops(const std::vector<TradeOp>& ops);

    MarketState observe() const;
    double equity() const;

    bool done() const { return done_; }
    std::size_t current_index() const { return t_; }
    std::size_t episode_end() const { return end_; }
    std::size_t data_length() const { return prices_->length(); }
    const PortfolioState& portfolio() const { return portfolio_; }
    const EnvConfig& config() const { return config_; }
    std::size_t asset_count() const { return prices_->asset_count(); }
    std::uint32_t action_space() const { return 1u << prices_->asset_count(); }
    double close_price(std::size_t asset) const;
    Date current_date() const { return prices_->calendar[t_]; }

    const std::vector<TradeRecord>& trade_log() const { return trade_log_; }
    std::uint64_t seed() const { return seed_; }

private:
    EnvConfig config_;
    const MarketFrame* prices_;
    const FeatureFrame* features_;
    PortfolioState portfolio_;
    std::size_t t_ = 0;
    std::size_t end_ = 0;
    bool done_ = true;
    std::uint64_t seed_ = 0;
    std::vector<TradeRecord> trade_log_;

    double mark_to_market() const;
    void execute(const std::vector<TradeOp>& ops, StepInfo& info);
};

/// Audit CSV: t,date,asset,op,shares,price,fee,cash_after,equity_after.
void write_trade_log(const std::vector<TradeRecord>& log, const std::string& path);

}  // namespace qtmrl
