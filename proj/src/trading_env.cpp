#include "qtmrl/trading_env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qtmrl/csv.hpp"

namespace qtmrl {

void EnvConfig::validate() const {
    if (!(initial_capital > 0.0)) throw Error("bad-config", "initial_capital must be > 0");
    if (!(fee_rate >= 0.0)) throw Error("bad-config", "fee_rate must be >= 0");
    if (window < 1) throw Error("bad-config", "window must be >= 1");
    if (!(buy_fraction > 0.0 && buy_fraction <= 1.0)) {
        throw Error("bad-config", "buy_fraction must be in (0, 1]");
    }
    if (!(sell_fraction > 0.0 && sell_fraction <= 1.0)) {
        throw Error("bad-config", "sell_fraction must be in (0, 1]");
    }
    if (!(invalid_penalty >= 0.0)) throw Error("bad-config", "invalid_penalty must be >= 0");
    if (episode_length < 1) throw Error("bad-config", "episode_length must be >= 1");
}

std::vector<TradeOp> decode_action(ActionCode action, std::size_t n_assets) {
    if (n_assets == 0 || n_assets > 31) {
        throw Error("bad-config", "asset count must be in [1, 31] for integer-coded actions");
    }
    if (action.code >= (1u << n_assets)) {
        throw Error("bad-action", "action code " + std::to_string(action.code) +
                                      " out of range for " + std::to_string(n_assets) + " assets");
    }
    std::vector<TradeOp> ops(n_assets);
    for (std::size_t i = 0; i < n_assets; ++i) {
        ops[i] = (action.code >> i) & 1u ? TradeOp::Buy : TradeOp::Sell;
    }
    return ops;
}

TradingEnv::TradingEnv(EnvConfig config, const MarketFrame* prices, const FeatureFrame* features)
    : config_(config), prices_(prices), features_(features) {
    config_.validate();
    if (prices_ == nullptr || prices_->asset_count() == 0) {
        throw Error("bad-config", "environment needs a price frame");
    }
    if (features_ != nullptr) {
        if (features_->length() != prices_->length() ||
            features_->asset_count() != prices_->asset_count()) {
            throw Error("dim-mismatch", "feature and price frames are not aligned");
        }
    }
}

double TradingEnv::close_price(std::size_t asset) const {
    return prices_->series[asset].bars[t_].close;
}

double TradingEnv::mark_to_market() const {
    double value = portfolio_.cash;
    for (std::size_t i = 0; i < prices_->asset_count(); ++i) {
        value += static_cast<double>(portfolio_.positions[i]) * close_price(i);
    }
    return value;
}

MarketState TradingEnv::reset(std::size_t start, std::uint64_t seed) {
    const std::size_t w = static_cast<std::size_t>(config_.window);
    if (start + 1 < w) {
        throw Error("bad-config", "episode start " + std::to_string(start) +
                                      " does not cover a window of " + std::to_string(w));
    }
    if (start + 1 >= prices_->length()) {
        throw Error("bad-config", "episode start leaves no step to take");
    }
    t_ = start;
    end_ = std::min(start + static_cast<std::size_t>(config_.episode_length),
                    prices_->length() - 1);
    done_ = false;
    seed_ = seed;
    portfolio_.cash = config_.initial_capital;
    portfolio_.positions.assign(prices_->asset_count(), 0);
    portfolio_.equity = config_.initial_capital;
    trade_log_.clear();
    return observe();
}

MarketState TradingEnv::observe() const {
    const std::size_t w = static_cast<std::size_t>(config_.window);
    MarketState state;
    state.t = t_;
    state.portfolio = portfolio_;
    state.portfolio.equity = mark_to_market();
    if (features_ != nullptr) {
        const std::size_t n = features_->asset_count();
        const std::size_t f = features_->feature_count();
        state.window.reserve(w * n * f);
        for (std::size_t row = t_ + 1 - w; row <= t_; ++row) {
            const std::size_t offset = row * n * f;
            state.window.insert(state.window.end(), features_->values.begin() + offset,
                                features_->values.begin() + offset + n * f);
        }
    }
    return state;
}

double TradingEnv::equity() const { return mark_to_market(); }

void TradingEnv::execute(const std::vector<TradeOp>& ops, StepInfo& info) {
    // Buy budgets come from the cash held before any trade this step, so the
    // N sub-orders do not cascade; cash exhaustion truncates later buys.
    const double cash_at_decision = portfolio_.cash;
    const Date date = prices_->calendar[t_];
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const double price = close_price(i);
        if (ops[i] == TradeOp::Buy) {
            const double budget = cash_at_decision * config_.buy_fraction;
            long long shares = static_cast<long long>(std::floor(budget / price));
            double cost = 0.0, fee = 0.0;
            while (shares > 0) {
                cost = static_cast<double>(shares) * price;
                fee = cost * config_.fee_rate;
                if (cost + fee <= portfolio_.cash) break;
                --shares;  // cash exhausted by earlier buys: shrink to affordable
            }
            if (shares <= 0) {
                ++info.invalid_actions;
                continue;
            }
            portfolio_.cash -= cost + fee;
            portfolio_.positions[i] += shares;
            info.fees_paid += fee;
            TradeRecord rec{t_,  date, prices_->tickers[i], TradeOp::Buy, shares,
                            price, fee, portfolio_.cash,     mark_to_market()};
            info.trades.push_back(rec);
            trade_log_.push_back(rec);
        } else if (ops[i] == TradeOp::Sell) {
            const long long shares = static_cast<long long>(
                std::floor(static_cast<double>(portfolio_.positions[i]) * config_.sell_fraction));
            if (shares <= 0) continue;  // nothing to sell: a quiet hold
            const double proceeds = static_cast<double>(shares) * price;
            const double fee = proceeds * config_.fee_rate;
            portfolio_.cash += proceeds - fee;
            portfolio_.positions[i] -= shares;
            info.fees_paid += fee;
            TradeRecord rec{t_,  date, prices_->tickers[i], TradeOp::Sell, shares,
                            price, fee, portfolio_.cash,     mark_to_market()};
            info.trades.push_back(rec);
            trade_log_.push_back(rec);
        }
    }
}

StepResult TradingEnv::step_ops(const std::vector<TradeOp>& ops) {
    if (done_) throw Error("env-misuse", "step() on a finished episode");
    if (ops.size() != prices_->asset_count()) {
        throw Error("dim-mismatch", "expected one op per asset");
    }
    StepResult result;
    const double equity_before = mark_to_market();
    execute(ops, result.info);
    t_ += 1;
    const double equity_after = mark_to_market();
    portfolio_.equity = equity_after;
    result.reward = (equity_after - equity_before) / config_.initial_capital -
                    config_.invalid_penalty * result.info.invalid_actions;
    done_ = t_ >= end_;
    result.done = done_;
    result.next_state = observe();
    return result;
}

StepResult TradingEnv::step(ActionCode action) {
    return step_ops(decode_action(action, prices_->asset_count()));
}

void write_trade_log(const std::vector<TradeRecord>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("missing-file", "cannot write trade log '" + path + "'");
    out << "t,date,asset,op,shares,price,fee,cash_after,equity_after\n";
    for (const TradeRecord& rec : log) {
        out << rec.t << ',' << rec.date.to_string() << ',' << rec.asset << ','
            << (rec.op == TradeOp::Buy ? "buy" : rec.op == TradeOp::Sell ? "sell" : "hold") << ','
            << rec.shares << ',' << format_double(rec.price) << ',' << format_double(rec.fee)
            << ',' << format_double(rec.cash_after) << ',' << format_double(rec.equity_after)
            << '\n';
    }
}

}  // namespace qtmrl
