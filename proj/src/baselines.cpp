#include "qtmrl/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "qtmrl/indicators.hpp"
#include "qtmrl/rng.hpp"

namespace qtmrl {

SignalMatrix random_signals(std::size_t days, std::size_t assets,
                            const RandomStrategyProbs& probs, std::uint64_t seed) {
    const double total = probs.buy + probs.sell + probs.hold;
    if (probs.buy < 0.0 || probs.sell < 0.0 || probs.hold < 0.0 ||
        std::abs(total - 1.0) > 1e-9) {
        throw Error("bad-config", "random strategy probabilities must be nonnegative and sum to 1");
    }
    SignalMatrix m;
    m.days = days;
    m.assets = assets;
    m.ops.resize(days * assets, TradeOp::Hold);
    Rng rng(seed);
    const double cut_buy = probs.buy;
    const double cut_sell = probs.buy + probs.sell;
    // t-major draw order: the signal table is independent of how accounts
    // are processed later.
    for (std::size_t t = 0; t < days; ++t) {
        for (std::size_t i = 0; i < assets; ++i) {
            const double u = rng.uniform();
            m.at(t, i) = u < cut_buy ? TradeOp::Buy : u < cut_sell ? TradeOp::Sell : TradeOp::Hold;
        }
    }
    return m;
}

std::vector<TradeOp> ma_crossover(const Series& close, int period) {
    if (period < 2) throw Error("bad-config", "crossover period must be >= 2");
    if (close.size() < static_cast<std::size_t>(period) + 1) {
        throw Error("short-series", "crossover needs at least period + 1 closes");
    }
    std::vector<TradeOp> ops(close.size(), TradeOp::Hold);
    const Series ma = sma(close, period);

    // Side state machine: a buy fires on entering the above-MA side, a sell
    // on entering the below side, so equal-touch days never duplicate a
    // signal without a true opposite cross in between.
    enum class Side { Flat, Above, Below };
    Side side = Side::Flat;
    for (std::size_t t = static_cast<std::size_t>(period); t < close.size(); ++t) {
        if (close[t] > ma[t]) {
            if (side != Side::Above) ops[t] = TradeOp::Buy;
            side = Side::Above;
        } else if (close[t] < ma[t]) {
            if (side != Side::Below) ops[t] = TradeOp::Sell;
            side = Side::Below;
        }
    }
    return ops;
}

std::vector<std::size_t> rebalance_indices(const std::vector<Date>& calendar) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < calendar.size(); ++i) {
        const int m = calendar[i].month;
        if (m != 1 && m != 4 && m != 7 && m != 10) continue;
        const bool month_start = i == 0 || calendar[i - 1].month != m ||
                                 calendar[i - 1].year != calendar[i].year;
        if (month_start) out.push_back(i);
    }
    if (!calendar.empty() && (out.empty() || out.back() != calendar.size() - 1)) {
        out.push_back(calendar.size() - 1);  // year-end style final rebalance
    }
    return out;
}

double ArModel::predict_diff(const std::vector<double>& recent_diffs) const {
    if (recent_diffs.size() < static_cast<std::size_t>(p)) {
        throw Error("short-series", "need " + std::to_string(p) + " recent diffs to forecast");
    }
    double pred = intercept;
    for (int j = 0; j < p; ++j) pred += coefficients[j] * recent_diffs[j];
    return pred;
}

namespace {

// Solves the (p+1)x(p+1) system A x = b in place; also inverts A for the
// coefficient covariance. Throws on a vanishing pivot.
void solve_with_inverse(std::vector<std::vector<double>>& a, std::vector<double>& b,
                        std::vector<std::vector<double>>& inv) {
    const std::size_t n = a.size();
    inv.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;

    double scale = 0.0;
    for (const auto& row : a) {
        for (double v : row) scale = std::max(scale, std::abs(v));
    }
    const double tiny = std::max(scale, 1.0) * 1e-12;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < tiny) {
            throw Error("singular-fit",
                        "design matrix is singular; try a longer fitting window");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        b[col] /= d;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
            b[r] -= f * b[col];
        }
    }
}

}  // namespace

ArModel fit_ar(const Series& diff_close, int p) {
    if (p < 1) throw Error("bad-config", "AR order must be >= 1");
    const std::size_t n = diff_close.size();
    if (n < static_cast<std::size_t>(10 * p)) {
        throw Error("short-series", "AR fit needs at least " + std::to_string(10 * p) + " diffs");
    }

    ArModel model;
    model.p = p;

    bool all_zero = true;
    for (double d : diff_close) {
        if (d != 0.0) {
            all_zero = false;
            break;
        }
    }
    if (all_zero) {
        // Constant prices: the zero model is exact.
        model.coefficients.assign(p, 0.0);
        model.standard_errors.assign(p + 1, 0.0);
        return model;
    }

    const std::size_t dim = static_cast<std::size_t>(p) + 1;
    const std::size_t rows = n - static_cast<std::size_t>(p);
    std::vector<std::vector<double>> xtx(dim, std::vector<double>(dim, 0.0));
    std::vector<double> xty(dim, 0.0);
    auto regressor = [&](std::size_t t, std::size_t j) {
        return j < static_cast<std::size_t>(p) ? diff_close[t - 1 - j] : 1.0;
    };
    for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
        for (std::size_t j = 0; j < dim; ++j) {
            xty[j] += regressor(t, j) * diff_close[t];
            for (std::size_t k = j; k < dim; ++k) {
                xtx[j][k] += regressor(t, j) * regressor(t, k);
            }
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t k = 0; k < j; ++k) xtx[j][k] = xtx[k][j];
    }

    std::vector<std::vector<double>> inv;
    std::vector<double> beta = xty;
    std::vector<std::vector<double>> a = xtx;
    solve_with_inverse(a, beta, inv);

    model.coefficients.assign(beta.begin(), beta.begin() + p);
    model.intercept = beta[p];
    for (double c : model.coefficients) {
        if (!std::isfinite(c)) throw Error("singular-fit", "AR coefficients are not finite");
    }

    double rss = 0.0;
    for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
        double fitted = model.intercept;
        for (int j = 0; j < p; ++j) fitted += model.coefficients[j] * diff_close[t - 1 - j];
        rss += (diff_close[t] - fitted) * (diff_close[t] - fitted);
    }
    const double dof = static_cast<double>(rows) - static_cast<double>(dim);
    model.residual_variance = dof > 0.0 ? rss / dof : 0.0;
    model.standard_errors.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        model.standard_errors[j] = std::sqrt(std::max(0.0, model.residual_variance * inv[j][j]));
    }
    return model;
}

TradeOp arima_signal(const ArModel& model, const Series& recent_closes, double threshold) {
    if (recent_closes.size() < static_cast<std::size_t>(model.p) + 1) {
        throw Error("short-series", "need at least p + 1 recent closes");
    }
    const std::size_t n = recent_closes.size();
    std::vector<double> diffs(model.p);
    for (int j = 0; j < model.p; ++j) {
        diffs[j] = recent_closes[n - 1 - j] - recent_closes[n - 2 - j];
    }
    const double predicted = model.predict_diff(diffs);
    const double current = recent_closes[n - 1];
    const double relative = predicted / current;
    if (relative > threshold) return TradeOp::Buy;
    if (relative < -threshold) return TradeOp::Sell;
    return TradeOp::Hold;
}

SignalMatrix arima_signals(const MarketFrame& frame, const ArimaStrategyConfig& config) {
    const std::size_t n = frame.length();
    const std::size_t assets = frame.asset_count();
    SignalMatrix m;
    m.days = n;
    m.assets = assets;
    m.ops.resize(n * assets, TradeOp::Hold);

    const std::size_t min_history = static_cast<std::size_t>(10 * config.p);
    for (std::size_t i = 0; i < assets; ++i) {
        Series close(n);
        for (std::size_t t = 0; t < n; ++t) close[t] = frame.series[i].bars[t].close;
        Series diffs(n, 0.0);
        for (std::size_t t = 1; t < n; ++t) diffs[t] = close[t] - close[t - 1];

        ArModel model;
        bool fitted = false;
        std::size_t last_fit = 0;
        for (std::size_t t = min_history; t < n; ++t) {
            if (!fitted || t - last_fit >= static_cast<std::size_t>(config.refit_interval)) {
                const std::size_t avail = t;  // diffs[1..t]
                const std::size_t window =
                    std::min<std::size_t>(avail, static_cast<std::size_t>(config.fit_window));
                Series fit_slice(diffs.begin() + (t + 1 - window), diffs.begin() + (t + 1));
                model = fit_ar(fit_slice, config.p);
                fitted = true;
                last_fit = t;
            }
            Series recent(close.begin() + (t - config.p), close.begin() + (t + 1));
            m.at(t, i) = arima_signal(model, recent, config.threshold);
        }
    }
    return m;
}

namespace {

MarketFrame single_asset_frame(const MarketFrame& frame, std::size_t asset) {
    MarketFrame out;
    out.tickers = {frame.tickers[asset]};
    out.calendar = frame.calendar;
    out.series = {frame.series[asset]};
    return out;
}

EnvConfig accounting_only(const EnvConfig& config, std::size_t frame_length) {
    EnvConfig c = config;
    c.window = 1;  // no observation window for signal-driven accounts
    c.episode_length = static_cast<int>(frame_length);
    return c;
}

}  // namespace

BaselineRun run_rule_based(const std::string& strategy_name, const EnvConfig& config,
                           const MarketFrame& frame, const SignalMatrix& signals,
                           std::size_t start_index) {
    if (signals.days != frame.length() || signals.assets != frame.asset_count()) {
        throw Error("dim-mismatch", "signal matrix does not match the frame");
    }
    if (start_index + 1 >= frame.length()) {
        throw Error("short-series", "start index leaves no step to trade");
    }

    BaselineRun run;
    run.strategy = strategy_name;
    for (std::size_t i = 0; i < frame.asset_count(); ++i) {
        MarketFrame sub = single_asset_frame(frame, i);
        TradingEnv env(accounting_only(config, sub.length()), &sub, nullptr);
        env.reset(start_index);

        std::vector<Date> dates = {sub.calendar[start_index]};
        std::vector<double> equity = {env.equity()};
        while (!env.done()) {
            env.step_ops({signals.at(env.current_index(), i)});
            dates.push_back(sub.calendar[env.current_index()]);
            equity.push_back(env.equity());
        }
        run.account_names.push_back(frame.tickers[i]);
        run.dates.push_back(std::move(dates));
        run.equity.push_back(std::move(equity));
        run.trades.insert(run.trades.end(), env.trade_log().begin(), env.trade_log().end());
    }
    return run;
}

BaselineRun run_index_tracking(const EnvConfig& config, const MarketFrame& frame,
                               std::size_t start_index) {
    if (frame.asset_count() == 0) throw Error("empty-series", "no assets to track");
    if (start_index + 1 >= frame.length()) {
        throw Error("short-series", "start index leaves no step to trade");
    }
    TradingEnv env(accounting_only(config, frame.length()), &frame, nullptr);
    env.reset(start_index);

    std::vector<std::size_t> marks = rebalance_indices(frame.calendar);
    std::vector<bool> is_rebalance(frame.length(), false);
    for (std::size_t idx : marks) is_rebalance[idx] = true;

    const std::size_t n = frame.asset_count();
    std::vector<Date> dates = {frame.calendar[start_index]};
    std::vector<double> equity = {env.equity()};
    while (!env.done()) {
        const std::size_t t = env.current_index();
        std::vector<TradeOp> ops(n, TradeOp::Hold);
        if (is_rebalance[t]) {
            const auto& positions = env.portfolio().positions;
            bool flat = true;
            double total_value = 0.0;
            std::vector<double> values(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                values[i] = static_cast<double>(positions[i]) * env.close_price(i);
                total_value += values[i];
                if (positions[i] != 0) flat = false;
            }
            if (flat) {
                ops.assign(n, TradeOp::Buy);  // initiate equal stakes
            } else {
                const double target = total_value / static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i) {
                    if (values[i] > target * (1.0 + 1e-9)) {
                        ops[i] = TradeOp::Sell;
                    } else if (values[i] < target * (1.0 - 1e-9)) {
                        ops[i] = TradeOp::Buy;
                    }
                }
            }
        }
        env.step_ops(ops);
        dates.push_back(frame.calendar[env.current_index()]);
        equity.push_back(env.equity());
    }

    BaselineRun run;
    run.strategy = "Dow Jones Tracking Strategy";
    run.account_names = {"PORTFOLIO"};
    run.dates.push_back(std::move(dates));
    run.equity.push_back(std::move(equity));
    run.trades = env.trade_log();
    return run;
}

}  // namespace qtmrl
