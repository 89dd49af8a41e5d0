// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is self-contained and prints its runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qtmrl/a2c.hpp"
#include "qtmrl/baselines.hpp"
#include "qtmrl/experiment.hpp"
#include "qtmrl/indicators.hpp"
#include "qtmrl/metrics.hpp"
#include "qtmrl/reference/indicators_ref.hpp"
#include "qtmrl/reference/metrics_ref.hpp"
#include "qtmrl/rng.hpp"
#include "qtmrl/trading_env.hpp"

using namespace qtmrl;
namespace fs = std::filesystem;

namespace {

struct Failure {
    std::string message;
};

void require(bool cond, const std::string& message) {
    if (!cond) throw Failure{message};
}

int g_failures = 0;
int g_criterion = 0;

void run_criterion(const std::string& name, const std::function<void()>& body) {
    ++g_criterion;
    const auto start = std::chrono::steady_clock::now();
    std::string verdict = "PASS";
    std::string detail;
    try {
        body();
    } catch (const Failure& f) {
        verdict = f.message.rfind("SKIP:", 0) == 0 ? "SKIP" : "FAIL";
        detail = f.message;
        if (verdict == "FAIL") ++g_failures;
    } catch (const std::exception& e) {
        verdict = "FAIL";
        detail = std::string("exception: ") + e.what();
        ++g_failures;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", verdict.c_str(), g_criterion, name.c_str(),
                secs, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
}

void skip(const std::string& why) { throw Failure{"SKIP: " + why}; }

// --------------------------------------------------------------------------
// shared synthetic data helpers

std::vector<Date> synth_calendar(std::size_t n, int start_year) {
    std::vector<Date> out;
    int year = start_year, month = 1, day = 1;
    for (std::size_t t = 0; t < n; ++t) {
        out.push_back(Date{year, month, day});
        if (++day > 28) {
            day = 1;
            if (++month > 12) {
                month = 1;
                ++year;
            }
        }
    }
    return out;
}

AssetSeries random_walk_bars(Rng& rng, std::size_t n, const std::string& ticker) {
    AssetSeries s;
    s.ticker = ticker;
    const auto cal = synth_calendar(n, 2015);
    double price = 100.0;
    for (std::size_t t = 0; t < n; ++t) {
        price *= std::exp(0.01 * rng.normal());
        Bar b;
        b.date = cal[t];
        b.open = price * std::exp(0.004 * rng.normal());
        b.close = price;
        b.high = std::max(b.open, b.close) * (1.0 + 0.005 * rng.uniform());
        b.low = std::min(b.open, b.close) * (1.0 - 0.005 * rng.uniform());
        b.volume = 1e5 * (0.5 + rng.uniform());
        s.bars.push_back(b);
    }
    return s;
}

MarketFrame growth_frame(const std::vector<std::string>& tickers,
                         const std::vector<double>& rates, std::size_t days, int start_year,
                         const std::vector<double>& start_prices = {}) {
    MarketFrame frame;
    frame.tickers = tickers;
    frame.calendar = synth_calendar(days, start_year);
    for (std::size_t i = 0; i < tickers.size(); ++i) {
        AssetSeries s;
        s.ticker = tickers[i];
        double price = start_prices.empty() ? 100.0 : start_prices[i];
        for (std::size_t t = 0; t < days; ++t) {
            Bar b;
            b.date = frame.calendar[t];
            b.open = b.high = b.low = b.close = price;
            b.volume = 1e5;
            s.bars.push_back(b);
            price *= rates[i];
        }
        frame.series.push_back(std::move(s));
    }
    return frame;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool series_match(const Series& a, const Series& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t t = 0; t < a.size(); ++t) {
        if (is_defined(a[t]) != is_defined(b[t])) return false;
        if (is_defined(a[t]) && std::abs(a[t] - b[t]) > tol) return false;
    }
    return true;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{"cannot open " + path};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --------------------------------------------------------------------------
// criterion 1: indicator oracle suite

void indicator_oracles() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(1000);
    const double tol = 1e-9;
    for (int series_idx = 0; series_idx < 1000; ++series_idx) {
        AssetSeries bars = random_walk_bars(rng, 300, "W");
        Series close(300);
        for (std::size_t t = 0; t < 300; ++t) close[t] = bars.bars[t].close;

        require(series_match(sma(close, 50), reference::sma(close, 50), tol), "sma oracle");
        require(series_match(ema(close, 26), reference::ema(close, 26), tol), "ema oracle");
        require(series_match(rolling_stddev(close, 20), reference::rolling_stddev(close, 20), tol),
                "stddev oracle");
        require(series_match(atr(bars, 10), reference::atr(bars, 10), tol), "atr oracle");
        require(series_match(rsi(close, 14), reference::rsi(close, 14), tol), "rsi oracle");
        {
            BollingerBands a = bollinger(close, 20, 2.0);
            BollingerBands b = reference::bollinger(close, 20, 2.0);
            require(series_match(a.middle, b.middle, tol) && series_match(a.upper, b.upper, tol) &&
                        series_match(a.lower, b.lower, tol),
                    "bollinger oracle");
        }
        {
            MacdResult a = macd(close, 12, 26, 9);
            MacdResult b = reference::macd(close, 12, 26, 9);
            require(series_match(a.macd_line, b.macd_line, tol) &&
                        series_match(a.signal_line, b.signal_line, tol) &&
                        series_match(a.histogram, b.histogram, tol),
                    "macd oracle");
        }
        {
            HeikenAshi a = heiken_ashi(bars);
            HeikenAshi b = reference::heiken_ashi(bars);
            require(series_match(a.open, b.open, tol) && series_match(a.high, b.high, tol) &&
                        series_match(a.low, b.low, tol) && series_match(a.close, b.close, tol),
                    "heiken-ashi oracle");
        }
        {
            Ichimoku a = ichimoku(bars);
            Ichimoku b = reference::ichimoku(bars);
            require(series_match(a.tenkan, b.tenkan, tol) && series_match(a.kijun, b.kijun, tol) &&
                        series_match(a.senkou_a, b.senkou_a, tol) &&
                        series_match(a.senkou_b, b.senkou_b, tol),
                    "ichimoku oracle");
        }
        {
            SuperTrend a = supertrend(bars);
            SuperTrend b = reference::supertrend(bars);
            require(series_match(a.line, b.line, tol) &&
                        series_match(a.direction, b.direction, 0.0),
                    "supertrend oracle");
        }

        // No look-ahead, exercised on a rotating subsample: perturb one bar
        // and demand bit-identical feature rows strictly before it.
        if (series_idx % 100 == 0) {
            MarketFrame frame;
            frame.tickers = {"W"};
            frame.calendar.reserve(300);
            for (const Bar& b : bars.bars) frame.calendar.push_back(b.date);
            frame.series = {bars};
            FeatureFrame before = build_feature_matrix(frame, default_indicator_set());

            const std::size_t cut = 100 + rng.uniform_int(150);
            MarketFrame bumped = frame;
            bumped.series[0].bars[cut].close *= 1.2;
            bumped.series[0].bars[cut].high *= 1.25;
            bumped.series[0].bars[cut].low *= 1.05;
            bumped.series[0].bars[cut].open *= 1.15;
            FeatureFrame after = build_feature_matrix(bumped, default_indicator_set());
            const std::size_t warmup = 51;
            for (std::size_t t = 0; t + warmup < cut; ++t) {
                for (std::size_t f = 0; f < before.feature_count(); ++f) {
                    require(before.value(t, 0, f) == after.value(t, 0, f),
                            "look-ahead leak at feature " + before.feature_names[f]);
                }
            }
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 60.0, "runtime budget exceeded: " + std::to_string(secs) + "s");
}

// --------------------------------------------------------------------------
// criterion 2: environment accounting fuzz

void environment_fuzz() {
    const auto start = std::chrono::steady_clock::now();
    Rng master(2000);
    long long steps = 0;
    while (steps < 100000) {
        EnvConfig cfg;
        cfg.window = 1;
        cfg.episode_length = 1000000;
        cfg.fee_rate = master.uniform() * 0.01;
        cfg.buy_fraction = 0.05 + master.uniform() * 0.9;
        cfg.sell_fraction = 0.05 + master.uniform() * 0.9;
        cfg.initial_capital = 200.0 + master.uniform() * 50000.0;
        cfg.invalid_penalty = master.uniform() * 0.01;
        const std::size_t assets = 1 + master.uniform_int(4);
        const std::size_t days = 80;

        MarketFrame frame;
        for (std::size_t i = 0; i < assets; ++i) frame.tickers.push_back("T" + std::to_string(i));
        frame.calendar = synth_calendar(days, 2015);
        for (std::size_t i = 0; i < assets; ++i) {
            AssetSeries s;
            s.ticker = frame.tickers[i];
            double price = 1.0 + master.uniform() * 400.0;
            for (std::size_t t = 0; t < days; ++t) {
                price *= std::exp(0.03 * master.normal());
                Bar b;
                b.date = frame.calendar[t];
                b.open = b.high = b.low = b.close = price;
                b.volume = 100.0;
                s.bars.push_back(b);
            }
            frame.series.push_back(std::move(s));
        }

        TradingEnv env(cfg, &frame, nullptr);
        env.reset(0);
        const double start_equity = env.equity();
        double reward_sum = 0.0, penalty_sum = 0.0, total_fees = 0.0;
        while (!env.done()) {
            const std::uint32_t code =
                static_cast<std::uint32_t>(master.uniform_int(1ull << assets));
            StepResult r = env.step(ActionCode{code});
            ++steps;
            require(env.portfolio().cash >= 0.0, "cash went negative");
            for (long long pos : env.portfolio().positions) {
                require(pos >= 0, "position went negative");
            }
            double value = env.portfolio().cash;
            for (std::size_t i = 0; i < assets; ++i) {
                value += static_cast<double>(env.portfolio().positions[i]) * env.close_price(i);
            }
            require(std::abs(env.equity() - value) < 1e-9 * std::max(1.0, env.equity()),
                    "accounting identity violated");
            reward_sum += r.reward;
            penalty_sum += cfg.invalid_penalty * r.info.invalid_actions;
            total_fees += r.info.fees_paid;
        }
        require(near((reward_sum + penalty_sum) * cfg.initial_capital,
                     env.equity() - start_equity, 1e-6 * std::max(1.0, env.equity())),
                "reward telescoping violated");

        // Fee monotonicity, stated so it survives integer-share sizing: a
        // hand-driven zero-fee replay of the exact executed trades must end
        // at the fee run's equity plus every fee paid, hence never below it.
        // (Comparing a fee run against an independently re-decided zero-fee
        // run is not monotone: a cheaper cash path can cross a floor(budget/
        // price) boundary and end up holding fewer shares of a falling
        // asset.)
        {
            double cash = cfg.initial_capital;
            std::vector<long long> pos(assets, 0);
            for (const TradeRecord& rec : env.trade_log()) {
                const std::size_t i = frame.ticker_index(rec.asset);
                if (rec.op == TradeOp::Buy) {
                    cash -= static_cast<double>(rec.shares) * rec.price;
                    pos[i] += rec.shares;
                } else {
                    cash += static_cast<double>(rec.shares) * rec.price;
                    pos[i] -= rec.shares;
                }
            }
            double replay_equity = cash;
            for (std::size_t i = 0; i < assets; ++i) {
                replay_equity +=
                    static_cast<double>(pos[i]) * frame.series[i].bars[env.current_index()].close;
            }
            const double tol = 1e-9 * std::max(1.0, std::abs(replay_equity));
            require(near(replay_equity, env.equity() + total_fees, tol),
                    "zero-fee replay does not recover the fees paid");
            require(env.equity() <= replay_equity + tol, "fees increased final equity");
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 60.0, "runtime budget exceeded: " + std::to_string(secs) + "s");
}

// --------------------------------------------------------------------------
// criterion 3: worked environment examples

void worked_examples() {
    {
        MarketFrame frame = growth_frame({"AAA"}, {1.0}, 10, 2020);
        EnvConfig cfg;
        cfg.window = 1;
        cfg.episode_length = 100;
        TradingEnv env(cfg, &frame, nullptr);
        env.reset(0);
        StepResult r = env.step_ops({TradeOp::Buy});
        require(r.info.trades.size() == 1, "buy did not execute");
        require(r.info.trades[0].shares == 20, "expected 20 shares");
        require(near(r.info.trades[0].fee, 1.0, 1e-9), "expected fee 1.00");
        require(near(env.portfolio().cash, 7999.0, 1e-9), "expected cash 7999.00");
    }
    {
        MarketFrame frame = growth_frame({"AAA"}, {1.0}, 10, 2020);
        for (auto& bar : frame.series[0].bars) bar.open = bar.high = bar.low = bar.close = 10.0;
        EnvConfig cfg;
        cfg.window = 1;
        cfg.episode_length = 100;
        cfg.buy_fraction = 0.05;  // one buy yields exactly 50 shares at 10
        TradingEnv env(cfg, &frame, nullptr);
        env.reset(0);
        env.step_ops({TradeOp::Buy});
        require(env.portfolio().positions[0] == 50, "fixture expected 50 shares");
        const double cash_before = env.portfolio().cash;
        StepResult r = env.step_ops({TradeOp::Sell});
        require(r.info.trades.size() == 1 && r.info.trades[0].shares == 25, "expected 25 sold");
        require(near(r.info.trades[0].fee, 0.125, 1e-9), "expected fee 0.125");
        require(near(env.portfolio().cash, cash_before + 249.875, 1e-9),
                "expected proceeds 249.875");
    }
}

// --------------------------------------------------------------------------
// criterion 4: gradient correctness of the total loss

void gradient_correctness() {
    const auto start = std::chrono::steady_clock::now();
    MarketFrame prices = growth_frame({"GA", "GB"}, {1.003, 0.998}, 90, 2019);
    {  // wiggle so features are not constant
        Rng wiggle(77);
        for (auto& s : prices.series) {
            for (auto& b : s.bars) {
                const double f = std::exp(0.004 * wiggle.normal());
                b.open *= f;
                b.high = std::max(b.open, b.close * f) * 1.001;
                b.low = std::min(b.open, b.close * f) * 0.999;
                b.close *= f;
            }
        }
    }
    FeatureFrame raw = build_feature_matrix(prices, {});
    FeatureFrame features = zscore(raw, compute_norm_stats(raw));

    A2CConfig cfg;
    cfg.value_coef = 0.5;
    cfg.entropy_coef = 0.05;
    EnvConfig env_cfg;
    env_cfg.window = 3;
    env_cfg.episode_length = 50;

    Rng rng(4000);
    double worst = 0.0;
    for (int batch = 0; batch < 100; ++batch) {
        TradingEnv env(env_cfg, &prices, &features);
        env.reset(2 + static_cast<std::size_t>(rng.uniform_int(30)));
        const std::size_t in_dim = input_size(env);
        MlpParams actor = make_mlp({in_dim, 6, 4}, rng);
        MlpParams critic = make_mlp({in_dim, 6, 1}, rng);

        Trajectory traj = collect_rollout(env, actor, critic, 10, rng);
        const std::vector<double> returns = compute_returns(traj, cfg.gamma);
        const std::vector<double> advantages = compute_advantages(returns, traj.values);

        MlpGrads ga = MlpGrads::zeros_like(actor);
        MlpGrads gc = MlpGrads::zeros_like(critic);
        accumulate_gradients(actor, critic, traj, returns, advantages, cfg, ga, gc);

        auto frozen_loss = [&]() {
            const std::size_t m = traj.size();
            double policy = 0.0, value = 0.0, ent = 0.0;
            for (std::size_t t = 0; t < m; ++t) {
                const std::vector<double> probs = softmax(forward(actor, traj.inputs[t]));
                policy -= std::log(probs[traj.actions[t]]) * advantages[t];
                const double v = forward(critic, traj.inputs[t])[0];
                value += (v - returns[t]) * (v - returns[t]);
                ent -= entropy(probs);
            }
            return policy / m + cfg.value_coef * value / m + cfg.entropy_coef * ent / m;
        };

        auto check = [&](MlpParams& params, const MlpGrads& grads) {
            std::vector<double*> view;
            for (auto& layer : params.layers) {
                for (double& w : layer.weights.data) view.push_back(&w);
                for (double& b : layer.bias) view.push_back(&b);
            }
            std::vector<double> flat;
            for (std::size_t l = 0; l < grads.weights.size(); ++l) {
                flat.insert(flat.end(), grads.weights[l].data.begin(),
                            grads.weights[l].data.end());
                flat.insert(flat.end(), grads.bias[l].begin(), grads.bias[l].end());
            }
            const double h = 1e-5;
            for (std::size_t k = 0; k < view.size(); k += 5) {
                const double saved = *view[k];
                *view[k] = saved + h;
                const double up = frozen_loss();
                *view[k] = saved - h;
                const double down = frozen_loss();
                *view[k] = saved;
                const double fd = (up - down) / (2.0 * h);
                const double rel =
                    std::abs(flat[k] - fd) / std::max({std::abs(flat[k]), std::abs(fd), 1e-6});
                worst = std::max(worst, rel);
            }
        };
        check(actor, ga);
        check(critic, gc);
    }
    require(worst < 1e-4, "max relative gradient error " + std::to_string(worst));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 120.0, "runtime budget exceeded: " + std::to_string(secs) + "s");
}

// --------------------------------------------------------------------------
// criterion 5: return recursion

void return_recursion() {
    {
        Trajectory traj;
        traj.rewards = {1.0, 1.0, 1.0};
        traj.terminal = true;
        const std::vector<double> g = compute_returns(traj, 0.5);
        require(g[0] == 1.75 && g[1] == 1.5 && g[2] == 1.0, "worked example mismatch");
    }
    Rng rng(5000);
    for (int trial = 0; trial < 1000; ++trial) {
        Trajectory traj;
        const std::size_t len = 1 + rng.uniform_int(200);
        for (std::size_t t = 0; t < len; ++t) traj.rewards.push_back(rng.normal() * 2.0);
        traj.terminal = rng.uniform() < 0.5;
        traj.bootstrap_value = traj.terminal ? 0.0 : rng.normal() * 5.0;
        const double gamma = rng.uniform();
        const std::vector<double> fast = compute_returns(traj, gamma);
        const std::vector<double> slow = reference::discounted_returns(
            traj.rewards, gamma, traj.terminal, traj.bootstrap_value);
        for (std::size_t t = 0; t < len; ++t) {
            require(near(fast[t], slow[t], 1e-10), "recursion deviates from direct sum");
        }
    }
}

// --------------------------------------------------------------------------
// criterion 6: learning sanity

void learning_sanity() {
    const auto start = std::chrono::steady_clock::now();
    // 560 synthetic days: the first 420 train, the last 140 test. Start
    // prices keep one share affordable under the 20%-of-cash buy sizing for
    // the whole horizon (1.01^560 from a $100 start would not be).
    MarketFrame prices = growth_frame({"UP", "DOWN"}, {1.01, 0.99}, 560, 2015, {1.0, 5000.0});
    FeatureFrame raw = build_feature_matrix(prices, {});

    const std::size_t train_len = 420;
    FeatureFrame train_features = raw.slice(0, train_len);
    const NormStats stats = compute_norm_stats(train_features);
    FeatureFrame train_norm = zscore(train_features, stats);
    MarketFrame train_prices = prices.slice(0, train_len);

    EnvConfig env_cfg;  // 10k capital, 5bp fee, W = 20, 20%/50% sizing
    TradingEnv env(env_cfg, &train_prices, &train_norm);

    A2CConfig cfg;  // gamma 0.96, rollout 50, c_v 0.5
    cfg.total_timesteps = 50000;
    cfg.seed = 42;
    cfg.learning_rate = 1e-3;  // desk-scale step size for the 50k budget
    cfg.entropy_coef = 0.01;
    TrainResult result = train(env, cfg);
    require(!result.aborted, "training aborted: " + result.abort_reason);
    require(!result.log.empty(), "no updates happened");

    const double initial_entropy = result.log.front().entropy;
    const double final_entropy = result.log.back().entropy;
    require(final_entropy < initial_entropy,
            "entropy did not decrease (" + std::to_string(initial_entropy) + " -> " +
                std::to_string(final_entropy) + ")");

    // Greedy test run over the held-out 140 days (window reaches back).
    const std::size_t w = static_cast<std::size_t>(env_cfg.window);
    FeatureFrame test_norm = zscore(raw.slice(train_len - (w - 1), 560), stats);
    MarketFrame test_prices = prices.slice(train_len - (w - 1), 560);
    EnvConfig test_cfg = env_cfg;
    test_cfg.episode_length = 1000000;
    TradingEnv test_env(test_cfg, &test_prices, &test_norm);
    test_env.reset(w - 1);
    while (!test_env.done()) {
        const MarketState s = test_env.observe();
        const std::vector<double> logits =
            forward(result.actor, state_to_input(s, test_env));
        std::size_t best = 0;
        for (std::size_t a = 1; a < logits.size(); ++a) {
            if (logits[a] > logits[best]) best = a;
        }
        test_env.step(ActionCode{static_cast<std::uint32_t>(best)});
    }
    const double greedy_return =
        100.0 * (test_env.equity() - env_cfg.initial_capital) / env_cfg.initial_capital;

    // Random strategy mean over seeds 42..46 on the same test span.
    MarketFrame bt_prices = prices;  // full history for warmups
    double random_mean = 0.0;
    for (std::uint64_t seed = 42; seed <= 46; ++seed) {
        SignalMatrix signals =
            random_signals(bt_prices.length(), bt_prices.asset_count(), RandomStrategyProbs{}, seed);
        BaselineRun run = run_rule_based("Random Strategy", env_cfg, bt_prices, signals, train_len);
        double per_asset = 0.0;
        for (const auto& curve : run.equity) {
            per_asset += 100.0 * (curve.back() - curve.front()) / curve.front();
        }
        random_mean += per_asset / static_cast<double>(run.equity.size());
    }
    random_mean /= 5.0;

    require(greedy_return > random_mean,
            "greedy return " + std::to_string(greedy_return) + "% did not beat random mean " +
                std::to_string(random_mean) + "%");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(secs < 600.0, "runtime budget exceeded: " + std::to_string(secs) + "s");
}

// --------------------------------------------------------------------------
// criterion 7: metrics oracles

void metrics_oracles() {
    {
        EquityCurve curve;
        curve.values = {100, 120, 90, 110};
        curve.dates = synth_calendar(4, 2020);
        require(near(max_drawdown(curve), -25.0, 1e-12), "worked drawdown mismatch");
    }
    Rng rng(7000);
    for (int trial = 0; trial < 1000; ++trial) {
        EquityCurve curve;
        const std::size_t len = 2 + rng.uniform_int(499);
        double price = 50.0 + rng.uniform() * 100.0;
        for (std::size_t t = 0; t < len; ++t) {
            price *= std::exp(0.03 * rng.normal());
            curve.values.push_back(price);
        }
        curve.dates = synth_calendar(len, 2020);
        require(near(max_drawdown(curve), reference::max_drawdown(curve), 1e-12),
                "running-peak drawdown deviates from the pairwise oracle");
    }
    {
        Rng mc(1234);
        EquityCurve curve;
        curve.values = {10000.0};
        for (int t = 0; t < 10000; ++t) {
            curve.values.push_back(curve.values.back() * (1.0 + 0.001 + 0.01 * mc.normal()));
        }
        curve.dates = synth_calendar(curve.values.size(), 1990);
        const double sr = sharpe(curve);
        require(near(sr, 0.1 * std::sqrt(252.0), 0.15),
                "sharpe Monte-Carlo check out of band: " + std::to_string(sr));
    }
}

// --------------------------------------------------------------------------
// criterion 8: determinism of the full pipeline

void pipeline_determinism() {
    const fs::path base = fs::temp_directory_path() / "qtmrl_acceptance_det";
    fs::remove_all(base);
    fs::create_directories(base);

    // Synthetic market CSV shared by both runs.
    Rng rng(8000);
    MarketFrame market;
    market.tickers = {"AAA", "BBB"};
    market.calendar = synth_calendar(420, 2018);
    for (const auto& ticker : market.tickers) {
        market.series.push_back(random_walk_bars(rng, 420, ticker));
        market.series.back().ticker = ticker;
        for (std::size_t t = 0; t < 420; ++t) {
            market.series.back().bars[t].date = market.calendar[t];
        }
    }
    const std::string csv = (base / "market.csv").string();
    {
        std::ofstream out(csv);
        out << "date,ticker,open,high,low,close,volume\n";
        for (std::size_t i = 0; i < market.asset_count(); ++i) {
            for (const Bar& b : market.series[i].bars) {
                char line[256];
                std::snprintf(line, sizeof(line), "%s,%s,%.10f,%.10f,%.10f,%.10f,%.1f\n",
                              b.date.to_string().c_str(), market.tickers[i].c_str(), b.open,
                              b.high, b.low, b.close, b.volume);
                out << line;
            }
        }
    }

    auto run_pipeline = [&](const std::string& out_dir) {
        const std::string text = R"({
          "source": ")" + csv + R"(",
          "tickers": ["AAA", "BBB"],
          "train_range": ["2018-01-01", "2018-12-28"],
          "test_range": ["2019-01-01", "2019-03-28"],
          "indicators": "none",
          "env": {"window": 5, "episode_length": 60},
          "a2c": {"total_timesteps": 2000, "rollout": 20, "hidden": [16],
                  "learning_rate": 0.0005, "seed": 42},
          "seeds": [42],
          "out_dir": ")" + out_dir + R"("
        })";
        ExperimentConfig cfg = config_from_json_text(text);
        cmd_ingest(cfg);
        cmd_features(cfg);
        TrainOutcome trained = cmd_train(cfg, 42);
        cmd_backtest(cfg, "a2c", trained.checkpoint_path);
        cmd_backtest(cfg, "random", std::nullopt);
        cmd_report(out_dir);
        return trained;
    };

    const std::string dir_a = (base / "run_a").string();
    const std::string dir_b = (base / "run_b").string();
    run_pipeline(dir_a);
    run_pipeline(dir_b);

    const std::vector<std::string> files = {
        "/training_log_s42.csv",     "/trades_a2c_s42.csv",       "/trades_random_s42.csv",
        "/metrics_a2c_s42.json",     "/metrics_random_s42.json",  "/backtest_a2c.csv",
        "/backtest_random.csv",      "/report/comparison.csv",    "/checkpoint_s42_final.json",
    };
    for (const auto& f : files) {
        require(slurp(dir_a + f) == slurp(dir_b + f), "outputs differ: " + f);
    }
    fs::remove_all(base);
}

// --------------------------------------------------------------------------
// criterion 9 (optional): directional reproduction on the real dataset

void directional_reproduction() {
    std::string dataset;
    if (const char* env_path = std::getenv("QTMRL_SP500_CSV")) dataset = env_path;
    if (dataset.empty() && fs::exists("data/sp500.csv")) dataset = "data/sp500.csv";
    if (dataset.empty()) {
        skip("S&P 500 daily dataset not present (set QTMRL_SP500_CSV to enable)");
    }

    const fs::path base = fs::temp_directory_path() / "qtmrl_acceptance_real";
    fs::remove_all(base);
    fs::create_directories(base);

    auto backtest_return = [&](const std::string& strategy, const std::string& year_dir,
                               const std::string& test_from, const std::string& test_to,
                               const std::vector<std::uint64_t>& seeds) {
        const std::string out_dir = (base / year_dir).string();
        std::string seeds_json = "[";
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            seeds_json += (k ? "," : "") + std::to_string(seeds[k]);
        }
        seeds_json += "]";
        const std::string text = R"({
          "source": ")" + dataset + R"(",
          "tickers": ["CCL","RCL","AAL","UAL","DAL","MRO","OXY","WYNN","LVS",
                      "AAPL","AXP","BAC","CVX","GOOGL","JNJ","MSFT","NVDA"],
          "train_range": ["2010-01-01", "2019-12-31"],
          "test_range": [")" + test_from + R"(", ")" + test_to + R"("],
          "indicators": "none",
          "seeds": )" + seeds_json + R"(,
          "out_dir": ")" + out_dir + R"("
        })";
        ExperimentConfig cfg = config_from_json_text(text);
        if (!fs::exists(out_dir + "/ingest_manifest.json")) cmd_ingest(cfg);
        cmd_backtest(cfg, strategy, std::nullopt);
        double mean = 0.0;
        for (std::uint64_t seed : seeds) {
            MetricsReport r = read_report_json(out_dir + "/metrics_" + strategy + "_s" +
                                               std::to_string(seed) + ".json");
            mean += r.portfolio_mean.return_rate;
        }
        return mean / static_cast<double>(seeds.size());
    };

    try {
        // 2021: tracking proxy and short MAs positive; MA30 underperforms MA10.
        const double index_r = backtest_return("index", "y2021", "2021-01-04", "2021-12-30", {42});
        const double ma10_r = backtest_return("ma10", "y2021", "2021-01-04", "2021-12-30", {42});
        const double ma20_r = backtest_return("ma20", "y2021", "2021-01-04", "2021-12-30", {42});
        const double ma30_r = backtest_return("ma30", "y2021", "2021-01-04", "2021-12-30", {42});
        require(index_r > 0.0, "2021 tracking return not positive");
        require(ma10_r > 0.0, "2021 MA10 return not positive");
        require(ma20_r > 0.0, "2021 MA20 return not positive");
        require(ma30_r < ma10_r, "2021 MA30 did not underperform MA10");

        // 2020: random strategy near zero across seeds 42..46.
        const double random_r = backtest_return("random", "y2020", "2020-01-03", "2020-12-30",
                                                {42, 43, 44, 45, 46});
        require(std::abs(random_r) <= 10.0,
                "2020 random mean return outside +/-10pp: " + std::to_string(random_r));
    } catch (const Error& e) {
        if (e.error_class() == "unknown-ticker") {
            skip(std::string("dataset lacks a required ticker: ") + e.what());
        }
        throw;
    }
    fs::remove_all(base);
}

}  // namespace

int main() {
    run_criterion("indicator oracle suite (1000 random walks, 1e-9, no look-ahead)",
                  indicator_oracles);
    run_criterion("environment accounting fuzz (1e5 steps)", environment_fuzz);
    run_criterion("worked environment examples (buy 20 @ 100, sell 25 @ 10)", worked_examples);
    run_criterion("gradient correctness (100 frozen minibatches, rel err < 1e-4)",
                  gradient_correctness);
    run_criterion("return recursion vs direct discounted sums", return_recursion);
    run_criterion("learning sanity on a two-asset drift market", learning_sanity);
    run_criterion("metrics oracles (drawdown brute force, sharpe Monte Carlo)", metrics_oracles);
    run_criterion("pipeline determinism (byte-identical artifacts)", pipeline_determinism);
    run_criterion("directional reproduction on the S&P 500 dataset (optional)",
                  directional_reproduction);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
